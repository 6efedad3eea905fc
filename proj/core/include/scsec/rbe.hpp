#pragma once

// Registration-based encryption with the contract as Key Curator.
//
// Registrations (id, pk) accumulate in a forest of full Merkle trees whose
// depths stay strictly decreasing, like the binary digits of the user count.
// Leaves hash with hk_1; a node at level j hashes its two children with
// hk_j. The public parameters are the hash keys plus (root, depth) per tree.
//
// Encryption hands out one program per tree. The programs are plain objects
// evaluated honestly; nothing in them is hidden.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scsec/bytes.hpp"
#include "scsec/contract.hpp"
#include "scsec/drbg.hpp"
#include "scsec/hash.hpp"
#include "scsec/keys.hpp"

namespace scsec::rbe {

using prim::HashKey;

inline constexpr std::uint32_t kLambda = 128;

struct Crs {
    Bytes tag;  // 32 random bytes, used only as a domain-separation value

    Bytes encode() const;
    static Crs decode(ByteView bytes);
    bool operator==(const Crs&) const = default;
};

struct RootInfo {
    Digest rt;
    std::uint32_t depth = 0;

    bool operator==(const RootInfo&) const = default;
};

struct PublicParams {
    std::vector<HashKey> hks;     // hk_1 .. hk_lambda
    std::vector<RootInfo> roots;  // strictly decreasing depths

    const HashKey& hk(std::uint32_t level) const { return hks.at(level - 1); }
    bool has_root(const Digest& rt) const;

    Bytes encode() const;
    /// Throws CodecError.
    static PublicParams decode(ByteView bytes);
    bool operator==(const PublicParams&) const = default;
};

struct Registration {
    std::string id;  // compared as exact bytes
    Bytes pk;

    /// Length-prefixed (id, pk).
    Bytes encode() const;
    static Registration decode(ByteView bytes);
    bool operator==(const Registration&) const = default;
};

Digest leaf_hash(const HashKey& hk1, const Registration& r);
/// Hash(hk, left || right) over the two fixed-width digests.
Digest node_hash(const HashKey& hk, const Digest& left, const Digest& right);

/// Appends a depth-1 root for r and merges equal-depth roots, earlier tree
/// on the left. Returns the number of merges. Only needs the roots, so the
/// contract can run it without the full forest.
std::uint32_t accumulate(PublicParams& pp, const Registration& r);

struct MerkleOpening {
    struct Level {
        Digest h0;
        Digest h1;
        std::uint8_t b = 0;  // which of h0 / h1 lies on the path
        bool operator==(const Level&) const = default;
    };

    std::uint32_t tree_index = 0;
    std::string id;  // h_0^0
    Bytes pk;        // h_0^1
    std::vector<Level> levels;  // j = 1 .. d-1
    Digest rt;

    Bytes encode() const;
    static MerkleOpening decode(ByteView bytes);
    bool operator==(const MerkleOpening&) const = default;
};

/// Recomputes the root from the path alone. nullopt if a level equation
/// fails or pp lacks a needed hash key.
std::optional<Digest> opening_root(const PublicParams& pp, const MerkleOpening& pth);

/// rt matches root tree_index, h_0^0 = id, path length is d-1, and every
/// level equation holds.
bool verify_opening(const PublicParams& pp, std::uint32_t tree_index, const std::string& id,
                    const MerkleOpening& pth);

class MerkleForest {
public:
    MerkleForest() = default;
    explicit MerkleForest(std::vector<HashKey> hks);

    /// Appends without checking identity; returns the merge count.
    std::uint32_t insert(Registration r);

    std::size_t size() const { return order_.size(); }
    bool contains(const std::string& id) const;
    const std::vector<std::string>& order() const { return order_; }
    std::vector<std::uint32_t> depths() const;
    PublicParams public_params() const;
    std::uint64_t total_merges() const { return merges_; }

    /// Index of the tree holding id. Throws Error(unknown_id).
    std::uint32_t tree_of(const std::string& id) const;
    /// Throws Error(unknown_id).
    MerkleOpening opening(const std::string& id) const;

    /// Indented text dump, one node per line.
    std::string render() const;

private:
    struct Tree {
        std::uint32_t depth = 1;
        std::vector<Registration> leaves;
        std::vector<std::vector<Digest>> levels;  // levels[j-1] holds level-j nodes; back() is {root}
    };

    static Tree merge(Tree left, Tree right, const HashKey& hk);

    std::vector<HashKey> hks_;
    std::vector<Tree> trees_;
    std::vector<std::string> order_;
    std::uint64_t merges_ = 0;
};

struct SetupResult {
    Crs crs;
    PublicParams pp;
    MerkleForest forest;
};

SetupResult rbe_setup(std::uint32_t lambda, prim::Drbg& rng);
prim::KeyMaterial rbe_keygen(prim::Drbg& rng);

/// Fresh ids are accepted, already registered ones rejected.
bool identity_verify(const MerkleForest& forest, const std::string& id);

// ---------------------------------------------------------------------------
// Programs and ciphertexts

struct EncProgram {
    Bytes crs_tag;
    Digest rt;
    std::uint32_t depth = 0;
    std::vector<HashKey> hks;  // hk_1 .. hk_d
    Bytes m;
    std::string id;
    Bytes r;

    bool operator==(const EncProgram&) const = default;
};

enum class Reject { root_mismatch, id_mismatch, path_invalid };

std::string_view reject_name(Reject r);

/// PKE ciphertext under h_0^1 with the hardwired randomness, or the reason
/// the opening was refused.
std::variant<Bytes, Reject> eval_program(const EncProgram& program, const MerkleOpening& pth);

struct RbeCiphertext {
    PublicParams pp;
    std::vector<EncProgram> programs;

    Bytes encode() const;
    /// Throws CodecError.
    static RbeCiphertext decode(ByteView bytes);
    bool operator==(const RbeCiphertext&) const = default;
};

RbeCiphertext rbe_enc(const Crs& crs, const PublicParams& pp, const std::string& id, ByteView m, ByteView r);
RbeCiphertext rbe_enc(const Crs& crs, const PublicParams& pp, const std::string& id, ByteView m, prim::Drbg& rng);

struct DecResult {
    enum class Kind { message, bottom, get_upd };
    Kind kind = Kind::bottom;
    Bytes m;

    static DecResult message(Bytes m) { return {Kind::message, std::move(m)}; }
    static DecResult bottom() { return {Kind::bottom, {}}; }
    static DecResult get_upd() { return {Kind::get_upd, {}}; }
};

/// First program that accepts u and whose output decrypts under sk wins.
/// If all reject and u is a self-consistent path to a root that ct's pp no
/// longer lists, the opening is stale: GetUpd. Anything else is bottom.
DecResult rbe_dec(ByteView sk, const MerkleOpening& u, const RbeCiphertext& ct);
/// As above on serialized input; a syntax error is bottom.
DecResult rbe_dec(ByteView sk, const MerkleOpening& u, ByteView ct_bytes);

// ---------------------------------------------------------------------------
// Key Curator contract

inline constexpr std::string_view kCuratorCode = "rbe-curator";

/// "init" (deployer only, once) stores (crs, pp_0); "register" appends a
/// fresh (id, 32-byte pk) and merges.
contract::Bytecode curator_bytecode();

/// aux of the init call.
Bytes init_args(const Crs& crs, const PublicParams& pp0);

ledger::Transaction init_tx(const prim::SigningKey& deployer, const Digest& instance, const Crs& crs,
                            const PublicParams& pp0, std::uint64_t nonce);
ledger::Transaction register_tx(const prim::SigningKey& key, const Digest& instance, const std::string& id,
                                ByteView pk, std::uint64_t nonce);

/// Contract state readers. Throw CodecError on a malformed state, and
/// Error(unknown_instance) when init has not run.
PublicParams pp_from_state(const contract::State& state);
Crs crs_from_state(const contract::State& state);
std::vector<Registration> registrations_from_state(const contract::State& state);
/// Rebuilds the forest from the registrations in a contract state.
MerkleForest forest_from_state(const contract::State& state);

/// Reads the confirmed state right after a registration tx.
std::pair<PublicParams, MerkleForest> register_onchain(const contract::ContractSystem& sys, const Digest& instance,
                                                       const ledger::Transaction& tx);

/// Opening for id against a forest (client-side State Read + update).
MerkleOpening rbe_update(const MerkleForest& forest, const std::string& id);

}  // namespace scsec::rbe
