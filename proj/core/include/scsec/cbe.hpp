#pragma once

// Certificate-based encryption with on-chain revocation.
//
// The CA publishes pms = (P, Q = s_C P, xP, m). Each user holds s_B, p_B =
// s_B P and an m-bit serial naming a leaf of a complete binary tree. Every
// period i the CA reads the revocation table from the contract, computes the
// complete-subtree cover of the unrevoked leaves, and gives each unrevoked
// user Cert_i = s_C T_i + x P_k, where T_i = H5(Q, i) and P_k = H1(b_1..b_k)
// for the cover node b_1..b_k above the user's leaf.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scsec/bytes.hpp"
#include "scsec/contract.hpp"
#include "scsec/drbg.hpp"
#include "scsec/pairing.hpp"

namespace scsec::cbe {

using pairing::G1;
using pairing::G2;
using pairing::Scalar;

// ---------------------------------------------------------------------------
// Dates

/// Days since 1970-01-01.
using Day = std::int32_t;

Day make_day(int year, unsigned month, unsigned day);
/// "Dec 2022".
std::string month_year(Day d);

// ---------------------------------------------------------------------------
// Subset cover

/// Node prefix as a string of '0'/'1'; the root is the empty string.
using Prefix = std::string;

/// The m-bit serial of leaf `index`, most significant bit first.
Prefix serial_bits(std::uint64_t index, std::uint32_t depth);

/// Complete-subtree cover: the maximal subtrees with no revoked leaf, in
/// left-to-right order. Every element of `revoked` must be a depth-bit
/// serial; throws std::invalid_argument otherwise.
std::vector<Prefix> subset_cover(std::uint32_t depth, const std::set<Prefix>& revoked);

// ---------------------------------------------------------------------------
// Keys

struct Pms {
    G1 P;
    G1 Q;
    G1 xP;
    std::uint32_t depth = 0;    // m
    std::uint64_t periods = 0;  // number of certification periods

    Bytes encode() const;
    static Pms decode(ByteView bytes);
    bool operator==(const Pms&) const = default;
};

struct CaKeys {
    Scalar s_c;
    Scalar x;
    G1 Q;
    G1 xP;
};

struct Setup {
    CaKeys ca;
    Pms pms;
};

/// depth >= 1 and <= 32.
Setup cbe_setup(std::uint32_t depth, std::uint64_t periods, prim::Drbg& rng);

struct UserKeys {
    Scalar s_b;
    G1 p_b;
    std::string info;  // identity string hashed into P_B'
    Prefix serial;
};

/// What a sender knows about a recipient after checking the initial certificate.
struct UserPublic {
    G1 p_b;
    std::string info;
    Prefix serial;
};

UserPublic public_part(const UserKeys& keys);

/// Hands out leaf serials in order.
class KeyIssuer {
public:
    explicit KeyIssuer(const Pms& pms) : pms_(pms) {}

    /// Throws Error(tree_full) once all 2^m leaves are taken.
    UserKeys keygen(std::string info, prim::Drbg& rng);
    std::uint64_t issued() const { return next_; }

private:
    Pms pms_;
    std::uint64_t next_ = 0;
};

// ---------------------------------------------------------------------------
// On-chain revocation table

enum class CertState : std::uint8_t { valid = 0, revoked = 1 };

std::string_view cert_state_name(CertState s);

struct Row {
    std::uint32_t number = 0;
    std::string user_id;
    CertState state = CertState::valid;
    Day expiry = 0;
    Prefix serial;
    Bytes owner;  // verification key allowed to request revocation

    Bytes encode() const;
    static Row decode(ByteView bytes);
    bool operator==(const Row&) const = default;
};

struct RevocationTable {
    std::vector<Row> rows;  // ordered by number

    const Row* find(std::string_view user_id) const;
    std::set<Prefix> revoked_serials() const;
    /// One line per row: "<number>\t<user>\t<state>\t<Mon YYYY>".
    std::string export_lines() const;

    /// Throws CodecError on a malformed contract state.
    static RevocationTable from_state(const contract::State& state);
};

/// Aux of an enrollment call.
struct Enrollment {
    std::string user_id;
    Prefix serial;
    Day expiry = 0;
    Bytes owner;

    Bytes encode() const;
    static Enrollment decode(ByteView bytes);
};

/// Aux of a revocation request, rendered as "[bob:revoked]".
struct RevocationRequest {
    std::string user_id;
    CertState requested = CertState::revoked;
    Day request_day = 0;

    Bytes encode() const;
    static RevocationRequest decode(ByteView bytes);
    std::string render() const;
    bool operator==(const RevocationRequest&) const = default;
};

inline constexpr std::string_view kRevocationCode = "cbe-revocation";

/// "enroll" (CA only) and "revoke" (owner only, valid state, request on or
/// before the expiry day).
contract::Bytecode revocation_bytecode();

ledger::Transaction enroll_tx(const prim::SigningKey& ca, const Digest& instance, const Enrollment& e,
                              std::uint64_t nonce);
ledger::Transaction revocation_request(const prim::SigningKey& owner, const Digest& instance,
                                       const std::string& user_id, Day request_day, std::uint64_t nonce);

/// Applies a confirmed revocation tx and returns the table it produced.
RevocationTable revocation_update(const contract::ContractSystem& sys, const Digest& instance,
                                  const ledger::Transaction& tx);

// ---------------------------------------------------------------------------
// Certificates and encryption

struct ReconfirmationCert {
    std::uint64_t period = 0;
    G1 cert;
    std::uint32_t level = 0;  // k
    Prefix node;              // b_1..b_k

    bool operator==(const ReconfirmationCert&) const = default;
};

G1 period_point(const Pms& pms, std::uint64_t period);  // T_i
G1 node_point(const Prefix& node);                     // P_k
G1 identity_point(const std::string& info);            // P_B'

/// nullopt when the user is unknown or revoked in `table`. A root cover
/// node is replaced by the user's level-1 node so that k >= 1.
std::optional<ReconfirmationCert> cbe_cert(const CaKeys& ca, const Pms& pms, std::uint64_t period,
                                           const std::string& user_id, const RevocationTable& table);

struct CbeCiphertext {
    std::uint64_t period = 0;
    G1 rP;
    std::vector<G1> rPj;  // r P_1 .. r P_m
    Bytes V;              // exactly n = 8 * |message| bits
    Digest tag;           // binds (g^r, message)

    Bytes encode() const;
    /// Throws CodecError.
    static CbeCiphertext decode(ByteView bytes);
    bool operator==(const CbeCiphertext&) const = default;
};

/// g = e(Q, T_i) e(p_B, P_B'), ciphertext under randomness r.
CbeCiphertext cbe_enc(const Pms& pms, const UserPublic& user, std::uint64_t period, ByteView message, Scalar r);
CbeCiphertext cbe_enc(const Pms& pms, const UserPublic& user, std::uint64_t period, ByteView message,
                      prim::Drbg& rng);

/// g' = e(rP, Cert_i + s_B P_B') / e(xP, rP_k). nullopt when the tag
/// does not verify or the cert level is out of range.
std::optional<Bytes> cbe_dec(const UserKeys& user, const ReconfirmationCert& cert, const G1& xP,
                             const CbeCiphertext& ct);

}  // namespace scsec::cbe
