#pragma once

// Deterministic multi-player ledger.
//
// Consensus is an idealized round-based quorum: in every round each honest
// player appends one block holding all of its pending transactions in
// (nonce, id) order. Adversarial players follow a scripted strategy instead.
// A transaction is confirmed at a player once its block is at least k blocks
// below that player's tip (block height <= tip - k).

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "scsec/bytes.hpp"
#include "scsec/drbg.hpp"
#include "scsec/keys.hpp"

namespace scsec::ledger {

using PlayerId = std::uint32_t;

struct Transaction {
    Bytes payload;  // canonical (metadata, aux)
    Bytes signature;
    Bytes signer;  // Ed25519 verification key
    std::uint64_t nonce = 0;
    Digest id;  // digest of all preceding fields

    /// Bytes covered by the signature: canonical (payload, signer, nonce).
    Bytes signing_message() const;
    Digest compute_id() const;

    Bytes encode() const;
    static Transaction decode(ByteView bytes);

    bool operator==(const Transaction&) const = default;
};

/// Signs payload under key and fills in the id.
Transaction make_transaction(const prim::SigningKey& key, Bytes payload, std::uint64_t nonce);

struct TxPayload {
    Bytes metadata;
    Bytes aux;

    Bytes encode() const;
    static TxPayload decode(ByteView bytes);
};

struct Block {
    std::uint64_t height = 0;
    Digest parent;
    std::vector<Transaction> txs;
    Digest state_root;

    Digest digest() const;
};

/// State produced by one transaction: its position in the chain plus the
/// state-machine output. The position makes the map tx -> snapshot
/// injective, so a snapshot names exactly one triggering transaction.
struct StateSnapshot {
    std::uint64_t height = 0;
    std::uint32_t position = 0;
    Bytes state;

    Bytes encode() const;
    static StateSnapshot decode(ByteView bytes);
    Digest digest() const;

    bool operator==(const StateSnapshot&) const = default;
};

/// Replicated deterministic state machine executed by every player.
class StateMachine {
public:
    virtual ~StateMachine() = default;
    /// Applies tx and returns the state it produced.
    virtual Bytes apply(const Transaction& tx, std::uint64_t height) = 0;
    virtual Digest state_root() const = 0;
    virtual std::unique_ptr<StateMachine> clone() const = 0;
};

using StateMachineFactory = std::function<std::unique_ptr<StateMachine>()>;

/// Default machine: state is the running hash chain of applied transaction ids.
class HashChainMachine final : public StateMachine {
public:
    Bytes apply(const Transaction& tx, std::uint64_t height) override;
    Digest state_root() const override { return root_; }
    std::unique_ptr<StateMachine> clone() const override { return std::make_unique<HashChainMachine>(*this); }

private:
    Digest root_{};
};

enum class Strategy {
    honest,
    withhold,    // skips producing blocks in coin-chosen rounds
    censor,      // leaves coin-chosen transactions out of its own blocks
    equivocate,  // serves altered states to queries addressed to it
};

std::string_view strategy_name(Strategy s);
/// Throws Error(configuration) on an unknown name.
Strategy parse_strategy(std::string_view name);

/// Switches that disable one robustness assumption each; used only by the
/// negative controls.
struct Faults {
    bool no_tx_replication = false;     // a submitted tx reaches one player only
    bool no_state_replication = false;  // any single player's answer is taken as the ledger's
    bool no_confirmation = false;       // unconfirmed and pending state is readable
    bool no_signature_check = false;    // submit and inspect skip signature checks

    bool operator==(const Faults&) const = default;
    bool any() const { return no_tx_replication || no_state_replication || no_confirmation || no_signature_check; }
};

struct LedgerConfig {
    std::uint32_t total_players = 5;
    std::vector<PlayerId> adversary_players;
    std::uint32_t k = 3;
    std::uint32_t delta = 6;
    double epsilon = 0.5;
    std::uint64_t seed = 0;
    Strategy strategy = Strategy::withhold;
    Faults faults;

    bool is_adversary(PlayerId p) const;
    double adversary_fraction() const;
    /// |adversary| / total < epsilon.
    bool honest_majority() const;
    /// Throws Error(configuration) on k == 0, delta == 0, epsilon outside
    /// [0, 1], or an adversary id outside the player range.
    void validate() const;

    /// Reads total_players, adversary_players, k, delta, epsilon, seed, strategy.
    static LedgerConfig from_text(std::string_view text);
    std::string to_text() const;
};

struct SubmitReceipt {
    enum class Status { accepted, bad_signature, replayed_nonce };
    Status status = Status::accepted;

    bool accepted() const { return status == Status::accepted; }
    std::string_view reason() const;
};

struct LedgerView {
    PlayerId player = 0;
    std::vector<Block> chain;
    std::vector<Transaction> pending;

    std::uint64_t tip() const { return chain.empty() ? 0 : chain.back().height; }
};

/// One exported trace line: (round, player, tip digest, confirmed-prefix digest).
struct RoundRecord {
    std::uint64_t round = 0;
    PlayerId player = 0;
    Digest tip;
    Digest confirmed_prefix;

    Bytes encode() const;
    static RoundRecord decode(ByteView bytes);
};

struct Inclusion {
    std::uint64_t round = 0;   // round in which the block holding the tx was made
    std::uint64_t height = 0;  // block height
    Digest served;             // digest of the snapshot the player serves for it
};

struct TxRecord {
    Digest tx;
    std::uint64_t submit_round = 0;
    bool honest_origin = true;
    std::vector<std::optional<Inclusion>> at;  // one slot per player
};

struct ExecutionTrace {
    LedgerConfig config;
    std::uint64_t rounds = 0;
    std::vector<RoundRecord> records;
    /// tips[player][round] = tip height after that round (round 0 = genesis).
    std::vector<std::vector<std::uint64_t>> tips;
    std::vector<TxRecord> txs;

    std::uint64_t tip_at(PlayerId p, std::uint64_t round) const;
    /// Players holding tx at least k deep by `round` (optionally serving `served`).
    std::vector<PlayerId> holders(const TxRecord& tx, std::uint32_t k, std::uint64_t round,
                                  const Digest* served = nullptr) const;
    /// Hex-encoded canonical RoundRecords, one per line.
    std::string export_lines() const;
};

struct AuditResult {
    bool pass = true;
    std::optional<Digest> violating_tx;
    std::string detail;
};

/// Passes iff every tx held k deep by an honest player is held k deep, with
/// the same served state, by more than an epsilon fraction of all players
/// within delta rounds.
AuditResult audit_persistence(const ExecutionTrace& trace);
/// Passes iff every honestly submitted tx reaches an acceptance fraction above
/// epsilon within delta rounds of submission.
AuditResult audit_liveness(const ExecutionTrace& trace);

class Ledger {
public:
    explicit Ledger(LedgerConfig config, StateMachineFactory factory = nullptr);

    const LedgerConfig& config() const { return config_; }
    std::uint64_t round() const { return round_; }

    SubmitReceipt submit(const Transaction& tx, bool honest_origin = true);
    void advance_round();
    void advance_rounds(std::uint64_t n);
    /// Advances until tx is confirmed by the ledger (see confirmed()), at most
    /// `limit` rounds. Returns false if it never confirms.
    bool advance_until_confirmed(const Digest& tx, std::uint64_t limit = 64);

    /// Quorum read: the snapshot served for tx by more than an epsilon
    /// fraction of players. Throws Error(not_confirmed).
    StateSnapshot read_state(const Transaction& tx) const;
    /// Snapshot served by one player. Throws Error(not_confirmed) or
    /// Error(unknown_player).
    StateSnapshot read_state_at(PlayerId player, const Transaction& tx) const;
    /// The unique confirmed transaction that produced snapshot. Throws
    /// Error(unknown_state).
    Transaction read_tx(const StateSnapshot& snapshot) const;

    /// Players holding tx at least k deep within delta rounds of submission.
    std::vector<PlayerId> find_player(const Transaction& tx, std::uint32_t k, std::uint32_t delta) const;
    /// Transactions at least k deep in player's chain. Throws Error(unknown_player).
    std::vector<Transaction> find_tx(PlayerId player, std::uint32_t k) const;

    /// Fraction of players that hold tx (confirmed) and serve exactly snapshot.
    double acceptance(const Digest& tx, const StateSnapshot& snapshot) const;
    /// acceptance > epsilon, or > 0 when state replication is disabled.
    bool accepted(const Digest& tx, const StateSnapshot& snapshot) const;
    /// tx confirmed by more than an epsilon fraction (any one player when
    /// state replication is disabled).
    bool confirmed(const Digest& tx) const;
    bool confirmed_at(PlayerId player, const Digest& tx) const;
    /// Signature check, cached per transaction id; always true when the
    /// signature-check fault is on.
    bool signature_ok(const Transaction& tx) const;

    std::optional<Transaction> find_transaction(const Digest& id) const;
    LedgerView view(PlayerId player) const;
    /// Height of player's last block. Throws Error(unknown_player).
    std::uint64_t tip(PlayerId player) const;
    const StateMachine& machine(PlayerId player) const;
    std::vector<PlayerId> honest_players() const;

    /// Adversary capability: the given adversarial player puts `replacement`
    /// in its own chain wherever `original` would go.
    void substitute(PlayerId adversary, const Digest& original, Transaction replacement);

    const ExecutionTrace& trace() const { return trace_; }

private:
    struct Location {
        std::uint64_t height = 0;
        std::uint32_t position = 0;
        Digest snapshot;  // true snapshot digest
        Digest served;    // what the player answers with
    };
    struct Replica {
        PlayerId id = 0;
        bool adversarial = false;
        std::vector<Block> chain;
        std::map<std::pair<std::uint64_t, Digest>, Transaction> pending;
        std::unique_ptr<StateMachine> machine;
        std::unordered_map<Digest, Location, DigestHash> located;
        std::unordered_map<Digest, Digest, DigestHash> by_served;  // served snapshot -> tx
        std::unordered_set<Digest, DigestHash> censored;
    };

    void check_player(PlayerId p) const;
    bool depth_ok(const Replica& r, std::uint64_t height) const;
    void produce_block(Replica& r);
    std::optional<Digest> served_digest(const Replica& r, const Digest& tx) const;
    std::optional<StateSnapshot> speculative(const Replica& r, const Digest& tx) const;
    std::size_t trace_index(const Digest& tx, std::uint64_t submit_round, bool honest);
    Digest intern(const StateSnapshot& s);

    LedgerConfig config_;
    StateMachineFactory factory_;
    std::vector<Replica> replicas_;
    std::uint64_t round_ = 0;
    prim::Drbg rng_;

    std::unordered_map<Digest, StateSnapshot, DigestHash> snapshots_;
    std::unordered_map<Digest, Transaction, DigestHash> known_;
    std::set<std::pair<Bytes, std::uint64_t>> used_nonces_;
    std::map<std::pair<PlayerId, Digest>, Transaction> substitutions_;
    mutable std::unordered_map<Digest, bool, DigestHash> sig_cache_;
    std::unordered_map<Digest, std::size_t, DigestHash> trace_pos_;
    ExecutionTrace trace_;
};

}  // namespace scsec::ledger
