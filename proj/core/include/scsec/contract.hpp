#pragma once

// Replicated smart contracts on top of the ledger.
//
// A contract is a named Bytecode: an ordered table of opcodes, each guarded
// by exactly one reqcode predicate. ContractRuntime is the ledger state
// machine that every player runs; it deploys instances and applies calls as
// confirmed blocks arrive. ContractSystem is the client-side facade
// (deploy / transfer / access / inspect) that reads through ledger quorums.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scsec/bytes.hpp"
#include "scsec/keys.hpp"
#include "scsec/ledger.hpp"

namespace scsec::contract {

/// Flat key -> value contract state. Keys sort bytewise, so the canonical
/// encoding (and the digest) does not depend on insertion order.
using State = std::map<std::string, Bytes>;

Bytes encode_state(const State& state);
State decode_state(ByteView bytes);
Digest state_digest(const State& state);

/// Per-call operation counts, consumed by the gas accounting.
struct OpMeter {
    std::map<std::string, std::uint64_t> counts;

    void add(const std::string& op, std::uint64_t n = 1) { counts[op] += n; }
};

struct CallContext {
    const ledger::Transaction& tx;
    Digest instance;
    Bytes deployer;  // verification key that deployed the instance
    std::uint64_t height = 0;
    Bytes args;  // transaction aux
};

/// Guards must not throw; malformed arguments simply fail the guard.
using Reqcode = std::function<bool(const State&, const CallContext&)>;
/// Transitions are deterministic in (state, ctx). A throw yields an `error`
/// receipt and leaves the state untouched.
using Procedure = std::function<void(State&, const CallContext&, OpMeter&)>;

struct OpcodeEntry {
    std::string name;
    Reqcode reqcode;
    Procedure procedure;
};

class Bytecode {
public:
    explicit Bytecode(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }
    /// Throws std::invalid_argument on a duplicate opcode name or a missing guard.
    Bytecode& add(std::string opcode, Reqcode reqcode, Procedure procedure);
    const OpcodeEntry* find(std::string_view opcode) const;
    const std::vector<OpcodeEntry>& entries() const { return entries_; }

private:
    std::string name_;
    std::vector<OpcodeEntry> entries_;
};

/// Code known to every player, addressed by name.
class CodeRegistry {
public:
    void add(Bytecode code);
    const Bytecode* find(std::string_view name) const;

private:
    std::map<std::string, Bytecode, std::less<>> codes_;
};

enum class CallKind : std::uint8_t { deploy = 0, invoke = 1 };

/// Transaction metadata of a contract call.
struct CallHeader {
    CallKind kind = CallKind::invoke;
    std::string code;  // deploy: code name
    Digest instance;   // invoke: target instance
    std::string opcode;

    Bytes encode() const;
    /// Throws CodecError.
    static CallHeader decode(ByteView bytes);
};

ledger::Transaction make_deploy(const prim::SigningKey& key, std::string code, std::uint64_t nonce);
ledger::Transaction make_invoke(const prim::SigningKey& key, const Digest& instance, std::string opcode,
                                Bytes args, std::uint64_t nonce);

enum class Outcome : std::uint8_t { applied = 0, guard_failed = 1, error = 2 };

std::string_view outcome_name(Outcome o);

struct Receipt {
    Digest tx;
    Digest contract;
    Outcome outcome = Outcome::error;
    Digest pre_state;
    Digest post_state;
    std::uint64_t height = 0;
    std::map<std::string, std::uint64_t> ops;
    std::string detail;

    Bytes encode() const;
    static Receipt decode(ByteView bytes);
    bool operator==(const Receipt&) const = default;
};

struct ContractInstance {
    Digest id;
    std::string code;
    Bytes deployer;
    Digest deploy_tx;
    State state;
};

/// Ledger state machine that executes contract calls.
///
/// The bytes returned by apply() are the canonical encoding of
/// (instance id, instance state after the call); that is the contract state
/// a ledger read returns for the transaction.
class ContractRuntime final : public ledger::StateMachine {
public:
    explicit ContractRuntime(std::shared_ptr<const CodeRegistry> codes);

    Bytes apply(const ledger::Transaction& tx, std::uint64_t height) override;
    Digest state_root() const override { return root_; }
    std::unique_ptr<ledger::StateMachine> clone() const override;

    const ContractInstance* instance(const Digest& id) const;
    const Receipt* receipt(const Digest& tx) const;
    const std::vector<Receipt>& receipts() const { return log_; }
    /// Instance state as of the last block at or below `height`.
    std::optional<State> state_at(const Digest& instance, std::uint64_t height) const;
    /// Line-delimited hex of canonical receipts, in application order.
    std::string export_receipts() const;

private:
    struct Checkpoint {
        std::uint64_t height;
        std::shared_ptr<const State> state;
    };
    struct Slot {
        ContractInstance instance;
        std::set<std::pair<Bytes, std::uint64_t>> seen;  // (signer, nonce) already applied
        std::vector<Checkpoint> history;
    };

    Receipt execute(const ledger::Transaction& tx, std::uint64_t height, Digest& touched);
    void checkpoint(Slot& slot, std::uint64_t height);

    std::shared_ptr<const CodeRegistry> codes_;
    std::map<Digest, Slot> slots_;
    std::map<Digest, std::size_t> receipt_index_;
    std::vector<Receipt> log_;
    Digest root_{};
};

/// Result of reading a transaction's contract state.
struct ContractState {
    Digest instance;
    State state;
};

/// Splits a snapshot produced by ContractRuntime. Throws CodecError.
ContractState decode_snapshot(const ledger::StateSnapshot& snapshot);

/// Client-side view of contracts on a simulated ledger.
class ContractSystem {
public:
    ContractSystem(ledger::LedgerConfig config, std::shared_ptr<const CodeRegistry> codes);

    ledger::Ledger& chain() { return ledger_; }
    const ledger::Ledger& chain() const { return ledger_; }

    /// Submits tx and advances until confirmed. Returns false if the ledger
    /// rejected it or it never confirmed within `limit` rounds.
    bool submit_and_confirm(const ledger::Transaction& tx, std::uint64_t limit = 64);

    /// Instance created by a confirmed deploy transaction and its initial
    /// state. Throws Error(not_confirmed) or Error(unknown_instance) when the
    /// deploy did not create an instance.
    std::pair<Digest, State> deploy(const ledger::Transaction& tx) const;
    /// State of `instance` right after the confirmed call tx. Throws
    /// Error(unknown_instance), Error(unknown_opcode), Error(not_confirmed).
    State transfer(const Digest& instance, const ledger::Transaction& tx) const;
    /// Confirmed state of an instance: what a quorum of players holds at
    /// their k-deep prefix. Throws Error(unknown_instance).
    State access(const Digest& instance) const;
    /// Confirmed k deep, signature valid, guard held when applied.
    bool inspect(const ledger::Transaction& tx) const;
    /// Receipt as recorded by a quorum of players. Throws Error(not_confirmed).
    Receipt receipt(const ledger::Transaction& tx) const;

    const ContractRuntime& runtime(ledger::PlayerId player) const;

private:
    bool quorum(std::size_t count) const;

    std::shared_ptr<const CodeRegistry> codes_;
    ledger::Ledger ledger_;
};

}  // namespace scsec::contract
