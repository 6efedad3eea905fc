#pragma once

// Adversarial games for non-equivocation (neqv), non-repudiation (nrep) and
// non-frameability (nfrm), run against either protocol on a fresh simulated
// ledger per trial.
//
// Win conditions:
//   neqv  s* not in L1, s* != s, Inspect(Tx), and the ledger accepts s* for Tx
//   nrep  Tx* not in L2, Tx* != Tx, Inspect(Tx*), and the ledger accepts s' for Tx*
//   nfrm  Tx* not in Set(Tx), Tx* signed under the honest key, Inspect(Tx*)
// The acceptance conjuncts make a win mean that some party reading the
// ledger would really be handed the adversary's answer.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scsec/bytes.hpp"
#include "scsec/contract.hpp"
#include "scsec/ledger.hpp"

namespace scsec::games {

enum class Game { neqv, nrep, nfrm };
enum class Protocol { cbe, rbe };

std::string_view game_name(Game g);
std::string_view protocol_name(Protocol p);
/// Throw Error(configuration) on an unknown name.
Game parse_game(std::string_view name);
Protocol parse_protocol(std::string_view name);

// ---------------------------------------------------------------------------
// Oracles

/// O^bc: ReadState / ReadTx with the L1 / L2 bookkeeping. A pure cache: the
/// first answer for a query is the only one ever returned.
class BlockchainOracle {
public:
    explicit BlockchainOracle(const ledger::Ledger& chain) : chain_(&chain) {}

    /// Propagates Error(not_confirmed).
    ledger::StateSnapshot read_state(const ledger::Transaction& tx);
    /// Propagates Error(unknown_state).
    ledger::Transaction read_tx(const ledger::StateSnapshot& state);

    bool in_l1(const Digest& tx, const Digest& state) const;
    bool in_l2(const Digest& state, const Digest& tx) const;
    std::size_t l1_size() const { return l1_.size(); }
    std::size_t l2_size() const { return l2_.size(); }
    std::size_t ledger_hits() const { return hits_; }

    struct Query {
        bool read_state = true;
        Bytes input;  // encoded tx or snapshot
    };
    const std::vector<Query>& log() const { return log_; }
    /// (tx, state digest) pairs in L1.
    std::set<std::pair<Digest, Digest>> l1() const;

private:
    const ledger::Ledger* chain_;
    std::map<Digest, ledger::StateSnapshot> l1_;  // tx -> state
    std::map<Digest, ledger::Transaction> l2_;    // state digest -> tx
    std::vector<Query> log_;
    std::size_t hits_ = 0;
};

/// Contract call chosen by the adversary for the honest user to sign.
struct CallMetadata {
    Digest instance;
    std::string opcode;
    Bytes args;

    Bytes encode() const;
};

/// O^user: signs metadata under the honest user's key and records Set(Tx).
class UserOracle {
public:
    explicit UserOracle(prim::SigningKey key, std::uint64_t first_nonce = 1)
        : key_(std::move(key)), next_nonce_(first_nonce) {}

    ledger::Transaction sign(const CallMetadata& metadata);

    const Bytes& verification_key() const { return key_.verification_key(); }
    bool contains(const Digest& tx) const;
    std::size_t size() const { return set_tx_.size(); }

private:
    prim::SigningKey key_;
    std::uint64_t next_nonce_;
    std::map<Bytes, ledger::Transaction> set_tx_;  // encoded metadata -> Tx
};

// ---------------------------------------------------------------------------
// Strategies

enum class Capability { minority_players, divergent_state, mutate_transactions, random_forge };

struct AdversaryStrategy {
    std::string name;
    Game game = Game::neqv;
    std::set<Capability> capabilities;
    ledger::Strategy ledger_strategy = ledger::Strategy::honest;
};

/// serve-divergent and front-run (neqv), mutate-tx (nrep), random-forge and
/// replay-forge (nfrm).
const std::vector<AdversaryStrategy>& builtin_strategies();
/// Throws Error(configuration).
const AdversaryStrategy& find_strategy(std::string_view name);

/// 5 players, adversaries {3, 4}, epsilon 0.5, k 3, delta 6.
ledger::LedgerConfig default_ledger_config();

/// A broken-assumption run: a built-in strategy on a ledger with one fault.
struct Control {
    std::string name;
    Game game;
    std::string strategy;
    ledger::Faults faults;
};

const std::vector<Control>& negative_controls();

// ---------------------------------------------------------------------------
// Transcripts

struct Witness {
    Game game = Game::neqv;
    Protocol protocol = Protocol::cbe;
    std::string strategy;
    std::string ledger_config;  // LedgerConfig::to_text without the seed
    ledger::Faults faults;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    Digest tx;        // the challenge transaction
    Bytes candidate;  // s* (neqv) or Tx* (nrep, nfrm), canonical encoding

    Bytes encode() const;
    /// Throws CodecError.
    static Witness decode(ByteView bytes);
    Digest digest() const;
    bool operator==(const Witness&) const = default;
};

struct GameTranscript {
    Game game = Game::neqv;
    Protocol protocol = Protocol::cbe;
    std::string strategy;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    std::uint64_t wins = 0;
    std::uint64_t decrypt_mismatches = 0;  // trials whose Dec disagreed with the state used by Enc
    std::vector<bool> outcomes;     // one per trial
    std::vector<Witness> witnesses;  // one per win, in trial order

    /// "<game>\t<trial>\t<win 0|1>\t<witness digest or ->", one line per trial.
    std::string export_lines() const;
};

/// Runs `trials` independent trials. Trial t uses a ledger seeded from
/// (seed, t). Throws Error(configuration) when the adversary fraction is not
/// below epsilon or the strategy belongs to another game.
GameTranscript run_game(Game game, Protocol protocol, const AdversaryStrategy& strategy, std::uint64_t trials,
                        std::uint64_t seed, const ledger::LedgerConfig& base = default_ledger_config());

/// Replays the witness's trial and re-evaluates the return condition on the
/// claimed candidate. False for malformed or mutated witnesses.
bool recheck_witness(const Witness& w);

}  // namespace scsec::games
