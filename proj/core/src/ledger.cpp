#include "scsec/ledger.hpp"

#include <algorithm>
#include <sstream>

#include "scsec/codec.hpp"
#include "scsec/error.hpp"
#include "scsec/hash.hpp"
#include "scsec/kvfile.hpp"

namespace scsec::ledger {

// ---------------------------------------------------------------------------
// Transactions, payloads, blocks, snapshots

Bytes Transaction::signing_message() const {
    Encoder enc;
    enc.field(payload).field(signer).u64(nonce);
    return std::move(enc).take();
}

Digest Transaction::compute_id() const {
    Encoder enc;
    enc.field(payload).field(signature).field(signer).u64(nonce);
    return prim::tagged_hash("scsec.tx", enc.bytes());
}

Bytes Transaction::encode() const {
    Encoder enc;
    enc.field(payload).field(signature).field(signer).u64(nonce).field(id);
    return std::move(enc).take();
}

Transaction Transaction::decode(ByteView bytes) {
    Decoder dec(bytes);
    Transaction tx;
    tx.payload = dec.field_bytes();
    tx.signature = dec.field_bytes();
    tx.signer = dec.field_bytes();
    tx.nonce = dec.u64();
    tx.id = dec.digest();
    dec.expect_done();
    return tx;
}

Transaction make_transaction(const prim::SigningKey& key, Bytes payload, std::uint64_t nonce) {
    Transaction tx;
    tx.payload = std::move(payload);
    tx.signer = key.verification_key();
    tx.nonce = nonce;
    tx.signature = key.sign(tx.signing_message());
    tx.id = tx.compute_id();
    return tx;
}

Bytes TxPayload::encode() const {
    Encoder enc;
    enc.field(metadata).field(aux);
    return std::move(enc).take();
}

TxPayload TxPayload::decode(ByteView bytes) {
    Decoder dec(bytes);
    TxPayload p;
    p.metadata = dec.field_bytes();
    p.aux = dec.field_bytes();
    dec.expect_done();
    return p;
}

Digest Block::digest() const {
    Encoder enc;
    enc.u64(height).field(parent).u64(txs.size());
    for (const auto& tx : txs) enc.field(tx.id);
    enc.field(state_root);
    return prim::tagged_hash("scsec.block", enc.bytes());
}

Bytes StateSnapshot::encode() const {
    Encoder enc;
    enc.u64(height).u32(position).field(state);
    return std::move(enc).take();
}

StateSnapshot StateSnapshot::decode(ByteView bytes) {
    Decoder dec(bytes);
    StateSnapshot s;
    s.height = dec.u64();
    s.position = dec.u32();
    s.state = dec.field_bytes();
    dec.expect_done();
    return s;
}

Digest StateSnapshot::digest() const { return prim::tagged_hash("scsec.snapshot", encode()); }

Bytes HashChainMachine::apply(const Transaction& tx, std::uint64_t /*height*/) {
    root_ = prim::tagged_hash("scsec.hashchain", concat(root_.view(), tx.id.view()));
    return root_.to_bytes();
}

// ---------------------------------------------------------------------------
// Configuration

std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::honest: return "honest";
        case Strategy::withhold: return "withhold";
        case Strategy::censor: return "censor";
        case Strategy::equivocate: return "equivocate";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    for (auto s : {Strategy::honest, Strategy::withhold, Strategy::censor, Strategy::equivocate}) {
        if (strategy_name(s) == name) return s;
    }
    throw Error(Errc::configuration, "unknown adversary strategy '" + std::string(name) + "'");
}

bool LedgerConfig::is_adversary(PlayerId p) const {
    return std::find(adversary_players.begin(), adversary_players.end(), p) != adversary_players.end();
}

double LedgerConfig::adversary_fraction() const {
    return total_players == 0 ? 0.0 : static_cast<double>(adversary_players.size()) / total_players;
}

bool LedgerConfig::honest_majority() const { return adversary_fraction() < epsilon; }

void LedgerConfig::validate() const {
    if (total_players == 0) throw Error(Errc::configuration, "total_players must be >= 1");
    if (k == 0) throw Error(Errc::configuration, "k must be >= 1");
    if (delta == 0) throw Error(Errc::configuration, "delta must be >= 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(Errc::configuration, "epsilon must lie in [0, 1]");
    std::set<PlayerId> seen;
    for (auto p : adversary_players) {
        if (p >= total_players) {
            throw Error(Errc::configuration, "adversary player " + std::to_string(p) + " out of range");
        }
        if (!seen.insert(p).second) {
            throw Error(Errc::configuration, "adversary player " + std::to_string(p) + " listed twice");
        }
    }
}

LedgerConfig LedgerConfig::from_text(std::string_view text) {
    auto kv = KeyValueFile::parse(text);
    static const std::set<std::string> kKnown = {"total_players", "adversary_players", "k", "delta",
                                                 "epsilon",       "seed",              "strategy"};
    for (const auto& key : kv.keys()) {
        if (kKnown.count(key) == 0) {
            throw Error(Errc::configuration,
                        "line " + std::to_string(kv.line_of(key)) + ": unknown ledger field '" + key + "'");
        }
    }
    LedgerConfig c;
    c.total_players = static_cast<std::uint32_t>(kv.get_u64("total_players", c.total_players));
    for (const auto& item : kv.get_list("adversary_players")) {
        try {
            c.adversary_players.push_back(static_cast<PlayerId>(std::stoul(item)));
        } catch (const std::exception&) {
            throw Error(Errc::configuration, "line " + std::to_string(kv.line_of("adversary_players")) +
                                                 ": bad player id '" + item + "'");
        }
    }
    c.k = static_cast<std::uint32_t>(kv.get_u64("k", c.k));
    c.delta = static_cast<std::uint32_t>(kv.get_u64("delta", c.delta));
    c.epsilon = kv.get_double("epsilon", c.epsilon);
    c.seed = kv.get_u64("seed", c.seed);
    if (auto s = kv.get("strategy")) c.strategy = parse_strategy(*s);
    c.validate();
    return c;
}

std::string LedgerConfig::to_text() const {
    std::ostringstream out;
    out << "total_players=" << total_players << "\n";
    out << "adversary_players=";
    for (std::size_t i = 0; i < adversary_players.size(); ++i) out << (i ? "," : "") << adversary_players[i];
    out << "\n";
    out << "k=" << k << "\ndelta=" << delta << "\nepsilon=" << epsilon << "\nseed=" << seed
        << "\nstrategy=" << strategy_name(strategy) << "\n";
    return out.str();
}

std::string_view SubmitReceipt::reason() const {
    switch (status) {
        case Status::accepted: return "accepted";
        case Status::bad_signature: return "bad-signature";
        case Status::replayed_nonce: return "replayed-nonce";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Trace and audits

Bytes RoundRecord::encode() const {
    Encoder enc;
    enc.u64(round).u32(player).field(tip).field(confirmed_prefix);
    return std::move(enc).take();
}

RoundRecord RoundRecord::decode(ByteView bytes) {
    Decoder dec(bytes);
    RoundRecord r;
    r.round = dec.u64();
    r.player = dec.u32();
    r.tip = dec.digest();
    r.confirmed_prefix = dec.digest();
    dec.expect_done();
    return r;
}

std::uint64_t ExecutionTrace::tip_at(PlayerId p, std::uint64_t round) const {
    const auto& t = tips.at(p);
    return t.at(std::min<std::uint64_t>(round, t.size() - 1));
}

std::vector<PlayerId> ExecutionTrace::holders(const TxRecord& tx, std::uint32_t k, std::uint64_t round,
                                              const Digest* served) const {
    std::vector<PlayerId> out;
    for (PlayerId p = 0; p < tx.at.size(); ++p) {
        const auto& inc = tx.at[p];
        if (!inc || inc->round > round) continue;
        if (tip_at(p, round) < inc->height + k) continue;
        if (served != nullptr && inc->served != *served) continue;
        out.push_back(p);
    }
    return out;
}

std::string ExecutionTrace::export_lines() const {
    std::string out;
    for (const auto& r : records) {
        out += to_hex(r.encode());
        out += '\n';
    }
    return out;
}

AuditResult audit_persistence(const ExecutionTrace& trace) {
    const auto& cfg = trace.config;
    for (const auto& tx : trace.txs) {
        for (PlayerId p = 0; p < tx.at.size(); ++p) {
            if (cfg.is_adversary(p) || !tx.at[p]) continue;
            const auto& inc = *tx.at[p];
            // First round at which p holds the tx k deep.
            std::optional<std::uint64_t> deep;
            for (std::uint64_t r = inc.round; r <= trace.rounds; ++r) {
                if (trace.tip_at(p, r) >= inc.height + cfg.k) {
                    deep = r;
                    break;
                }
            }
            if (!deep) continue;
            const std::uint64_t horizon = std::min<std::uint64_t>(*deep + cfg.delta, trace.rounds);
            const auto list = trace.holders(tx, cfg.k, horizon, &inc.served);
            const double fraction = static_cast<double>(list.size()) / cfg.total_players;
            if (!(fraction > cfg.epsilon)) {
                std::ostringstream msg;
                msg << "tx " << to_hex(tx.tx).substr(0, 16) << " held " << cfg.k << "-deep by honest player " << p
                    << " but accepted by only " << list.size() << "/" << cfg.total_players << " players";
                return {false, tx.tx, msg.str()};
            }
        }
    }
    return {};
}

AuditResult audit_liveness(const ExecutionTrace& trace) {
    const auto& cfg = trace.config;
    for (const auto& tx : trace.txs) {
        if (!tx.honest_origin) continue;
        const std::uint64_t horizon = tx.submit_round + cfg.delta;
        if (horizon > trace.rounds) continue;  // not yet decidable
        // Largest group of players agreeing on the served state.
        std::map<Digest, std::size_t> groups;
        for (auto p : trace.holders(tx, cfg.k, horizon)) ++groups[tx.at[p]->served];
        std::size_t best = 0;
        for (const auto& [_, n] : groups) best = std::max(best, n);
        const double fraction = static_cast<double>(best) / cfg.total_players;
        if (!(fraction > cfg.epsilon)) {
            std::ostringstream msg;
            msg << "honest tx " << to_hex(tx.tx).substr(0, 16) << " reached " << best << "/" << cfg.total_players
                << " players within delta=" << cfg.delta << " rounds";
            return {false, tx.tx, msg.str()};
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Ledger

Ledger::Ledger(LedgerConfig config, StateMachineFactory factory)
    : config_(std::move(config)), factory_(std::move(factory)), rng_(prim::Drbg(config_.seed).fork("ledger")) {
    config_.validate();
    if (!factory_) factory_ = [] { return std::make_unique<HashChainMachine>(); };
    trace_.config = config_;
    trace_.tips.assign(config_.total_players, std::vector<std::uint64_t>{0});
    replicas_.resize(config_.total_players);
    for (PlayerId p = 0; p < config_.total_players; ++p) {
        auto& r = replicas_[p];
        r.id = p;
        r.adversarial = config_.is_adversary(p);
        r.machine = factory_();
        Block genesis;
        genesis.state_root = r.machine->state_root();
        r.chain.push_back(std::move(genesis));
    }
}

void Ledger::check_player(PlayerId p) const {
    if (p >= replicas_.size()) throw Error(Errc::unknown_player, "unknown player " + std::to_string(p));
}

bool Ledger::signature_ok(const Transaction& tx) const {
    if (config_.faults.no_signature_check) return true;
    auto it = sig_cache_.find(tx.id);
    if (it != sig_cache_.end()) return it->second;
    const bool ok = tx.id == tx.compute_id() && prim::verify(tx.signer, tx.signature, tx.signing_message());
    sig_cache_.emplace(tx.id, ok);
    return ok;
}

std::size_t Ledger::trace_index(const Digest& tx, std::uint64_t submit_round, bool honest) {
    auto it = trace_pos_.find(tx);
    if (it != trace_pos_.end()) return it->second;
    TxRecord rec;
    rec.tx = tx;
    rec.submit_round = submit_round;
    rec.honest_origin = honest;
    rec.at.resize(config_.total_players);
    trace_.txs.push_back(std::move(rec));
    trace_pos_.emplace(tx, trace_.txs.size() - 1);
    return trace_.txs.size() - 1;
}

SubmitReceipt Ledger::submit(const Transaction& tx, bool honest_origin) {
    using Status = SubmitReceipt::Status;
    if (!signature_ok(tx)) return {Status::bad_signature};
    if (!used_nonces_.emplace(tx.signer, tx.nonce).second) return {Status::replayed_nonce};

    known_.emplace(tx.id, tx);
    trace_index(tx.id, round_, honest_origin);

    const auto key = std::make_pair(tx.nonce, tx.id);
    if (config_.faults.no_tx_replication) {
        replicas_[rng_.uniform(replicas_.size())].pending.emplace(key, tx);
    } else {
        for (auto& r : replicas_) r.pending.emplace(key, tx);
    }
    if (config_.strategy == Strategy::censor) {
        for (auto& r : replicas_) {
            if (r.adversarial && rng_.coin()) r.censored.insert(tx.id);
        }
    }
    return {Status::accepted};
}

Digest Ledger::intern(const StateSnapshot& s) {
    auto d = s.digest();
    snapshots_.try_emplace(d, s);
    return d;
}

void Ledger::produce_block(Replica& r) {
    const bool adversarial = r.adversarial && config_.strategy != Strategy::honest;
    if (adversarial && config_.strategy == Strategy::withhold && rng_.coin()) return;

    Block block;
    block.height = r.chain.back().height + 1;
    block.parent = r.chain.back().digest();

    std::vector<std::pair<std::uint64_t, Digest>> included;
    for (const auto& [key, tx] : r.pending) {
        if (adversarial && config_.strategy == Strategy::censor && r.censored.count(tx.id) != 0) continue;
        included.push_back(key);
        auto sub = substitutions_.find({r.id, tx.id});
        block.txs.push_back(sub == substitutions_.end() ? tx : sub->second);
    }
    for (const auto& key : included) r.pending.erase(key);

    for (std::uint32_t pos = 0; pos < block.txs.size(); ++pos) {
        const auto& tx = block.txs[pos];
        StateSnapshot snap{block.height, pos, r.machine->apply(tx, block.height)};
        Location loc{block.height, pos, intern(snap), {}};
        if (adversarial && config_.strategy == Strategy::equivocate) {
            StateSnapshot altered = snap;
            if (altered.state.empty()) {
                altered.state.push_back(1);
            } else {
                altered.state.back() ^= 0x01;
            }
            loc.served = intern(altered);
        } else {
            loc.served = loc.snapshot;
        }
        r.located[tx.id] = loc;
        r.by_served[loc.served] = tx.id;
        known_.emplace(tx.id, tx);

        const bool original = trace_pos_.count(tx.id) != 0;
        auto idx = trace_index(tx.id, round_, original ? trace_.txs[trace_pos_[tx.id]].honest_origin : false);
        trace_.txs[idx].at[r.id] = Inclusion{round_, block.height, loc.served};
    }
    block.state_root = r.machine->state_root();
    r.chain.push_back(std::move(block));
}

void Ledger::advance_round() {
    ++round_;
    for (auto& r : replicas_) {
        produce_block(r);
        trace_.tips[r.id].push_back(r.chain.back().height);
    }
    for (const auto& r : replicas_) {
        RoundRecord rec;
        rec.round = round_;
        rec.player = r.id;
        rec.tip = r.chain.back().digest();
        const auto tip = r.chain.back().height;
        if (tip >= config_.k) rec.confirmed_prefix = r.chain[tip - config_.k].digest();
        trace_.records.push_back(rec);
    }
    trace_.rounds = round_;
}

void Ledger::advance_rounds(std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) advance_round();
}

bool Ledger::advance_until_confirmed(const Digest& tx, std::uint64_t limit) {
    for (std::uint64_t i = 0; i <= limit; ++i) {
        if (confirmed(tx)) return true;
        if (i < limit) advance_round();
    }
    return false;
}

bool Ledger::depth_ok(const Replica& r, std::uint64_t height) const {
    return r.chain.back().height >= height + config_.k;
}

bool Ledger::confirmed_at(PlayerId player, const Digest& tx) const {
    check_player(player);
    const auto& r = replicas_[player];
    auto it = r.located.find(tx);
    if (it == r.located.end()) return false;
    return config_.faults.no_confirmation || depth_ok(r, it->second.height);
}

std::optional<Digest> Ledger::served_digest(const Replica& r, const Digest& tx) const {
    auto it = r.located.find(tx);
    if (it == r.located.end()) return std::nullopt;
    if (!config_.faults.no_confirmation && !depth_ok(r, it->second.height)) return std::nullopt;
    return it->second.served;
}

std::optional<StateSnapshot> Ledger::speculative(const Replica& r, const Digest& tx) const {
    auto machine = r.machine->clone();
    const std::uint64_t height = r.chain.back().height + 1;
    std::uint32_t pos = 0;
    for (const auto& [key, pending] : r.pending) {
        if (r.adversarial && config_.strategy == Strategy::censor && r.censored.count(pending.id) != 0) continue;
        auto state = machine->apply(pending, height);
        if (pending.id == tx) return StateSnapshot{height, pos, std::move(state)};
        ++pos;
    }
    return std::nullopt;
}

StateSnapshot Ledger::read_state_at(PlayerId player, const Transaction& tx) const {
    check_player(player);
    const auto& r = replicas_[player];
    if (auto d = served_digest(r, tx.id)) return snapshots_.at(*d);
    if (config_.faults.no_confirmation) {
        if (auto s = speculative(r, tx.id)) return *s;
    }
    throw Error(Errc::not_confirmed, "tx " + to_hex(tx.id).substr(0, 16) + " not confirmed at player " +
                                         std::to_string(player));
}

StateSnapshot Ledger::read_state(const Transaction& tx) const {
    std::map<Digest, std::pair<std::size_t, StateSnapshot>> votes;
    for (const auto& r : replicas_) {
        StateSnapshot snap;
        try {
            snap = read_state_at(r.id, tx);
        } catch (const Error&) {
            continue;
        }
        if (config_.faults.no_state_replication) return snap;
        auto& slot = votes[snap.digest()];
        if (slot.first++ == 0) slot.second = std::move(snap);
    }
    for (const auto& [_, vote] : votes) {
        if (static_cast<double>(vote.first) / config_.total_players > config_.epsilon) return vote.second;
    }
    throw Error(Errc::not_confirmed, "no quorum holds tx " + to_hex(tx.id).substr(0, 16) + " confirmed");
}

Transaction Ledger::read_tx(const StateSnapshot& snapshot) const {
    const auto d = snapshot.digest();
    std::map<Digest, std::size_t> votes;
    for (const auto& r : replicas_) {
        auto it = r.by_served.find(d);
        if (it == r.by_served.end()) continue;
        if (!confirmed_at(r.id, it->second)) continue;
        if (config_.faults.no_state_replication) return known_.at(it->second);
        ++votes[it->second];
    }
    for (const auto& [tx, n] : votes) {
        if (static_cast<double>(n) / config_.total_players > config_.epsilon) return known_.at(tx);
    }
    throw Error(Errc::unknown_state, "no confirmed transaction produced this state");
}

std::vector<PlayerId> Ledger::find_player(const Transaction& tx, std::uint32_t k, std::uint32_t delta) const {
    auto it = trace_pos_.find(tx.id);
    if (it == trace_pos_.end()) return {};
    const auto& rec = trace_.txs[it->second];
    const std::uint64_t horizon = std::min<std::uint64_t>(rec.submit_round + delta, round_);
    return trace_.holders(rec, k, horizon);
}

std::vector<Transaction> Ledger::find_tx(PlayerId player, std::uint32_t k) const {
    check_player(player);
    const auto& chain = replicas_[player].chain;
    std::vector<Transaction> out;
    const auto tip = chain.back().height;
    for (const auto& block : chain) {
        if (block.height + k > tip) break;
        out.insert(out.end(), block.txs.begin(), block.txs.end());
    }
    return out;
}

double Ledger::acceptance(const Digest& tx, const StateSnapshot& snapshot) const {
    const auto d = snapshot.digest();
    std::size_t n = 0;
    for (const auto& r : replicas_) {
        auto served = served_digest(r, tx);
        if (served && *served == d) ++n;
    }
    return static_cast<double>(n) / config_.total_players;
}

bool Ledger::accepted(const Digest& tx, const StateSnapshot& snapshot) const {
    const double a = acceptance(tx, snapshot);
    return config_.faults.no_state_replication ? a > 0.0 : a > config_.epsilon;
}

bool Ledger::confirmed(const Digest& tx) const {
    std::size_t n = 0;
    for (const auto& r : replicas_) {
        if (confirmed_at(r.id, tx)) ++n;
    }
    if (config_.faults.no_state_replication) return n > 0;
    return static_cast<double>(n) / config_.total_players > config_.epsilon;
}

std::optional<Transaction> Ledger::find_transaction(const Digest& id) const {
    auto it = known_.find(id);
    if (it == known_.end()) return std::nullopt;
    return it->second;
}

LedgerView Ledger::view(PlayerId player) const {
    check_player(player);
    const auto& r = replicas_[player];
    LedgerView v;
    v.player = player;
    v.chain = r.chain;
    for (const auto& [_, tx] : r.pending) v.pending.push_back(tx);
    return v;
}

std::uint64_t Ledger::tip(PlayerId player) const {
    check_player(player);
    return replicas_[player].chain.back().height;
}

const StateMachine& Ledger::machine(PlayerId player) const {
    check_player(player);
    return *replicas_[player].machine;
}

std::vector<PlayerId> Ledger::honest_players() const {
    std::vector<PlayerId> out;
    for (const auto& r : replicas_) {
        if (!r.adversarial) out.push_back(r.id);
    }
    return out;
}

void Ledger::substitute(PlayerId adversary, const Digest& original, Transaction replacement) {
    check_player(adversary);
    if (!replicas_[adversary].adversarial) {
        throw Error(Errc::configuration, "player " + std::to_string(adversary) + " is not adversarial");
    }
    substitutions_.insert_or_assign({adversary, original}, std::move(replacement));
}

}  // namespace scsec::ledger
