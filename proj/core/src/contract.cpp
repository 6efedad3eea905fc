#include "scsec/contract.hpp"

#include <algorithm>
#include <stdexcept>

#include "scsec/codec.hpp"
#include "scsec/error.hpp"
#include "scsec/hash.hpp"

namespace scsec::contract {

Bytes encode_state(const State& state) {
    Encoder enc;
    enc.u64(state.size());
    for (const auto& [key, value] : state) enc.field(key).field(value);
    return std::move(enc).take();
}

State decode_state(ByteView bytes) {
    Decoder dec(bytes);
    State out;
    const auto n = dec.u64();
    std::string prev;
    for (std::uint64_t i = 0; i < n; ++i) {
        auto key = dec.field_string();
        if (i > 0 && key <= prev) throw CodecError("state keys not strictly increasing");
        prev = key;
        out.emplace(std::move(key), dec.field_bytes());
    }
    dec.expect_done();
    return out;
}

Digest state_digest(const State& state) { return prim::tagged_hash("scsec.state", encode_state(state)); }

Bytecode& Bytecode::add(std::string opcode, Reqcode reqcode, Procedure procedure) {
    if (!reqcode || !procedure) throw std::invalid_argument("opcode '" + opcode + "' needs a guard and a body");
    if (find(opcode) != nullptr) throw std::invalid_argument("duplicate opcode '" + opcode + "'");
    entries_.push_back({std::move(opcode), std::move(reqcode), std::move(procedure)});
    return *this;
}

const OpcodeEntry* Bytecode::find(std::string_view opcode) const {
    for (const auto& e : entries_) {
        if (e.name == opcode) return &e;
    }
    return nullptr;
}

void CodeRegistry::add(Bytecode code) {
    auto name = code.name();
    codes_.insert_or_assign(std::move(name), std::move(code));
}

const Bytecode* CodeRegistry::find(std::string_view name) const {
    auto it = codes_.find(name);
    return it == codes_.end() ? nullptr : &it->second;
}

Bytes CallHeader::encode() const {
    Encoder enc;
    enc.u64(static_cast<std::uint64_t>(kind)).field(code).field(instance).field(opcode);
    return std::move(enc).take();
}

CallHeader CallHeader::decode(ByteView bytes) {
    Decoder dec(bytes);
    CallHeader h;
    const auto kind = dec.u64();
    if (kind > 1) throw CodecError("unknown call kind");
    h.kind = static_cast<CallKind>(kind);
    h.code = dec.field_string();
    h.instance = dec.digest();
    h.opcode = dec.field_string();
    dec.expect_done();
    return h;
}

ledger::Transaction make_deploy(const prim::SigningKey& key, std::string code, std::uint64_t nonce) {
    CallHeader h;
    h.kind = CallKind::deploy;
    h.code = std::move(code);
    return ledger::make_transaction(key, ledger::TxPayload{h.encode(), {}}.encode(), nonce);
}

ledger::Transaction make_invoke(const prim::SigningKey& key, const Digest& instance, std::string opcode,
                                Bytes args, std::uint64_t nonce) {
    CallHeader h;
    h.kind = CallKind::invoke;
    h.instance = instance;
    h.opcode = std::move(opcode);
    return ledger::make_transaction(key, ledger::TxPayload{h.encode(), std::move(args)}.encode(), nonce);
}

std::string_view outcome_name(Outcome o) {
    switch (o) {
        case Outcome::applied: return "applied";
        case Outcome::guard_failed: return "guard-failed";
        case Outcome::error: return "error";
    }
    return "?";
}

Bytes Receipt::encode() const {
    Encoder enc;
    enc.field(tx).field(contract).u64(static_cast<std::uint64_t>(outcome)).field(pre_state).field(post_state);
    enc.u64(height).u64(ops.size());
    for (const auto& [op, n] : ops) enc.field(op).u64(n);
    enc.field(detail);
    return std::move(enc).take();
}

Receipt Receipt::decode(ByteView bytes) {
    Decoder dec(bytes);
    Receipt r;
    r.tx = dec.digest();
    r.contract = dec.digest();
    const auto outcome = dec.u64();
    if (outcome > 2) throw CodecError("unknown receipt outcome");
    r.outcome = static_cast<Outcome>(outcome);
    r.pre_state = dec.digest();
    r.post_state = dec.digest();
    r.height = dec.u64();
    const auto n = dec.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        auto op = dec.field_string();
        r.ops[op] = dec.u64();
    }
    r.detail = dec.field_string();
    dec.expect_done();
    return r;
}

// ---------------------------------------------------------------------------

ContractRuntime::ContractRuntime(std::shared_ptr<const CodeRegistry> codes) : codes_(std::move(codes)) {
    if (!codes_) throw std::invalid_argument("ContractRuntime needs a code registry");
}

std::unique_ptr<ledger::StateMachine> ContractRuntime::clone() const {
    return std::make_unique<ContractRuntime>(*this);
}

const ContractInstance* ContractRuntime::instance(const Digest& id) const {
    auto it = slots_.find(id);
    return it == slots_.end() ? nullptr : &it->second.instance;
}

const Receipt* ContractRuntime::receipt(const Digest& tx) const {
    auto it = receipt_index_.find(tx);
    return it == receipt_index_.end() ? nullptr : &log_[it->second];
}

std::optional<State> ContractRuntime::state_at(const Digest& instance, std::uint64_t height) const {
    auto it = slots_.find(instance);
    if (it == slots_.end()) return std::nullopt;
    const auto& h = it->second.history;
    auto pos = std::upper_bound(h.begin(), h.end(), height,
                                [](std::uint64_t v, const Checkpoint& c) { return v < c.height; });
    if (pos == h.begin()) return std::nullopt;
    return *std::prev(pos)->state;
}

std::string ContractRuntime::export_receipts() const {
    std::string out;
    for (const auto& r : log_) {
        out += to_hex(r.encode());
        out += '\n';
    }
    return out;
}

void ContractRuntime::checkpoint(Slot& slot, std::uint64_t height) {
    auto snap = std::make_shared<const State>(slot.instance.state);
    if (!slot.history.empty() && slot.history.back().height == height) {
        slot.history.back().state = std::move(snap);
    } else {
        slot.history.push_back({height, std::move(snap)});
    }
}

Receipt ContractRuntime::execute(const ledger::Transaction& tx, std::uint64_t height, Digest& touched) {
    Receipt r;
    r.tx = tx.id;
    r.height = height;

    CallHeader header;
    ledger::TxPayload payload;
    try {
        payload = ledger::TxPayload::decode(tx.payload);
        header = CallHeader::decode(payload.metadata);
    } catch (const CodecError&) {
        r.detail = "malformed call";
        return r;
    }

    if (header.kind == CallKind::deploy) {
        r.contract = tx.id;
        const auto empty = state_digest({});
        r.pre_state = r.post_state = empty;
        if (codes_->find(header.code) == nullptr) {
            r.detail = "unknown code '" + header.code + "'";
            return r;
        }
        if (slots_.count(tx.id) != 0) {
            r.outcome = Outcome::guard_failed;
            r.detail = "instance exists";
            return r;
        }
        Slot slot;
        slot.instance = ContractInstance{tx.id, header.code, tx.signer, tx.id, {}};
        slot.seen.emplace(tx.signer, tx.nonce);
        auto& placed = slots_.emplace(tx.id, std::move(slot)).first->second;
        checkpoint(placed, height);
        r.outcome = Outcome::applied;
        r.ops["deploy"] = 1;
        touched = tx.id;
        return r;
    }

    r.contract = header.instance;
    auto it = slots_.find(header.instance);
    if (it == slots_.end()) {
        r.detail = std::string(errc_name(Errc::unknown_instance));
        return r;
    }
    auto& slot = it->second;
    touched = header.instance;
    r.pre_state = r.post_state = state_digest(slot.instance.state);
    const auto* code = codes_->find(slot.instance.code);
    const auto* entry = code == nullptr ? nullptr : code->find(header.opcode);
    if (entry == nullptr) {
        r.detail = std::string(errc_name(Errc::unknown_opcode));
        return r;
    }
    if (slot.seen.count({tx.signer, tx.nonce}) != 0) {
        r.outcome = Outcome::guard_failed;
        r.detail = "replayed nonce";
        return r;
    }
    CallContext ctx{tx, slot.instance.id, slot.instance.deployer, height, payload.aux};
    if (!entry->reqcode(slot.instance.state, ctx)) {
        r.outcome = Outcome::guard_failed;
        r.detail = "reqcode '" + entry->name + "' rejected";
        return r;
    }
    State next = slot.instance.state;
    OpMeter meter;
    try {
        entry->procedure(next, ctx, meter);
    } catch (const std::exception& e) {
        r.detail = e.what();
        return r;
    }
    slot.instance.state = std::move(next);
    slot.seen.emplace(tx.signer, tx.nonce);
    checkpoint(slot, height);
    r.outcome = Outcome::applied;
    r.post_state = state_digest(slot.instance.state);
    r.ops = std::move(meter.counts);
    return r;
}

Bytes ContractRuntime::apply(const ledger::Transaction& tx, std::uint64_t height) {
    Digest touched{};
    auto r = execute(tx, height, touched);
    receipt_index_.insert_or_assign(tx.id, log_.size());
    log_.push_back(std::move(r));

    Encoder root;
    root.field(root_);
    for (const auto& [id, slot] : slots_) root.field(id).field(state_digest(slot.instance.state));
    root_ = prim::tagged_hash("scsec.contracts", root.bytes());

    Encoder out;
    out.field(touched);
    auto it = slots_.find(touched);
    out.field(encode_state(it == slots_.end() ? State{} : it->second.instance.state));
    return std::move(out).take();
}

ContractState decode_snapshot(const ledger::StateSnapshot& snapshot) {
    Decoder dec(snapshot.state);
    ContractState out;
    out.instance = dec.digest();
    out.state = decode_state(dec.field());
    dec.expect_done();
    return out;
}

// ---------------------------------------------------------------------------

ContractSystem::ContractSystem(ledger::LedgerConfig config, std::shared_ptr<const CodeRegistry> codes)
    : codes_(codes), ledger_(std::move(config), [codes] { return std::make_unique<ContractRuntime>(codes); }) {}

const ContractRuntime& ContractSystem::runtime(ledger::PlayerId player) const {
    return static_cast<const ContractRuntime&>(ledger_.machine(player));
}

bool ContractSystem::quorum(std::size_t count) const {
    const auto& cfg = ledger_.config();
    if (cfg.faults.no_state_replication) return count > 0;
    return static_cast<double>(count) / cfg.total_players > cfg.epsilon;
}

bool ContractSystem::submit_and_confirm(const ledger::Transaction& tx, std::uint64_t limit) {
    if (!ledger_.submit(tx).accepted()) return false;
    return ledger_.advance_until_confirmed(tx.id, limit);
}

std::pair<Digest, State> ContractSystem::deploy(const ledger::Transaction& tx) const {
    auto snap = ledger_.read_state(tx);
    auto r = receipt(tx);
    CallHeader header;
    try {
        header = CallHeader::decode(ledger::TxPayload::decode(tx.payload).metadata);
    } catch (const CodecError&) {
        throw Error(Errc::unknown_instance, "not a deploy transaction");
    }
    if (header.kind != CallKind::deploy || r.outcome != Outcome::applied) {
        throw Error(Errc::unknown_instance, "transaction did not deploy an instance");
    }
    auto decoded = decode_snapshot(snap);
    return {decoded.instance, std::move(decoded.state)};
}

State ContractSystem::transfer(const Digest& instance, const ledger::Transaction& tx) const {
    const ContractInstance* inst = nullptr;
    for (auto p : ledger_.honest_players()) {
        if ((inst = runtime(p).instance(instance)) != nullptr) break;
    }
    if (inst == nullptr) throw Error(Errc::unknown_instance, "unknown contract instance " + to_hex(instance));
    CallHeader header;
    try {
        header = CallHeader::decode(ledger::TxPayload::decode(tx.payload).metadata);
    } catch (const CodecError&) {
        throw Error(Errc::unknown_opcode, "malformed call");
    }
    if (header.kind != CallKind::invoke || header.instance != instance) {
        throw Error(Errc::unknown_instance, "transaction does not call instance " + to_hex(instance));
    }
    const auto* code = codes_->find(inst->code);
    if (code == nullptr || code->find(header.opcode) == nullptr) {
        throw Error(Errc::unknown_opcode, "unknown opcode '" + header.opcode + "'");
    }
    auto snap = ledger_.read_state(tx);
    return decode_snapshot(snap).state;
}

State ContractSystem::access(const Digest& instance) const {
    const auto& cfg = ledger_.config();
    std::map<Digest, std::pair<std::size_t, State>> votes;
    bool known = false;
    for (ledger::PlayerId p = 0; p < cfg.total_players; ++p) {
        const auto& rt = runtime(p);
        if (rt.instance(instance) == nullptr) continue;
        known = true;
        const auto tip = ledger_.tip(p);
        std::optional<State> s;
        if (cfg.faults.no_confirmation) {
            s = rt.state_at(instance, tip);
        } else if (tip >= cfg.k) {
            s = rt.state_at(instance, tip - cfg.k);
        }
        if (!s) continue;
        if (cfg.faults.no_state_replication) return *s;
        auto& slot = votes[state_digest(*s)];
        if (slot.first++ == 0) slot.second = std::move(*s);
    }
    if (!known) throw Error(Errc::unknown_instance, "unknown contract instance " + to_hex(instance));
    for (auto& [_, v] : votes) {
        if (quorum(v.first)) return v.second;
    }
    throw Error(Errc::not_confirmed, "instance " + to_hex(instance).substr(0, 16) + " not confirmed by a quorum");
}

bool ContractSystem::inspect(const ledger::Transaction& tx) const {
    if (!ledger_.signature_ok(tx)) return false;
    std::size_t n = 0;
    for (ledger::PlayerId p = 0; p < ledger_.config().total_players; ++p) {
        if (!ledger_.confirmed_at(p, tx.id)) continue;
        const auto* r = runtime(p).receipt(tx.id);
        if (r != nullptr && r->outcome == Outcome::applied) ++n;
    }
    return quorum(n);
}

Receipt ContractSystem::receipt(const ledger::Transaction& tx) const {
    std::map<Bytes, std::size_t> votes;
    for (ledger::PlayerId p = 0; p < ledger_.config().total_players; ++p) {
        if (!ledger_.confirmed_at(p, tx.id)) continue;
        if (const auto* r = runtime(p).receipt(tx.id)) {
            auto enc = r->encode();
            if (ledger_.config().faults.no_state_replication) return *r;
            ++votes[enc];
        }
    }
    for (const auto& [enc, n] : votes) {
        if (quorum(n)) return Receipt::decode(enc);
    }
    throw Error(Errc::not_confirmed, "no quorum receipt for tx " + to_hex(tx.id).substr(0, 16));
}

}  // namespace scsec::contract
