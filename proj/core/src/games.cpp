#include "scsec/games.hpp"

#include <optional>

#include "scsec/cbe.hpp"
#include "scsec/codec.hpp"
#include "scsec/error.hpp"
#include "scsec/hash.hpp"
#include "scsec/rbe.hpp"

namespace scsec::games {

using ledger::StateSnapshot;
using ledger::Transaction;

std::string_view game_name(Game g) {
    switch (g) {
        case Game::neqv: return "neqv";
        case Game::nrep: return "nrep";
        case Game::nfrm: return "nfrm";
    }
    return "?";
}

std::string_view protocol_name(Protocol p) { return p == Protocol::cbe ? "cbe" : "rbe"; }

Game parse_game(std::string_view name) {
    for (auto g : {Game::neqv, Game::nrep, Game::nfrm}) {
        if (game_name(g) == name) return g;
    }
    throw Error(Errc::configuration, "unknown game '" + std::string(name) + "'");
}

Protocol parse_protocol(std::string_view name) {
    for (auto p : {Protocol::cbe, Protocol::rbe}) {
        if (protocol_name(p) == name) return p;
    }
    throw Error(Errc::configuration, "unknown protocol '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

StateSnapshot BlockchainOracle::read_state(const Transaction& tx) {
    log_.push_back({true, tx.encode()});
    auto it = l1_.find(tx.id);
    if (it != l1_.end()) return it->second;
    ++hits_;
    auto s = chain_->read_state(tx);
    l1_.emplace(tx.id, s);
    return s;
}

Transaction BlockchainOracle::read_tx(const StateSnapshot& state) {
    log_.push_back({false, state.encode()});
    const auto d = state.digest();
    auto it = l2_.find(d);
    if (it != l2_.end()) return it->second;
    ++hits_;
    auto tx = chain_->read_tx(state);
    l2_.emplace(d, tx);
    return tx;
}

bool BlockchainOracle::in_l1(const Digest& tx, const Digest& state) const {
    auto it = l1_.find(tx);
    return it != l1_.end() && it->second.digest() == state;
}

bool BlockchainOracle::in_l2(const Digest& state, const Digest& tx) const {
    auto it = l2_.find(state);
    return it != l2_.end() && it->second.id == tx;
}

std::set<std::pair<Digest, Digest>> BlockchainOracle::l1() const {
    std::set<std::pair<Digest, Digest>> out;
    for (const auto& [tx, s] : l1_) out.emplace(tx, s.digest());
    return out;
}

Bytes CallMetadata::encode() const {
    Encoder enc;
    enc.field(instance).field(opcode).field(args);
    return std::move(enc).take();
}

Transaction UserOracle::sign(const CallMetadata& metadata) {
    auto key = metadata.encode();
    auto it = set_tx_.find(key);
    if (it != set_tx_.end()) return it->second;
    auto tx = contract::make_invoke(key_, metadata.instance, metadata.opcode, metadata.args, next_nonce_++);
    set_tx_.emplace(std::move(key), tx);
    return tx;
}

bool UserOracle::contains(const Digest& tx) const {
    for (const auto& [_, t] : set_tx_) {
        if (t.id == tx) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------

const std::vector<AdversaryStrategy>& builtin_strategies() {
    using C = Capability;
    using LS = ledger::Strategy;
    static const std::vector<AdversaryStrategy> kAll = {
        {"serve-divergent", Game::neqv, {C::minority_players, C::divergent_state}, LS::equivocate},
        {"front-run", Game::neqv, {C::minority_players, C::mutate_transactions}, LS::withhold},
        {"mutate-tx", Game::nrep, {C::minority_players, C::mutate_transactions}, LS::honest},
        {"random-forge", Game::nfrm, {C::minority_players, C::random_forge}, LS::censor},
        {"replay-forge", Game::nfrm, {C::minority_players, C::random_forge}, LS::withhold},
    };
    return kAll;
}

const AdversaryStrategy& find_strategy(std::string_view name) {
    for (const auto& s : builtin_strategies()) {
        if (s.name == name) return s;
    }
    throw Error(Errc::configuration, "unknown adversary strategy '" + std::string(name) + "'");
}

ledger::LedgerConfig default_ledger_config() {
    ledger::LedgerConfig c;
    c.total_players = 5;
    c.adversary_players = {3, 4};
    c.epsilon = 0.5;
    c.k = 3;
    c.delta = 6;
    return c;
}

const std::vector<Control>& negative_controls() {
    static const std::vector<Control> kAll = [] {
        ledger::Faults no_state;
        no_state.no_state_replication = true;
        ledger::Faults no_conf;
        no_conf.no_confirmation = true;
        ledger::Faults no_sig;
        no_sig.no_signature_check = true;
        return std::vector<Control>{
            {"neqv-without-state-replication", Game::neqv, "serve-divergent", no_state},
            {"neqv-without-confirmation", Game::neqv, "front-run", no_conf},
            {"nrep-without-state-replication", Game::nrep, "mutate-tx", no_state},
            {"nfrm-without-signature-check", Game::nfrm, "random-forge", no_sig},
        };
    }();
    return kAll;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t fault_bits(const ledger::Faults& f) {
    return (f.no_tx_replication ? 1u : 0u) | (f.no_state_replication ? 2u : 0u) | (f.no_confirmation ? 4u : 0u) |
           (f.no_signature_check ? 8u : 0u);
}

ledger::Faults faults_from_bits(std::uint64_t b) {
    if (b > 15) throw CodecError("unknown fault bits");
    ledger::Faults f;
    f.no_tx_replication = (b & 1) != 0;
    f.no_state_replication = (b & 2) != 0;
    f.no_confirmation = (b & 4) != 0;
    f.no_signature_check = (b & 8) != 0;
    return f;
}

}  // namespace

Bytes Witness::encode() const {
    Encoder enc;
    enc.field(game_name(game))
        .field(protocol_name(protocol))
        .field(strategy)
        .field(ledger_config)
        .u64(fault_bits(faults))
        .u64(seed)
        .u64(trial)
        .field(tx)
        .field(candidate);
    return std::move(enc).take();
}

Witness Witness::decode(ByteView bytes) {
    Decoder dec(bytes);
    Witness w;
    try {
        w.game = parse_game(dec.field_string());
        w.protocol = parse_protocol(dec.field_string());
    } catch (const Error& e) {
        throw CodecError(e.what());
    }
    w.strategy = dec.field_string();
    w.ledger_config = dec.field_string();
    w.faults = faults_from_bits(dec.u64());
    w.seed = dec.u64();
    w.trial = dec.u64();
    w.tx = dec.digest();
    w.candidate = dec.field_bytes();
    dec.expect_done();
    return w;
}

Digest Witness::digest() const { return prim::tagged_hash("scsec.games.witness", encode()); }

std::string GameTranscript::export_lines() const {
    std::string out;
    std::size_t next = 0;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        out += game_name(game);
        out += '\t' + std::to_string(t) + '\t' + (outcomes[t] ? "1" : "0") + '\t';
        out += outcomes[t] ? to_hex(witnesses.at(next++).digest()) : "-";
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

prim::SigningKey sig_key(prim::Drbg& rng) { return prim::SigningKey(prim::sample_keys(prim::Scheme::SIG, rng)); }

constexpr std::uint64_t kPeriod = 1;

// Long-lived keys shared by the trials of one (protocol, seed) run.
struct Fixture {
    Protocol protocol;
    prim::Drbg rng;
    prim::SigningKey operator_key;  // CA or curator deployer
    prim::SigningKey user_key;      // the honest user U
    prim::SigningKey rival_key;     // the adversary's own key
    std::shared_ptr<contract::CodeRegistry> codes = std::make_shared<contract::CodeRegistry>();

    std::optional<cbe::Setup> cbe_setup;
    std::optional<cbe::UserKeys> alice;
    cbe::Day alice_expiry = cbe::make_day(2022, 12, 31);

    std::optional<rbe::SetupResult> rbe_setup;
    prim::KeyMaterial alice_pke;
    prim::KeyMaterial rival_pke;

    Fixture(Protocol p, std::uint64_t seed)
        : protocol(p),
          rng(prim::Drbg(seed).fork(protocol_name(p))),
          operator_key(sig_key(rng)),
          user_key(sig_key(rng)),
          rival_key(sig_key(rng)) {
        if (p == Protocol::cbe) {
            codes->add(cbe::revocation_bytecode());
            cbe_setup = cbe::cbe_setup(2, 4, rng);
            cbe::KeyIssuer issuer(cbe_setup->pms);
            alice = issuer.keygen("alice", rng);
        } else {
            codes->add(rbe::curator_bytecode());
            rbe_setup = rbe::rbe_setup(rbe::kLambda, rng);
            alice_pke = rbe::rbe_keygen(rng);
            rival_pke = rbe::rbe_keygen(rng);
        }
    }

    std::string code() const {
        return std::string(protocol == Protocol::cbe ? cbe::kRevocationCode : rbe::kCuratorCode);
    }

    Transaction setup_tx(const Digest& instance) const {
        if (protocol == Protocol::cbe) {
            cbe::Enrollment e{"alice", alice->serial, alice_expiry, user_key.verification_key()};
            return cbe::enroll_tx(operator_key, instance, e, 1);
        }
        return rbe::init_tx(operator_key, instance, rbe_setup->crs, rbe_setup->pp, 1);
    }

    // The honest user's action.
    CallMetadata honest_call(const Digest& instance) const {
        if (protocol == Protocol::cbe) {
            cbe::RevocationRequest r{"alice", cbe::CertState::revoked, alice_expiry - 30};
            return {instance, "revoke", r.encode()};
        }
        return {instance, "register", rbe::Registration{"alice", alice_pke.public_key}.encode()};
    }

    // Signed for the adversary but never submitted; its guard would fail.
    CallMetadata benign_call(const Digest& instance) const {
        if (protocol == Protocol::cbe) {
            cbe::RevocationRequest r{"alice", cbe::CertState::revoked, alice_expiry + 1};
            return {instance, "revoke", r.encode()};
        }
        return {instance, "register", rbe::Registration{"alice", Bytes(7, 0)}.encode()};
    }

    // The action the nfrm adversary tries to pin on U.
    CallMetadata framing_call(const Digest& instance) const {
        if (protocol == Protocol::cbe) {
            cbe::RevocationRequest r{"alice", cbe::CertState::revoked, alice_expiry - 1};
            return {instance, "revoke", r.encode()};
        }
        return {instance, "register", rbe::Registration{"alice-backup", rival_pke.public_key}.encode()};
    }

    // Submitted by the rival key with nonce 0 so it sorts ahead of U's nonce-1 tx.
    Transaction front_run_tx(const Digest& instance) const {
        if (protocol == Protocol::cbe) {
            cbe::RevocationRequest r{"alice", cbe::CertState::revoked, alice_expiry - 60};
            return contract::make_invoke(rival_key, instance, "revoke", r.encode(), 0);
        }
        return rbe::register_tx(rival_key, instance, "front", rival_pke.public_key, 0);
    }

    // Enc under s, Dec under the decryptor's state; true when the outcome
    // agrees with what s says about the recipient.
    bool enc_dec(const StateSnapshot& s, const StateSnapshot& s_dec, prim::Drbg& trial_rng) const {
        const Bytes m = trial_rng.bytes(16);
        const auto enc_state = contract::decode_snapshot(s).state;
        const auto dec_state = contract::decode_snapshot(s_dec).state;
        if (protocol == Protocol::cbe) {
            const auto& setup = *cbe_setup;
            const auto enc_table = cbe::RevocationTable::from_state(enc_state);
            const auto* row = enc_table.find("alice");
            const bool valid = row != nullptr && row->state == cbe::CertState::valid;
            const auto ct = cbe::cbe_enc(setup.pms, cbe::public_part(*alice), kPeriod, m, trial_rng);
            const auto dec_table = cbe::RevocationTable::from_state(dec_state);
            const auto cert = cbe::cbe_cert(setup.ca, setup.pms, kPeriod, "alice", dec_table);
            const auto out = cert ? cbe::cbe_dec(*alice, *cert, setup.pms.xP, ct) : std::nullopt;
            return valid ? (out && *out == m) : !out;
        }
        const auto pp = rbe::pp_from_state(enc_state);
        const auto ct = rbe::rbe_enc(rbe_setup->crs, pp, "alice", m, trial_rng);
        const auto forest = rbe::forest_from_state(dec_state);
        if (!forest.contains("alice")) return false;
        const auto out = rbe::rbe_dec(alice_pke.secret_key, rbe::rbe_update(forest, "alice"), ct);
        return out.kind == rbe::DecResult::Kind::message && out.m == m;
    }
};

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
    Encoder enc;
    enc.u64(seed).u64(trial);
    return get_u64_be(prim::tagged_hash("scsec.games.trial", enc.bytes()).view().first(8));
}

// Everything the return condition looks at.
struct TrialRun {
    std::unique_ptr<contract::ContractSystem> sys;
    std::optional<BlockchainOracle> bc;
    std::optional<UserOracle> user;
    Transaction tx;
    std::optional<StateSnapshot> reference;  // s (neqv) or s' (nrep)
    Bytes candidate;
    bool dec_consistent = true;
};

void settle(contract::ContractSystem& sys) { sys.chain().advance_rounds(sys.chain().config().k + 1); }

TrialRun execute(const Fixture& fx, Game game, const AdversaryStrategy& strategy, const ledger::LedgerConfig& base,
                 std::uint64_t seed, std::uint64_t trial) {
    auto cfg = base;
    cfg.seed = trial_seed(seed, trial);
    cfg.strategy = strategy.ledger_strategy;
    prim::Drbg rng(cfg.seed);

    TrialRun run;
    run.sys = std::make_unique<contract::ContractSystem>(cfg, fx.codes);
    auto& sys = *run.sys;
    auto& chain = sys.chain();
    run.bc.emplace(chain);
    run.user.emplace(fx.user_key);

    // Setup and KeyGen happened in the fixture; deploy and initialise.
    const auto deploy = contract::make_deploy(fx.operator_key, fx.code(), 0);
    const Digest instance = deploy.id;
    chain.submit(deploy);
    chain.submit(fx.setup_tx(instance));
    chain.advance_round();

    switch (game) {
        case Game::neqv: {
            // Sign, ChainOpt.
            run.tx = run.user->sign(fx.honest_call(instance));
            chain.submit(run.tx);
            // The challenger reads s as soon as the ledger will answer.
            for (std::uint64_t i = 0; !run.reference; ++i) {
                try {
                    run.reference = run.bc->read_state(run.tx);
                } catch (const Error& e) {
                    if (e.code() != Errc::not_confirmed || i > 64) throw;
                    chain.advance_round();
                }
            }
            if (strategy.name == "front-run") chain.submit(fx.front_run_tx(instance));
            settle(sys);
            // Enc under s, then the decryptor's own query.
            run.dec_consistent = fx.enc_dec(*run.reference, run.bc->read_state(run.tx), rng);

            // The adversary reads the ledger directly and offers the most
            // widely served state that differs from s.
            std::optional<StateSnapshot> best;
            double best_acceptance = -1;
            for (ledger::PlayerId p = 0; p < cfg.total_players; ++p) {
                StateSnapshot s;
                try {
                    s = chain.read_state_at(p, run.tx);
                } catch (const Error&) {
                    continue;
                }
                if (s == *run.reference) continue;
                const double a = chain.acceptance(run.tx.id, s);
                if (a > best_acceptance) {
                    best_acceptance = a;
                    best = s;
                }
            }
            run.candidate = (best ? *best : *run.reference).encode();
            break;
        }
        case Game::nrep: {
            // The adversary is the user: it signs Tx itself and has its
            // players carry a re-signed twin in Tx's slot.
            const auto call = fx.honest_call(instance);
            run.tx = contract::make_invoke(fx.user_key, instance, call.opcode, call.args, 1);
            const auto twin = contract::make_invoke(fx.user_key, instance, call.opcode, call.args, 2);
            for (auto p : cfg.adversary_players) chain.substitute(p, run.tx.id, twin);
            chain.submit(run.tx);
            chain.advance_until_confirmed(run.tx.id);
            settle(sys);
            run.reference = run.bc->read_state(run.tx);
            (void)run.bc->read_tx(*run.reference);
            run.candidate = twin.encode();
            break;
        }
        case Game::nfrm: {
            run.tx = run.user->sign(fx.benign_call(instance));
            const auto framing = fx.framing_call(instance);
            Transaction forged;
            if (strategy.name == "replay-forge") {
                // Reuse a genuine signature on different content.
                forged = contract::make_invoke(fx.rival_key, instance, framing.opcode, framing.args, run.tx.nonce);
                forged.signer = run.tx.signer;
                forged.signature = run.tx.signature;
            } else {
                forged = contract::make_invoke(fx.rival_key, instance, framing.opcode, framing.args,
                                               rng.next_u64());
                forged.signer = fx.user_key.verification_key();
                forged.signature = rng.bytes(prim::kSignatureSize);
            }
            forged.id = forged.compute_id();
            chain.submit(forged, false);
            settle(sys);
            run.candidate = forged.encode();
            break;
        }
    }
    return run;
}

bool evaluate(Game game, const TrialRun& run, ByteView candidate) {
    const auto& sys = *run.sys;
    const auto& chain = sys.chain();
    try {
        switch (game) {
            case Game::neqv: {
                const auto s_star = StateSnapshot::decode(candidate);
                return !run.bc->in_l1(run.tx.id, s_star.digest()) && s_star != *run.reference &&
                       sys.inspect(run.tx) && chain.accepted(run.tx.id, s_star);
            }
            case Game::nrep: {
                const auto tx_star = Transaction::decode(candidate);
                if (tx_star.compute_id() != tx_star.id) return false;
                return !run.bc->in_l2(run.reference->digest(), tx_star.id) && tx_star.id != run.tx.id &&
                       sys.inspect(tx_star) && chain.accepted(tx_star.id, *run.reference);
            }
            case Game::nfrm: {
                const auto tx_star = Transaction::decode(candidate);
                if (tx_star.compute_id() != tx_star.id) return false;
                return !run.user->contains(tx_star.id) && tx_star.signer == run.user->verification_key() &&
                       sys.inspect(tx_star);
            }
        }
    } catch (const CodecError&) {
        return false;
    }
    return false;
}

std::string config_text(ledger::LedgerConfig c) {
    c.seed = 0;
    return c.to_text();
}

void check_bounds(Game game, const AdversaryStrategy& strategy, const ledger::LedgerConfig& base) {
    base.validate();
    if (strategy.game != game) {
        throw Error(Errc::configuration,
                    "strategy '" + strategy.name + "' is not a " + std::string(game_name(game)) + " strategy");
    }
    if (!base.honest_majority()) {
        throw Error(Errc::configuration, "adversary fraction must stay below epsilon");
    }
    if (base.adversary_players.empty() &&
        (strategy.capabilities.count(Capability::mutate_transactions) != 0 ||
         strategy.capabilities.count(Capability::divergent_state) != 0)) {
        throw Error(Errc::configuration, "strategy '" + strategy.name + "' needs adversarial players");
    }
}

}  // namespace

GameTranscript run_game(Game game, Protocol protocol, const AdversaryStrategy& strategy, std::uint64_t trials,
                        std::uint64_t seed, const ledger::LedgerConfig& base) {
    check_bounds(game, strategy, base);
    const Fixture fx(protocol, seed);
    GameTranscript t;
    t.game = game;
    t.protocol = protocol;
    t.strategy = strategy.name;
    t.seed = seed;
    t.trials = trials;
    for (std::uint64_t i = 0; i < trials; ++i) {
        const auto run = execute(fx, game, strategy, base, seed, i);
        const bool win = evaluate(game, run, run.candidate);
        t.outcomes.push_back(win);
        if (!run.dec_consistent) ++t.decrypt_mismatches;
        if (!win) continue;
        ++t.wins;
        Witness w;
        w.game = game;
        w.protocol = protocol;
        w.strategy = strategy.name;
        w.ledger_config = config_text(base);
        w.faults = base.faults;
        w.seed = seed;
        w.trial = i;
        w.tx = run.tx.id;
        w.candidate = run.candidate;
        t.witnesses.push_back(std::move(w));
    }
    return t;
}

bool recheck_witness(const Witness& w) {
    try {
        const auto& strategy = find_strategy(w.strategy);
        auto base = ledger::LedgerConfig::from_text(w.ledger_config);
        base.faults = w.faults;
        check_bounds(w.game, strategy, base);
        const Fixture fx(w.protocol, w.seed);
        const auto run = execute(fx, w.game, strategy, base, w.seed, w.trial);
        return run.tx.id == w.tx && evaluate(w.game, run, w.candidate);
    } catch (const Error&) {
        return false;
    }
}

}  // namespace scsec::games
