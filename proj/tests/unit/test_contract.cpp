#include <gtest/gtest.h>

#include "scsec/codec.hpp"
#include "scsec/contract.hpp"
#include "scsec/error.hpp"

using namespace scsec;
using namespace scsec::contract;
using ledger::Transaction;

namespace {

prim::SigningKey key_for(std::uint64_t seed) {
    prim::Drbg rng(seed);
    return prim::SigningKey(prim::sample_keys(prim::Scheme::SIG, rng));
}

// Toy registry: "put" stores aux under "k/<signer prefix>"; its guard refuses
// empty aux. "owner-only" may be called by the deployer alone.
std::shared_ptr<CodeRegistry> registry() {
    auto reg = std::make_shared<CodeRegistry>();
    Bytecode kv("kv");
    kv.add(
        "put", [](const State&, const CallContext& ctx) { return !ctx.args.empty(); },
        [](State& s, const CallContext& ctx, OpMeter& meter) {
            s["k/" + to_hex(ctx.tx.signer).substr(0, 8)] = ctx.args;
            meter.add("write");
        });
    kv.add(
        "owner-only", [](const State&, const CallContext& ctx) { return ctx.tx.signer == ctx.deployer; },
        [](State& s, const CallContext&, OpMeter&) { s["owner"] = to_bytes("yes"); });
    kv.add(
        "explode", [](const State&, const CallContext&) { return true; },
        [](State& s, const CallContext&, OpMeter&) {
            s["partial"] = to_bytes("x");
            throw std::runtime_error("boom");
        });
    reg->add(std::move(kv));
    return reg;
}

ledger::LedgerConfig config(std::vector<ledger::PlayerId> adv = {}) {
    ledger::LedgerConfig c;
    c.adversary_players = std::move(adv);
    c.strategy = ledger::Strategy::equivocate;
    return c;
}

struct Fixture {
    ContractSystem sys{config({4}), registry()};
    prim::SigningKey owner = key_for(1);
    prim::SigningKey alice = key_for(2);
    Digest instance;
    std::uint64_t alice_nonce = 0;

    Fixture() {
        auto d = make_deploy(owner, "kv", 0);
        EXPECT_TRUE(sys.submit_and_confirm(d));
        instance = sys.deploy(d).first;
    }

    Transaction put(const std::string& value) {
        return make_invoke(alice, instance, "put", to_bytes(value), alice_nonce++);
    }
};

}  // namespace

TEST(Deploy, EmptyInitialStateAndIdFromTx) {
    ContractSystem sys(config(), registry());
    auto d = make_deploy(key_for(1), "kv", 0);
    ASSERT_TRUE(sys.submit_and_confirm(d));
    auto [id, state] = sys.deploy(d);
    EXPECT_EQ(id, d.id);
    EXPECT_TRUE(state.empty());
    EXPECT_TRUE(sys.access(id).empty());
}

TEST(Deploy, SameCodeTwoTxsTwoInstances) {
    ContractSystem sys(config(), registry());
    auto a = make_deploy(key_for(1), "kv", 0);
    auto b = make_deploy(key_for(1), "kv", 1);
    ASSERT_TRUE(sys.submit_and_confirm(a));
    ASSERT_TRUE(sys.submit_and_confirm(b));
    EXPECT_NE(sys.deploy(a).first, sys.deploy(b).first);
}

TEST(Deploy, UnconfirmedTxRejected) {
    ContractSystem sys(config(), registry());
    auto d = make_deploy(key_for(1), "kv", 0);
    sys.chain().submit(d);
    sys.chain().advance_round();
    try {
        sys.deploy(d);
        FAIL() << "deploy succeeded before confirmation";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::not_confirmed);
    }
}

TEST(Deploy, UnknownCodeCreatesNothing) {
    ContractSystem sys(config(), registry());
    auto d = make_deploy(key_for(1), "nope", 0);
    ASSERT_TRUE(sys.submit_and_confirm(d));
    EXPECT_FALSE(sys.inspect(d));
    EXPECT_THROW(sys.deploy(d), Error);
}

TEST(Transfer, AppliedCallChangesState) {
    Fixture f;
    auto tx = f.put("v1");
    ASSERT_TRUE(f.sys.submit_and_confirm(tx));
    auto s = f.sys.transfer(f.instance, tx);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.begin()->second, to_bytes("v1"));
    EXPECT_EQ(f.sys.access(f.instance), s);
    EXPECT_TRUE(f.sys.inspect(tx));
    EXPECT_EQ(f.sys.receipt(tx).ops.at("write"), 1u);
}

TEST(Transfer, GuardFailureLeavesStateUnchanged) {
    Fixture f;
    auto tx = make_invoke(f.alice, f.instance, "owner-only", {}, f.alice_nonce++);
    ASSERT_TRUE(f.sys.submit_and_confirm(tx));
    EXPECT_TRUE(f.sys.transfer(f.instance, tx).empty());
    auto r = f.sys.receipt(tx);
    EXPECT_EQ(r.outcome, Outcome::guard_failed);
    EXPECT_EQ(r.pre_state, r.post_state);
    EXPECT_FALSE(f.sys.inspect(tx));

    auto ok = make_invoke(f.owner, f.instance, "owner-only", {}, 1);
    ASSERT_TRUE(f.sys.submit_and_confirm(ok));
    EXPECT_TRUE(f.sys.inspect(ok));
    EXPECT_EQ(f.sys.access(f.instance).at("owner"), to_bytes("yes"));
}

TEST(Transfer, ThrowingProcedureIsAnErrorAndRollsBack) {
    Fixture f;
    auto tx = make_invoke(f.alice, f.instance, "explode", {}, f.alice_nonce++);
    ASSERT_TRUE(f.sys.submit_and_confirm(tx));
    EXPECT_EQ(f.sys.receipt(tx).outcome, Outcome::error);
    EXPECT_TRUE(f.sys.access(f.instance).empty());
}

TEST(Transfer, UnknownInstanceAndOpcode) {
    Fixture f;
    auto bogus = make_invoke(f.alice, Digest{}, "put", to_bytes("x"), f.alice_nonce++);
    ASSERT_TRUE(f.sys.submit_and_confirm(bogus));
    try {
        f.sys.transfer(Digest{}, bogus);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unknown_instance);
    }
    EXPECT_EQ(f.sys.receipt(bogus).outcome, Outcome::error);

    auto op = make_invoke(f.alice, f.instance, "frobnicate", {}, f.alice_nonce++);
    ASSERT_TRUE(f.sys.submit_and_confirm(op));
    try {
        f.sys.transfer(f.instance, op);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unknown_opcode);
    }
    EXPECT_THROW(f.sys.access(Digest{}), Error);
}

TEST(Transfer, ReplayOfEveryAppliedTxIsGuardFailed) {
    auto reg = registry();
    ContractRuntime rt(reg);
    auto owner = key_for(1);
    auto d = make_deploy(owner, "kv", 0);
    rt.apply(d, 1);
    std::vector<Transaction> applied;
    for (std::uint64_t i = 0; i < 50; ++i) {
        auto who = key_for(10 + i % 5);
        auto tx = make_invoke(who, d.id, "put", to_bytes("v" + std::to_string(i)), i / 5);
        rt.apply(tx, 2 + i);
        ASSERT_EQ(rt.receipt(tx.id)->outcome, Outcome::applied);
        applied.push_back(tx);
    }
    const auto before = state_digest(rt.instance(d.id)->state);
    for (const auto& tx : applied) {
        rt.apply(tx, 100);
        const auto* r = rt.receipt(tx.id);
        EXPECT_EQ(r->outcome, Outcome::guard_failed);
        EXPECT_EQ(r->detail, "replayed nonce");
        EXPECT_EQ(r->pre_state, r->post_state);
    }
    EXPECT_EQ(state_digest(rt.instance(d.id)->state), before);
}

TEST(Access, BeforeAnyTransferIsInitialState) {
    Fixture f;
    EXPECT_TRUE(f.sys.access(f.instance).empty());
}

TEST(Access, HonestPlayersHoldIdenticalStates) {
    Fixture f;
    for (int i = 0; i < 5; ++i) f.sys.chain().submit(f.put("v" + std::to_string(i)));
    f.sys.chain().advance_rounds(5);
    const auto& c = f.sys.chain().config();
    std::vector<Bytes> encoded;
    for (ledger::PlayerId p = 0; p < c.total_players; ++p) {
        auto s = f.sys.runtime(p).state_at(f.instance, f.sys.chain().tip(p) - c.k);
        ASSERT_TRUE(s.has_value());
        encoded.push_back(encode_state(*s));
    }
    for (const auto& e : encoded) EXPECT_EQ(e, encoded.front());
    EXPECT_EQ(encode_state(f.sys.access(f.instance)), encoded.front());
}

TEST(Inspect, ForgedSignatureIsFalse) {
    Fixture f;
    auto tx = f.put("v");
    tx.signature[0] ^= 1;
    tx.id = tx.compute_id();
    EXPECT_FALSE(f.sys.chain().submit(tx).accepted());
    EXPECT_FALSE(f.sys.inspect(tx));
}

TEST(Inspect, FalseForEveryNonAppliedReceipt) {
    Fixture f;
    prim::Drbg rng(3);
    std::vector<Transaction> txs;
    for (int i = 0; i < 40; ++i) {
        const auto choice = rng.uniform(3);
        Transaction tx = choice == 0   ? f.put("")
                         : choice == 1 ? f.put("v" + std::to_string(i))
                                       : make_invoke(f.alice, f.instance, "owner-only", {}, f.alice_nonce++);
        f.sys.chain().submit(tx);
        txs.push_back(tx);
        if (rng.coin()) f.sys.chain().advance_round();
    }
    f.sys.chain().advance_rounds(4);
    int applied = 0;
    for (const auto& tx : txs) {
        auto r = f.sys.receipt(tx);
        EXPECT_EQ(f.sys.inspect(tx), r.outcome == Outcome::applied);
        if (r.outcome != Outcome::applied) EXPECT_EQ(r.pre_state, r.post_state);
        if (f.sys.inspect(tx)) {
            ++applied;
            EXPECT_EQ(f.sys.chain().read_tx(f.sys.chain().read_state(tx)), tx);
        }
    }
    EXPECT_GT(applied, 0);
}

TEST(Determinism, ReplayReproducesStateDigest) {
    Fixture f;
    for (int i = 0; i < 12; ++i) {
        f.sys.chain().submit(f.put("v" + std::to_string(i)));
        f.sys.chain().advance_round();
    }
    f.sys.chain().advance_rounds(4);
    ContractRuntime replay(registry());
    auto view = f.sys.chain().view(0);
    for (const auto& block : view.chain) {
        for (const auto& tx : block.txs) replay.apply(tx, block.height);
    }
    EXPECT_EQ(state_digest(replay.instance(f.instance)->state),
              state_digest(f.sys.runtime(0).instance(f.instance)->state));
    EXPECT_EQ(replay.state_root(), f.sys.runtime(0).state_root());
    EXPECT_EQ(replay.export_receipts(), f.sys.runtime(0).export_receipts());
}

TEST(Receipts, ExportDecodes) {
    Fixture f;
    auto tx = f.put("v");
    f.sys.submit_and_confirm(tx);
    auto text = f.sys.runtime(0).export_receipts();
    std::size_t lines = 0;
    for (std::size_t start = 0; start < text.size();) {
        auto end = text.find('\n', start);
        auto r = Receipt::decode(from_hex(text.substr(start, end - start)));
        EXPECT_EQ(r, f.sys.runtime(0).receipts().at(lines));
        ++lines;
        start = end + 1;
    }
    EXPECT_EQ(lines, 2u);
}

TEST(State, EncodingIsCanonical) {
    State a{{"b", {2}}, {"a", {1}}};
    State b;
    b["a"] = {1};
    b["b"] = {2};
    EXPECT_EQ(encode_state(a), encode_state(b));
    EXPECT_EQ(decode_state(encode_state(a)), a);
    EXPECT_EQ(state_digest(a), state_digest(b));
}
