#include <gtest/gtest.h>

#include "scsec/cbe.hpp"
#include "scsec/codec.hpp"
#include "scsec/error.hpp"
#include "scsec/games.hpp"

using namespace scsec;
using namespace scsec::games;

namespace {

prim::SigningKey key_for(std::uint64_t seed) {
    prim::Drbg rng(seed);
    return prim::SigningKey(prim::sample_keys(prim::Scheme::SIG, rng));
}

// A hash-chain ledger with a few confirmed transactions.
struct Chain {
    ledger::Ledger chain{default_ledger_config()};
    std::vector<ledger::Transaction> txs;

    Chain() {
        auto key = key_for(1);
        for (std::uint64_t n = 0; n < 4; ++n) {
            txs.push_back(ledger::make_transaction(key, to_bytes("tx" + std::to_string(n)), n));
            chain.submit(txs.back());
        }
        chain.advance_rounds(5);
    }
};

std::vector<Protocol> protocols() { return {Protocol::cbe, Protocol::rbe}; }

}  // namespace

TEST(BlockchainOracle, RepeatedReadIsCachedAndIdentical) {
    Chain c;
    BlockchainOracle o(c.chain);
    const auto a = o.read_state(c.txs[0]);
    const auto b = o.read_state(c.txs[0]);
    EXPECT_EQ(a, b);
    EXPECT_EQ(o.ledger_hits(), 1u);
    EXPECT_EQ(o.l1_size(), 1u);
    (void)o.read_state(c.txs[1]);
    EXPECT_EQ(o.l1_size(), 2u);
    EXPECT_TRUE(o.in_l1(c.txs[0].id, a.digest()));
    EXPECT_FALSE(o.in_l1(c.txs[1].id, a.digest()));
}

TEST(BlockchainOracle, ReadTxMirrorsReadState) {
    Chain c;
    BlockchainOracle o(c.chain);
    const auto s = c.chain.read_state(c.txs[2]);
    EXPECT_EQ(o.read_tx(s), c.txs[2]);
    EXPECT_EQ(o.read_tx(s), c.txs[2]);
    EXPECT_EQ(o.ledger_hits(), 1u);
    EXPECT_EQ(o.l2_size(), 1u);
    EXPECT_TRUE(o.in_l2(s.digest(), c.txs[2].id));
    EXPECT_FALSE(o.in_l2(s.digest(), c.txs[1].id));
}

TEST(BlockchainOracle, ContentsEqualReplayOfQueryLog) {
    Chain c;
    BlockchainOracle o(c.chain);
    for (auto i : {3, 0, 3, 1, 0}) (void)o.read_state(c.txs[i]);
    for (auto i : {1, 1, 2}) (void)o.read_tx(c.chain.read_state(c.txs[i]));

    BlockchainOracle replay(c.chain);
    for (const auto& q : o.log()) {
        if (q.read_state) {
            (void)replay.read_state(ledger::Transaction::decode(q.input));
        } else {
            (void)replay.read_tx(ledger::StateSnapshot::decode(q.input));
        }
    }
    EXPECT_EQ(replay.l1(), o.l1());
    EXPECT_EQ(replay.l2_size(), o.l2_size());
    for (auto i : {1, 2}) {
        const auto d = c.chain.read_state(c.txs[i]).digest();
        EXPECT_TRUE(replay.in_l2(d, c.txs[i].id));
    }
}

TEST(BlockchainOracle, AnswersDoNotDependOnQueryOrder) {
    Chain c;
    BlockchainOracle a(c.chain);
    BlockchainOracle b(c.chain);
    for (auto i : {0, 1, 2, 3}) (void)a.read_state(c.txs[i]);
    for (auto i : {3, 2, 1, 0}) (void)b.read_state(c.txs[i]);
    EXPECT_EQ(a.l1(), b.l1());
}

TEST(BlockchainOracle, PropagatesNotConfirmed) {
    ledger::Ledger chain(default_ledger_config());
    auto tx = ledger::make_transaction(key_for(2), to_bytes("late"), 0);
    chain.submit(tx);
    BlockchainOracle o(chain);
    try {
        (void)o.read_state(tx);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::not_confirmed);
    }
    EXPECT_EQ(o.l1_size(), 0u);
}

TEST(UserOracle, SignsOncePerMetadataAndRecordsEverything) {
    UserOracle u(key_for(3));
    CallMetadata m1{Digest{}, "revoke", to_bytes("a")};
    CallMetadata m2{Digest{}, "revoke", to_bytes("b")};
    const auto t1 = u.sign(m1);
    EXPECT_EQ(u.sign(m1), t1);
    EXPECT_EQ(u.size(), 1u);
    const auto t2 = u.sign(m2);
    EXPECT_EQ(u.size(), 2u);
    EXPECT_NE(t1.id, t2.id);
    EXPECT_NE(t1.nonce, t2.nonce);
    for (const auto& t : {t1, t2}) {
        EXPECT_TRUE(u.contains(t.id));
        EXPECT_EQ(t.signer, u.verification_key());
        EXPECT_TRUE(prim::verify(u.verification_key(), t.signature, t.signing_message()));
    }
}

TEST(Strategies, LookupAndBounds) {
    EXPECT_EQ(find_strategy("front-run").game, Game::neqv);
    EXPECT_THROW((void)find_strategy("bribe"), Error);
    EXPECT_EQ(parse_game("nrep"), Game::nrep);
    EXPECT_EQ(parse_protocol("rbe"), Protocol::rbe);
    EXPECT_THROW((void)parse_game("neq"), Error);

    auto heavy = default_ledger_config();
    heavy.adversary_players = {2, 3, 4};
    try {
        (void)run_game(Game::neqv, Protocol::cbe, find_strategy("serve-divergent"), 1, 0, heavy);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::configuration);
    }
    EXPECT_THROW((void)run_game(Game::nrep, Protocol::cbe, find_strategy("front-run"), 1, 0), Error);
}

TEST(Games, BoundedAdversariesNeverWin) {
    for (auto protocol : protocols()) {
        for (const auto& s : builtin_strategies()) {
            const auto t = run_game(s.game, protocol, s, 40, 5);
            EXPECT_EQ(t.trials, 40u);
            EXPECT_EQ(t.outcomes.size(), 40u);
            EXPECT_EQ(t.wins, 0u) << protocol_name(protocol) << " " << s.name;
            EXPECT_EQ(t.decrypt_mismatches, 0u) << protocol_name(protocol) << " " << s.name;
        }
    }
}

TEST(Games, EveryControlWinsAndWitnessesRecheck) {
    for (auto protocol : protocols()) {
        for (const auto& c : negative_controls()) {
            auto cfg = default_ledger_config();
            cfg.faults = c.faults;
            const auto t = run_game(c.game, protocol, find_strategy(c.strategy), 20, 1, cfg);
            EXPECT_GE(t.wins, 1u) << protocol_name(protocol) << " " << c.name;
            ASSERT_EQ(t.witnesses.size(), t.wins);
            std::uint64_t rechecked = 0;
            for (const auto& w : t.witnesses) rechecked += recheck_witness(w) ? 1 : 0;
            EXPECT_EQ(rechecked, t.wins) << c.name;
        }
    }
}

TEST(Games, FrontRunWithoutConfirmationSplitsEncryptorAndLedger) {
    auto cfg = default_ledger_config();
    cfg.faults.no_confirmation = true;
    const auto t = run_game(Game::neqv, Protocol::rbe, find_strategy("front-run"), 10, 2, cfg);
    EXPECT_EQ(t.wins, 10u);
}

TEST(Witness, MutationsFailRecheck) {
    auto cfg = default_ledger_config();
    cfg.faults.no_signature_check = true;
    const auto t = run_game(Game::nfrm, Protocol::cbe, find_strategy("random-forge"), 3, 4, cfg);
    ASSERT_FALSE(t.witnesses.empty());
    const auto& w = t.witnesses.front();
    EXPECT_TRUE(recheck_witness(w));

    auto flipped = w;
    flipped.candidate[flipped.candidate.size() / 2] ^= 1;
    EXPECT_FALSE(recheck_witness(flipped));

    auto other_trial = w;
    other_trial.trial += 1000;
    EXPECT_FALSE(recheck_witness(other_trial));

    auto repaired = w;
    repaired.faults = {};
    EXPECT_FALSE(recheck_witness(repaired));

    auto truncated = w;
    truncated.candidate.resize(5);
    EXPECT_FALSE(recheck_witness(truncated));

    auto unknown = w;
    unknown.strategy = "bribe";
    EXPECT_FALSE(recheck_witness(unknown));
}

TEST(Witness, CodecRoundTrip) {
    auto cfg = default_ledger_config();
    cfg.faults.no_state_replication = true;
    const auto t = run_game(Game::nrep, Protocol::rbe, find_strategy("mutate-tx"), 2, 0, cfg);
    ASSERT_FALSE(t.witnesses.empty());
    for (const auto& w : t.witnesses) {
        EXPECT_EQ(Witness::decode(w.encode()), w);
        EXPECT_TRUE(recheck_witness(Witness::decode(w.encode())));
    }
    Bytes junk = t.witnesses[0].encode();
    junk.push_back(0);
    EXPECT_THROW((void)Witness::decode(junk), CodecError);
}

TEST(Transcript, ExportHasOneLinePerTrial) {
    auto cfg = default_ledger_config();
    cfg.faults.no_signature_check = true;
    const auto t = run_game(Game::nfrm, Protocol::rbe, find_strategy("random-forge"), 4, 9, cfg);
    const auto text = t.export_lines();
    std::size_t lines = 0;
    std::size_t pos = 0;
    while ((pos = text.find('\n', pos)) != std::string::npos) {
        ++lines;
        ++pos;
    }
    EXPECT_EQ(lines, 4u);
    EXPECT_EQ(text.rfind("nfrm\t0\t", 0), 0u);
    if (t.outcomes[0]) {
        EXPECT_NE(text.find(to_hex(t.witnesses[0].digest())), std::string::npos);
    }
    EXPECT_EQ(run_game(Game::nfrm, Protocol::rbe, find_strategy("random-forge"), 4, 9, cfg).export_lines(), text);
}
