#include <benchmark/benchmark.h>

#include "scsec/cbe.hpp"
#include "scsec/contract.hpp"
#include "scsec/games.hpp"
#include "scsec/rbe.hpp"
#include "scsec/scenario.hpp"

using namespace scsec;

namespace {

std::vector<rbe::Registration> registrations(std::size_t n, prim::Drbg& rng) {
    std::vector<rbe::Registration> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({"user" + std::to_string(i), rbe::rbe_keygen(rng).public_key});
    return out;
}

void BM_ForestInsert(benchmark::State& state) {
    prim::Drbg rng(1);
    const auto setup = rbe::rbe_setup(rbe::kLambda, rng);
    const auto regs = registrations(static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) {
        rbe::MerkleForest forest(setup.pp.hks);
        for (const auto& r : regs) forest.insert(r);
        benchmark::DoNotOptimize(forest.total_merges());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForestInsert)->Arg(16)->Arg(256)->Arg(1024);

void BM_RbeEncDec(benchmark::State& state) {
    prim::Drbg rng(2);
    const auto setup = rbe::rbe_setup(rbe::kLambda, rng);
    rbe::MerkleForest forest(setup.pp.hks);
    std::vector<prim::KeyMaterial> keys;
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        keys.push_back(rbe::rbe_keygen(rng));
        forest.insert({"user" + std::to_string(i), keys.back().public_key});
    }
    const auto pp = forest.public_params();
    const auto opening = forest.opening("user0");
    const Bytes msg(32, 0x5a);
    for (auto _ : state) {
        const auto ct = rbe::rbe_enc(setup.crs, pp, "user0", msg, rng);
        benchmark::DoNotOptimize(rbe::rbe_dec(keys[0].secret_key, opening, ct));
    }
}
BENCHMARK(BM_RbeEncDec)->Arg(16)->Arg(1000);

void BM_CbeEncDec(benchmark::State& state) {
    prim::Drbg rng(3);
    const auto depth = static_cast<std::uint32_t>(state.range(0));
    const auto setup = cbe::cbe_setup(depth, 4, rng);
    cbe::KeyIssuer issuer(setup.pms);
    const auto user = issuer.keygen("alice", rng);
    cbe::RevocationTable table;
    table.rows.push_back({1, "alice", cbe::CertState::valid, cbe::make_day(2022, 12, 31), user.serial, {}});
    const auto cert = *cbe::cbe_cert(setup.ca, setup.pms, 1, "alice", table);
    const Bytes msg(32, 0xa5);
    for (auto _ : state) {
        const auto ct = cbe::cbe_enc(setup.pms, cbe::public_part(user), 1, msg, rng);
        benchmark::DoNotOptimize(cbe::cbe_dec(user, cert, setup.pms.xP, ct));
    }
}
BENCHMARK(BM_CbeEncDec)->Arg(4)->Arg(16);

void BM_SubsetCover(benchmark::State& state) {
    const auto depth = static_cast<std::uint32_t>(state.range(0));
    std::set<cbe::Prefix> revoked;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << depth); i += 3) revoked.insert(cbe::serial_bits(i, depth));
    for (auto _ : state) benchmark::DoNotOptimize(cbe::subset_cover(depth, revoked));
}
BENCHMARK(BM_SubsetCover)->Arg(3)->Arg(10);

void BM_LedgerRound(benchmark::State& state) {
    auto cfg = games::default_ledger_config();
    cfg.strategy = ledger::Strategy::equivocate;
    prim::Drbg rng(4);
    const prim::SigningKey key(prim::sample_keys(prim::Scheme::SIG, rng));
    ledger::Ledger chain(cfg);
    std::uint64_t nonce = 0;
    for (auto _ : state) {
        for (std::int64_t i = 0; i < state.range(0); ++i) {
            chain.submit(ledger::make_transaction(key, to_bytes("tx"), nonce++));
        }
        chain.advance_round();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LedgerRound)->Arg(1)->Arg(16);

void BM_GameTrial(benchmark::State& state) {
    const auto game = static_cast<games::Game>(state.range(0));
    const auto& strategy = [&]() -> const games::AdversaryStrategy& {
        for (const auto& s : games::builtin_strategies()) {
            if (s.game == game) return s;
        }
        return games::builtin_strategies().front();
    }();
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(games::run_game(game, games::Protocol::rbe, strategy, 1, seed++));
}
BENCHMARK(BM_GameTrial)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_ScenarioRbe(benchmark::State& state) {
    scenario::ScenarioConfig c;
    c.registrations = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(scenario::run_scenario(c));
}
BENCHMARK(BM_ScenarioRbe)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
