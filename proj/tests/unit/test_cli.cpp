#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "scsec/scenario.hpp"

using namespace scsec;

namespace {

struct Invocation {
    int code = -1;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "scsec");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "scsec_cli_test";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST(Cli, RunWritesReportAndTraceThatAgree) {
    const auto cfg = scratch("rbe.cfg");
    scenario::write_file(cfg, "protocol=rbe\nregistrations=16\n");
    const auto report_path = scratch("rbe.report");
    const auto r = invoke({"run", "--config", cfg, "--out", report_path});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = scenario::Report::parse(scenario::read_file(report_path));
    EXPECT_EQ(report.ops.at("merge"), 15u);

    const auto g = invoke({"gas", "--trace", report_path + ".trace"});
    ASSERT_EQ(g.code, 0) << g.err;
    EXPECT_NE(g.out.find("gas.total=" + std::to_string(report.gas_total) + "\n"), std::string::npos);
    EXPECT_NE(g.out.find("capacity.merges_per_block=30\n"), std::string::npos);
    EXPECT_NE(g.out.find("capacity.users_per_block=14\n"), std::string::npos);
}

TEST(Cli, SeedFlagOverridesConfig) {
    const auto a = invoke({"run", "--seed", "3"});
    const auto b = invoke({"run", "--seed", "3"});
    const auto c = invoke({"run", "--seed", "4"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
    EXPECT_NE(a.out.find("seed=3\n"), std::string::npos);
}

TEST(Cli, ConfigurationErrorsExitTwo) {
    const auto cfg = scratch("bad.cfg");
    scenario::write_file(cfg, "protocol=rbe\nflavour=mint\n");
    const auto r = invoke({"run", "--config", cfg});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("configuration-error"), std::string::npos);
    EXPECT_NE(r.err.find("line 2"), std::string::npos);

    EXPECT_EQ(invoke({"run", "--config", scratch("missing.cfg")}).code, 2);
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"fly"}).code, 2);
    EXPECT_EQ(invoke({"games", "--trials", "0"}).code, 2);
    EXPECT_EQ(invoke({"games", "--protocol", "abe"}).code, 2);
}

TEST(Cli, IoErrorsExitTwo) {
    const auto r = invoke({"run", "--out", "/nonexistent-dir/report.txt"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("io-error"), std::string::npos);
    EXPECT_EQ(invoke({"gas", "--trace", "/nonexistent-dir/trace"}).code, 2);
}

TEST(Cli, GamesSuiteAndControls) {
    const auto transcript = scratch("games.txt");
    const auto r = invoke({"games", "--trials", "5", "--protocol", "rbe", "--controls", "--out", transcript});
    ASSERT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("neqv\trbe\tserve-divergent\tbounded\t0/5"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\tcontrol\t"), std::string::npos);
    EXPECT_FALSE(scenario::read_file(transcript).empty());
}

TEST(Cli, FailedVerdictExitsOne) {
    // Five adversaries out of five: the ledger audits cannot pass.
    const auto cfg = scratch("captured.cfg");
    scenario::write_file(cfg, "protocol=rbe\nregistrations=2\nledger.adversary_players=0,1,2,3,4\n"
                              "ledger.strategy=withhold\n");
    const auto r = invoke({"run", "--config", cfg});
    EXPECT_EQ(r.code, 1) << r.out << r.err;
}
