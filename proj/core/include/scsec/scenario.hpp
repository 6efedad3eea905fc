#pragma once

// End-to-end scenarios, gas accounting and reports.
//
// Gas is bookkeeping only: blocks over the limit are counted, never cut.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scsec/bytes.hpp"
#include "scsec/games.hpp"
#include "scsec/ledger.hpp"

namespace scsec::scenario {

// ---------------------------------------------------------------------------
// Gas

struct GasTable {
    static constexpr std::uint64_t kDefaultLimit = 12'134'453;
    /// Calibrated so that exactly 30 merges fit under the default limit.
    static constexpr std::uint64_t kDefaultMerge = 404'481;

    std::uint64_t block_gas_limit = kDefaultLimit;
    std::map<std::string, std::uint64_t> costs = {
        {"merge", kDefaultMerge}, {"register-base", 21'000}, {"revoke", 45'000},
        {"enroll", 65'000},       {"deploy", 1'500'000},     {"read", 2'100},
    };

    /// Throws Error(configuration) on a zero cost, a missing merge cost, or a
    /// limit below the largest single cost.
    void validate() const;

    /// "limit=<n>" plus "<op>=<n>" lines; unnamed ops keep their defaults.
    static GasTable from_text(std::string_view text);
    std::string to_text() const;
};

/// On-chain operation counts per block height.
struct OpTrace {
    std::map<std::uint64_t, std::map<std::string, std::uint64_t>> blocks;

    /// "<height>\t<op>=<n>,<op>=<n>" per non-empty block, heights ascending.
    std::string to_text() const;
    /// Throws Error(configuration) naming the bad line.
    static OpTrace parse(std::string_view text);
    bool operator==(const OpTrace&) const = default;
};

struct GasEstimate {
    std::map<std::uint64_t, std::uint64_t> block_gas;
    std::uint64_t total = 0;
    std::uint64_t over_limit_blocks = 0;
    std::set<std::string> unpriced;  // ops seen in the trace with no table entry, costed at 0

    std::uint64_t merges_per_block = 0;
    /// Registered users per block when each user adds two leaves and costs
    /// 2u + 1 merges: floor((merges_per_block - 1) / 2).
    std::uint64_t users_per_block = 0;
    /// Largest n whose binary-forest merge count n - popcount(n) fits.
    std::uint64_t forest_registrations_per_block = 0;
};

GasEstimate gas_estimate(const OpTrace& trace, const GasTable& table);

// ---------------------------------------------------------------------------
// Scenario

struct ScenarioConfig {
    games::Protocol protocol = games::Protocol::rbe;
    ledger::LedgerConfig ledger = games::default_ledger_config();
    std::uint64_t seed = 0;
    std::uint64_t users = 5;          // cbe
    std::uint64_t periods = 3;        // cbe
    std::uint64_t revocations = 2;    // cbe
    std::uint64_t registrations = 16;  // rbe
    /// Entries "neqv" (all its strategies) or "neqv:front-run".
    std::vector<std::string> games;
    std::uint64_t game_trials = 100;
    GasTable gas;
    std::string gas_table_path;  // as written in the config, empty if none
    std::string output;

    /// Keys: protocol, seed, users, periods, revocations, registrations,
    /// games, game_trials, output, gas_table, gas.limit, gas.<op>,
    /// ledger.<field>. Relative gas_table paths resolve against base_dir.
    /// Throws Error(configuration) with the line number of the bad field.
    static ScenarioConfig from_text(std::string_view text, const std::string& base_dir = ".");
    /// Throws Error(configuration) on a missing or unreadable file.
    static ScenarioConfig load(const std::string& path);
    /// Canonical form; its digest names the scenario.
    std::string to_text() const;
    void validate() const;
};

struct GameSummary {
    games::Game game = games::Game::neqv;
    games::Protocol protocol = games::Protocol::cbe;
    std::string strategy;
    std::uint64_t trials = 0;
    std::uint64_t wins = 0;

    bool operator==(const GameSummary&) const = default;
};

struct Report {
    Digest scenario;
    games::Protocol protocol = games::Protocol::rbe;
    std::uint64_t seed = 0;
    std::map<std::string, std::uint64_t> ops;  // totals, including off-chain reads
    std::map<std::uint64_t, std::uint64_t> block_gas;
    std::uint64_t gas_total = 0;
    std::uint64_t over_limit_blocks = 0;
    std::uint64_t merges_per_block = 0;
    std::uint64_t users_per_block = 0;
    std::uint64_t forest_registrations_per_block = 0;
    std::vector<std::uint32_t> forest_depths;  // rbe
    std::vector<std::string> table;            // cbe revocation table rows
    std::vector<GameSummary> games;
    std::map<std::string, bool> verdicts;

    bool all_pass() const;
    /// Line-oriented "key=value" text; identical reports give identical bytes.
    std::string to_text() const;
    /// Throws Error(configuration) on a malformed report.
    static Report parse(std::string_view text);
    bool operator==(const Report&) const = default;
};

struct ScenarioResult {
    Report report;
    OpTrace trace;
};

/// Deterministic in (config, config.seed).
ScenarioResult run_scenario(const ScenarioConfig& config);

/// Writes text to path. Throws Error(io).
void write_file(const std::string& path, std::string_view text);
/// Throws Error(io).
std::string read_file(const std::string& path);
void emit_report(const Report& report, const std::string& path);

}  // namespace scsec::scenario
