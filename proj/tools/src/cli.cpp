#include "cli.hpp"

#include <CLI11.hpp>
#include <optional>
#include <sstream>

#include "scsec/error.hpp"
#include "scsec/games.hpp"
#include "scsec/scenario.hpp"

namespace scsec::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadInput = 2;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Scenario config file (key=value lines)");
    cmd->add_option("--seed", c.seed, "Override the config seed");
    cmd->add_option("--out", c.out, "Output file; stdout when omitted");
}

scenario::ScenarioConfig load_config(const Common& c) {
    auto cfg = c.config.empty() ? scenario::ScenarioConfig{} : scenario::ScenarioConfig::load(c.config);
    if (c.seed) {
        cfg.seed = *c.seed;
        cfg.ledger.seed = *c.seed;
    }
    cfg.validate();
    return cfg;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        scenario::write_file(path, text);
    }
}

int cmd_run(const Common& c, const std::string& trace_path, std::ostream& out) {
    auto cfg = load_config(c);
    const auto out_path = c.out.empty() ? cfg.output : c.out;
    const auto result = scenario::run_scenario(cfg);
    emit(out_path, result.report.to_text(), out);
    auto tpath = trace_path;
    if (tpath.empty() && !out_path.empty()) tpath = out_path + ".trace";
    if (!tpath.empty()) scenario::write_file(tpath, result.trace.to_text());
    return result.report.all_pass() ? kOk : kFailed;
}

int cmd_games(const Common& c, std::uint64_t trials, const std::vector<std::string>& protocols,
              const std::vector<std::string>& game_names, bool controls, std::ostream& out) {
    auto cfg = load_config(c);
    std::vector<games::Protocol> ps;
    for (const auto& p : protocols) ps.push_back(games::parse_protocol(p));
    if (ps.empty()) ps = {games::Protocol::cbe, games::Protocol::rbe};
    std::vector<games::Game> gs;
    for (const auto& g : game_names) gs.push_back(games::parse_game(g));
    if (gs.empty()) gs = {games::Game::neqv, games::Game::nrep, games::Game::nfrm};

    std::ostringstream summary;
    std::ostringstream transcripts;
    bool ok = true;
    for (auto protocol : ps) {
        for (auto game : gs) {
            for (const auto& s : games::builtin_strategies()) {
                if (s.game != game) continue;
                const auto t = games::run_game(game, protocol, s, trials, cfg.seed, cfg.ledger);
                summary << games::game_name(game) << '\t' << games::protocol_name(protocol) << '\t' << s.name
                        << "\tbounded\t" << t.wins << '/' << t.trials << '\n';
                transcripts << t.export_lines();
                ok = ok && t.wins == 0 && t.decrypt_mismatches == 0;
            }
            if (!controls) continue;
            for (const auto& nc : games::negative_controls()) {
                if (nc.game != game) continue;
                auto lc = cfg.ledger;
                lc.faults = nc.faults;
                const auto t = games::run_game(game, protocol, games::find_strategy(nc.strategy), trials, cfg.seed, lc);
                std::uint64_t rechecked = 0;
                for (const auto& w : t.witnesses) rechecked += games::recheck_witness(w) ? 1 : 0;
                summary << games::game_name(game) << '\t' << games::protocol_name(protocol) << '\t' << nc.name
                        << "\tcontrol\t" << t.wins << '/' << t.trials << '\n';
                transcripts << t.export_lines();
                ok = ok && t.wins >= 1 && rechecked == t.wins;
            }
        }
    }
    out << summary.str();
    if (!c.out.empty()) scenario::write_file(c.out, transcripts.str());
    return ok ? kOk : kFailed;
}

int cmd_gas(const Common& c, const std::string& trace_path, const std::string& table_path, std::ostream& out) {
    auto table = load_config(c).gas;
    if (!table_path.empty()) table = scenario::GasTable::from_text(scenario::read_file(table_path));
    const auto trace =
        trace_path.empty() ? scenario::OpTrace{} : scenario::OpTrace::parse(scenario::read_file(trace_path));
    const auto e = scenario::gas_estimate(trace, table);

    std::ostringstream text;
    for (const auto& [h, g] : e.block_gas) text << "block." << h << "=" << g << "\n";
    text << "gas.total=" << e.total << "\n";
    text << "gas.over_limit_blocks=" << e.over_limit_blocks << "\n";
    text << "gas.limit=" << table.block_gas_limit << "\n";
    text << "capacity.merges_per_block=" << e.merges_per_block << "\n";
    text << "capacity.users_per_block=" << e.users_per_block << "\n";
    text << "capacity.forest_registrations_per_block=" << e.forest_registrations_per_block << "\n";
    for (const auto& op : e.unpriced) text << "unpriced=" << op << "\n";
    emit(c.out, text.str(), out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Smart-contract security protocol simulator"};
    app.require_subcommand(1);

    Common run_opts;
    std::string run_trace;
    auto* run = app.add_subcommand("run", "Run a CBE or RBE scenario and write its report");
    add_common(run, run_opts);
    run->add_option("--trace", run_trace, "Where to write the op trace (default <out>.trace)");

    Common game_opts;
    std::uint64_t trials = 1000;
    std::vector<std::string> protocols;
    std::vector<std::string> game_names;
    bool controls = false;
    auto* gamecmd = app.add_subcommand("games", "Run the security game suite");
    add_common(gamecmd, game_opts);
    gamecmd->add_option("--trials", trials, "Trials per game and strategy")->check(CLI::PositiveNumber);
    gamecmd->add_option("--protocol", protocols, "cbe and/or rbe (default both)")->delimiter(',');
    gamecmd->add_option("--game", game_names, "neqv, nrep, nfrm (default all)")->delimiter(',');
    gamecmd->add_flag("--controls", controls, "Also run the broken-assumption controls");

    Common gas_opts;
    std::string gas_trace;
    std::string gas_table;
    auto* gas = app.add_subcommand("gas", "Estimate gas for an op trace");
    add_common(gas, gas_opts);
    gas->add_option("--trace", gas_trace, "Op trace written by 'run'");
    gas->add_option("--table", gas_table, "Gas table file (limit=, <op>= lines)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        if (*run) return cmd_run(run_opts, run_trace, out);
        if (*gamecmd) return cmd_games(game_opts, trials, protocols, game_names, controls, out);
        return cmd_gas(gas_opts, gas_trace, gas_table, out);
    } catch (const Error& e) {
        err << "scsec: " << errc_name(e.code()) << ": " << e.what() << "\n";
        return e.code() == Errc::configuration || e.code() == Errc::io ? kBadInput : kFailed;
    }
}

}  // namespace scsec::cli
