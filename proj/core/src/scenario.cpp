#include "scsec/scenario.hpp"

#include <bit>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "scsec/cbe.hpp"
#include "scsec/codec.hpp"
#include "scsec/error.hpp"
#include "scsec/hash.hpp"
#include "scsec/kvfile.hpp"
#include "scsec/rbe.hpp"

namespace scsec::scenario {

namespace {

Error config_error(std::size_t line, const std::string& what) {
    return Error(Errc::configuration, (line ? "line " + std::to_string(line) + ": " : std::string()) + what);
}

std::uint64_t parse_u64(std::string_view s, std::size_t line, std::string_view what) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw config_error(line, std::string(what) + " expects an unsigned integer, got '" + std::string(s) + "'");
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gas

void GasTable::validate() const {
    if (costs.count("merge") == 0) throw Error(Errc::configuration, "gas table has no merge cost");
    std::uint64_t largest = 0;
    for (const auto& [op, cost] : costs) {
        if (cost == 0) throw Error(Errc::configuration, "gas cost of '" + op + "' must be positive");
        largest = std::max(largest, cost);
    }
    if (block_gas_limit < largest) {
        throw Error(Errc::configuration, "block gas limit is below the largest single operation cost");
    }
}

GasTable GasTable::from_text(std::string_view text) {
    auto kv = KeyValueFile::parse(text);
    GasTable t;
    for (const auto& key : kv.keys()) {
        const auto v = parse_u64(*kv.get(key), kv.line_of(key), "gas field '" + key + "'");
        if (key == "limit") {
            t.block_gas_limit = v;
        } else {
            t.costs[key] = v;
        }
    }
    t.validate();
    return t;
}

std::string GasTable::to_text() const {
    std::string out = "limit=" + std::to_string(block_gas_limit) + "\n";
    for (const auto& [op, cost] : costs) out += op + "=" + std::to_string(cost) + "\n";
    return out;
}

std::string OpTrace::to_text() const {
    std::string out;
    for (const auto& [height, ops] : blocks) {
        if (ops.empty()) continue;
        out += std::to_string(height) + "\t";
        bool first = true;
        for (const auto& [op, n] : ops) {
            if (!first) out += ',';
            first = false;
            out += op + "=" + std::to_string(n);
        }
        out += '\n';
    }
    return out;
}

OpTrace OpTrace::parse(std::string_view text) {
    OpTrace t;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        const auto line = trim(text.substr(start, end - start));
        start = end + 1;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw config_error(line_no, "trace line needs '<height>\\t<ops>'");
        const auto height = parse_u64(std::string_view(line).substr(0, tab), line_no, "block height");
        if (t.blocks.count(height) != 0) throw config_error(line_no, "duplicate block height");
        auto& ops = t.blocks[height];
        for (const auto& item : split(std::string_view(line).substr(tab + 1), ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) throw config_error(line_no, "bad op count '" + item + "'");
            const auto op = item.substr(0, eq);
            if (ops.count(op) != 0) throw config_error(line_no, "duplicate op '" + op + "'");
            ops[op] = parse_u64(std::string_view(item).substr(eq + 1), line_no, "op count");
        }
        if (ops.empty()) throw config_error(line_no, "block with no ops");
    }
    return t;
}

GasEstimate gas_estimate(const OpTrace& trace, const GasTable& table) {
    GasEstimate e;
    for (const auto& [height, ops] : trace.blocks) {
        std::uint64_t gas = 0;
        for (const auto& [op, n] : ops) {
            auto it = table.costs.find(op);
            if (it == table.costs.end()) {
                e.unpriced.insert(op);
                continue;
            }
            gas += n * it->second;
        }
        e.block_gas[height] = gas;
        e.total += gas;
        if (gas > table.block_gas_limit) ++e.over_limit_blocks;
    }
    auto merge = table.costs.find("merge");
    if (merge != table.costs.end() && merge->second > 0) {
        e.merges_per_block = table.block_gas_limit / merge->second;
        e.users_per_block = e.merges_per_block >= 1 ? (e.merges_per_block - 1) / 2 : 0;
        std::uint64_t n = 0;
        while ((n + 1) - static_cast<std::uint64_t>(std::popcount(n + 1)) <= e.merges_per_block) ++n;
        e.forest_registrations_per_block = n;
    }
    return e;
}

// ---------------------------------------------------------------------------
// Config

ScenarioConfig ScenarioConfig::from_text(std::string_view text, const std::string& base_dir) {
    auto kv = KeyValueFile::parse(text);
    ScenarioConfig c;
    bool explicit_gas = false;
    for (const auto& key : kv.keys()) {
        const auto line = kv.line_of(key);
        const auto value = *kv.get(key);
        auto u64 = [&] { return parse_u64(value, line, "field '" + key + "'"); };
        try {
            if (key == "protocol") {
                c.protocol = games::parse_protocol(value);
            } else if (key == "seed") {
                c.seed = u64();
            } else if (key == "users") {
                c.users = u64();
            } else if (key == "periods") {
                c.periods = u64();
            } else if (key == "revocations") {
                c.revocations = u64();
            } else if (key == "registrations") {
                c.registrations = u64();
            } else if (key == "games") {
                c.games = split(value, ',');
            } else if (key == "game_trials") {
                c.game_trials = u64();
            } else if (key == "output") {
                c.output = value;
            } else if (key == "gas_table") {
                c.gas_table_path = value;
            } else if (key == "gas.limit") {
                c.gas.block_gas_limit = u64();
                explicit_gas = true;
            } else if (key.rfind("gas.", 0) == 0 && key.size() > 4) {
                c.gas.costs[key.substr(4)] = u64();
                explicit_gas = true;
            } else if (key == "ledger.total_players") {
                c.ledger.total_players = static_cast<std::uint32_t>(u64());
            } else if (key == "ledger.adversary_players") {
                c.ledger.adversary_players.clear();
                for (const auto& item : split(value, ',')) {
                    c.ledger.adversary_players.push_back(
                        static_cast<ledger::PlayerId>(parse_u64(item, line, "adversary player id")));
                }
            } else if (key == "ledger.k") {
                c.ledger.k = static_cast<std::uint32_t>(u64());
            } else if (key == "ledger.delta") {
                c.ledger.delta = static_cast<std::uint32_t>(u64());
            } else if (key == "ledger.epsilon") {
                c.ledger.epsilon = kv.get_double(key, c.ledger.epsilon);
            } else if (key == "ledger.strategy") {
                c.ledger.strategy = ledger::parse_strategy(value);
            } else {
                throw config_error(line, "unknown field '" + key + "'");
            }
        } catch (const Error& e) {
            const std::string what = e.what();
            if (what.rfind("line ", 0) == 0) throw;
            throw config_error(line, what);
        }
    }
    if (!c.gas_table_path.empty()) {
        if (explicit_gas) {
            throw config_error(kv.line_of("gas_table"), "gas_table and gas.* fields are mutually exclusive");
        }
        std::filesystem::path p(c.gas_table_path);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        std::string text_in;
        try {
            text_in = read_file(p.string());
        } catch (const Error&) {
            throw config_error(kv.line_of("gas_table"), "gas table '" + p.string() + "' does not exist");
        }
        c.gas = GasTable::from_text(text_in);
    }
    c.ledger.seed = c.seed;
    c.validate();
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error&) {
        throw Error(Errc::configuration, "cannot read config file '" + path + "'");
    }
    const auto dir = std::filesystem::path(path).parent_path().string();
    return from_text(text, dir.empty() ? "." : dir);
}

void ScenarioConfig::validate() const {
    ledger.validate();
    gas.validate();
    if (protocol == games::Protocol::cbe) {
        if (users > (std::uint64_t{1} << 20)) throw Error(Errc::configuration, "users must be at most 2^20");
        if (revocations > users) throw Error(Errc::configuration, "revocations exceed users");
        if (users > 0 && periods == 0) throw Error(Errc::configuration, "periods must be positive");
    } else if (registrations > (std::uint64_t{1} << 16)) {
        throw Error(Errc::configuration, "registrations must be at most 65536");
    }
    for (const auto& entry : games) {
        const auto colon = entry.find(':');
        const auto game = games::parse_game(entry.substr(0, colon));
        if (colon != std::string::npos) {
            const auto& s = games::find_strategy(entry.substr(colon + 1));
            if (s.game != game) throw Error(Errc::configuration, "strategy '" + s.name + "' does not play " + entry);
        }
    }
    if (!games.empty() && !ledger.honest_majority()) {
        throw Error(Errc::configuration, "games need an adversary fraction below epsilon");
    }
}

std::string ScenarioConfig::to_text() const {
    std::ostringstream out;
    out << "protocol=" << games::protocol_name(protocol) << "\nseed=" << seed << "\nusers=" << users
        << "\nperiods=" << periods << "\nrevocations=" << revocations << "\nregistrations=" << registrations
        << "\ngames=";
    for (std::size_t i = 0; i < games.size(); ++i) out << (i ? "," : "") << games[i];
    out << "\ngame_trials=" << game_trials << "\n";
    for (const auto& line : split(ledger.to_text(), '\n')) {
        if (!line.empty() && line.rfind("seed=", 0) != 0) out << "ledger." << line << "\n";
    }
    for (const auto& line : split(gas.to_text(), '\n')) {
        if (!line.empty()) out << "gas." << line << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Report

bool Report::all_pass() const {
    for (const auto& [_, ok] : verdicts) {
        if (!ok) return false;
    }
    return true;
}

std::string Report::to_text() const {
    std::ostringstream out;
    out << "report=scsec/1\n";
    out << "scenario=" << to_hex(scenario) << "\n";
    out << "protocol=" << games::protocol_name(protocol) << "\n";
    out << "seed=" << seed << "\n";
    for (const auto& [op, n] : ops) out << "op." << op << "=" << n << "\n";
    for (const auto& [h, g] : block_gas) out << "block." << h << "=" << g << "\n";
    out << "gas.total=" << gas_total << "\n";
    out << "gas.over_limit_blocks=" << over_limit_blocks << "\n";
    out << "capacity.merges_per_block=" << merges_per_block << "\n";
    out << "capacity.users_per_block=" << users_per_block << "\n";
    out << "capacity.forest_registrations_per_block=" << forest_registrations_per_block << "\n";
    if (!forest_depths.empty()) {
        out << "forest.depths=";
        for (std::size_t i = 0; i < forest_depths.size(); ++i) out << (i ? "," : "") << forest_depths[i];
        out << "\n";
    }
    for (std::size_t i = 0; i < table.size(); ++i) out << "table." << i << "=" << table[i] << "\n";
    for (std::size_t i = 0; i < games.size(); ++i) {
        const auto& g = games[i];
        out << "game." << i << "=" << games::game_name(g.game) << "," << games::protocol_name(g.protocol) << ","
            << g.strategy << "," << g.trials << "," << g.wins << "\n";
    }
    for (const auto& [name, ok] : verdicts) out << "verdict." << name << "=" << (ok ? "pass" : "fail") << "\n";
    return out.str();
}

Report Report::parse(std::string_view text) {
    Report r;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool header = false;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        const std::string line(text.substr(start, end - start));
        start = end + 1;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error(line_no, "expected key=value");
        const auto key = line.substr(0, eq);
        const auto value = line.substr(eq + 1);
        auto num = [&] { return parse_u64(value, line_no, key); };
        auto index_of = [&](std::string_view prefix) { return parse_u64(key.substr(prefix.size()), line_no, key); };
        try {
            if (key == "report") {
                if (value != "scsec/1") throw config_error(line_no, "unknown report version");
                header = true;
            } else if (key == "scenario") {
                r.scenario = Digest::from_bytes(from_hex(value));
            } else if (key == "protocol") {
                r.protocol = games::parse_protocol(value);
            } else if (key == "seed") {
                r.seed = num();
            } else if (key.rfind("op.", 0) == 0) {
                r.ops[key.substr(3)] = num();
            } else if (key.rfind("block.", 0) == 0) {
                r.block_gas[index_of("block.")] = num();
            } else if (key == "gas.total") {
                r.gas_total = num();
            } else if (key == "gas.over_limit_blocks") {
                r.over_limit_blocks = num();
            } else if (key == "capacity.merges_per_block") {
                r.merges_per_block = num();
            } else if (key == "capacity.users_per_block") {
                r.users_per_block = num();
            } else if (key == "capacity.forest_registrations_per_block") {
                r.forest_registrations_per_block = num();
            } else if (key == "forest.depths") {
                for (const auto& d : split(value, ',')) {
                    r.forest_depths.push_back(static_cast<std::uint32_t>(parse_u64(d, line_no, key)));
                }
            } else if (key.rfind("table.", 0) == 0) {
                if (index_of("table.") != r.table.size()) throw config_error(line_no, "table rows out of order");
                r.table.push_back(value);
            } else if (key.rfind("game.", 0) == 0) {
                if (index_of("game.") != r.games.size()) throw config_error(line_no, "games out of order");
                const auto parts = split(value, ',');
                if (parts.size() != 5) throw config_error(line_no, "game line needs five fields");
                GameSummary g;
                g.game = games::parse_game(parts[0]);
                g.protocol = games::parse_protocol(parts[1]);
                g.strategy = parts[2];
                g.trials = parse_u64(parts[3], line_no, "trials");
                g.wins = parse_u64(parts[4], line_no, "wins");
                r.games.push_back(std::move(g));
            } else if (key.rfind("verdict.", 0) == 0) {
                if (value != "pass" && value != "fail") throw config_error(line_no, "verdict must be pass or fail");
                r.verdicts[key.substr(8)] = value == "pass";
            } else {
                throw config_error(line_no, "unknown report field '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw config_error(line_no, e.what());
        } catch (const CodecError& e) {
            throw config_error(line_no, e.what());
        }
    }
    if (!header) throw Error(Errc::configuration, "missing report header");
    return r;
}

void write_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(Errc::io, "write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit_report(const Report& report, const std::string& path) { write_file(path, report.to_text()); }

// ---------------------------------------------------------------------------
// Runner

namespace {

prim::SigningKey sig_key(prim::Drbg& rng) { return prim::SigningKey(prim::sample_keys(prim::Scheme::SIG, rng)); }

struct Run {
    const ScenarioConfig& config;
    std::map<std::string, std::uint64_t> reads;  // off-chain op counts
    Report report;

    explicit Run(const ScenarioConfig& c) : config(c) {}

    bool confirm(contract::ContractSystem& sys, const std::vector<ledger::Transaction>& txs) {
        for (const auto& tx : txs) {
            if (!sys.chain().submit(tx).accepted()) return false;
        }
        bool ok = true;
        for (const auto& tx : txs) ok = sys.chain().advance_until_confirmed(tx.id) && ok;
        return ok;
    }

    contract::State access(const contract::ContractSystem& sys, const Digest& instance) {
        ++reads["read"];
        return sys.access(instance);
    }

    void finish_ledger(contract::ContractSystem& sys, OpTrace& trace) {
        auto& chain = sys.chain();
        chain.advance_rounds(config.ledger.delta);
        report.verdicts["ledger.persistence"] = audit_persistence(chain.trace()).pass;
        report.verdicts["ledger.liveness"] = audit_liveness(chain.trace()).pass;
        // On-chain op counts as recorded by the first honest player.
        const auto honest = chain.honest_players();
        const auto& runtime = sys.runtime(honest.empty() ? 0 : honest.front());
        for (const auto& r : runtime.receipts()) {
            if (r.outcome != contract::Outcome::applied) continue;
            auto& block = trace.blocks[r.height];
            for (const auto& [op, n] : r.ops) block[op] += n;
        }
    }

    // A flow that stalls on an unconfirmed read fails "scenario.completed"
    // but still reports the ledger audits and the ops that did land.
    template <typename Flow>
    void on_chain(contract::Bytecode code, OpTrace& trace, Flow flow) {
        auto codes = std::make_shared<contract::CodeRegistry>();
        codes->add(std::move(code));
        contract::ContractSystem sys(config.ledger, codes);
        bool completed = true;
        try {
            flow(sys);
        } catch (const Error& e) {
            if (e.code() == Errc::configuration || e.code() == Errc::io) throw;
            completed = false;
        }
        report.verdicts["scenario.completed"] = completed;
        finish_ledger(sys, trace);
    }

    void run_cbe(OpTrace& trace) {
        if (config.users == 0) return;
        on_chain(cbe::revocation_bytecode(), trace, [&](contract::ContractSystem& sys) { cbe_flow(sys); });
    }

    void run_rbe(OpTrace& trace) {
        if (config.registrations == 0) return;
        on_chain(rbe::curator_bytecode(), trace, [&](contract::ContractSystem& sys) { rbe_flow(sys); });
    }

    void cbe_flow(contract::ContractSystem& sys) {
        prim::Drbg rng(prim::Drbg(config.seed).fork("scenario.cbe"));

        std::uint32_t depth = 1;
        while ((std::uint64_t{1} << depth) < config.users) ++depth;
        const auto setup = cbe::cbe_setup(depth, config.periods, rng);
        cbe::KeyIssuer issuer(setup.pms);
        const auto ca = sig_key(rng);

        // The first five follow the reference roster.
        const std::pair<const char*, cbe::Day> roster[] = {{"alice", cbe::make_day(2022, 12, 31)},
                                                           {"bob", cbe::make_day(2021, 12, 31)},
                                                           {"tom", cbe::make_day(2022, 1, 31)},
                                                           {"kate", cbe::make_day(2022, 6, 30)},
                                                           {"david", cbe::make_day(2022, 11, 30)}};
        struct Member {
            std::string id;
            cbe::Day expiry;
            prim::SigningKey key;
            cbe::UserKeys keys;
        };
        std::vector<Member> members;
        std::uint64_t ca_nonce = 0;
        const auto deploy = contract::make_deploy(ca, std::string(cbe::kRevocationCode), ca_nonce++);
        std::vector<ledger::Transaction> batch{deploy};
        for (std::uint64_t i = 0; i < config.users; ++i) {
            const bool listed = i < std::size(roster);
            std::string id = listed ? roster[i].first : "user" + std::to_string(i + 1);
            const auto expiry = listed ? roster[i].second : cbe::make_day(2022, 12, 31);
            auto key = sig_key(rng);
            auto keys = issuer.keygen(id, rng);
            batch.push_back(cbe::enroll_tx(ca, deploy.id, {id, keys.serial, expiry, key.verification_key()},
                                           ca_nonce++));
            members.push_back({std::move(id), expiry, std::move(key), std::move(keys)});
        }
        bool ok = confirm(sys, batch);

        // Revoke users 2 .. revocations+1 (bob and tom first), wrapping to alice last.
        std::vector<ledger::Transaction> revokes;
        for (std::uint64_t j = 0; j < config.revocations; ++j) {
            const auto& m = members[(j + 1) % members.size()];
            revokes.push_back(cbe::revocation_request(m.key, deploy.id, m.id, m.expiry - 30, 0));
        }
        ok = confirm(sys, revokes) && ok;
        for (const auto& tx : revokes) {
            ok = ok && sys.receipt(tx).outcome == contract::Outcome::applied;
        }
        report.verdicts["cbe.requests_applied"] = ok;

        const auto table = cbe::RevocationTable::from_state(access(sys, deploy.id));
        for (const auto& line : split(table.export_lines(), '\n')) report.table.push_back(line);

        bool valid_ok = true;
        bool revoked_ok = true;
        for (std::uint64_t period = 1; period <= config.periods; ++period) {
            for (const auto& m : members) {
                const Bytes msg = rng.bytes(24);
                const auto ct = cbe::cbe_enc(setup.pms, cbe::public_part(m.keys), period, msg, rng);
                const auto cert = cbe::cbe_cert(setup.ca, setup.pms, period, m.id, table);
                ++reads["cert"];
                const auto out = cert ? cbe::cbe_dec(m.keys, *cert, setup.pms.xP, ct) : std::nullopt;
                if (table.find(m.id)->state == cbe::CertState::valid) {
                    valid_ok = valid_ok && out && *out == msg;
                } else {
                    revoked_ok = revoked_ok && !out;
                }
            }
        }
        report.verdicts["cbe.valid_users_decrypt"] = valid_ok;
        report.verdicts["cbe.revoked_users_bottom"] = revoked_ok;
        std::uint64_t revoked_rows = 0;
        for (const auto& row : table.rows) revoked_rows += row.state == cbe::CertState::revoked ? 1 : 0;
        report.verdicts["cbe.table_shape"] = table.rows.size() == config.users && revoked_rows == config.revocations;
    }

    void rbe_flow(contract::ContractSystem& sys) {
        prim::Drbg rng(prim::Drbg(config.seed).fork("scenario.rbe"));

        auto setup = rbe::rbe_setup(rbe::kLambda, rng);
        const auto curator = sig_key(rng);
        const auto deploy = contract::make_deploy(curator, std::string(rbe::kCuratorCode), 0);
        bool ok = confirm(sys, {deploy, rbe::init_tx(curator, deploy.id, setup.crs, setup.pp, 1)});

        std::vector<std::string> ids;
        std::vector<prim::KeyMaterial> keys;
        std::vector<ledger::Transaction> regs;
        for (std::uint64_t i = 0; i < config.registrations; ++i) {
            ids.push_back("user" + std::to_string(i + 1));
            keys.push_back(rbe::rbe_keygen(rng));
            const auto signer = sig_key(rng);
            regs.push_back(rbe::register_tx(signer, deploy.id, ids.back(), keys.back().public_key, 0));
        }
        ok = confirm(sys, regs) && ok;
        std::uint64_t merges = 0;
        for (const auto& tx : regs) {
            const auto r = sys.receipt(tx);
            ok = ok && r.outcome == contract::Outcome::applied;
            if (auto it = r.ops.find("merge"); it != r.ops.end()) merges += it->second;
        }
        report.verdicts["rbe.registrations_applied"] = ok;

        const auto state = access(sys, deploy.id);
        const auto pp = rbe::pp_from_state(state);
        const auto forest = rbe::forest_from_state(state);
        report.forest_depths = forest.depths();

        const auto n = config.registrations;
        std::vector<std::uint32_t> expected;
        for (int b = 63; b >= 0; --b) {
            if ((n >> b) & 1) expected.push_back(static_cast<std::uint32_t>(b) + 1);
        }
        report.verdicts["rbe.forest_law"] =
            forest.depths() == expected && merges == n - static_cast<std::uint64_t>(std::popcount(n));
        report.verdicts["rbe.params_match_chain"] = forest.public_params() == pp;

        bool dec_ok = true;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const Bytes msg = rng.bytes(24);
            const auto ct = rbe::rbe_enc(setup.crs, pp, ids[i], msg, rng);
            const auto out = rbe::rbe_dec(keys[i].secret_key, rbe::rbe_update(forest, ids[i]), ct);
            ++reads["update"];
            dec_ok = dec_ok && out.kind == rbe::DecResult::Kind::message && out.m == msg;
        }
        report.verdicts["rbe.every_id_decrypts"] = dec_ok;
    }

    void run_games() {
        if (config.games.empty()) return;
        bool bounded = true;
        for (const auto& entry : config.games) {
            const auto colon = entry.find(':');
            const auto game = games::parse_game(entry.substr(0, colon));
            std::vector<const games::AdversaryStrategy*> chosen;
            if (colon != std::string::npos) {
                chosen.push_back(&games::find_strategy(entry.substr(colon + 1)));
            } else {
                for (const auto& s : games::builtin_strategies()) {
                    if (s.game == game) chosen.push_back(&s);
                }
            }
            for (const auto* s : chosen) {
                const auto t = games::run_game(game, config.protocol, *s, config.game_trials, config.seed, config.ledger);
                report.games.push_back({game, config.protocol, s->name, t.trials, t.wins});
                bounded = bounded && t.wins == 0 && t.decrypt_mismatches == 0;
            }
        }
        report.verdicts["games.no_bounded_wins"] = bounded;
    }
};

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
    config.validate();
    Run run(config);
    ScenarioResult out;
    run.report.scenario = prim::tagged_hash("scsec.scenario", to_bytes(config.to_text()));
    run.report.protocol = config.protocol;
    run.report.seed = config.seed;
    if (config.protocol == games::Protocol::cbe) {
        run.run_cbe(out.trace);
    } else {
        run.run_rbe(out.trace);
    }
    run.run_games();

    const auto gas = gas_estimate(out.trace, config.gas);
    auto& r = run.report;
    for (const auto& [_, ops] : out.trace.blocks) {
        for (const auto& [op, n] : ops) r.ops[op] += n;
    }
    for (const auto& [op, n] : run.reads) r.ops[op] += n;
    r.block_gas = gas.block_gas;
    r.gas_total = gas.total;
    r.over_limit_blocks = gas.over_limit_blocks;
    r.merges_per_block = gas.merges_per_block;
    r.users_per_block = gas.users_per_block;
    r.forest_registrations_per_block = gas.forest_registrations_per_block;
    out.report = std::move(r);
    return out;
}

}  // namespace scsec::scenario
