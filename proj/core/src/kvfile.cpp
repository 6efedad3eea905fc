#include "scsec/kvfile.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "scsec/error.hpp"

namespace scsec {

std::string_view errc_name(Errc e) {
    switch (e) {
        case Errc::not_confirmed: return "not-confirmed";
        case Errc::unknown_state: return "unknown-state";
        case Errc::unknown_player: return "unknown-player";
        case Errc::unknown_instance: return "unknown-instance";
        case Errc::unknown_opcode: return "unknown-opcode";
        case Errc::unknown_id: return "unknown-id";
        case Errc::tree_full: return "tree-full";
        case Errc::configuration: return "configuration-error";
        case Errc::io: return "io-error";
    }
    return "unknown";
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) pos = s.size();
        auto piece = trim(s.substr(start, pos - start));
        if (!piece.empty()) out.push_back(std::move(piece));
        start = pos + 1;
    }
    return out;
}

KeyValueFile KeyValueFile::parse(std::string_view text) {
    KeyValueFile kv;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view raw = text.substr(start, end - start);
        start = end + 1;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        auto line = trim(raw);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(Errc::configuration, "line " + std::to_string(line_no) + ": expected key=value");
        }
        auto key = trim(std::string_view(line).substr(0, eq));
        auto value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw Error(Errc::configuration, "line " + std::to_string(line_no) + ": empty key");
        if (kv.entries_.count(key) != 0) {
            throw Error(Errc::configuration, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        kv.entries_.emplace(std::move(key), Entry{std::move(value), line_no});
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::configuration, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool KeyValueFile::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
}

std::string KeyValueFile::get_or(std::string_view key, std::string fallback) const {
    auto v = get(key);
    return v ? *v : std::move(fallback);
}

std::uint64_t KeyValueFile::get_u64(std::string_view key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
        throw Error(Errc::configuration, "line " + std::to_string(line_of(key)) + ": field '" + std::string(key) +
                                             "' expects an unsigned integer, got '" + *v + "'");
    }
    return out;
}

double KeyValueFile::get_double(std::string_view key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        double out = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw Error(Errc::configuration, "line " + std::to_string(line_of(key)) + ": field '" + std::string(key) +
                                             "' expects a number, got '" + *v + "'");
    }
}

std::vector<std::string> KeyValueFile::get_list(std::string_view key) const {
    auto v = get(key);
    if (!v) return {};
    return split(*v, ',');
}

std::size_t KeyValueFile::line_of(std::string_view key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
}

std::vector<std::string> KeyValueFile::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : entries_) out.push_back(k);
    return out;
}

void KeyValueFile::set(std::string key, std::string value) { entries_[std::move(key)] = Entry{std::move(value), 0}; }

}  // namespace scsec
