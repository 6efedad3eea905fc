#pragma once

// Flat `key=value` text files: one pair per line, `#` starts a comment,
// surrounding whitespace is ignored. Used for ledger and scenario configs.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scsec {

class KeyValueFile {
public:
    /// Throws Error(configuration) with the offending line number on a
    /// malformed line or a duplicated key.
    static KeyValueFile parse(std::string_view text);
    static KeyValueFile load(const std::string& path);

    bool has(std::string_view key) const;
    std::optional<std::string> get(std::string_view key) const;
    std::string get_or(std::string_view key, std::string fallback) const;
    std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
    double get_double(std::string_view key, double fallback) const;
    std::vector<std::string> get_list(std::string_view key) const;
    /// Line on which key was defined, 0 if absent.
    std::size_t line_of(std::string_view key) const;

    std::vector<std::string> keys() const;
    void set(std::string key, std::string value);

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };
    std::map<std::string, Entry, std::less<>> entries_;
};

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

}  // namespace scsec
