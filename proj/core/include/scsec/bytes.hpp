#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scsec {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestSize = 32;

/// 256-bit digest. All identifiers in the simulator (transaction ids, block
/// hashes, contract instance ids, Merkle nodes) are values of this type.
struct Digest {
    std::array<std::uint8_t, kDigestSize> bytes{};

    auto operator<=>(const Digest&) const = default;

    ByteView view() const { return {bytes.data(), bytes.size()}; }
    Bytes to_bytes() const { return {bytes.begin(), bytes.end()}; }
    bool is_zero() const;

    static Digest from_bytes(ByteView data);
};

struct DigestHash {
    std::size_t operator()(const Digest& d) const noexcept {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | d.bytes[i];
        return h;
    }
};

Bytes to_bytes(std::string_view s);
std::string to_string(ByteView b);

std::string to_hex(ByteView b);
inline std::string to_hex(const Digest& d) { return to_hex(d.view()); }
/// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

Bytes concat(ByteView a, ByteView b);

}  // namespace scsec
