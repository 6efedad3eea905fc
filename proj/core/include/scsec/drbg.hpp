#pragma once

#include <cstdint>
#include <string_view>

#include "scsec/bytes.hpp"

namespace scsec::prim {

/// Deterministic byte stream: SHA-256 of (seed, counter) blocks.
///
/// Every random choice in the simulator (keys, nonces, adversary coins) is
/// drawn from one of these so that a run is fully determined by its seed.
class Drbg {
public:
    explicit Drbg(std::uint64_t seed);
    explicit Drbg(ByteView seed);

    Bytes bytes(std::size_t n);
    std::uint64_t next_u64();
    /// Uniform in [0, bound). bound must be non-zero.
    std::uint64_t uniform(std::uint64_t bound);
    bool coin() { return (next_u64() & 1) != 0; }

    /// Independent child stream, keyed by a label.
    Drbg fork(std::string_view label) const;

private:
    void refill();

    Digest seed_;
    std::uint64_t counter_ = 0;
    Digest block_{};
    std::size_t used_ = kDigestSize;
};

}  // namespace scsec::prim
