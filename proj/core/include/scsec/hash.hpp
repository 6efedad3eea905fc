#pragma once

#include <cstdint>
#include <string_view>

#include "scsec/bytes.hpp"

namespace scsec::prim {

Digest sha256(ByteView data);
/// SHA-256 over the canonical encoding of (tag, data); used to separate the
/// digest domains of transactions, blocks, snapshots, and so on.
Digest tagged_hash(std::string_view tag, ByteView data);

/// Key of one member of the keyed collision-resistant hash family.
struct HashKey {
    Bytes key;
    std::uint32_t index = 0;

    bool operator==(const HashKey&) const = default;
};

/// Samples the family member for `index` from `seed`. Distinct indices give
/// independent keys.
HashKey hgen(ByteView seed, std::uint32_t index);

/// HMAC-SHA256 under hk. Compresses any input longer than 32 bytes.
Digest crhf_hash(const HashKey& hk, ByteView message);

}  // namespace scsec::prim
