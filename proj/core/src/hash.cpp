#include "scsec/hash.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <stdexcept>

#include "scsec/codec.hpp"
#include "scsec/drbg.hpp"

namespace scsec::prim {

Digest sha256(ByteView data) {
    Digest out;
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != kDigestSize) {
        throw std::runtime_error("SHA-256 failed");
    }
    return out;
}

Digest tagged_hash(std::string_view tag, ByteView data) {
    Encoder enc;
    enc.field(tag).field(data);
    return sha256(enc.bytes());
}

HashKey hgen(ByteView seed, std::uint32_t index) {
    Encoder enc;
    enc.field(seed).u32(index);
    return HashKey{tagged_hash("scsec.hgen", enc.bytes()).to_bytes(), index};
}

Digest crhf_hash(const HashKey& hk, ByteView message) {
    Digest out;
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), hk.key.data(), static_cast<int>(hk.key.size()), message.data(), message.size(),
             out.bytes.data(), &len) == nullptr ||
        len != kDigestSize) {
        throw std::runtime_error("HMAC-SHA256 failed");
    }
    return out;
}

Drbg::Drbg(std::uint64_t seed) {
    Bytes s;
    put_u64_be(s, seed);
    seed_ = tagged_hash("scsec.drbg.u64", s);
}

Drbg::Drbg(ByteView seed) : seed_(tagged_hash("scsec.drbg", seed)) {}

void Drbg::refill() {
    Bytes in = seed_.to_bytes();
    put_u64_be(in, counter_++);
    block_ = sha256(in);
    used_ = 0;
}

Bytes Drbg::bytes(std::size_t n) {
    Bytes out;
    out.reserve(n);
    while (out.size() < n) {
        if (used_ == kDigestSize) refill();
        out.push_back(block_.bytes[used_++]);
    }
    return out;
}

std::uint64_t Drbg::next_u64() { return get_u64_be(bytes(8)); }

std::uint64_t Drbg::uniform(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform bound must be non-zero");
    // Rejection sampling keeps the distribution exact.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % bound;
}

Drbg Drbg::fork(std::string_view label) const {
    Encoder enc;
    enc.field(seed_).field(label);
    return Drbg(ByteView(enc.bytes()));
}

}  // namespace scsec::prim
