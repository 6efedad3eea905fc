#include "scsec/pairing.hpp"

#include "scsec/codec.hpp"
#include "scsec/hash.hpp"

namespace scsec::pairing {
namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t reduce(u128 x) {
    // x mod (2^61 - 1) by folding.
    std::uint64_t lo = static_cast<std::uint64_t>(x & kOrder);
    std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
    std::uint64_t r = lo + hi;
    while (r >= kOrder) r -= kOrder;
    return r;
}

std::uint64_t add_mod(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = a + b;
    return r >= kOrder ? r - kOrder : r;
}

std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + kOrder - b; }

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b) {
    return reduce(static_cast<u128>(a) * b);
}

std::uint64_t decode_below_order(ByteView b) {
    auto v = get_u64_be(b);
    if (v >= kOrder) throw CodecError("group element out of range");
    return v;
}

}  // namespace

Scalar::Scalar(std::uint64_t v) : value(reduce(v)) {}

Scalar Scalar::random(prim::Drbg& rng) { return Scalar{rng.uniform(kOrder)}; }

Scalar Scalar::random_nonzero(prim::Drbg& rng) { return Scalar{1 + rng.uniform(kOrder - 1)}; }

Scalar operator+(Scalar a, Scalar b) {
    Scalar s;
    s.value = add_mod(a.value, b.value);
    return s;
}

Scalar operator*(Scalar a, Scalar b) {
    Scalar s;
    s.value = mul_mod(a.value, b.value);
    return s;
}

G1 generator() { return G1{1}; }
G1 identity_g1() { return G1{0}; }
G1 operator+(G1 a, G1 b) { return G1{add_mod(a.log, b.log)}; }
G1 operator-(G1 a) { return G1{sub_mod(0, a.log)}; }
G1 operator*(Scalar k, G1 a) { return G1{mul_mod(k.value, a.log)}; }

G2 identity_g2() { return G2{0}; }
G2 operator*(G2 a, G2 b) { return G2{add_mod(a.exponent, b.exponent)}; }
G2 operator/(G2 a, G2 b) { return G2{sub_mod(a.exponent, b.exponent)}; }
G2 pow(G2 a, Scalar k) { return G2{mul_mod(a.exponent, k.value)}; }

G2 pair(G1 a, G1 b) { return G2{mul_mod(a.log, b.log)}; }

G1 hash_to_g1(HashTag tag, ByteView message) {
    const auto d = prim::tagged_hash(tag == HashTag::H1 ? "scsec.pairing.H1" : "scsec.pairing.H5", message);
    std::uint64_t v = reduce(get_u64_be(d.view().first(8)));
    return G1{v == 0 ? 1 : v};
}

Bytes hash_gt(G2 g, std::size_t bits) {
    const std::size_t n = (bits + 7) / 8;
    Bytes out;
    out.reserve(n + kDigestSize);
    const Bytes element = encode(g);
    for (std::uint64_t counter = 0; out.size() < n; ++counter) {
        Encoder enc;
        enc.field(element).u64(counter);
        auto block = prim::tagged_hash("scsec.pairing.H2", enc.bytes());
        out.insert(out.end(), block.bytes.begin(), block.bytes.end());
    }
    out.resize(n);
    if (bits % 8 != 0) out.back() &= static_cast<std::uint8_t>(0xff << (8 - bits % 8));
    return out;
}

Bytes encode(Scalar s) {
    Bytes b;
    put_u64_be(b, s.value);
    return b;
}
Bytes encode(G1 p) {
    Bytes b;
    put_u64_be(b, p.log);
    return b;
}
Bytes encode(G2 g) {
    Bytes b;
    put_u64_be(b, g.exponent);
    return b;
}

Scalar decode_scalar(ByteView b) {
    Scalar s;
    s.value = decode_below_order(b);
    return s;
}
G1 decode_g1(ByteView b) { return G1{decode_below_order(b)}; }
G2 decode_g2(ByteView b) { return G2{decode_below_order(b)}; }

}  // namespace scsec::pairing
