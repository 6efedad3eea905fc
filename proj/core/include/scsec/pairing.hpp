#pragma once

// Symmetric bilinear group with exact algebra and no hardness.
//
// G1 is Z_q written additively with generator P = 1; an element is stored as
// its discrete log. The target group G2 is stored by exponent with respect to
// e(P, P), so multiplication in G2 is addition of exponents. The pairing is
// e(aP, bP) = e(P, P)^{ab}, which makes bilinearity hold exactly. It is meant
// for checking the algebraic identities of the protocols, never for secrecy.
//
// Wire encoding of every element and scalar: 8-byte big-endian integer in
// [0, q).

#include <cstdint>
#include <string_view>

#include "scsec/bytes.hpp"
#include "scsec/drbg.hpp"

namespace scsec::pairing {

/// Group order q = 2^61 - 1 (a Mersenne prime).
inline constexpr std::uint64_t kOrder = (std::uint64_t{1} << 61) - 1;

struct Scalar {
    std::uint64_t value = 0;

    Scalar() = default;
    /// Reduces modulo q.
    explicit Scalar(std::uint64_t v);

    auto operator<=>(const Scalar&) const = default;

    static Scalar random(prim::Drbg& rng);
    /// Uniform over Z_q \ {0}.
    static Scalar random_nonzero(prim::Drbg& rng);
};

Scalar operator+(Scalar a, Scalar b);
Scalar operator*(Scalar a, Scalar b);

struct G1 {
    std::uint64_t log = 0;
    auto operator<=>(const G1&) const = default;
};

struct G2 {
    std::uint64_t exponent = 0;
    auto operator<=>(const G2&) const = default;
};

G1 generator();
G1 identity_g1();
G1 operator+(G1 a, G1 b);
G1 operator-(G1 a);
G1 operator*(Scalar k, G1 a);

G2 identity_g2();
G2 operator*(G2 a, G2 b);
G2 operator/(G2 a, G2 b);
G2 pow(G2 a, Scalar k);

G2 pair(G1 a, G1 b);

enum class HashTag { H1, H5 };

/// Hash onto G1, domain-separated by tag. Never returns the identity.
G1 hash_to_g1(HashTag tag, ByteView message);
/// Hash from G2 to exactly `bits` bits (trailing bits of the last byte are zero).
Bytes hash_gt(G2 g, std::size_t bits);

Bytes encode(Scalar s);
Bytes encode(G1 p);
Bytes encode(G2 g);
/// Throw CodecError unless given 8 bytes encoding a value below q.
Scalar decode_scalar(ByteView b);
G1 decode_g1(ByteView b);
G2 decode_g2(ByteView b);

}  // namespace scsec::pairing
