#pragma once

// Symmetric encryption (AES-256-GCM), signatures (Ed25519), and public-key
// encryption (X25519 + AES-256-GCM, deterministic given explicit randomness).

#include <memory>
#include <optional>
#include <string_view>

#include "scsec/bytes.hpp"
#include "scsec/drbg.hpp"

namespace scsec::prim {

enum class Scheme { SE, SIG, PKE };

std::string_view scheme_name(Scheme s);

struct KeyMaterial {
    Scheme scheme = Scheme::SE;
    Bytes public_key;  // empty for SE
    Bytes secret_key;

    bool operator==(const KeyMaterial&) const = default;
};

inline constexpr std::size_t kSymmetricKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kPkeRandomnessSize = 32;

/// Deterministic in `seed`.
KeyMaterial sample_keys(Scheme scheme, ByteView seed);
KeyMaterial sample_keys(Scheme scheme, Drbg& rng);

Bytes se_enc(ByteView key, ByteView message, Drbg& rng);
/// nullopt when the ciphertext fails authentication or is malformed.
std::optional<Bytes> se_dec(ByteView key, ByteView ciphertext);

Bytes sign(ByteView secret_key, ByteView message);
bool verify(ByteView verification_key, ByteView signature, ByteView message);

/// Signing key with the parsed OpenSSL handle cached across calls.
class SigningKey {
public:
    explicit SigningKey(KeyMaterial keys);

    const Bytes& verification_key() const { return keys_.public_key; }
    const KeyMaterial& material() const { return keys_; }
    Bytes sign(ByteView message) const;

private:
    KeyMaterial keys_;
    std::shared_ptr<void> handle_;
};

/// `randomness` is hashed into the ephemeral X25519 scalar, so the same
/// (pk, message, randomness) always yields the same ciphertext.
Bytes pke_enc(ByteView public_key, ByteView message, ByteView randomness);
/// nullopt is the failure symbol: malformed input or wrong key.
std::optional<Bytes> pke_dec(ByteView secret_key, ByteView ciphertext);

}  // namespace scsec::prim
