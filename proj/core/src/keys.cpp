#include "scsec/keys.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "scsec/codec.hpp"
#include "scsec/hash.hpp"

namespace scsec::prim {
namespace {

constexpr std::size_t kGcmNonce = 12;
constexpr std::size_t kGcmTag = 16;

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
struct PkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};

using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

PkeyPtr raw_private(int type, ByteView sk) {
    if (sk.size() != 32) return nullptr;
    return PkeyPtr(EVP_PKEY_new_raw_private_key(type, nullptr, sk.data(), sk.size()));
}

PkeyPtr raw_public(int type, ByteView pk) {
    if (pk.size() != 32) return nullptr;
    return PkeyPtr(EVP_PKEY_new_raw_public_key(type, nullptr, pk.data(), pk.size()));
}

Bytes raw_public_of(EVP_PKEY* key) {
    Bytes out(32);
    std::size_t len = out.size();
    if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1 || len != 32) {
        throw std::runtime_error("cannot extract public key");
    }
    return out;
}

Bytes gcm_seal(ByteView key, ByteView nonce, ByteView plain) {
    std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
    Bytes out(nonce.begin(), nonce.end());
    out.resize(kGcmNonce + plain.size() + kGcmTag);
    int len = 0;
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1 ||
        EVP_EncryptUpdate(ctx.get(), out.data() + kGcmNonce, &len, plain.data(), static_cast<int>(plain.size())) != 1 ||
        EVP_EncryptFinal_ex(ctx.get(), out.data() + kGcmNonce + len, &len) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTag, out.data() + kGcmNonce + plain.size()) != 1) {
        throw std::runtime_error("AES-GCM encryption failed");
    }
    return out;
}

std::optional<Bytes> gcm_open(ByteView key, ByteView sealed) {
    if (sealed.size() < kGcmNonce + kGcmTag) return std::nullopt;
    const std::size_t body = sealed.size() - kGcmNonce - kGcmTag;
    std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
    Bytes plain(body);
    Bytes tag(sealed.end() - kGcmTag, sealed.end());
    int len = 0;
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), sealed.data()) != 1 ||
        EVP_DecryptUpdate(ctx.get(), plain.data(), &len, sealed.data() + kGcmNonce, static_cast<int>(body)) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTag, tag.data()) != 1) {
        return std::nullopt;
    }
    if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + len, &len) != 1) return std::nullopt;
    return plain;
}

std::optional<Bytes> x25519(ByteView secret, ByteView peer_public) {
    auto sk = raw_private(EVP_PKEY_X25519, secret);
    auto pk = raw_public(EVP_PKEY_X25519, peer_public);
    if (!sk || !pk) return std::nullopt;
    std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> ctx(EVP_PKEY_CTX_new(sk.get(), nullptr));
    Bytes shared(32);
    std::size_t len = shared.size();
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 || EVP_PKEY_derive_set_peer(ctx.get(), pk.get()) != 1 ||
        EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != 32) {
        return std::nullopt;
    }
    return shared;
}

Digest pke_session_key(ByteView shared, ByteView ephemeral_pk, ByteView recipient_pk) {
    Encoder enc;
    enc.field(shared).field(ephemeral_pk).field(recipient_pk);
    return tagged_hash("scsec.pke.kdf", enc.bytes());
}

}  // namespace

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::SE: return "SE";
        case Scheme::SIG: return "SIG";
        case Scheme::PKE: return "PKE";
    }
    return "?";
}

KeyMaterial sample_keys(Scheme scheme, ByteView seed) {
    Drbg rng(seed);
    return sample_keys(scheme, rng);
}

KeyMaterial sample_keys(Scheme scheme, Drbg& rng) {
    KeyMaterial km;
    km.scheme = scheme;
    km.secret_key = rng.bytes(32);
    switch (scheme) {
        case Scheme::SE:
            break;
        case Scheme::SIG:
            km.public_key = raw_public_of(raw_private(EVP_PKEY_ED25519, km.secret_key).get());
            break;
        case Scheme::PKE:
            km.public_key = raw_public_of(raw_private(EVP_PKEY_X25519, km.secret_key).get());
            break;
    }
    return km;
}

Bytes se_enc(ByteView key, ByteView message, Drbg& rng) {
    if (key.size() != kSymmetricKeySize) throw std::invalid_argument("SE key must be 32 bytes");
    return gcm_seal(key, rng.bytes(kGcmNonce), message);
}

std::optional<Bytes> se_dec(ByteView key, ByteView ciphertext) {
    if (key.size() != kSymmetricKeySize) return std::nullopt;
    return gcm_open(key, ciphertext);
}

namespace {
Bytes sign_with(EVP_PKEY* key, ByteView message) {
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
    Bytes sig(kSignatureSize);
    std::size_t len = sig.size();
    if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key) != 1 ||
        EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1 || len != kSignatureSize) {
        throw std::runtime_error("Ed25519 signing failed");
    }
    return sig;
}
}  // namespace

Bytes sign(ByteView secret_key, ByteView message) {
    auto key = raw_private(EVP_PKEY_ED25519, secret_key);
    if (!key) throw std::invalid_argument("signing key must be 32 bytes");
    return sign_with(key.get(), message);
}

bool verify(ByteView verification_key, ByteView signature, ByteView message) {
    if (signature.size() != kSignatureSize) return false;
    auto key = raw_public(EVP_PKEY_ED25519, verification_key);
    if (!key) return false;
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
    if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(), message.size()) == 1;
}

SigningKey::SigningKey(KeyMaterial keys) : keys_(std::move(keys)) {
    if (keys_.scheme != Scheme::SIG) throw std::invalid_argument("SigningKey needs SIG key material");
    auto key = raw_private(EVP_PKEY_ED25519, keys_.secret_key);
    if (!key) throw std::invalid_argument("signing key must be 32 bytes");
    handle_ = std::shared_ptr<void>(key.release(), [](void* p) { EVP_PKEY_free(static_cast<EVP_PKEY*>(p)); });
}

Bytes SigningKey::sign(ByteView message) const { return sign_with(static_cast<EVP_PKEY*>(handle_.get()), message); }

Bytes pke_enc(ByteView public_key, ByteView message, ByteView randomness) {
    const Digest eph_secret = tagged_hash("scsec.pke.ephemeral", randomness);
    auto eph = raw_private(EVP_PKEY_X25519, eph_secret.view());
    Bytes eph_pk = raw_public_of(eph.get());
    auto shared = x25519(eph_secret.view(), public_key);
    if (!shared) throw std::invalid_argument("PKE public key is not a valid X25519 point");
    const Digest key = pke_session_key(*shared, eph_pk, public_key);
    // The session key is unique per randomness, so a fixed nonce is safe.
    const Bytes nonce(kGcmNonce, 0);
    return concat(eph_pk, gcm_seal(key.view(), nonce, message));
}

std::optional<Bytes> pke_dec(ByteView secret_key, ByteView ciphertext) {
    if (ciphertext.size() < kPublicKeySize + kGcmNonce + kGcmTag) return std::nullopt;
    ByteView eph_pk = ciphertext.first(kPublicKeySize);
    auto shared = x25519(secret_key, eph_pk);
    if (!shared) return std::nullopt;
    auto own = raw_private(EVP_PKEY_X25519, secret_key);
    if (!own) return std::nullopt;
    const Bytes own_pk = raw_public_of(own.get());
    const Digest key = pke_session_key(*shared, eph_pk, own_pk);
    return gcm_open(key.view(), ciphertext.subspan(kPublicKeySize));
}

}  // namespace scsec::prim
