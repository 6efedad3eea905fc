#include <gtest/gtest.h>

#include <set>
#include <unordered_set>

#include "scsec/codec.hpp"
#include "scsec/drbg.hpp"
#include "scsec/hash.hpp"
#include "scsec/keys.hpp"

using namespace scsec;
using namespace scsec::prim;

TEST(SampleKeys, SeDeterministicUnderSeed) {
    const Bytes seed = {7};
    EXPECT_EQ(sample_keys(Scheme::SE, seed), sample_keys(Scheme::SE, seed));
    EXPECT_EQ(sample_keys(Scheme::SE, seed).secret_key.size(), kSymmetricKeySize);
    EXPECT_TRUE(sample_keys(Scheme::SE, seed).public_key.empty());
    EXPECT_NE(sample_keys(Scheme::SE, seed), sample_keys(Scheme::SE, Bytes{8}));
}

TEST(SampleKeys, PkePublicDiffersFromSecret) {
    auto k = sample_keys(Scheme::PKE, Bytes{1, 2, 3});
    EXPECT_EQ(k.public_key.size(), kPublicKeySize);
    EXPECT_NE(k.public_key, k.secret_key);
}

TEST(SampleKeys, ThousandSignatureKeysDistinct) {
    Drbg rng(99);
    std::set<Bytes> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(sample_keys(Scheme::SIG, rng).public_key);
    EXPECT_EQ(seen.size(), 1000u);
}

TEST(SymmetricEncryption, EmptyMessageRoundTrip) {
    Drbg rng(1);
    auto k = sample_keys(Scheme::SE, rng);
    auto ct = se_enc(k.secret_key, {}, rng);
    auto m = se_dec(k.secret_key, ct);
    ASSERT_TRUE(m.has_value());
    EXPECT_TRUE(m->empty());
}

TEST(SymmetricEncryption, RandomMessagesUpToOneMebibyteRoundTrip) {
    Drbg rng(2);
    auto k = sample_keys(Scheme::SE, rng);
    for (int i = 0; i < 100; ++i) {
        const std::size_t len = i == 0 ? (1u << 20) : rng.uniform(4096);
        auto m = rng.bytes(len);
        auto back = se_dec(k.secret_key, se_enc(k.secret_key, m, rng));
        ASSERT_TRUE(back.has_value());
        ASSERT_EQ(*back, m);
    }
}

TEST(SymmetricEncryption, EveryFlippedBitFailsAuthentication) {
    Drbg rng(3);
    auto k = sample_keys(Scheme::SE, rng);
    auto ct = se_enc(k.secret_key, to_bytes("attack at dawn"), rng);
    for (std::size_t bit = 0; bit < ct.size() * 8; ++bit) {
        auto bad = ct;
        bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        EXPECT_FALSE(se_dec(k.secret_key, bad).has_value()) << "bit " << bit;
    }
    EXPECT_FALSE(se_dec(k.secret_key, Bytes{1, 2}).has_value());
}

TEST(Signature, RoundTripAndWrongKey) {
    Drbg rng(4);
    auto a = sample_keys(Scheme::SIG, rng);
    auto b = sample_keys(Scheme::SIG, rng);
    auto m = to_bytes("message");
    auto sig = sign(a.secret_key, m);
    EXPECT_EQ(sig.size(), kSignatureSize);
    EXPECT_TRUE(verify(a.public_key, sig, m));
    EXPECT_FALSE(verify(b.public_key, sig, m));
    EXPECT_FALSE(verify(a.public_key, sig, to_bytes("messagf")));
    EXPECT_FALSE(verify(a.public_key, Bytes(3, 0), m));
    EXPECT_FALSE(verify(Bytes(5, 1), sig, m));
}

TEST(Signature, CachedSigningKeyMatchesFreeFunction) {
    Drbg rng(5);
    SigningKey key(sample_keys(Scheme::SIG, rng));
    auto m = to_bytes("same bytes");
    EXPECT_EQ(key.sign(m), sign(key.material().secret_key, m));
}

TEST(Signature, TenThousandRandomForgeriesRejected) {
    Drbg rng(6);
    auto k = sample_keys(Scheme::SIG, rng);
    int accepted = 0;
    for (int i = 0; i < 10000; ++i) {
        auto m = rng.bytes(1 + rng.uniform(64));
        auto sig = rng.bytes(kSignatureSize);
        accepted += verify(k.public_key, sig, m) ? 1 : 0;
    }
    EXPECT_EQ(accepted, 0);
}

TEST(PublicKeyEncryption, RoundTripAndDeterminism) {
    Drbg rng(7);
    auto k = sample_keys(Scheme::PKE, rng);
    auto m = to_bytes("registered message");
    auto r = rng.bytes(kPkeRandomnessSize);
    auto ct = pke_enc(k.public_key, m, r);
    EXPECT_EQ(ct, pke_enc(k.public_key, m, r));
    EXPECT_NE(ct, pke_enc(k.public_key, m, rng.bytes(kPkeRandomnessSize)));
    auto back = pke_dec(k.secret_key, ct);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, m);
}

TEST(PublicKeyEncryption, WrongSecretKeyFails) {
    Drbg rng(8);
    for (int i = 0; i < 100; ++i) {
        auto a = sample_keys(Scheme::PKE, rng);
        auto b = sample_keys(Scheme::PKE, rng);
        auto ct = pke_enc(a.public_key, rng.bytes(1 + rng.uniform(100)), rng.bytes(32));
        ASSERT_FALSE(pke_dec(b.secret_key, ct).has_value());
    }
}

TEST(PublicKeyEncryption, MalformedCiphertextFails) {
    Drbg rng(9);
    auto k = sample_keys(Scheme::PKE, rng);
    EXPECT_FALSE(pke_dec(k.secret_key, {}).has_value());
    EXPECT_FALSE(pke_dec(k.secret_key, rng.bytes(20)).has_value());
    EXPECT_FALSE(pke_dec(k.secret_key, rng.bytes(200)).has_value());
}

TEST(Crhf, StableOnEmptyInputAndCompressing) {
    Bytes seed = to_bytes("seed");
    auto hk = hgen(seed, 1);
    EXPECT_EQ(crhf_hash(hk, {}), crhf_hash(hgen(seed, 1), {}));
    EXPECT_EQ(hk, hgen(seed, 1));
    EXPECT_EQ(crhf_hash(hk, Bytes(1000, 0xab)).view().size(), kDigestSize);
}

TEST(Crhf, DistinctIndicesDisagree) {
    Bytes seed = to_bytes("seed");
    auto hk1 = hgen(seed, 1);
    auto hk2 = hgen(seed, 2);
    EXPECT_NE(hk1.key, hk2.key);
    Drbg rng(10);
    int agreements = 0;
    for (int i = 0; i < 10000; ++i) {
        auto m = rng.bytes(rng.uniform(80));
        agreements += crhf_hash(hk1, m) == crhf_hash(hk2, m) ? 1 : 0;
    }
    EXPECT_EQ(agreements, 0);
}

TEST(Crhf, NoCollisionsOverAMillionInputs) {
    auto hk = hgen(to_bytes("collision"), 3);
    std::unordered_set<Digest, DigestHash> seen;
    seen.reserve(1'000'000);
    Bytes m(8);
    for (std::uint64_t i = 0; i < 1'000'000; ++i) {
        for (int b = 0; b < 8; ++b) m[b] = static_cast<std::uint8_t>(i >> (8 * b));
        ASSERT_TRUE(seen.insert(crhf_hash(hk, m)).second) << "collision at " << i;
    }
}

TEST(Drbg, DeterministicAndForkIndependent) {
    Drbg a(5), b(5);
    EXPECT_EQ(a.bytes(100), b.bytes(100));
    Drbg root(5);
    EXPECT_NE(root.fork("x").bytes(32), root.fork("y").bytes(32));
    Drbg u(6);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(u.uniform(7), 7u);
}

TEST(Codec, LengthPrefixedFieldsAreUnambiguous) {
    Encoder a;
    a.field(std::string_view("ab")).field(std::string_view("c"));
    Encoder b;
    b.field(std::string_view("a")).field(std::string_view("bc"));
    EXPECT_NE(a.bytes(), b.bytes());
    Decoder d(a.bytes());
    EXPECT_EQ(d.field_string(), "ab");
    EXPECT_EQ(d.field_string(), "c");
    EXPECT_TRUE(d.done());
    Bytes truncated(a.bytes().begin(), a.bytes().end() - 1);
    Decoder t(truncated);
    t.field();
    EXPECT_THROW(t.field(), CodecError);
}

TEST(Hex, RoundTripAndRejectsGarbage) {
    Bytes b = {0x00, 0xff, 0x10};
    EXPECT_EQ(to_hex(b), "00ff10");
    EXPECT_EQ(from_hex("00ff10"), b);
    EXPECT_THROW(from_hex("0"), std::invalid_argument);
    EXPECT_THROW(from_hex("zz"), std::invalid_argument);
}
