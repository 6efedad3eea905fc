#include <gtest/gtest.h>

#include <bit>
#include <map>

#include "oracles.hpp"
#include "scsec/codec.hpp"
#include "scsec/error.hpp"
#include "scsec/rbe.hpp"

using namespace scsec;
using namespace scsec::rbe;

namespace {

prim::SigningKey key_for(std::uint64_t seed) {
    prim::Drbg rng(seed);
    return prim::SigningKey(prim::sample_keys(prim::Scheme::SIG, rng));
}

std::string user(std::size_t i) { return "user" + std::to_string(i); }

struct Population {
    prim::Drbg rng{7};
    SetupResult setup = rbe_setup(kLambda, rng);
    std::vector<prim::KeyMaterial> keys;
    std::vector<std::pair<std::string, Bytes>> leaves;

    void add(std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            keys.push_back(rbe_keygen(rng));
            const auto id = user(leaves.size());
            leaves.emplace_back(id, keys.back().public_key);
            setup.forest.insert({id, keys.back().public_key});
        }
    }
};

std::shared_ptr<contract::CodeRegistry> registry() {
    auto reg = std::make_shared<contract::CodeRegistry>();
    reg->add(curator_bytecode());
    return reg;
}

struct Curator {
    prim::Drbg rng{11};
    SetupResult setup = rbe_setup(kLambda, rng);
    prim::SigningKey deployer = key_for(900);
    std::uint64_t nonce = 0;
    contract::ContractSystem sys;
    Digest instance;

    explicit Curator(ledger::LedgerConfig config = {}) : sys(std::move(config), registry()) {
        auto d = contract::make_deploy(deployer, std::string(kCuratorCode), nonce++);
        EXPECT_TRUE(sys.submit_and_confirm(d));
        instance = sys.deploy(d).first;
        EXPECT_TRUE(sys.submit_and_confirm(init_tx(deployer, instance, setup.crs, setup.pp, nonce++)));
    }
};

}  // namespace

TEST(Forest, DepthsFollowBinaryDigitsAndMergesFollowCarries) {
    Population pop;
    std::uint64_t total = 0;
    for (std::uint64_t n = 1; n <= 256; ++n) {
        prim::Drbg r(n);
        const auto merges = pop.setup.forest.insert({user(n), r.bytes(32)});
        total += merges;
        EXPECT_EQ(merges, oracle::increment_carries(n)) << n;
        EXPECT_EQ(pop.setup.forest.depths(), oracle::binary_depths(n)) << n;
        EXPECT_EQ(total, n - static_cast<std::uint64_t>(std::popcount(n))) << n;
    }
}

TEST(Forest, RootsMatchDirectRecursion) {
    for (std::size_t n : {1u, 2u, 3u, 5u, 7u, 8u, 13u, 31u, 32u, 45u}) {
        Population pop;
        pop.add(n);
        const auto pp = pop.setup.forest.public_params();
        ASSERT_EQ(pp.roots.size(), static_cast<std::size_t>(std::popcount(n)));
        std::size_t at = 0;
        for (const auto& root : pp.roots) {
            const std::size_t size = std::size_t{1} << (root.depth - 1);
            std::vector<std::pair<std::string, Bytes>> chunk(pop.leaves.begin() + at, pop.leaves.begin() + at + size);
            EXPECT_EQ(root.rt, oracle::merkle_root(pp.hks, chunk)) << n;
            at += size;
        }
        EXPECT_EQ(at, n);
    }
}

TEST(Forest, RootOnlyAccumulationAgreesWithFullForest) {
    Population pop;
    PublicParams pp = pop.setup.pp;
    for (std::size_t n = 1; n <= 64; ++n) {
        pop.add(1);
        const auto merges = accumulate(pp, {pop.leaves.back().first, pop.leaves.back().second});
        EXPECT_EQ(merges, oracle::increment_carries(n));
        EXPECT_EQ(pp, pop.setup.forest.public_params()) << n;
    }
}

TEST(Forest, EveryOpeningVerifiesAndEveryTamperFails) {
    Population pop;
    pop.add(23);
    const auto pp = pop.setup.forest.public_params();
    for (const auto& [id, pk] : pop.leaves) {
        const auto o = pop.setup.forest.opening(id);
        EXPECT_TRUE(verify_opening(pp, o.tree_index, id, o)) << id;
        EXPECT_EQ(o.levels.size() + 1, pp.roots[o.tree_index].depth);
        EXPECT_EQ(o.pk, pk);
        EXPECT_FALSE(verify_opening(pp, o.tree_index, id + "x", o));
        EXPECT_FALSE(verify_opening(pp, o.tree_index + 1, id, o));
        for (std::size_t j = 0; j < o.levels.size(); ++j) {
            auto bad = o;
            bad.levels[j].b ^= 1;
            EXPECT_FALSE(verify_opening(pp, o.tree_index, id, bad));
            bad = o;
            bad.levels[j].h0.bytes[0] ^= 1;
            EXPECT_FALSE(verify_opening(pp, o.tree_index, id, bad));
        }
        auto bad_pk = o;
        bad_pk.pk[0] ^= 1;
        EXPECT_FALSE(verify_opening(pp, o.tree_index, id, bad_pk));
    }
}

TEST(Forest, UnknownIdThrows) {
    Population pop;
    pop.add(3);
    try {
        (void)pop.setup.forest.opening("nobody");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unknown_id);
    }
}

TEST(Forest, EachUserSeesAtMostLogNRootChanges) {
    Population pop;
    constexpr std::size_t kN = 1024;
    std::map<std::string, Digest> current;
    std::map<std::string, std::uint32_t> changes;
    for (std::size_t n = 1; n <= kN; ++n) {
        prim::Drbg r(n);
        pop.setup.forest.insert({user(n), r.bytes(32)});
        const auto pp = pop.setup.forest.public_params();
        // Leaves are stored in registration order, so tree membership follows
        // from the depths alone.
        std::size_t at = 0;
        for (const auto& root : pp.roots) {
            const std::size_t size = std::size_t{1} << (root.depth - 1);
            for (std::size_t i = at; i < at + size; ++i) {
                const auto id = user(i + 1);
                auto it = current.find(id);
                if (it == current.end()) {
                    current.emplace(id, root.rt);
                } else if (it->second != root.rt) {
                    it->second = root.rt;
                    ++changes[id];
                }
            }
            at += size;
        }
    }
    std::uint32_t worst = 0;
    for (const auto& [_, c] : changes) worst = std::max(worst, c);
    EXPECT_LE(worst, 10u);  // log2(1024)
    EXPECT_EQ(changes[user(1)], 10u);
}

TEST(Forest, ParametersAndOpeningsStayLogarithmic) {
    Population pop;
    pop.add(200);
    const auto pp = pop.setup.forest.public_params();
    EXPECT_LE(pp.roots.size(), 8u);
    for (const auto& [id, _] : pop.leaves) EXPECT_LE(pop.setup.forest.opening(id).levels.size(), 7u);
}

TEST(Forest, RenderListsEveryId) {
    Population pop;
    pop.add(5);
    const auto text = pop.setup.forest.render();
    for (const auto& [id, _] : pop.leaves) EXPECT_NE(text.find(id), std::string::npos);
    EXPECT_NE(text.find("tree 0 depth 3"), std::string::npos);
    EXPECT_NE(text.find("tree 1 depth 1"), std::string::npos);
}

TEST(Codec, RoundTrips) {
    Population pop;
    pop.add(6);
    const auto pp = pop.setup.forest.public_params();
    EXPECT_EQ(PublicParams::decode(pp.encode()), pp);
    EXPECT_EQ(Crs::decode(pop.setup.crs.encode()), pop.setup.crs);
    const auto o = pop.setup.forest.opening(user(2));
    EXPECT_EQ(MerkleOpening::decode(o.encode()), o);
    prim::Drbg r(1);
    const auto ct = rbe_enc(pop.setup.crs, pp, user(2), to_bytes("hi"), r);
    EXPECT_EQ(RbeCiphertext::decode(ct.encode()), ct);
    Bytes junk = ct.encode();
    junk.pop_back();
    EXPECT_THROW(RbeCiphertext::decode(junk), CodecError);
}

TEST(Encryption, EveryRegisteredUserDecrypts) {
    for (std::size_t n : {1u, 2u, 6u, 17u, 64u}) {
        Population pop;
        pop.add(n);
        const auto pp = pop.setup.forest.public_params();
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = user(i);
            const Bytes m = to_bytes("message for " + id);
            const auto ct = rbe_enc(pop.setup.crs, pp, id, m, pop.rng);
            EXPECT_EQ(ct.programs.size(), pp.roots.size());
            const auto res = rbe_dec(pop.keys[i].secret_key, rbe_update(pop.setup.forest, id), ct);
            ASSERT_EQ(res.kind, DecResult::Kind::message) << n << " " << id;
            EXPECT_EQ(res.m, m);
        }
    }
}

TEST(Encryption, StaleOpeningAsksForUpdate) {
    Population pop;
    pop.add(3);
    const auto stale = pop.setup.forest.opening(user(2));  // user2 alone in a depth-1 tree
    pop.add(1);                                           // merges it away
    const auto pp = pop.setup.forest.public_params();
    const auto ct = rbe_enc(pop.setup.crs, pp, user(2), to_bytes("m"), pop.rng);
    EXPECT_EQ(rbe_dec(pop.keys[2].secret_key, stale, ct).kind, DecResult::Kind::get_upd);
    const auto fresh = rbe_update(pop.setup.forest, user(2));
    const auto res = rbe_dec(pop.keys[2].secret_key, fresh, ct);
    ASSERT_EQ(res.kind, DecResult::Kind::message);
    EXPECT_EQ(res.m, to_bytes("m"));
}

TEST(Encryption, FailuresAreBottom) {
    Population pop;
    pop.add(5);
    const auto pp = pop.setup.forest.public_params();
    const auto ct = rbe_enc(pop.setup.crs, pp, user(1), to_bytes("secret"), pop.rng);
    // Another user's key and opening.
    EXPECT_EQ(rbe_dec(pop.keys[3].secret_key, pop.setup.forest.opening(user(3)), ct).kind, DecResult::Kind::bottom);
    // Right opening, wrong key.
    EXPECT_EQ(rbe_dec(pop.keys[3].secret_key, pop.setup.forest.opening(user(1)), ct).kind, DecResult::Kind::bottom);
    // Corrupted path.
    auto bad = pop.setup.forest.opening(user(1));
    bad.levels[0].h1.bytes[5] ^= 0x80;
    EXPECT_EQ(rbe_dec(pop.keys[1].secret_key, bad, ct).kind, DecResult::Kind::bottom);
    // Garbage bytes.
    Bytes junk = to_bytes("not a ciphertext");
    EXPECT_EQ(rbe_dec(pop.keys[1].secret_key, pop.setup.forest.opening(user(1)), junk).kind, DecResult::Kind::bottom);
}

TEST(Encryption, ProgramsNameTheirRejection) {
    Population pop;
    pop.add(4);
    const auto pp = pop.setup.forest.public_params();
    const auto ct = rbe_enc(pop.setup.crs, pp, user(0), to_bytes("x"), pop.rng);
    const auto& prog = ct.programs.at(0);
    auto o = pop.setup.forest.opening(user(0));
    EXPECT_TRUE(std::holds_alternative<Bytes>(eval_program(prog, o)));

    auto other = pop.setup.forest.opening(user(1));
    EXPECT_EQ(std::get<Reject>(eval_program(prog, other)), Reject::id_mismatch);

    auto wrong_root = o;
    wrong_root.rt.bytes[0] ^= 1;
    EXPECT_EQ(std::get<Reject>(eval_program(prog, wrong_root)), Reject::root_mismatch);

    auto broken = o;
    broken.levels[1].b ^= 1;
    EXPECT_EQ(std::get<Reject>(eval_program(prog, broken)), Reject::path_invalid);

    auto short_path = o;
    short_path.levels.pop_back();
    EXPECT_EQ(std::get<Reject>(eval_program(prog, short_path)), Reject::path_invalid);
    EXPECT_EQ(reject_name(Reject::path_invalid), "path-invalid");
}

TEST(Encryption, DeterministicInRandomness) {
    Population pop;
    pop.add(3);
    const auto pp = pop.setup.forest.public_params();
    const Bytes r(32, 9);
    const auto a = rbe_enc(pop.setup.crs, pp, user(0), to_bytes("m"), r);
    const auto b = rbe_enc(pop.setup.crs, pp, user(0), to_bytes("m"), r);
    EXPECT_EQ(a, b);
    const auto o = pop.setup.forest.opening(user(0));
    for (const auto& p : a.programs) {
        auto x = eval_program(p, o);
        auto y = eval_program(p, o);
        EXPECT_EQ(x, y);
    }
}

TEST(Curator, RegistrationsMergeOnChain) {
    Curator c;
    prim::Drbg rng(3);
    std::vector<prim::KeyMaterial> keys;
    std::uint64_t merges = 0;
    MerkleForest forest;
    for (std::size_t i = 0; i < 16; ++i) {
        keys.push_back(rbe_keygen(rng));
        auto signer = key_for(1000 + i);
        auto tx = register_tx(signer, c.instance, user(i), keys.back().public_key, 0);
        ASSERT_TRUE(c.sys.submit_and_confirm(tx));
        const auto receipt = c.sys.receipt(tx);
        ASSERT_EQ(receipt.outcome, contract::Outcome::applied) << receipt.detail;
        EXPECT_EQ(receipt.ops.at("register-base"), 1u);
        const auto m = receipt.ops.count("merge") ? receipt.ops.at("merge") : 0;
        EXPECT_EQ(m, oracle::increment_carries(i + 1));
        merges += m;
        auto [pp, f] = register_onchain(c.sys, c.instance, tx);
        EXPECT_EQ(pp, f.public_params());
        forest = std::move(f);
    }
    EXPECT_EQ(merges, 15u);
    EXPECT_EQ(forest.depths(), std::vector<std::uint32_t>{5});

    const auto state = c.sys.access(c.instance);
    const auto pp = pp_from_state(state);
    EXPECT_EQ(crs_from_state(state), c.setup.crs);
    for (std::size_t i = 0; i < 16; ++i) {
        const auto ct = rbe_enc(c.setup.crs, pp, user(i), to_bytes("hello"), rng);
        const auto res = rbe_dec(keys[i].secret_key, rbe_update(forest, user(i)), ct);
        ASSERT_EQ(res.kind, DecResult::Kind::message);
        EXPECT_EQ(res.m, to_bytes("hello"));
    }
}

TEST(Curator, GuardsRejectBadCalls) {
    Curator c;
    prim::Drbg rng(4);
    auto alice = key_for(1);
    const auto pk = rbe_keygen(rng).public_key;

    auto ok = register_tx(alice, c.instance, "alice", pk, 0);
    ASSERT_TRUE(c.sys.submit_and_confirm(ok));
    EXPECT_EQ(c.sys.receipt(ok).outcome, contract::Outcome::applied);

    auto dup = register_tx(key_for(2), c.instance, "alice", pk, 0);
    ASSERT_TRUE(c.sys.submit_and_confirm(dup));
    EXPECT_EQ(c.sys.receipt(dup).outcome, contract::Outcome::guard_failed);
    EXPECT_FALSE(c.sys.inspect(dup));

    // Ids are exact bytes.
    auto upper = register_tx(key_for(3), c.instance, "Alice", pk, 0);
    ASSERT_TRUE(c.sys.submit_and_confirm(upper));
    EXPECT_EQ(c.sys.receipt(upper).outcome, contract::Outcome::applied);

    auto short_pk = register_tx(key_for(4), c.instance, "carol", Bytes(31, 1), 0);
    ASSERT_TRUE(c.sys.submit_and_confirm(short_pk));
    EXPECT_EQ(c.sys.receipt(short_pk).outcome, contract::Outcome::guard_failed);

    auto reinit = init_tx(c.deployer, c.instance, c.setup.crs, c.setup.pp, c.nonce++);
    ASSERT_TRUE(c.sys.submit_and_confirm(reinit));
    EXPECT_EQ(c.sys.receipt(reinit).outcome, contract::Outcome::guard_failed);

    EXPECT_EQ(registrations_from_state(c.sys.access(c.instance)).size(), 2u);
}

TEST(Curator, OnlyDeployerInitialises) {
    prim::Drbg rng(5);
    auto setup = rbe_setup(16, rng);
    auto owner = key_for(1);
    contract::ContractSystem sys({}, registry());
    auto d = contract::make_deploy(owner, std::string(kCuratorCode), 0);
    ASSERT_TRUE(sys.submit_and_confirm(d));
    const auto instance = sys.deploy(d).first;

    auto pk = rbe_keygen(rng).public_key;
    auto early = register_tx(key_for(2), instance, "bob", pk, 0);
    ASSERT_TRUE(sys.submit_and_confirm(early));
    EXPECT_EQ(sys.receipt(early).outcome, contract::Outcome::guard_failed);

    auto intruder = init_tx(key_for(3), instance, setup.crs, setup.pp, 0);
    ASSERT_TRUE(sys.submit_and_confirm(intruder));
    EXPECT_EQ(sys.receipt(intruder).outcome, contract::Outcome::guard_failed);
    try {
        (void)pp_from_state(sys.access(instance));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unknown_instance);
    }

    auto init = init_tx(owner, instance, setup.crs, setup.pp, 1);
    ASSERT_TRUE(sys.submit_and_confirm(init));
    EXPECT_EQ(sys.receipt(init).outcome, contract::Outcome::applied);
    EXPECT_EQ(pp_from_state(sys.access(instance)), setup.pp);
}

TEST(Identity, FreshIdsOnly) {
    Population pop;
    pop.add(2);
    EXPECT_FALSE(identity_verify(pop.setup.forest, user(0)));
    EXPECT_TRUE(identity_verify(pop.setup.forest, "someone"));
}
