#include "scsec/rbe.hpp"

#include <cstdio>
#include <functional>
#include <stdexcept>

#include "scsec/codec.hpp"
#include "scsec/error.hpp"

namespace scsec::rbe {

using contract::CallContext;
using contract::OpMeter;
using contract::State;

namespace {

constexpr std::size_t kMaxHashKeys = 1024;
constexpr std::size_t kMaxRoots = 64;

void encode_hks(Encoder& enc, const std::vector<HashKey>& hks) {
    enc.u64(hks.size());
    for (const auto& hk : hks) enc.field(hk.key).u32(hk.index);
}

std::vector<HashKey> decode_hks(Decoder& dec) {
    const auto n = dec.u64();
    if (n > kMaxHashKeys) throw CodecError("too many hash keys");
    std::vector<HashKey> hks;
    hks.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        HashKey hk;
        hk.key = dec.field_bytes();
        hk.index = dec.u32();
        hks.push_back(std::move(hk));
    }
    return hks;
}

}  // namespace

Bytes Crs::encode() const {
    Encoder enc;
    enc.field(tag);
    return std::move(enc).take();
}

Crs Crs::decode(ByteView bytes) {
    Decoder dec(bytes);
    Crs c{dec.field_bytes()};
    dec.expect_done();
    return c;
}

bool PublicParams::has_root(const Digest& rt) const {
    for (const auto& r : roots) {
        if (r.rt == rt) return true;
    }
    return false;
}

Bytes PublicParams::encode() const {
    Encoder enc;
    encode_hks(enc, hks);
    enc.u64(roots.size());
    for (const auto& r : roots) enc.field(r.rt).u32(r.depth);
    return std::move(enc).take();
}

PublicParams PublicParams::decode(ByteView bytes) {
    Decoder dec(bytes);
    PublicParams pp;
    pp.hks = decode_hks(dec);
    const auto n = dec.u64();
    if (n > kMaxRoots) throw CodecError("too many roots");
    for (std::uint64_t i = 0; i < n; ++i) {
        RootInfo r;
        r.rt = dec.digest();
        r.depth = dec.u32();
        pp.roots.push_back(r);
    }
    dec.expect_done();
    return pp;
}

Bytes Registration::encode() const {
    Encoder enc;
    enc.field(id).field(pk);
    return std::move(enc).take();
}

Registration Registration::decode(ByteView bytes) {
    Decoder dec(bytes);
    Registration r;
    r.id = dec.field_string();
    r.pk = dec.field_bytes();
    dec.expect_done();
    return r;
}

Digest leaf_hash(const HashKey& hk1, const Registration& r) { return prim::crhf_hash(hk1, r.encode()); }

Digest node_hash(const HashKey& hk, const Digest& left, const Digest& right) {
    return prim::crhf_hash(hk, concat(left.view(), right.view()));
}

std::uint32_t accumulate(PublicParams& pp, const Registration& r) {
    pp.roots.push_back({leaf_hash(pp.hk(1), r), 1});
    std::uint32_t merges = 0;
    while (pp.roots.size() >= 2 && pp.roots[pp.roots.size() - 1].depth == pp.roots[pp.roots.size() - 2].depth) {
        const auto right = pp.roots.back();
        pp.roots.pop_back();
        auto& left = pp.roots.back();
        left.rt = node_hash(pp.hk(left.depth + 1), left.rt, right.rt);
        left.depth += 1;
        ++merges;
    }
    return merges;
}

// ---------------------------------------------------------------------------

Bytes MerkleOpening::encode() const {
    Encoder enc;
    enc.u32(tree_index).field(id).field(pk).u64(levels.size());
    for (const auto& l : levels) enc.field(l.h0).field(l.h1).u64(l.b);
    enc.field(rt);
    return std::move(enc).take();
}

MerkleOpening MerkleOpening::decode(ByteView bytes) {
    Decoder dec(bytes);
    MerkleOpening o;
    o.tree_index = dec.u32();
    o.id = dec.field_string();
    o.pk = dec.field_bytes();
    const auto n = dec.u64();
    if (n > kMaxHashKeys) throw CodecError("opening too long");
    for (std::uint64_t i = 0; i < n; ++i) {
        MerkleOpening::Level l;
        l.h0 = dec.digest();
        l.h1 = dec.digest();
        const auto b = dec.u64();
        if (b > 1) throw CodecError("opening direction bit out of range");
        l.b = static_cast<std::uint8_t>(b);
        o.levels.push_back(l);
    }
    o.rt = dec.digest();
    dec.expect_done();
    return o;
}

namespace {

// Walks the level equations with hk_1 .. hk_d taken from `hks`.
std::optional<Digest> walk(const std::vector<HashKey>& hks, const MerkleOpening& pth) {
    const std::size_t d = pth.levels.size() + 1;
    if (hks.size() < d) return std::nullopt;
    Digest cur = leaf_hash(hks[0], Registration{pth.id, pth.pk});
    for (std::size_t j = 0; j < pth.levels.size(); ++j) {
        const auto& l = pth.levels[j];
        if ((l.b == 0 ? l.h0 : l.h1) != cur) return std::nullopt;
        cur = node_hash(hks[j + 1], l.h0, l.h1);
    }
    if (cur != pth.rt) return std::nullopt;
    return cur;
}

}  // namespace

std::optional<Digest> opening_root(const PublicParams& pp, const MerkleOpening& pth) { return walk(pp.hks, pth); }

bool verify_opening(const PublicParams& pp, std::uint32_t tree_index, const std::string& id,
                    const MerkleOpening& pth) {
    if (tree_index >= pp.roots.size()) return false;
    const auto& root = pp.roots[tree_index];
    if (pth.rt != root.rt || pth.id != id || pth.levels.size() + 1 != root.depth) return false;
    return walk(pp.hks, pth).has_value();
}

// ---------------------------------------------------------------------------

MerkleForest::MerkleForest(std::vector<HashKey> hks) : hks_(std::move(hks)) {}

MerkleForest::Tree MerkleForest::merge(Tree left, Tree right, const HashKey& hk) {
    for (std::size_t j = 0; j < left.levels.size(); ++j) {
        left.levels[j].insert(left.levels[j].end(), right.levels[j].begin(), right.levels[j].end());
    }
    const auto& top = left.levels.back();
    left.levels.push_back({node_hash(hk, top[0], top[1])});
    left.leaves.insert(left.leaves.end(), std::make_move_iterator(right.leaves.begin()),
                       std::make_move_iterator(right.leaves.end()));
    left.depth += 1;
    return left;
}

std::uint32_t MerkleForest::insert(Registration r) {
    if (hks_.empty()) throw std::logic_error("forest has no hash keys");
    Tree t;
    t.levels.push_back({leaf_hash(hks_[0], r)});
    order_.push_back(r.id);
    t.leaves.push_back(std::move(r));
    trees_.push_back(std::move(t));
    std::uint32_t merges = 0;
    while (trees_.size() >= 2 && trees_[trees_.size() - 1].depth == trees_[trees_.size() - 2].depth) {
        const auto d = trees_.back().depth;
        if (hks_.size() <= d) throw std::logic_error("forest outgrew its hash keys");
        Tree right = std::move(trees_.back());
        trees_.pop_back();
        trees_.back() = merge(std::move(trees_.back()), std::move(right), hks_[d]);
        ++merges;
    }
    merges_ += merges;
    return merges;
}

bool MerkleForest::contains(const std::string& id) const {
    for (const auto& t : trees_) {
        for (const auto& leaf : t.leaves) {
            if (leaf.id == id) return true;
        }
    }
    return false;
}

std::vector<std::uint32_t> MerkleForest::depths() const {
    std::vector<std::uint32_t> out;
    for (const auto& t : trees_) out.push_back(t.depth);
    return out;
}

PublicParams MerkleForest::public_params() const {
    PublicParams pp;
    pp.hks = hks_;
    for (const auto& t : trees_) pp.roots.push_back({t.levels.back().front(), t.depth});
    return pp;
}

std::uint32_t MerkleForest::tree_of(const std::string& id) const {
    for (std::size_t i = 0; i < trees_.size(); ++i) {
        for (const auto& leaf : trees_[i].leaves) {
            if (leaf.id == id) return static_cast<std::uint32_t>(i);
        }
    }
    throw Error(Errc::unknown_id, "id not registered: " + id);
}

MerkleOpening MerkleForest::opening(const std::string& id) const {
    const auto ti = tree_of(id);
    const Tree& t = trees_[ti];
    std::size_t pos = 0;
    while (t.leaves[pos].id != id) ++pos;

    MerkleOpening o;
    o.tree_index = ti;
    o.id = t.leaves[pos].id;
    o.pk = t.leaves[pos].pk;
    // levels[j] of the opening are the two children of the level-(j+2) node
    // on the path, i.e. siblings at tree level j+1.
    for (std::size_t j = 0; j + 1 < t.levels.size(); ++j) {
        const auto& row = t.levels[j];
        const std::size_t left = pos & ~std::size_t{1};
        o.levels.push_back({row[left], row[left + 1], static_cast<std::uint8_t>(pos & 1)});
        pos >>= 1;
    }
    o.rt = t.levels.back().front();
    return o;
}

std::string MerkleForest::render() const {
    std::string out;
    char line[160];
    for (std::size_t i = 0; i < trees_.size(); ++i) {
        const Tree& t = trees_[i];
        std::snprintf(line, sizeof line, "tree %zu depth %u\n", i, t.depth);
        out += line;
        std::function<void(std::size_t, std::size_t, int)> node = [&](std::size_t level, std::size_t pos, int indent) {
            const auto hex = to_hex(t.levels[level][pos]).substr(0, 16);
            if (level == 0) {
                std::snprintf(line, sizeof line, "%*s%s %s\n", indent, "", hex.c_str(), t.leaves[pos].id.c_str());
                out += line;
                return;
            }
            std::snprintf(line, sizeof line, "%*s%s\n", indent, "", hex.c_str());
            out += line;
            node(level - 1, 2 * pos, indent + 2);
            node(level - 1, 2 * pos + 1, indent + 2);
        };
        node(t.levels.size() - 1, 0, 2);
    }
    return out;
}

// ---------------------------------------------------------------------------

SetupResult rbe_setup(std::uint32_t lambda, prim::Drbg& rng) {
    if (lambda == 0 || lambda > kMaxHashKeys) throw std::invalid_argument("lambda out of range");
    SetupResult s;
    s.crs.tag = rng.bytes(32);
    const Bytes seed = rng.bytes(32);
    for (std::uint32_t j = 1; j <= lambda; ++j) s.pp.hks.push_back(prim::hgen(seed, j));
    s.forest = MerkleForest(s.pp.hks);
    return s;
}

prim::KeyMaterial rbe_keygen(prim::Drbg& rng) { return prim::sample_keys(prim::Scheme::PKE, rng); }

bool identity_verify(const MerkleForest& forest, const std::string& id) { return !forest.contains(id); }

// ---------------------------------------------------------------------------

std::string_view reject_name(Reject r) {
    switch (r) {
        case Reject::root_mismatch: return "root-mismatch";
        case Reject::id_mismatch: return "id-mismatch";
        case Reject::path_invalid: return "path-invalid";
    }
    return "?";
}

std::variant<Bytes, Reject> eval_program(const EncProgram& program, const MerkleOpening& pth) {
    if (pth.rt != program.rt) return Reject::root_mismatch;
    if (pth.id != program.id) return Reject::id_mismatch;
    if (pth.levels.size() + 1 != program.depth || !walk(program.hks, pth)) return Reject::path_invalid;
    if (pth.pk.size() != prim::kPublicKeySize) return Reject::path_invalid;
    return prim::pke_enc(pth.pk, program.m, program.r);
}

namespace {

void encode_program(Encoder& enc, const EncProgram& p) {
    enc.field(p.crs_tag).field(p.rt).u32(p.depth);
    encode_hks(enc, p.hks);
    enc.field(p.m).field(p.id).field(p.r);
}

EncProgram decode_program(Decoder& dec) {
    EncProgram p;
    p.crs_tag = dec.field_bytes();
    p.rt = dec.digest();
    p.depth = dec.u32();
    p.hks = decode_hks(dec);
    p.m = dec.field_bytes();
    p.id = dec.field_string();
    p.r = dec.field_bytes();
    return p;
}

}  // namespace

Bytes RbeCiphertext::encode() const {
    Encoder enc;
    enc.field(pp.encode()).u64(programs.size());
    for (const auto& p : programs) encode_program(enc, p);
    return std::move(enc).take();
}

RbeCiphertext RbeCiphertext::decode(ByteView bytes) {
    Decoder dec(bytes);
    RbeCiphertext ct;
    ct.pp = PublicParams::decode(dec.field());
    const auto n = dec.u64();
    if (n > kMaxRoots) throw CodecError("too many programs");
    for (std::uint64_t i = 0; i < n; ++i) ct.programs.push_back(decode_program(dec));
    dec.expect_done();
    return ct;
}

RbeCiphertext rbe_enc(const Crs& crs, const PublicParams& pp, const std::string& id, ByteView m, ByteView r) {
    RbeCiphertext ct;
    ct.pp = pp;
    for (const auto& root : pp.roots) {
        if (pp.hks.size() < root.depth) throw std::invalid_argument("pp lacks hash keys for a root");
        EncProgram p;
        p.crs_tag = crs.tag;
        p.rt = root.rt;
        p.depth = root.depth;
        p.hks.assign(pp.hks.begin(), pp.hks.begin() + root.depth);
        p.m.assign(m.begin(), m.end());
        p.id = id;
        p.r.assign(r.begin(), r.end());
        ct.programs.push_back(std::move(p));
    }
    return ct;
}

RbeCiphertext rbe_enc(const Crs& crs, const PublicParams& pp, const std::string& id, ByteView m, prim::Drbg& rng) {
    const Bytes r = rng.bytes(prim::kPkeRandomnessSize);
    return rbe_enc(crs, pp, id, m, r);
}

DecResult rbe_dec(ByteView sk, const MerkleOpening& u, const RbeCiphertext& ct) {
    for (const auto& program : ct.programs) {
        auto out = eval_program(program, u);
        if (const auto* c = std::get_if<Bytes>(&out)) {
            if (auto m = prim::pke_dec(sk, *c)) return DecResult::message(std::move(*m));
        }
    }
    auto rt = walk(ct.pp.hks, u);
    if (rt && !ct.pp.has_root(*rt)) return DecResult::get_upd();
    return DecResult::bottom();
}

DecResult rbe_dec(ByteView sk, const MerkleOpening& u, ByteView ct_bytes) {
    RbeCiphertext ct;
    try {
        ct = RbeCiphertext::decode(ct_bytes);
    } catch (const CodecError&) {
        return DecResult::bottom();
    }
    return rbe_dec(sk, u, ct);
}

// ---------------------------------------------------------------------------

namespace {

std::string reg_key(std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "reg/%08llu", static_cast<unsigned long long>(n));
    return buf;
}

std::string id_key(const std::string& id) { return "ids/" + to_hex(to_bytes(id)); }

bool guarded(const std::function<bool()>& fn) {
    try {
        return fn();
    } catch (const std::exception&) {
        return false;
    }
}

std::pair<Crs, PublicParams> decode_init(ByteView args) {
    Decoder dec(args);
    Crs crs = Crs::decode(dec.field());
    PublicParams pp = PublicParams::decode(dec.field());
    dec.expect_done();
    return {std::move(crs), std::move(pp)};
}

std::uint64_t registration_count(const State& s) {
    std::uint64_t n = 0;
    for (auto it = s.lower_bound("reg/"); it != s.end() && it->first.rfind("reg/", 0) == 0; ++it) ++n;
    return n;
}

}  // namespace

contract::Bytecode curator_bytecode() {
    contract::Bytecode code{std::string(kCuratorCode)};
    code.add(
        "init",
        [](const State& s, const CallContext& ctx) {
            return guarded([&] {
                auto [crs, pp] = decode_init(ctx.args);
                return ctx.tx.signer == ctx.deployer && s.count("pp") == 0 && !pp.hks.empty() && pp.roots.empty();
            });
        },
        [](State& s, const CallContext& ctx, OpMeter&) {
            auto [crs, pp] = decode_init(ctx.args);
            s["crs"] = crs.encode();
            s["pp"] = pp.encode();
        });
    code.add(
        "register",
        [](const State& s, const CallContext& ctx) {
            return guarded([&] {
                auto r = Registration::decode(ctx.args);
                return s.count("pp") == 1 && !r.id.empty() && r.pk.size() == prim::kPublicKeySize &&
                       s.count(id_key(r.id)) == 0;
            });
        },
        [](State& s, const CallContext& ctx, OpMeter& meter) {
            auto r = Registration::decode(ctx.args);
            auto pp = PublicParams::decode(s.at("pp"));
            const auto merges = accumulate(pp, r);
            const auto n = registration_count(s);
            s["pp"] = pp.encode();
            s[reg_key(n)] = r.encode();
            Bytes idx;
            put_u64_be(idx, n);
            s[id_key(r.id)] = idx;
            meter.add("register-base");
            if (merges > 0) meter.add("merge", merges);
        });
    return code;
}

Bytes init_args(const Crs& crs, const PublicParams& pp0) {
    Encoder enc;
    enc.field(crs.encode()).field(pp0.encode());
    return std::move(enc).take();
}

ledger::Transaction init_tx(const prim::SigningKey& deployer, const Digest& instance, const Crs& crs,
                            const PublicParams& pp0, std::uint64_t nonce) {
    return contract::make_invoke(deployer, instance, "init", init_args(crs, pp0), nonce);
}

ledger::Transaction register_tx(const prim::SigningKey& key, const Digest& instance, const std::string& id,
                                ByteView pk, std::uint64_t nonce) {
    Registration r{id, Bytes(pk.begin(), pk.end())};
    return contract::make_invoke(key, instance, "register", r.encode(), nonce);
}

PublicParams pp_from_state(const State& state) {
    auto it = state.find("pp");
    if (it == state.end()) throw Error(Errc::unknown_instance, "key curator not initialised");
    return PublicParams::decode(it->second);
}

Crs crs_from_state(const State& state) {
    auto it = state.find("crs");
    if (it == state.end()) throw Error(Errc::unknown_instance, "key curator not initialised");
    return Crs::decode(it->second);
}

std::vector<Registration> registrations_from_state(const State& state) {
    std::vector<Registration> out;
    for (auto it = state.lower_bound("reg/"); it != state.end() && it->first.rfind("reg/", 0) == 0; ++it) {
        out.push_back(Registration::decode(it->second));
    }
    return out;
}

MerkleForest forest_from_state(const State& state) {
    MerkleForest forest(pp_from_state(state).hks);
    for (auto& r : registrations_from_state(state)) forest.insert(std::move(r));
    return forest;
}

std::pair<PublicParams, MerkleForest> register_onchain(const contract::ContractSystem& sys, const Digest& instance,
                                                       const ledger::Transaction& tx) {
    const auto state = sys.transfer(instance, tx);
    return {pp_from_state(state), forest_from_state(state)};
}

MerkleOpening rbe_update(const MerkleForest& forest, const std::string& id) { return forest.opening(id); }

}  // namespace scsec::rbe
