#include "scsec/cbe.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "scsec/codec.hpp"
#include "scsec/error.hpp"
#include "scsec/hash.hpp"

namespace scsec::cbe {

using contract::CallContext;
using contract::OpMeter;
using contract::State;

Day make_day(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    return static_cast<Day>(sys_days{ymd}.time_since_epoch().count());
}

std::string month_year(Day d) {
    using namespace std::chrono;
    static const char* const kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                          "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    const year_month_day ymd{sys_days{days{d}}};
    return std::string(kMonths[static_cast<unsigned>(ymd.month()) - 1]) + " " +
           std::to_string(static_cast<int>(ymd.year()));
}

// ---------------------------------------------------------------------------

Prefix serial_bits(std::uint64_t index, std::uint32_t depth) {
    Prefix out(depth, '0');
    for (std::uint32_t i = 0; i < depth; ++i) {
        if ((index >> (depth - 1 - i)) & 1) out[i] = '1';
    }
    return out;
}

namespace {

// Whether any revoked serial lies under `node`.
bool any_revoked_below(const std::set<Prefix>& revoked, const Prefix& node) {
    auto it = revoked.lower_bound(node);
    return it != revoked.end() && it->compare(0, node.size(), node) == 0;
}

void cover_rec(std::uint32_t depth, const std::set<Prefix>& revoked, const Prefix& node, std::vector<Prefix>& out) {
    if (!any_revoked_below(revoked, node)) {
        out.push_back(node);
        return;
    }
    if (node.size() == depth) return;  // a revoked leaf
    cover_rec(depth, revoked, node + '0', out);
    cover_rec(depth, revoked, node + '1', out);
}

}  // namespace

std::vector<Prefix> subset_cover(std::uint32_t depth, const std::set<Prefix>& revoked) {
    for (const auto& s : revoked) {
        if (s.size() != depth || s.find_first_not_of("01") != std::string::npos) {
            throw std::invalid_argument("revoked serial '" + s + "' is not a " + std::to_string(depth) + "-bit leaf");
        }
    }
    std::vector<Prefix> out;
    cover_rec(depth, revoked, "", out);
    return out;
}

// ---------------------------------------------------------------------------

Bytes Pms::encode() const {
    Encoder enc;
    enc.field(pairing::encode(P)).field(pairing::encode(Q)).field(pairing::encode(xP)).u32(depth).u64(periods);
    return std::move(enc).take();
}

Pms Pms::decode(ByteView bytes) {
    Decoder dec(bytes);
    Pms p;
    p.P = pairing::decode_g1(dec.field());
    p.Q = pairing::decode_g1(dec.field());
    p.xP = pairing::decode_g1(dec.field());
    p.depth = dec.u32();
    p.periods = dec.u64();
    dec.expect_done();
    return p;
}

Setup cbe_setup(std::uint32_t depth, std::uint64_t periods, prim::Drbg& rng) {
    if (depth == 0 || depth > 32) throw Error(Errc::configuration, "tree depth must lie in 1..32");
    Setup s;
    s.ca.s_c = Scalar::random_nonzero(rng);
    s.ca.x = Scalar::random_nonzero(rng);
    s.ca.Q = s.ca.s_c * pairing::generator();
    s.ca.xP = s.ca.x * pairing::generator();
    s.pms = Pms{pairing::generator(), s.ca.Q, s.ca.xP, depth, periods};
    return s;
}

UserPublic public_part(const UserKeys& keys) { return {keys.p_b, keys.info, keys.serial}; }

UserKeys KeyIssuer::keygen(std::string info, prim::Drbg& rng) {
    if (next_ >= (std::uint64_t{1} << pms_.depth)) {
        throw Error(Errc::tree_full, "all " + std::to_string(std::uint64_t{1} << pms_.depth) + " leaves issued");
    }
    UserKeys k;
    k.s_b = Scalar::random_nonzero(rng);
    k.p_b = k.s_b * pms_.P;
    k.info = std::move(info);
    k.serial = serial_bits(next_++, pms_.depth);
    return k;
}

// ---------------------------------------------------------------------------

std::string_view cert_state_name(CertState s) { return s == CertState::valid ? "valid" : "revoked"; }

namespace {

CertState parse_cert_state(std::string_view s) {
    if (s == "valid") return CertState::valid;
    if (s == "revoked") return CertState::revoked;
    throw CodecError("unknown certificate state '" + std::string(s) + "'");
}

std::string row_key(std::uint32_t number) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "row/%08u", number);
    return buf;
}

std::string user_key(std::string_view id) { return "user/" + std::string(id); }

std::optional<Row> lookup(const State& s, std::string_view user_id) {
    auto u = s.find(user_key(user_id));
    if (u == s.end()) return std::nullopt;
    auto r = s.find(row_key(static_cast<std::uint32_t>(get_u64_be(u->second))));
    if (r == s.end()) return std::nullopt;
    return Row::decode(r->second);
}

bool guarded(const std::function<bool()>& fn) {
    try {
        return fn();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

Bytes Row::encode() const {
    Encoder enc;
    enc.u32(number).field(user_id).field(cert_state_name(state)).u64(static_cast<std::uint64_t>(
        static_cast<std::int64_t>(expiry)));
    enc.field(serial).field(owner);
    return std::move(enc).take();
}

Row Row::decode(ByteView bytes) {
    Decoder dec(bytes);
    Row r;
    r.number = dec.u32();
    r.user_id = dec.field_string();
    r.state = parse_cert_state(dec.field_string());
    r.expiry = static_cast<Day>(static_cast<std::int64_t>(dec.u64()));
    r.serial = dec.field_string();
    r.owner = dec.field_bytes();
    dec.expect_done();
    return r;
}

const Row* RevocationTable::find(std::string_view user_id) const {
    for (const auto& r : rows) {
        if (r.user_id == user_id) return &r;
    }
    return nullptr;
}

std::set<Prefix> RevocationTable::revoked_serials() const {
    std::set<Prefix> out;
    for (const auto& r : rows) {
        if (r.state == CertState::revoked) out.insert(r.serial);
    }
    return out;
}

std::string RevocationTable::export_lines() const {
    std::string out;
    for (const auto& r : rows) {
        out += std::to_string(r.number) + "\t" + r.user_id + "\t" + std::string(cert_state_name(r.state)) + "\t" +
               month_year(r.expiry) + "\n";
    }
    return out;
}

RevocationTable RevocationTable::from_state(const State& state) {
    RevocationTable t;
    for (auto it = state.lower_bound("row/"); it != state.end() && it->first.rfind("row/", 0) == 0; ++it) {
        t.rows.push_back(Row::decode(it->second));
    }
    return t;
}

Bytes Enrollment::encode() const {
    Encoder enc;
    enc.field(user_id).field(serial).u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(expiry))).field(owner);
    return std::move(enc).take();
}

Enrollment Enrollment::decode(ByteView bytes) {
    Decoder dec(bytes);
    Enrollment e;
    e.user_id = dec.field_string();
    e.serial = dec.field_string();
    e.expiry = static_cast<Day>(static_cast<std::int64_t>(dec.u64()));
    e.owner = dec.field_bytes();
    dec.expect_done();
    return e;
}

Bytes RevocationRequest::encode() const {
    Encoder enc;
    enc.field(user_id).field(cert_state_name(requested)).u64(
        static_cast<std::uint64_t>(static_cast<std::int64_t>(request_day)));
    return std::move(enc).take();
}

RevocationRequest RevocationRequest::decode(ByteView bytes) {
    Decoder dec(bytes);
    RevocationRequest r;
    r.user_id = dec.field_string();
    r.requested = parse_cert_state(dec.field_string());
    r.request_day = static_cast<Day>(static_cast<std::int64_t>(dec.u64()));
    dec.expect_done();
    return r;
}

std::string RevocationRequest::render() const {
    return "[" + user_id + ":" + std::string(cert_state_name(requested)) + "]";
}

contract::Bytecode revocation_bytecode() {
    contract::Bytecode code{std::string(kRevocationCode)};
    code.add(
        "enroll",
        [](const State& s, const CallContext& ctx) {
            return guarded([&] {
                auto e = Enrollment::decode(ctx.args);
                return ctx.tx.signer == ctx.deployer && !e.user_id.empty() &&
                       e.owner.size() == prim::kPublicKeySize && s.count(user_key(e.user_id)) == 0;
            });
        },
        [](State& s, const CallContext& ctx, OpMeter& meter) {
            auto e = Enrollment::decode(ctx.args);
            std::uint32_t number = 1;
            for (const auto& [key, _] : s) number += key.rfind("row/", 0) == 0 ? 1 : 0;
            Row row{number, e.user_id, CertState::valid, e.expiry, e.serial, e.owner};
            s[row_key(number)] = row.encode();
            Bytes n;
            put_u64_be(n, number);
            s[user_key(e.user_id)] = n;
            meter.add("enroll");
        });
    code.add(
        "revoke",
        [](const State& s, const CallContext& ctx) {
            return guarded([&] {
                auto req = RevocationRequest::decode(ctx.args);
                auto row = lookup(s, req.user_id);
                return row && req.requested == CertState::revoked && ctx.tx.signer == row->owner &&
                       row->state == CertState::valid && req.request_day <= row->expiry;
            });
        },
        [](State& s, const CallContext& ctx, OpMeter& meter) {
            auto req = RevocationRequest::decode(ctx.args);
            auto row = *lookup(s, req.user_id);
            row.state = CertState::revoked;
            s[row_key(row.number)] = row.encode();
            meter.add("revoke");
        });
    return code;
}

ledger::Transaction enroll_tx(const prim::SigningKey& ca, const Digest& instance, const Enrollment& e,
                              std::uint64_t nonce) {
    return contract::make_invoke(ca, instance, "enroll", e.encode(), nonce);
}

ledger::Transaction revocation_request(const prim::SigningKey& owner, const Digest& instance,
                                       const std::string& user_id, Day request_day, std::uint64_t nonce) {
    RevocationRequest req{user_id, CertState::revoked, request_day};
    return contract::make_invoke(owner, instance, "revoke", req.encode(), nonce);
}

RevocationTable revocation_update(const contract::ContractSystem& sys, const Digest& instance,
                                  const ledger::Transaction& tx) {
    return RevocationTable::from_state(sys.transfer(instance, tx));
}

// ---------------------------------------------------------------------------

G1 period_point(const Pms& pms, std::uint64_t period) {
    Encoder enc;
    enc.field(pairing::encode(pms.Q)).u64(period);
    return pairing::hash_to_g1(pairing::HashTag::H5, enc.bytes());
}

G1 node_point(const Prefix& node) { return pairing::hash_to_g1(pairing::HashTag::H1, to_bytes(node)); }

G1 identity_point(const std::string& info) {
    return pairing::hash_to_g1(pairing::HashTag::H1, to_bytes("id:" + info));
}

std::optional<ReconfirmationCert> cbe_cert(const CaKeys& ca, const Pms& pms, std::uint64_t period,
                                           const std::string& user_id, const RevocationTable& table) {
    const Row* row = table.find(user_id);
    if (row == nullptr || row->state != CertState::valid || row->serial.size() != pms.depth) return std::nullopt;
    for (const auto& node : subset_cover(pms.depth, table.revoked_serials())) {
        if (row->serial.compare(0, node.size(), node) != 0) continue;
        ReconfirmationCert c;
        c.period = period;
        c.node = node.empty() ? row->serial.substr(0, 1) : node;
        c.level = static_cast<std::uint32_t>(c.node.size());
        c.cert = ca.s_c * period_point(pms, period) + ca.x * node_point(c.node);
        return c;
    }
    return std::nullopt;
}

Bytes CbeCiphertext::encode() const {
    Encoder enc;
    enc.u64(period).field(pairing::encode(rP)).u64(rPj.size());
    for (const auto& p : rPj) enc.field(pairing::encode(p));
    enc.field(V).field(tag);
    return std::move(enc).take();
}

CbeCiphertext CbeCiphertext::decode(ByteView bytes) {
    Decoder dec(bytes);
    CbeCiphertext ct;
    ct.period = dec.u64();
    ct.rP = pairing::decode_g1(dec.field());
    const auto m = dec.u64();
    if (m > 64) throw CodecError("ciphertext tree depth too large");
    for (std::uint64_t j = 0; j < m; ++j) ct.rPj.push_back(pairing::decode_g1(dec.field()));
    ct.V = dec.field_bytes();
    ct.tag = dec.digest();
    dec.expect_done();
    return ct;
}

namespace {

Digest message_tag(const G2& mask_source, ByteView message) {
    Encoder enc;
    enc.field(pairing::encode(mask_source)).field(message);
    return prim::tagged_hash("scsec.cbe.tag", enc.bytes());
}

Bytes xor_mask(ByteView message, const G2& g) {
    auto mask = pairing::hash_gt(g, message.size() * 8);
    Bytes out(message.begin(), message.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= mask[i];
    return out;
}

}  // namespace

CbeCiphertext cbe_enc(const Pms& pms, const UserPublic& user, std::uint64_t period, ByteView message, Scalar r) {
    if (user.serial.size() != pms.depth) throw std::invalid_argument("serial length does not match tree depth");
    const G2 g = pairing::pair(pms.Q, period_point(pms, period)) * pairing::pair(user.p_b, identity_point(user.info));
    const G2 gr = pairing::pow(g, r);
    CbeCiphertext ct;
    ct.period = period;
    ct.rP = r * pms.P;
    for (std::uint32_t j = 1; j <= pms.depth; ++j) ct.rPj.push_back(r * node_point(user.serial.substr(0, j)));
    ct.V = xor_mask(message, gr);
    ct.tag = message_tag(gr, message);
    return ct;
}

CbeCiphertext cbe_enc(const Pms& pms, const UserPublic& user, std::uint64_t period, ByteView message,
                      prim::Drbg& rng) {
    return cbe_enc(pms, user, period, message, Scalar::random_nonzero(rng));
}

std::optional<Bytes> cbe_dec(const UserKeys& user, const ReconfirmationCert& cert, const G1& xP,
                             const CbeCiphertext& ct) {
    if (cert.level == 0 || cert.level > ct.rPj.size()) return std::nullopt;
    const G1 secret = cert.cert + user.s_b * identity_point(user.info);
    const G2 g = pairing::pair(ct.rP, secret) / pairing::pair(xP, ct.rPj[cert.level - 1]);
    auto m = xor_mask(ct.V, g);
    if (message_tag(g, m) != ct.tag) return std::nullopt;
    return m;
}

}  // namespace scsec::cbe
