#include "scsec/codec.hpp"

#include <limits>

namespace scsec {

void put_u32_be(Bytes& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64_be(Bytes& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint64_t get_u64_be(ByteView in) {
    if (in.size() != 8) throw CodecError("integer field must be 8 bytes");
    std::uint64_t v = 0;
    for (auto b : in) v = (v << 8) | b;
    return v;
}

Encoder& Encoder::field(ByteView data) {
    if (data.size() > std::numeric_limits<std::uint32_t>::max()) throw CodecError("field too long");
    put_u32_be(out_, static_cast<std::uint32_t>(data.size()));
    out_.insert(out_.end(), data.begin(), data.end());
    return *this;
}

Encoder& Encoder::field(std::string_view s) {
    return field(ByteView{reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

Encoder& Encoder::u64(std::uint64_t v) {
    Bytes tmp;
    put_u64_be(tmp, v);
    return field(tmp);
}

ByteView Decoder::field() {
    if (data_.size() - pos_ < 4) throw CodecError("truncated length prefix");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = (len << 8) | data_[pos_ + i];
    pos_ += 4;
    if (data_.size() - pos_ < len) throw CodecError("truncated field");
    ByteView out = data_.subspan(pos_, len);
    pos_ += len;
    return out;
}

Bytes Decoder::field_bytes() {
    auto f = field();
    return {f.begin(), f.end()};
}

std::string Decoder::field_string() {
    auto f = field();
    return {f.begin(), f.end()};
}

Digest Decoder::digest() { return Digest::from_bytes(field()); }

std::uint64_t Decoder::u64() { return get_u64_be(field()); }

std::uint32_t Decoder::u32() {
    auto v = u64();
    if (v > std::numeric_limits<std::uint32_t>::max()) throw CodecError("u32 field out of range");
    return static_cast<std::uint32_t>(v);
}

bool Decoder::boolean() {
    auto v = u64();
    if (v > 1) throw CodecError("boolean field out of range");
    return v == 1;
}

void Decoder::expect_done() const {
    if (!done()) throw CodecError("trailing bytes after record");
}

}  // namespace scsec
