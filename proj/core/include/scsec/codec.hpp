#pragma once

// Canonical serialization used for every digest and every exported record.
//
// Each field is written as a 4-byte big-endian length followed by the field
// bytes; fields are concatenated in declaration order. Unsigned integers are
// fields holding their 8-byte big-endian encoding.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "scsec/bytes.hpp"

namespace scsec {

class CodecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Encoder {
public:
    Encoder& field(ByteView data);
    Encoder& field(std::string_view s);
    Encoder& field(const Digest& d) { return field(d.view()); }
    Encoder& u64(std::uint64_t v);
    Encoder& u32(std::uint32_t v) { return u64(v); }
    Encoder& boolean(bool v) { return u64(v ? 1 : 0); }

    const Bytes& bytes() const& { return out_; }
    Bytes take() && { return std::move(out_); }

private:
    Bytes out_;
};

class Decoder {
public:
    explicit Decoder(ByteView data) : data_(data) {}

    ByteView field();
    Bytes field_bytes();
    std::string field_string();
    Digest digest();
    std::uint64_t u64();
    std::uint32_t u32();
    bool boolean();

    bool done() const { return pos_ == data_.size(); }
    /// Throws CodecError if trailing bytes remain.
    void expect_done() const;

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

void put_u32_be(Bytes& out, std::uint32_t v);
void put_u64_be(Bytes& out, std::uint64_t v);
std::uint64_t get_u64_be(ByteView in);

}  // namespace scsec
