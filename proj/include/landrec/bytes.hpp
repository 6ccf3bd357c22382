#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace landrec {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;
using ByteSpan = std::span<const Byte>;
using Hash256 = std::array<Byte, 32>;

inline constexpr Hash256 kZeroHash{};

Hash256 sha256(ByteSpan data);
Hash256 sha256(std::string_view data);

std::string to_hex(ByteSpan data);
inline std::string to_hex(const Hash256& h) { return to_hex(ByteSpan(h)); }
// Throws Error("invalid-hex") on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);
Hash256 hash_from_hex(std::string_view hex);

inline ByteSpan as_bytes(std::string_view s)
{
    return {reinterpret_cast<const Byte*>(s.data()), s.size()};
}

// Big-endian appender for canonical serializations.
class ByteWriter {
public:
    void reserve(std::size_t n) { buf_.reserve(n); }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void raw(ByteSpan data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
    void raw(std::string_view s) { raw(as_bytes(s)); }
    void zeros(std::size_t n) { buf_.insert(buf_.end(), n, 0); }

    // Length-prefixed fields; throw Error("field-too-long") when the prefix overflows.
    void str16(std::string_view s);
    void str32(std::string_view s);
    void bytes16(ByteSpan data);

    const Bytes& data() const& { return buf_; }
    Bytes take() && { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    Bytes buf_;
};

// Big-endian cursor. Every read throws Error("truncated") past the end.
class ByteReader {
public:
    explicit ByteReader(ByteSpan data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    ByteSpan raw(std::size_t n);
    Hash256 hash();
    std::string str16();
    std::string str32();
    Bytes bytes16();

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }
    bool done() const { return pos_ == data_.size(); }

private:
    ByteSpan data_;
    std::size_t pos_ = 0;
};

} // namespace landrec
