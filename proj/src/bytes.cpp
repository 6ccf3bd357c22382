#include "landrec/bytes.hpp"

#include "landrec/error.hpp"

#include <openssl/evp.h>

#include <limits>
#include <memory>

namespace landrec {

Hash256 sha256(ByteSpan data)
{
    Hash256 out{};
    unsigned int len = 0;
    // Fetched once; the implicit fetch behind EVP_sha256() costs more than hashing a header.
    static EVP_MD* const md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
    if (md == nullptr || EVP_Digest(data.data(), data.size(), out.data(), &len, md, nullptr) != 1 ||
        len != out.size())
        throw Error("digest-failure", "SHA-256 computation failed");
    return out;
}

Hash256 sha256(std::string_view data) { return sha256(as_bytes(data)); }

std::string to_hex(ByteSpan data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (Byte b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

namespace {

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0) throw Error("invalid-hex", "hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]);
        int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) throw Error("invalid-hex", "non-hex character in hex string");
        out.push_back(static_cast<Byte>((hi << 4) | lo));
    }
    return out;
}

Hash256 hash_from_hex(std::string_view hex)
{
    Bytes raw = from_hex(hex);
    if (raw.size() != 32) throw Error("invalid-hex", "expected 32-byte hash");
    Hash256 h{};
    std::copy(raw.begin(), raw.end(), h.begin());
    return h;
}

void ByteWriter::u16(std::uint16_t v)
{
    u8(static_cast<Byte>(v >> 8));
    u8(static_cast<Byte>(v));
}

void ByteWriter::u32(std::uint32_t v)
{
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
}

void ByteWriter::u64(std::uint64_t v)
{
    u32(static_cast<std::uint32_t>(v >> 32));
    u32(static_cast<std::uint32_t>(v));
}

void ByteWriter::str16(std::string_view s)
{
    if (s.size() > std::numeric_limits<std::uint16_t>::max())
        throw Error("field-too-long", "field exceeds 16-bit length prefix");
    u16(static_cast<std::uint16_t>(s.size()));
    raw(s);
}

void ByteWriter::str32(std::string_view s)
{
    if (s.size() > std::numeric_limits<std::uint32_t>::max())
        throw Error("field-too-long", "field exceeds 32-bit length prefix");
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
}

void ByteWriter::bytes16(ByteSpan data)
{
    if (data.size() > std::numeric_limits<std::uint16_t>::max())
        throw Error("field-too-long", "field exceeds 16-bit length prefix");
    u16(static_cast<std::uint16_t>(data.size()));
    raw(data);
}

ByteSpan ByteReader::raw(std::size_t n)
{
    if (n > remaining()) throw Error("truncated", "unexpected end of data");
    ByteSpan out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint16_t ByteReader::u16()
{
    auto b = raw(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t ByteReader::u32()
{
    std::uint32_t hi = u16();
    return (hi << 16) | u16();
}

std::uint64_t ByteReader::u64()
{
    std::uint64_t hi = u32();
    return (hi << 32) | u32();
}

Hash256 ByteReader::hash()
{
    auto b = raw(32);
    Hash256 h{};
    std::copy(b.begin(), b.end(), h.begin());
    return h;
}

std::string ByteReader::str16()
{
    auto b = raw(u16());
    return {b.begin(), b.end()};
}

std::string ByteReader::str32()
{
    auto b = raw(u32());
    return {b.begin(), b.end()};
}

Bytes ByteReader::bytes16()
{
    auto b = raw(u16());
    return {b.begin(), b.end()};
}

} // namespace landrec
