#include "landrec/record_pipeline.hpp"

#include "landrec/c2i.hpp"
#include "landrec/dna.hpp"
#include "landrec/error.hpp"

#include <algorithm>

namespace landrec::pipeline {

using crypto::BigInt;

namespace {

void check_chunk_size(std::size_t chunk_size)
{
    if (chunk_size < 2 || chunk_size > kMaxChunkDigits || chunk_size % 2 != 0)
        throw Error("invalid-chunking", "chunk size must be even and within [2, 300], got " +
                                            std::to_string(chunk_size));
}

[[noreturn]] void malformed(const std::string& why) { throw Error("malformed-envelope", why); }

} // namespace

std::vector<BigInt> chunk_digits(std::string_view digits, std::size_t chunk_size)
{
    check_chunk_size(chunk_size);
    std::vector<BigInt> out;
    for (std::size_t pos = 0; pos < digits.size(); pos += chunk_size) {
        std::string guarded = "1";
        guarded += digits.substr(pos, chunk_size);
        out.push_back(crypto::parse_decimal(guarded));
    }
    return out;
}

std::string unchunk_digits(const std::vector<BigInt>& chunks, std::size_t total_digits,
                           std::size_t chunk_size)
{
    check_chunk_size(chunk_size);
    if (chunks.size() != (total_digits + chunk_size - 1) / chunk_size)
        throw Error("malformed-envelope", "chunk count does not match digit count");

    std::string out;
    out.reserve(total_digits);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const std::size_t expected = std::min(chunk_size, total_digits - i * chunk_size);
        const std::string text = crypto::to_decimal(chunks[i]);
        if (text.size() != expected + 1 || text[0] != '1')
            throw Error("guard-digit-missing",
                        "chunk " + std::to_string(i) + " lacks its guard digit");
        out.append(text, 1, std::string::npos);
    }
    return out;
}

std::size_t max_chunk_digits(const crypto::DomainParams& params)
{
    // Largest guarded chunk of c digits is 2 * 10^c - 1.
    std::size_t best = 0;
    BigInt ten_pow = 100;
    for (std::size_t c = 2; c <= kMaxChunkDigits; c += 2, ten_pow *= 100) {
        if (2 * ten_pow - 1 >= params.p - 1) break;
        best = c;
    }
    return best;
}

std::size_t chunk_count_for(std::size_t plaintext_chars, std::size_t chunk_size)
{
    const std::size_t digits = plaintext_chars * c2i::kDigitsPerChar;
    return (digits + chunk_size - 1) / chunk_size;
}

std::size_t envelope_size(std::size_t chunk_count, std::size_t key_bytes)
{
    return kEnvelopeHeaderSize + chunk_count * 2 * key_bytes;
}

Bytes serialize_envelope(const EncryptedEnvelope& env)
{
    ByteWriter w;
    w.raw(kEnvelopeMagic);
    w.u8(env.version);
    w.u16(env.chunk_digits);
    w.u32(env.plaintext_chars);
    w.u32(env.chunk_count());
    w.u16(env.key_bytes);
    w.zeros(4);
    for (const auto& c : env.ciphertexts) {
        w.raw(crypto::to_fixed_bytes(c.y1, env.key_bytes));
        w.raw(crypto::to_fixed_bytes(c.y2, env.key_bytes));
    }
    return std::move(w).take();
}

EncryptedEnvelope parse_envelope(ByteSpan bytes)
{
    if (bytes.size() < kEnvelopeHeaderSize) malformed("envelope shorter than its header");
    ByteReader r(bytes);
    auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kEnvelopeMagic.begin()))
        throw Error("envelope-magic-mismatch", "envelope does not start with LRC1");

    EncryptedEnvelope env;
    env.version = r.u8();
    if (env.version != kEnvelopeVersion)
        malformed("unsupported envelope version " + std::to_string(env.version));
    env.chunk_digits = r.u16();
    env.plaintext_chars = r.u32();
    const std::uint32_t count = r.u32();
    env.key_bytes = r.u16();
    if (r.u32() != 0) malformed("reserved bytes are not zero");

    if (env.chunk_digits < 2 || env.chunk_digits > kMaxChunkDigits || env.chunk_digits % 2 != 0)
        malformed("invalid chunk_digits");
    if (count == 0 || env.plaintext_chars == 0) malformed("envelope holds no chunks");
    if (count != chunk_count_for(env.plaintext_chars, env.chunk_digits))
        malformed("chunk_count inconsistent with plaintext_chars");
    if (env.key_bytes == 0) malformed("key_bytes is zero");
    if (bytes.size() != envelope_size(count, env.key_bytes))
        malformed("envelope length does not match declared counts");

    env.ciphertexts.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        BigInt y1 = crypto::from_bytes(r.raw(env.key_bytes));
        BigInt y2 = crypto::from_bytes(r.raw(env.key_bytes));
        env.ciphertexts.push_back({std::move(y1), std::move(y2)});
    }
    return env;
}

DnaCiphertext encrypt_record(const crypto::DomainParams& params, const BigInt& owner_beta,
                             std::string_view record_text, std::size_t chunk_size,
                             crypto::RandomSource& rng)
{
    if (record_text.empty()) throw Error("empty-record", "land record text is empty");
    check_chunk_size(chunk_size);
    if (chunk_size > max_chunk_digits(params))
        throw Error("invalid-chunking", "chunk size " + std::to_string(chunk_size) +
                                            " is too large for a " +
                                            std::to_string(params.bit_length()) + "-bit modulus");

    const std::string digits = c2i::encode_text(record_text);
    EncryptedEnvelope env;
    env.chunk_digits = static_cast<std::uint16_t>(chunk_size);
    env.plaintext_chars = static_cast<std::uint32_t>(record_text.size());
    env.key_bytes = static_cast<std::uint16_t>(params.byte_width());
    for (const BigInt& chunk : chunk_digits(digits, chunk_size)) {
        // Fresh ephemeral per chunk.
        env.ciphertexts.push_back(crypto::encrypt(params, owner_beta, chunk, std::nullopt, rng));
    }

    const Bytes envelope = serialize_envelope(env);
    const std::string bits = dna::bytes_to_bits(envelope);
    return DnaCiphertext{dna::bits_to_dna(bits), crypto::key_fingerprint(params, owner_beta)};
}

std::string decrypt_record(const crypto::DomainParams& params, const BigInt& owner_private_a,
                           const DnaCiphertext& ct)
{
    if (ct.dna.size() % 4 != 0) {
        if (!dna::is_dna(ct.dna)) dna::dna_to_bits(ct.dna); // reports the bad base
        malformed("DNA length is not a whole number of envelope bytes");
    }
    const std::string bits = dna::dna_to_bits(ct.dna);
    const EncryptedEnvelope env = parse_envelope(dna::bits_to_bytes(bits));
    if (env.key_bytes != params.byte_width())
        throw Error("key-mismatch", "record was encrypted under a different key size");

    std::vector<BigInt> chunks;
    chunks.reserve(env.ciphertexts.size());
    for (const auto& c : env.ciphertexts) chunks.push_back(crypto::decrypt(params, owner_private_a, c));

    const std::size_t total = std::size_t{env.plaintext_chars} * c2i::kDigitsPerChar;
    return c2i::decode_digits(unchunk_digits(chunks, total, env.chunk_digits));
}

} // namespace landrec::pipeline
