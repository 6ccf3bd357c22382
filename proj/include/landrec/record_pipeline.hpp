#pragma once

// Land-record encryption and retrieval pipelines.
//
//   encrypt: text -> C2I digits -> guarded chunks -> ElGamal per chunk
//            -> envelope bytes -> bits -> DNA bases
//   decrypt: the same steps in reverse.
//
// Envelope layout (big-endian):
//   0..3   magic "LRC1"
//   4      version (1)
//   5..6   chunk_digits
//   7..10  plaintext_chars
//   11..14 chunk_count
//   15..16 key_bytes = ceil(bits(p) / 8)
//   17..20 reserved, zero
//   then chunk_count x (y1, y2), each key_bytes wide

#include "landrec/bytes.hpp"
#include "landrec/crypto.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace landrec::pipeline {

inline constexpr std::string_view kEnvelopeMagic = "LRC1";
inline constexpr std::uint8_t kEnvelopeVersion = 1;
inline constexpr std::size_t kEnvelopeHeaderSize = 21;
inline constexpr std::size_t kDefaultChunkDigits = 100;
inline constexpr std::size_t kMaxChunkDigits = 300;

struct EncryptedEnvelope {
    std::uint8_t version = kEnvelopeVersion;
    std::uint16_t chunk_digits = 0;
    std::uint32_t plaintext_chars = 0;
    std::uint16_t key_bytes = 0;
    std::vector<crypto::Ciphertext> ciphertexts; // chunk_count entries

    std::uint32_t chunk_count() const { return static_cast<std::uint32_t>(ciphertexts.size()); }
    bool operator==(const EncryptedEnvelope&) const = default;
};

// A record at rest: DNA text plus the fingerprint of the public key it was
// encrypted under.
struct DnaCiphertext {
    std::string dna;
    Hash256 key_fingerprint{};

    bool operator==(const DnaCiphertext&) const = default;
};

// Splits into groups of chunk_size digits (the last may be shorter) and
// prefixes each with a guard '1' so leading zeros survive.
// Throws Error("invalid-chunking") unless chunk_size is even and in [2, 300].
std::vector<crypto::BigInt> chunk_digits(std::string_view digits, std::size_t chunk_size);

// Inverse of chunk_digits. total_digits fixes the length of every chunk;
// a chunk whose decimal form is not '1' followed by exactly that many digits
// throws Error("guard-digit-missing").
std::string unchunk_digits(const std::vector<crypto::BigInt>& chunks, std::size_t total_digits,
                           std::size_t chunk_size);

// Largest even chunk size whose guarded chunks all stay below p - 1.
std::size_t max_chunk_digits(const crypto::DomainParams& params);

std::size_t chunk_count_for(std::size_t plaintext_chars, std::size_t chunk_size);
std::size_t envelope_size(std::size_t chunk_count, std::size_t key_bytes);

Bytes serialize_envelope(const EncryptedEnvelope& env);
// Throws Error("envelope-magic-mismatch") or Error("malformed-envelope").
EncryptedEnvelope parse_envelope(ByteSpan bytes);

// Throws Error("empty-record"), Error("unsupported-character") or
// Error("invalid-chunking") when chunk_size is too large for p.
DnaCiphertext encrypt_record(const crypto::DomainParams& params, const crypto::BigInt& owner_beta,
                             std::string_view record_text,
                             std::size_t chunk_size = kDefaultChunkDigits,
                             crypto::RandomSource& rng = crypto::system_random());

// Wrong keys surface as Error("guard-digit-missing") or Error("invalid-code").
std::string decrypt_record(const crypto::DomainParams& params, const crypto::BigInt& owner_private_a,
                           const DnaCiphertext& ct);

} // namespace landrec::pipeline
