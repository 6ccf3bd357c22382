#pragma once

// ElGamal over a safe-prime group: parameter generation, encryption,
// decryption and the classic ElGamal signature used for certificates,
// login challenges and deeds.

#include "landrec/bytes.hpp"

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <span>

namespace landrec::crypto {

using BigInt = mpz_class;

inline constexpr unsigned kDefaultKeyBits = 1024;
inline constexpr unsigned kMinKeyBits = 16;
inline constexpr int kMillerRabinRounds = 40;

// Source of uniformly random bytes. Implementations must tolerate
// concurrent calls.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<Byte> out) = 0;
};

// OpenSSL-backed CSPRNG shared by the whole process.
RandomSource& system_random();

// Uniform in [lo, hi] by rejection sampling.
BigInt random_in_range(RandomSource& rng, const BigInt& lo, const BigInt& hi);

struct DomainParams {
    BigInt p;
    BigInt alpha;

    std::size_t bit_length() const { return mpz_sizeinbase(p.get_mpz_t(), 2); }
    // Width of every serialized group element.
    std::size_t byte_width() const { return (bit_length() + 7) / 8; }
    BigInt subgroup_order() const { return (p - 1) / 2; }

    bool operator==(const DomainParams&) const = default;
};

struct KeyPair {
    BigInt private_a;
    BigInt public_beta;

    bool operator==(const KeyPair&) const = default;
};

struct Ciphertext {
    BigInt y1;
    BigInt y2;

    bool operator==(const Ciphertext&) const = default;
};

struct Signature {
    BigInt r;
    BigInt s;

    bool operator==(const Signature&) const = default;
};

BigInt mod_pow(const BigInt& base, const BigInt& exponent, const BigInt& modulus);
// Throws Error("not-invertible") when gcd(value, modulus) != 1.
BigInt mod_inv(const BigInt& value, const BigInt& modulus);

bool is_probable_prime(const BigInt& n, int rounds = kMillerRabinRounds,
                       RandomSource& rng = system_random());

// Random safe prime p = 2q + 1 of exactly bit_length bits together with a
// generator of the full multiplicative group.
DomainParams generate_domain_params(unsigned bit_length, RandomSource& rng = system_random());

// alpha^2 != 1 and alpha^q != 1, i.e. alpha has order p - 1 in a safe-prime group.
bool is_primitive(const DomainParams& params);

// Throws Error("invalid-parameter") unless p is a safe prime and alpha primitive.
void validate_params(const DomainParams& params);

KeyPair keygen(const DomainParams& params, RandomSource& rng = system_random());

// y1 = alpha^k, y2 = x * beta^k (mod p). k_override pins the ephemeral
// exponent for deterministic tests only.
Ciphertext encrypt(const DomainParams& params, const BigInt& beta, const BigInt& x,
                   const std::optional<BigInt>& k_override = std::nullopt,
                   RandomSource& rng = system_random());

// x = y2 * (y1^a)^-1 (mod p).
BigInt decrypt(const DomainParams& params, const BigInt& private_a, const Ciphertext& c);

// Digest interpreted big-endian and reduced mod (p - 1).
BigInt digest_to_integer(const DomainParams& params, const Hash256& digest);

Signature sign(const DomainParams& params, const BigInt& private_a, const Hash256& digest,
               RandomSource& rng = system_random());

// Never throws; malformed input verifies false.
bool verify(const DomainParams& params, const BigInt& beta, const Hash256& digest,
            const Signature& sig) noexcept;

// Fixed-width big-endian. Throws Error("integer-too-large") if value does not fit.
Bytes to_fixed_bytes(const BigInt& value, std::size_t width);
BigInt from_bytes(ByteSpan bytes);

// Canonical public-key encoding: u16 width, then p, alpha, beta at that width.
Bytes serialize_public_key(const DomainParams& params, const BigInt& beta);
Hash256 key_fingerprint(const DomainParams& params, const BigInt& beta);

// Decimal text form used by JSON and key files. Throws Error("invalid-integer").
BigInt parse_decimal(std::string_view text);
std::string to_decimal(const BigInt& value);

} // namespace landrec::crypto
