#include "landrec/crypto.hpp"

#include "landrec/error.hpp"

#include <openssl/rand.h>

#include <string>
#include <vector>

namespace landrec::crypto {

namespace {

class OpenSslRandom final : public RandomSource {
public:
    void fill(std::span<Byte> out) override
    {
        if (out.empty()) return;
        if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
            throw Error("rng-failure", "RAND_bytes failed");
    }
};

const std::vector<unsigned>& small_primes()
{
    static const std::vector<unsigned> primes = [] {
        constexpr unsigned limit = 4096;
        std::vector<bool> composite(limit, false);
        std::vector<unsigned> out;
        for (unsigned i = 2; i < limit; ++i) {
            if (composite[i]) continue;
            out.push_back(i);
            for (unsigned j = i * i; j < limit; j += i) composite[j] = true;
        }
        return out;
    }();
    return primes;
}

std::size_t bit_length(const BigInt& v) { return mpz_sizeinbase(v.get_mpz_t(), 2); }

BigInt random_bits(RandomSource& rng, std::size_t bits)
{
    Bytes buf((bits + 7) / 8);
    rng.fill(buf);
    if (bits % 8 != 0) buf[0] &= static_cast<Byte>((1u << (bits % 8)) - 1);
    return from_bytes(buf);
}

// One Miller-Rabin round for odd n > 3 with n - 1 = d * 2^s.
bool miller_rabin_round(const BigInt& n, const BigInt& d, unsigned s, const BigInt& base)
{
    const BigInt n_minus_1 = n - 1;
    BigInt x = mod_pow(base, d, n);
    if (x == 1 || x == n_minus_1) return true;
    for (unsigned i = 1; i < s; ++i) {
        x = x * x % n;
        if (x == n_minus_1) return true;
        if (x == 1) return false;
    }
    return false;
}

bool fermat_base2(const BigInt& n) { return mod_pow(2, n - 1, n) == 1; }

// Exhaustive search for small sizes where sieving by primes >= q is unsafe.
DomainParams small_safe_prime(unsigned bits, RandomSource& rng)
{
    const BigInt q_lo = BigInt(1) << (bits - 2);
    const BigInt q_hi = (BigInt(1) << (bits - 1)) - 1;
    for (;;) {
        BigInt q = random_in_range(rng, q_lo, q_hi);
        if (!is_probable_prime(q, kMillerRabinRounds, rng)) continue;
        BigInt p = 2 * q + 1;
        if (!is_probable_prime(p, kMillerRabinRounds, rng)) continue;
        return DomainParams{p, 0};
    }
}

// Sieved incremental search: q = 5 (mod 6) keeps both q and 2q + 1 clear of
// 2 and 3; residues modulo the remaining small primes are tracked so that
// candidates with a small factor in q or p are skipped without bignum work.
DomainParams sieved_safe_prime(unsigned bits, RandomSource& rng)
{
    const auto& primes = small_primes();
    const std::size_t q_bits = bits - 1;
    constexpr unsigned window = 1u << 18;

    for (;;) {
        BigInt q = random_bits(rng, q_bits);
        mpz_setbit(q.get_mpz_t(), q_bits - 1);
        q += 5 - BigInt(q % 6);

        std::vector<unsigned> residues;
        residues.reserve(primes.size());
        for (unsigned sp : primes) residues.push_back(mpz_fdiv_ui(q.get_mpz_t(), sp));

        for (unsigned delta = 0; delta < window; delta += 6) {
            bool clear = true;
            for (std::size_t i = 2; i < primes.size(); ++i) {
                const unsigned sp = primes[i];
                const unsigned rq = (residues[i] + delta) % sp;
                if (rq == 0 || (2 * rq + 1) % sp == 0) {
                    clear = false;
                    break;
                }
            }
            if (!clear) continue;

            BigInt cand_q = q + delta;
            if (bit_length(cand_q) != q_bits) break;
            if (!fermat_base2(cand_q)) continue;
            BigInt cand_p = 2 * cand_q + 1;
            if (!fermat_base2(cand_p)) continue;
            if (!is_probable_prime(cand_q, kMillerRabinRounds, rng)) continue;
            if (!is_probable_prime(cand_p, kMillerRabinRounds, rng)) continue;
            return DomainParams{cand_p, 0};
        }
    }
}

} // namespace

RandomSource& system_random()
{
    static OpenSslRandom instance;
    return instance;
}

BigInt random_in_range(RandomSource& rng, const BigInt& lo, const BigInt& hi)
{
    if (hi < lo) throw Error("invalid-parameter", "empty random range");
    const BigInt span = hi - lo + 1;
    const std::size_t bits = bit_length(span);
    for (;;) {
        BigInt v = random_bits(rng, bits);
        if (v < span) return lo + v;
    }
}

BigInt mod_pow(const BigInt& base, const BigInt& exponent, const BigInt& modulus)
{
    if (modulus <= 1) throw Error("invalid-parameter", "modulus must exceed 1");
    if (exponent < 0) throw Error("invalid-parameter", "negative exponent");
    BigInt out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exponent.get_mpz_t(), modulus.get_mpz_t());
    return out;
}

BigInt mod_inv(const BigInt& value, const BigInt& modulus)
{
    if (modulus <= 1) throw Error("invalid-parameter", "modulus must exceed 1");
    BigInt out;
    if (mpz_invert(out.get_mpz_t(), value.get_mpz_t(), modulus.get_mpz_t()) == 0)
        throw Error("not-invertible", "value shares a factor with the modulus");
    return out;
}

bool is_probable_prime(const BigInt& n, int rounds, RandomSource& rng)
{
    if (n < 2) return false;
    for (unsigned sp : small_primes()) {
        if (n == sp) return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), sp)) return false;
    }

    BigInt d = n - 1;
    unsigned s = 0;
    while (mpz_even_p(d.get_mpz_t())) {
        d >>= 1;
        ++s;
    }
    const BigInt top = n - 2;
    for (int i = 0; i < rounds; ++i) {
        if (!miller_rabin_round(n, d, s, random_in_range(rng, 2, top))) return false;
    }
    return true;
}

DomainParams generate_domain_params(unsigned bit_length, RandomSource& rng)
{
    if (bit_length < kMinKeyBits)
        throw Error("invalid-parameter", "bit_length must be at least 16");
    if (bit_length > 16384) throw Error("invalid-parameter", "bit_length above 16384");

    DomainParams params =
        bit_length < 64 ? small_safe_prime(bit_length, rng) : sieved_safe_prime(bit_length, rng);
    do {
        params.alpha = random_in_range(rng, 2, params.p - 2);
    } while (!is_primitive(params));
    return params;
}

bool is_primitive(const DomainParams& params)
{
    if (params.p < 5 || params.alpha < 2 || params.alpha > params.p - 2) return false;
    return mod_pow(params.alpha, 2, params.p) != 1 &&
           mod_pow(params.alpha, params.subgroup_order(), params.p) != 1;
}

void validate_params(const DomainParams& params)
{
    if (params.bit_length() < kMinKeyBits)
        throw Error("invalid-parameter", "modulus shorter than 16 bits");
    if (!is_probable_prime(params.p) || !is_probable_prime(params.subgroup_order()))
        throw Error("invalid-parameter", "modulus is not a safe prime");
    if (!is_primitive(params)) throw Error("invalid-parameter", "alpha is not a generator");
}

KeyPair keygen(const DomainParams& params, RandomSource& rng)
{
    BigInt a = random_in_range(rng, 2, params.p - 3);
    return KeyPair{a, mod_pow(params.alpha, a, params.p)};
}

Ciphertext encrypt(const DomainParams& params, const BigInt& beta, const BigInt& x,
                   const std::optional<BigInt>& k_override, RandomSource& rng)
{
    if (x >= params.p - 1) throw Error("message-too-large", "message must be below p - 1");
    if (x < 1) throw Error("invalid-message", "message must be positive");

    BigInt k;
    if (k_override) {
        k = *k_override;
        if (k <= 1 || k >= params.p - 2)
            throw Error("invalid-ephemeral", "ephemeral exponent must satisfy 1 < k < p - 2");
    } else {
        k = random_in_range(rng, 2, params.p - 3);
    }
    BigInt y1 = mod_pow(params.alpha, k, params.p);
    BigInt y2 = x * mod_pow(beta, k, params.p) % params.p;
    return Ciphertext{y1, y2};
}

BigInt decrypt(const DomainParams& params, const BigInt& private_a, const Ciphertext& c)
{
    const BigInt& p = params.p;
    if (c.y1 < 1 || c.y1 >= p || c.y2 < 1 || c.y2 >= p)
        throw Error("corrupt-ciphertext", "ciphertext component outside [1, p - 1]");
    BigInt shared = mod_pow(c.y1, private_a, p);
    try {
        return c.y2 * mod_inv(shared, p) % p;
    } catch (const Error&) {
        throw Error("corrupt-ciphertext", "y1^a is not invertible");
    }
}

BigInt digest_to_integer(const DomainParams& params, const Hash256& digest)
{
    return from_bytes(digest) % BigInt(params.p - 1);
}

Signature sign(const DomainParams& params, const BigInt& private_a, const Hash256& digest,
               RandomSource& rng)
{
    const BigInt order = params.p - 1;
    const BigInt h = digest_to_integer(params, digest);
    for (;;) {
        BigInt k = random_in_range(rng, 2, order - 1);
        BigInt g;
        mpz_gcd(g.get_mpz_t(), k.get_mpz_t(), order.get_mpz_t());
        if (g != 1) continue;

        BigInt r = mod_pow(params.alpha, k, params.p);
        BigInt s = BigInt(h - private_a * r) * mod_inv(k, order);
        mpz_fdiv_r(s.get_mpz_t(), s.get_mpz_t(), order.get_mpz_t());
        if (s == 0) continue;
        return Signature{r, s};
    }
}

bool verify(const DomainParams& params, const BigInt& beta, const Hash256& digest,
            const Signature& sig) noexcept
{
    try {
        const BigInt& p = params.p;
        if (p < 5) return false;
        if (sig.r <= 0 || sig.r >= p) return false;
        if (sig.s < 0 || sig.s >= p - 1) return false;
        if (beta <= 0 || beta >= p) return false;
        BigInt lhs = mod_pow(params.alpha, digest_to_integer(params, digest), p);
        BigInt rhs = mod_pow(beta, sig.r, p) * mod_pow(sig.r, sig.s, p) % p;
        return lhs == rhs;
    } catch (...) {
        return false;
    }
}

Bytes to_fixed_bytes(const BigInt& value, std::size_t width)
{
    if (value < 0) throw Error("integer-too-large", "negative integers are not serializable");
    Bytes out(width, 0);
    if (value == 0) return out;
    const std::size_t needed = (bit_length(value) + 7) / 8;
    if (needed > width) throw Error("integer-too-large", "integer exceeds fixed width");
    std::size_t count = 0;
    mpz_export(out.data() + (width - needed), &count, 1, 1, 1, 0, value.get_mpz_t());
    return out;
}

BigInt from_bytes(ByteSpan bytes)
{
    BigInt out;
    if (!bytes.empty()) mpz_import(out.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
    return out;
}

Bytes serialize_public_key(const DomainParams& params, const BigInt& beta)
{
    const std::size_t width = params.byte_width();
    ByteWriter w;
    w.u16(static_cast<std::uint16_t>(width));
    w.raw(to_fixed_bytes(params.p, width));
    w.raw(to_fixed_bytes(params.alpha, width));
    w.raw(to_fixed_bytes(beta, width));
    return std::move(w).take();
}

Hash256 key_fingerprint(const DomainParams& params, const BigInt& beta)
{
    return sha256(serialize_public_key(params, beta));
}

BigInt parse_decimal(std::string_view text)
{
    if (text.empty() || text.size() > 20000)
        throw Error("invalid-integer", "expected a decimal integer");
    for (char c : text)
        if (c < '0' || c > '9') throw Error("invalid-integer", "expected a decimal integer");
    return BigInt(std::string(text), 10);
}

std::string to_decimal(const BigInt& value) { return value.get_str(10); }

} // namespace landrec::crypto
