#include "doctest.h"
#include "oracles.hpp"

#include "landrec/crypto.hpp"
#include "landrec/error.hpp"

#include <random>
#include <set>

using namespace landrec;
using namespace landrec::crypto;

namespace {

const DomainParams kToy{23, 5};

const DomainParams& params256()
{
    static const DomainParams p = generate_domain_params(256);
    return p;
}

Hash256 random_digest(std::mt19937_64& gen)
{
    Hash256 d{};
    for (auto& b : d) b = static_cast<Byte>(gen());
    return d;
}

} // namespace

TEST_CASE("sha256 matches the published empty-string vector")
{
    CHECK(to_hex(sha256(std::string_view{})) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(to_hex(sha256(std::string_view{"abc"})) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("mod_pow agrees with repeated multiplication")
{
    CHECK(mod_pow(5, 6, 23) == 8);
    CHECK(oracle::pow_by_repetition(5, 6, 23) == 8);
    CHECK(mod_pow(17, 1, 5) == 2);

    for (std::uint64_t m = 2; m < 1000; ++m) {
        for (std::uint64_t base = 0; base < std::min<std::uint64_t>(m, 40); ++base) {
            for (std::uint64_t e = 0; e < 26; ++e) {
                const auto got = mod_pow(BigInt(static_cast<unsigned long>(base)),
                                         BigInt(static_cast<unsigned long>(e)),
                                         BigInt(static_cast<unsigned long>(m)));
                if (got != BigInt(static_cast<unsigned long>(oracle::pow_by_repetition(base, e, m)))) {
                    FAIL("mismatch at base=" << base << " e=" << e << " m=" << m);
                }
            }
        }
    }
    CHECK_THROWS_WITH_AS(mod_pow(2, 3, 1), "modulus must exceed 1", Error);
}

TEST_CASE("mod_inv")
{
    CHECK(mod_inv(6, 23) == 4);
    for (unsigned m : {7u, 23u, 101u, 199u})
        for (unsigned v = 1; v < m; ++v)
            CHECK(mod_inv(v, m) == BigInt(static_cast<unsigned long>(oracle::inverse_by_search(v, m))));
    try {
        mod_inv(6, 22);
        FAIL("expected not-invertible");
    } catch (const Error& e) {
        CHECK(e.code() == "not-invertible");
    }
}

TEST_CASE("is_probable_prime agrees with trial division below 5000")
{
    for (unsigned n = 0; n < 5000; ++n)
        CHECK_MESSAGE(is_probable_prime(n) == oracle::is_prime_by_trial(n), "n=" << n);
    // Carmichael numbers
    CHECK_FALSE(is_probable_prime(561));
    CHECK_FALSE(is_probable_prime(BigInt("3215031751")));
}

TEST_CASE("generate_domain_params")
{
    SUBCASE("16-bit safe prime with primitive generator")
    {
        for (int i = 0; i < 5; ++i) {
            DomainParams dp = generate_domain_params(16);
            CHECK(dp.bit_length() == 16);
            const auto p = dp.p.get_ui();
            const auto q = (p - 1) / 2;
            CHECK(oracle::is_prime_by_trial(p));
            CHECK(oracle::is_prime_by_trial(q));
            const auto a = dp.alpha.get_ui();
            CHECK(oracle::pow_by_repetition(a, 2, p) != 1);
            CHECK(oracle::pow_by_repetition(a, q, p) != 1);
        }
    }
    SUBCASE("1024-bit")
    {
        DomainParams dp = generate_domain_params(1024);
        CHECK(dp.bit_length() == 1024);
        CHECK(dp.byte_width() == 128);
        CHECK(mod_pow(dp.alpha, dp.subgroup_order(), dp.p) != 1);
        CHECK_NOTHROW(validate_params(dp));
    }
    SUBCASE("too small")
    {
        try {
            generate_domain_params(15);
            FAIL("expected invalid-parameter");
        } catch (const Error& e) {
            CHECK(e.code() == "invalid-parameter");
        }
    }
    SUBCASE("validate rejects non-generators and non-safe primes")
    {
        // 2 has order 11 mod 23.
        CHECK_THROWS_AS(validate_params(DomainParams{23, 2}), Error);
        CHECK_FALSE(is_primitive(DomainParams{23, 2}));
        CHECK(is_primitive(kToy));
        CHECK_THROWS_AS(validate_params(DomainParams{29, 2}), Error); // 14 is not prime
    }
}

TEST_CASE("keygen")
{
    CHECK(mod_pow(kToy.alpha, 6, kToy.p) == 8);
    CHECK(oracle::pow_by_repetition(5, 6, 23) == 8);

    for (int i = 0; i < 500; ++i) {
        KeyPair kp = keygen(kToy);
        CHECK(kp.private_a > 1);
        CHECK(kp.private_a < kToy.p - 2);
        CHECK(kp.public_beta == mod_pow(kToy.alpha, kp.private_a, kToy.p));
    }
    const auto& dp = params256();
    CHECK(keygen(dp).private_a != keygen(dp).private_a);
}

TEST_CASE("encrypt and decrypt the worked small-field example")
{
    Ciphertext c = encrypt(kToy, 8, 9, BigInt(3));
    CHECK(c.y1 == 10);
    CHECK(c.y2 == 8);
    // Oracle: 5^3 = 125 = 10 (mod 23); 9 * 8^3 = 4608 = 8 (mod 23).
    CHECK(oracle::pow_by_repetition(5, 3, 23) == 10);
    CHECK(9 * oracle::pow_by_repetition(8, 3, 23) % 23 == 8);

    CHECK(decrypt(kToy, 6, c) == 9);
    // Inverse of 10^6 mod 23 is 4.
    CHECK(oracle::inverse_by_search(oracle::pow_by_repetition(10, 6, 23), 23) == 4);

    CHECK(decrypt(kToy, 6, Ciphertext{1, 17}) == 17);
}

TEST_CASE("x = 1 yields y2 = beta^k")
{
    for (unsigned k = 2; k <= 20; ++k)
        CHECK(encrypt(kToy, 8, 1, BigInt(k)).y2 == mod_pow(8, k, 23));
}

TEST_CASE("exhaustive small-field round trip")
{
    for (unsigned a = 2; a <= 20; ++a) {
        const BigInt beta = mod_pow(kToy.alpha, a, kToy.p);
        for (unsigned x = 2; x <= 21; ++x)
            for (unsigned k = 2; k <= 20; ++k)
                REQUIRE(decrypt(kToy, a, encrypt(kToy, beta, x, BigInt(k))) == x);
    }
    std::mt19937_64 gen(7);
    for (int i = 0; i < 1000; ++i) {
        const BigInt x = 2 + gen() % 20;
        CHECK(decrypt(kToy, 6, encrypt(kToy, 8, x)) == x);
    }
}

TEST_CASE("encrypt range errors")
{
    auto code_of = [](auto fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return std::string("none");
    };
    CHECK(code_of([] { encrypt(kToy, 8, 22, BigInt(3)); }) == "message-too-large");
    CHECK(code_of([] { encrypt(kToy, 8, 100, BigInt(3)); }) == "message-too-large");
    CHECK(code_of([] { encrypt(kToy, 8, 0, BigInt(3)); }) == "invalid-message");
    CHECK(code_of([] { encrypt(kToy, 8, 9, BigInt(1)); }) == "invalid-ephemeral");
    CHECK(code_of([] { encrypt(kToy, 8, 9, BigInt(21)); }) == "invalid-ephemeral");
    CHECK(code_of([] { decrypt(kToy, 6, Ciphertext{0, 5}); }) == "corrupt-ciphertext");
    CHECK(code_of([] { decrypt(kToy, 6, Ciphertext{5, 23}); }) == "corrupt-ciphertext");
}

TEST_CASE("encryption is probabilistic")
{
    std::set<std::pair<unsigned long, unsigned long>> seen;
    for (int i = 0; i < 100; ++i) {
        Ciphertext c = encrypt(kToy, 8, 9);
        seen.insert({c.y1.get_ui(), c.y2.get_ui()});
    }
    CHECK(seen.size() >= 2);

    const auto& dp = params256();
    KeyPair kp = keygen(dp);
    CHECK(encrypt(dp, kp.public_beta, 12345) != encrypt(dp, kp.public_beta, 12345));
}

TEST_CASE("signatures")
{
    const auto& dp = params256();
    KeyPair kp = keygen(dp);
    std::mt19937_64 gen(42);

    for (int i = 0; i < 100; ++i) {
        Hash256 d = random_digest(gen);
        Signature sig = sign(dp, kp.private_a, d);
        REQUIRE(verify(dp, kp.public_beta, d, sig));

        Hash256 other = d;
        other[gen() % 32] ^= static_cast<Byte>(1u << (gen() % 8));
        CHECK_FALSE(verify(dp, kp.public_beta, other, sig));

        Signature bad_r = sig;
        mpz_combit(bad_r.r.get_mpz_t(), gen() % 255);
        CHECK_FALSE(verify(dp, kp.public_beta, d, bad_r));
        Signature bad_s = sig;
        mpz_combit(bad_s.s.get_mpz_t(), gen() % 255);
        CHECK_FALSE(verify(dp, kp.public_beta, d, bad_s));
    }

    KeyPair other = keygen(dp);
    Hash256 d = random_digest(gen);
    CHECK_FALSE(verify(dp, other.public_beta, d, sign(dp, kp.private_a, d)));
}

TEST_CASE("verify rejects malformed values without throwing")
{
    const auto& dp = params256();
    KeyPair kp = keygen(dp);
    Hash256 d{};
    CHECK_FALSE(verify(dp, kp.public_beta, d, Signature{0, 1}));
    CHECK_FALSE(verify(dp, kp.public_beta, d, Signature{dp.p, 1}));
    CHECK_FALSE(verify(dp, kp.public_beta, d, Signature{2, dp.p - 1}));
    CHECK_FALSE(verify(dp, kp.public_beta, d, Signature{2, -1}));
    CHECK_FALSE(verify(DomainParams{0, 0}, kp.public_beta, d, Signature{2, 1}));
}

TEST_CASE("forged signatures at p = 23 verify only at chance rate")
{
    const BigInt beta = 8;
    std::mt19937_64 gen(99);
    int accepted = 0;
    for (int i = 0; i < 500; ++i) {
        Hash256 d = random_digest(gen);
        Signature forged{BigInt(static_cast<unsigned long>(1 + gen() % 22)),
                         BigInt(static_cast<unsigned long>(gen() % 22))};
        accepted += verify(kToy, beta, d, forged) ? 1 : 0;
    }
    CHECK(accepted < 50);

    // Genuine small-field signatures still verify.
    for (int i = 0; i < 50; ++i) {
        Hash256 d = random_digest(gen);
        CHECK(verify(kToy, beta, d, sign(kToy, 6, d)));
    }
}

TEST_CASE("fixed-width integer encoding")
{
    CHECK(to_hex(to_fixed_bytes(0x0102, 4)) == "00000102");
    CHECK(to_hex(to_fixed_bytes(0, 2)) == "0000");
    CHECK_THROWS_AS(to_fixed_bytes(0x10000, 2), Error);
    std::mt19937_64 gen(3);
    for (int i = 0; i < 50; ++i) {
        BigInt v = random_in_range(system_random(), 0, params256().p - 1);
        CHECK(from_bytes(to_fixed_bytes(v, 32)) == v);
    }
    CHECK(parse_decimal("12345") == 12345);
    CHECK_THROWS_AS(parse_decimal("12a"), Error);
    CHECK_THROWS_AS(parse_decimal(""), Error);
    CHECK_THROWS_AS(parse_decimal("-5"), Error);
}

TEST_CASE("public key fingerprint binds every component")
{
    const auto& dp = params256();
    KeyPair kp = keygen(dp);
    Hash256 fp = key_fingerprint(dp, kp.public_beta);
    CHECK(fp == key_fingerprint(dp, kp.public_beta));
    CHECK(fp != key_fingerprint(dp, kp.public_beta + 1));
    CHECK(serialize_public_key(dp, kp.public_beta).size() == 2 + 3 * 32);
}
