#pragma once

// Two-decimal-digit character codes for the 95 printable ASCII characters,
// against three digits per character for zero-padded ASCII decimal.

#include <cstddef>
#include <string>
#include <string_view>

namespace landrec::c2i {

inline constexpr std::size_t kAlphabetSize = 95;
inline constexpr std::size_t kDigitsPerChar = 2;
inline constexpr std::size_t kAsciiDigitsPerChar = 3;

// Code n (1-based) maps to kAlphabet[n - 1].
//   01-10 digits, 11-36 upper case, 37-62 lower case, then punctuation.
//   63 (space) and 94 ('|') are blank cells in the printed table; both are
//   the only printable characters missing from it and the only free codes.
inline constexpr std::string_view kAlphabet =
    "0123456789"
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "abcdefghijklmnopqrstuvwxyz"
    " !\"#%&'()*+,-./:;<=>?@$"
    "^_[\\]`~{|}";

// Code in [1, 95], or 0 if c is not mapped.
constexpr int code_of(char c)
{
    for (std::size_t i = 0; i < kAlphabet.size(); ++i)
        if (kAlphabet[i] == c) return static_cast<int>(i) + 1;
    return 0;
}

namespace detail {
constexpr bool table_is_bijective()
{
    if (kAlphabet.size() != kAlphabetSize) return false;
    for (int c = 0x20; c <= 0x7e; ++c) {
        int hits = 0;
        for (char a : kAlphabet) hits += (a == static_cast<char>(c)) ? 1 : 0;
        if (hits != 1) return false;
    }
    return true;
}
} // namespace detail

static_assert(detail::table_is_bijective(), "C2I table must cover printable ASCII exactly once");

// Throws Error("unsupported-character").
std::string char_to_code(char c);
// Throws Error("invalid-code") for anything outside "01".."95".
char code_to_char(std::string_view code);

// Throws Error("unsupported-character") naming the position and code point.
std::string encode_text(std::string_view text);
// Throws Error("truncated-stream") on odd length, Error("invalid-code") with pair index.
std::string decode_digits(std::string_view digits);

// Three-digit zero-padded ASCII decimal ("083" for 'S'), the baseline C2I is
// measured against.
std::string ascii_decimal(std::string_view text);

// Digit counts for the same text under C2I and three-digit ASCII decimal.
struct OverheadReport {
    std::size_t characters = 0;
    std::size_t c2i_digits = 0;
    std::size_t ascii_digits = 0;
    double reduction_percent() const;
};
OverheadReport measure_overhead(std::string_view text);

} // namespace landrec::c2i
