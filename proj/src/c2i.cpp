#include "landrec/c2i.hpp"

#include "landrec/error.hpp"

#include <cstdio>
#include <string>

namespace landrec::c2i {

namespace {

std::string describe(char c)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(static_cast<unsigned char>(c)));
    return buf;
}

int parse_code(std::string_view code)
{
    if (code.size() != 2 || code[0] < '0' || code[0] > '9' || code[1] < '0' || code[1] > '9')
        return 0;
    int v = (code[0] - '0') * 10 + (code[1] - '0');
    return v >= 1 && v <= static_cast<int>(kAlphabetSize) ? v : 0;
}

} // namespace

std::string char_to_code(char c)
{
    const int code = code_of(c);
    if (code == 0)
        throw Error("unsupported-character", "character " + describe(c) + " has no C2I code");
    return {static_cast<char>('0' + code / 10), static_cast<char>('0' + code % 10)};
}

char code_to_char(std::string_view code)
{
    const int v = parse_code(code);
    if (v == 0) throw Error("invalid-code", "invalid C2I code \"" + std::string(code) + "\"");
    return kAlphabet[v - 1];
}

std::string encode_text(std::string_view text)
{
    std::string out;
    out.reserve(text.size() * kDigitsPerChar);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const int code = code_of(text[i]);
        if (code == 0)
            throw Error("unsupported-character", "character " + describe(text[i]) +
                                                     " at position " + std::to_string(i) +
                                                     " has no C2I code");
        out.push_back(static_cast<char>('0' + code / 10));
        out.push_back(static_cast<char>('0' + code % 10));
    }
    return out;
}

std::string decode_digits(std::string_view digits)
{
    if (digits.size() % 2 != 0)
        throw Error("truncated-stream", "digit stream has odd length " +
                                            std::to_string(digits.size()));
    std::string out;
    out.reserve(digits.size() / 2);
    for (std::size_t i = 0; i < digits.size(); i += 2) {
        const int v = parse_code(digits.substr(i, 2));
        if (v == 0)
            throw Error("invalid-code", "invalid C2I code \"" + std::string(digits.substr(i, 2)) +
                                            "\" at pair " + std::to_string(i / 2));
        out.push_back(kAlphabet[v - 1]);
    }
    return out;
}

std::string ascii_decimal(std::string_view text)
{
    std::string out;
    out.reserve(text.size() * kAsciiDigitsPerChar);
    char buf[4];
    for (char c : text) {
        std::snprintf(buf, sizeof buf, "%03u", static_cast<unsigned>(static_cast<unsigned char>(c)));
        out += buf;
    }
    return out;
}

double OverheadReport::reduction_percent() const
{
    if (ascii_digits == 0) return 0.0;
    return 100.0 * static_cast<double>(ascii_digits - c2i_digits) /
           static_cast<double>(ascii_digits);
}

OverheadReport measure_overhead(std::string_view text)
{
    OverheadReport r;
    r.characters = text.size();
    r.c2i_digits = encode_text(text).size();
    r.ascii_digits = ascii_decimal(text).size();
    return r;
}

} // namespace landrec::c2i
