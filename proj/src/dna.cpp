#include "landrec/dna.hpp"

#include "landrec/error.hpp"

#include <array>

namespace landrec::dna {

namespace {

constexpr char kBases[4] = {'G', 'C', 'T', 'A'}; // indexed by the 2-bit value

constexpr std::array<signed char, 256> kBaseValue = [] {
    std::array<signed char, 256> t{};
    t.fill(-1);
    t['A'] = 3;
    t['T'] = 2;
    t['C'] = 1;
    t['G'] = 0;
    return t;
}();

int base_value(char b) { return kBaseValue[static_cast<unsigned char>(b)]; }

int bit_value(char c, std::size_t pos)
{
    if (c == '0') return 0;
    if (c == '1') return 1;
    throw Error("invalid-bit", "non-binary symbol at position " + std::to_string(pos));
}

void require_dna(std::string_view dna)
{
    for (std::size_t i = 0; i < dna.size(); ++i)
        if (base_value(dna[i]) < 0)
            throw Error("invalid-base", "invalid base '" + std::string(1, dna[i]) +
                                            "' at position " + std::to_string(i));
}

} // namespace

std::string bits_to_dna(std::string_view bits)
{
    if (bits.size() % 2 != 0)
        throw Error("odd-length-bitstream", "bit stream length " + std::to_string(bits.size()) +
                                                " is odd");
    std::string out;
    out.reserve(bits.size() / 2);
    for (std::size_t i = 0; i < bits.size(); i += 2)
        out.push_back(kBases[bit_value(bits[i], i) * 2 + bit_value(bits[i + 1], i + 1)]);
    return out;
}

std::string dna_to_bits(std::string_view dna)
{
    require_dna(dna);
    std::string out;
    out.reserve(dna.size() * 2);
    for (char b : dna) {
        const int v = base_value(b);
        out.push_back((v & 2) ? '1' : '0');
        out.push_back((v & 1) ? '1' : '0');
    }
    return out;
}

std::string bytes_to_bits(ByteSpan bytes)
{
    std::string out;
    out.reserve(bytes.size() * 8);
    for (Byte b : bytes)
        for (int i = 7; i >= 0; --i) out.push_back(((b >> i) & 1) ? '1' : '0');
    return out;
}

Bytes bits_to_bytes(std::string_view bits)
{
    if (bits.size() % 8 != 0)
        throw Error("ragged-bitstream", "bit stream length " + std::to_string(bits.size()) +
                                            " is not a multiple of 8");
    Bytes out;
    out.reserve(bits.size() / 8);
    for (std::size_t i = 0; i < bits.size(); i += 8) {
        int v = 0;
        for (std::size_t j = 0; j < 8; ++j) v = (v << 1) | bit_value(bits[i + j], i + j);
        out.push_back(static_cast<Byte>(v));
    }
    return out;
}

bool is_dna(std::string_view s)
{
    signed char all = 0;
    for (char c : s) all |= kBaseValue[static_cast<unsigned char>(c)];
    return all >= 0;
}

} // namespace landrec::dna
