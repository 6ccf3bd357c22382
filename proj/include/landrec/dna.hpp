#pragma once

// Two bits per nucleotide: 11 -> A, 10 -> T, 01 -> C, 00 -> G.
// Bit strings are text over {'0','1'}, most significant bit first.

#include "landrec/bytes.hpp"

#include <string>
#include <string_view>

namespace landrec::dna {

// Throws Error("odd-length-bitstream") or Error("invalid-bit").
std::string bits_to_dna(std::string_view bits);
// Throws Error("invalid-base") with the offending position.
std::string dna_to_bits(std::string_view dna);

std::string bytes_to_bits(ByteSpan bytes);
// Throws Error("ragged-bitstream") when the length is not a multiple of 8.
Bytes bits_to_bytes(std::string_view bits);

bool is_dna(std::string_view s);

} // namespace landrec::dna
