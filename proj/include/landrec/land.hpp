#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace landrec {

struct LandInfo {
    std::uint64_t dag_number = 0;
    std::uint64_t khatiayan_number = 0;
    std::string area; // positive decimal, e.g. "2000" or "12.5"
    std::string unit; // e.g. "Shotangsho"

    bool operator==(const LandInfo&) const = default;
};

// Parcel identity.
struct LandKey {
    std::uint64_t dag_number = 0;
    std::uint64_t khatiayan_number = 0;

    auto operator<=>(const LandKey&) const = default;
};

inline LandKey key_of(const LandInfo& land) { return {land.dag_number, land.khatiayan_number}; }

// Digits with an optional fractional part, not all zero.
bool is_positive_decimal(std::string_view s);

// Throws Error("invalid-land").
void validate_land(const LandInfo& land);

// The single-line plaintext land record:
// "Seller: {seller}, Buyer: {buyer}, Land information: Dag number: {dag},
//  Khatiayan number: {khatiayan}, Area:{area} {unit}, Transaction ID: {txid}"
std::string render_record(std::string_view seller, std::string_view buyer, const LandInfo& land,
                          std::string_view transaction_id);

} // namespace landrec
