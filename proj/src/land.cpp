#include "landrec/land.hpp"

#include "landrec/c2i.hpp"
#include "landrec/error.hpp"

namespace landrec {

bool is_positive_decimal(std::string_view s)
{
    if (s.empty() || s.size() > 64) return false;
    bool seen_dot = false, nonzero = false;
    std::size_t digits_before = 0, digits_after = 0;
    for (char c : s) {
        if (c == '.') {
            if (seen_dot) return false;
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            (seen_dot ? digits_after : digits_before)++;
            nonzero = nonzero || c != '0';
        } else {
            return false;
        }
    }
    if (digits_before == 0 || (seen_dot && digits_after == 0)) return false;
    return nonzero;
}

void validate_land(const LandInfo& land)
{
    if (land.dag_number == 0) throw Error("invalid-land", "dag number must be positive");
    if (land.khatiayan_number == 0) throw Error("invalid-land", "khatiayan number must be positive");
    if (!is_positive_decimal(land.area)) throw Error("invalid-land", "area must be a positive decimal");
    if (land.unit.empty()) throw Error("invalid-land", "area unit is empty");
    for (char c : land.unit)
        if (c2i::code_of(c) == 0 || c == ',')
            throw Error("invalid-land", "area unit contains an unsupported character");
}

std::string render_record(std::string_view seller, std::string_view buyer, const LandInfo& land,
                          std::string_view transaction_id)
{
    std::string out;
    out += "Seller: ";
    out += seller;
    out += ", Buyer: ";
    out += buyer;
    out += ", Land information: Dag number: ";
    out += std::to_string(land.dag_number);
    out += ", Khatiayan number: ";
    out += std::to_string(land.khatiayan_number);
    out += ", Area:";
    out += land.area;
    out += ' ';
    out += land.unit;
    out += ", Transaction ID: ";
    out += transaction_id;
    return out;
}

} // namespace landrec
