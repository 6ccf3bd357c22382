#pragma once

// Wire format shared by the service, the CLI and the scenario driver.
// Big integers travel as decimal strings, hashes as lowercase hex.

#include "landrec/certificate.hpp"
#include "landrec/deed.hpp"
#include "landrec/ledger.hpp"
#include "landrec/trading.hpp"

#include <json.hpp>

namespace landrec::codec {

using json = nlohmann::json;

json to_json(const crypto::DomainParams& params);
json to_json(const crypto::Signature& sig);
json to_json(const LandInfo& land);
json to_json(const trading::Price& price);
json to_json(const trading::Certificate& cert);
json to_json(const trading::Listing& listing);
json to_json(const trading::Deed& deed); // adds "state" and "digest"
json to_json(const ledger::TransactionRecord& tx);
json to_json(const ledger::Block& block); // adds "hash"
json to_json(const trading::DeskState& state);

// All parsers throw Error("invalid-request") naming the offending field.
crypto::DomainParams params_from_json(const json& j);
crypto::Signature signature_from_json(const json& j);
LandInfo land_from_json(const json& j);
trading::Price price_from_json(const json& j);
trading::Certificate certificate_from_json(const json& j);
trading::Listing listing_from_json(const json& j);
trading::Deed deed_from_json(const json& j);
trading::DeskState desk_state_from_json(const json& j);

// Field access with Error("invalid-request") instead of json exceptions.
const json& field(const json& j, const char* name);
std::string string_field(const json& j, const char* name);
std::uint64_t u64_field(const json& j, const char* name);
crypto::BigInt bigint_field(const json& j, const char* name);
// Throws Error("invalid-request") on malformed text.
json parse(std::string_view text);

} // namespace landrec::codec
