#pragma once

#include "landrec/bytes.hpp"
#include "landrec/crypto.hpp"
#include "landrec/land.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace landrec::trading {

enum class DeedRole { Seller, Buyer, Bank };

enum class DeedState { Draft, PartiallySigned, PartiesSigned, BankSigned, Registered, Abandoned };

const char* to_string(DeedRole role);
const char* to_string(DeedState state);
// Throws Error("invalid-role").
DeedRole parse_role(std::string_view text);

struct Price {
    std::string amount; // positive decimal
    std::string currency;

    bool operator==(const Price&) const = default;
};

struct DeedSignature {
    crypto::Signature signature;
    std::uint64_t cert_serial = 0;

    bool operator==(const DeedSignature&) const = default;
};

struct Deed {
    std::string deed_id;
    std::string listing_id;
    std::string seller_id;
    std::string buyer_id;
    LandInfo land;
    Price price;
    std::string transaction_id;
    std::uint64_t created_at = 0;
    std::map<DeedRole, DeedSignature> signatures;
    bool abandoned = false;
    std::optional<std::uint64_t> registered_block;

    bool operator==(const Deed&) const = default;
};

// Derived solely from the signature set and the registration/abandon flags.
DeedState deed_state(const Deed& deed);

// Version byte 0x01, then length-prefixed fields in fixed order:
// deed_id, seller_id, buyer_id, dag, khatiayan, area, unit, price amount,
// currency, transaction_id, created_at. Signatures are not covered.
Bytes canonical_deed(const Deed& deed);
Hash256 deed_digest(const Deed& deed);

} // namespace landrec::trading
