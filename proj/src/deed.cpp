#include "landrec/deed.hpp"

#include "landrec/error.hpp"

namespace landrec::trading {

const char* to_string(DeedRole role)
{
    switch (role) {
    case DeedRole::Seller: return "seller";
    case DeedRole::Buyer: return "buyer";
    case DeedRole::Bank: return "bank";
    }
    return "unknown";
}

const char* to_string(DeedState state)
{
    switch (state) {
    case DeedState::Draft: return "DRAFT";
    case DeedState::PartiallySigned: return "PARTIALLY_SIGNED";
    case DeedState::PartiesSigned: return "PARTIES_SIGNED";
    case DeedState::BankSigned: return "BANK_SIGNED";
    case DeedState::Registered: return "REGISTERED";
    case DeedState::Abandoned: return "ABANDONED";
    }
    return "UNKNOWN";
}

DeedRole parse_role(std::string_view text)
{
    if (text == "seller") return DeedRole::Seller;
    if (text == "buyer") return DeedRole::Buyer;
    if (text == "bank") return DeedRole::Bank;
    throw Error("invalid-role", "role must be seller, buyer or bank");
}

DeedState deed_state(const Deed& deed)
{
    if (deed.registered_block) return DeedState::Registered;
    if (deed.abandoned) return DeedState::Abandoned;
    if (deed.signatures.contains(DeedRole::Bank)) return DeedState::BankSigned;
    const bool seller = deed.signatures.contains(DeedRole::Seller);
    const bool buyer = deed.signatures.contains(DeedRole::Buyer);
    if (seller && buyer) return DeedState::PartiesSigned;
    if (seller || buyer) return DeedState::PartiallySigned;
    return DeedState::Draft;
}

Bytes canonical_deed(const Deed& deed)
{
    ByteWriter w;
    w.u8(0x01);
    w.str16(deed.deed_id);
    w.str16(deed.seller_id);
    w.str16(deed.buyer_id);
    w.u64(deed.land.dag_number);
    w.u64(deed.land.khatiayan_number);
    w.str16(deed.land.area);
    w.str16(deed.land.unit);
    w.str16(deed.price.amount);
    w.str16(deed.price.currency);
    w.str16(deed.transaction_id);
    w.u64(deed.created_at);
    return std::move(w).take();
}

Hash256 deed_digest(const Deed& deed) { return sha256(canonical_deed(deed)); }

} // namespace landrec::trading
