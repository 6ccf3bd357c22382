#include "landrec/json_codec.hpp"

#include "landrec/error.hpp"

namespace landrec::codec {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error("invalid-request", what); }

} // namespace

const json& field(const json& j, const char* name)
{
    if (!j.is_object()) bad("expected an object holding " + std::string(name));
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) bad("missing field " + std::string(name));
    return *it;
}

std::string string_field(const json& j, const char* name)
{
    const json& v = field(j, name);
    if (!v.is_string()) bad(std::string(name) + " must be a string");
    return v.get<std::string>();
}

std::uint64_t u64_field(const json& j, const char* name)
{
    const json& v = field(j, name);
    if (!v.is_number_unsigned()) bad(std::string(name) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

crypto::BigInt bigint_field(const json& j, const char* name)
{
    try {
        return crypto::parse_decimal(string_field(j, name));
    } catch (const Error& e) {
        if (e.code() == "invalid-request") throw;
        bad(std::string(name) + " must be a decimal string");
    }
}

json parse(std::string_view text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
}

json to_json(const crypto::DomainParams& params)
{
    return {{"p", crypto::to_decimal(params.p)}, {"alpha", crypto::to_decimal(params.alpha)}};
}

json to_json(const crypto::Signature& sig)
{
    return {{"r", crypto::to_decimal(sig.r)}, {"s", crypto::to_decimal(sig.s)}};
}

json to_json(const LandInfo& land)
{
    return {{"dag_number", land.dag_number},
            {"khatiayan_number", land.khatiayan_number},
            {"area", land.area},
            {"unit", land.unit}};
}

json to_json(const trading::Price& price) { return {{"amount", price.amount}, {"currency", price.currency}}; }

json to_json(const trading::Certificate& cert)
{
    return {{"serial", cert.serial},
            {"subject_id", cert.subject_id},
            {"subject_params", to_json(cert.subject_params)},
            {"subject_beta", crypto::to_decimal(cert.subject_beta)},
            {"issuer_id", cert.issuer_id},
            {"issued_at", cert.issued_at},
            {"expires_at", cert.expires_at},
            {"ca_signature", to_json(cert.ca_signature)},
            {"key_fingerprint", to_hex(crypto::key_fingerprint(cert.subject_params, cert.subject_beta))}};
}

json to_json(const trading::Listing& l)
{
    json j = {{"listing_id", l.listing_id},
              {"seller_id", l.seller_id},
              {"land", to_json(l.land)},
              {"asking_price", to_json(l.asking_price)},
              {"status", trading::to_string(l.status)},
              {"created_at", l.created_at},
              {"seq", l.seq}};
    j["deed_id"] = l.deed_id.empty() ? json(nullptr) : json(l.deed_id);
    return j;
}

json to_json(const trading::Deed& d)
{
    json sigs = json::object();
    for (const auto& [role, s] : d.signatures) {
        json one = to_json(s.signature);
        one["cert_serial"] = s.cert_serial;
        sigs[trading::to_string(role)] = one;
    }
    json j = {{"deed_id", d.deed_id},
              {"listing_id", d.listing_id},
              {"seller_id", d.seller_id},
              {"buyer_id", d.buyer_id},
              {"land", to_json(d.land)},
              {"price", to_json(d.price)},
              {"transaction_id", d.transaction_id},
              {"created_at", d.created_at},
              {"signatures", sigs},
              {"abandoned", d.abandoned},
              {"state", trading::to_string(trading::deed_state(d))},
              {"digest", to_hex(trading::deed_digest(d))}};
    j["registered_block"] = d.registered_block ? json(*d.registered_block) : json(nullptr);
    return j;
}

json to_json(const ledger::TransactionRecord& tx)
{
    return {{"tx_id", to_hex(tx.tx_id)},
            {"kind", ledger::to_string(tx.kind)},
            {"owner_id", tx.owner_id},
            {"dna_payload", tx.payload.dna},
            {"key_fingerprint", to_hex(tx.payload.key_fingerprint)},
            {"deed_hash", to_hex(tx.deed_hash)},
            {"created_at", tx.created_at}};
}

json to_json(const ledger::Block& b)
{
    json txs = json::array();
    for (const auto& tx : b.transactions) txs.push_back(to_json(tx));
    return {{"block_id", b.header.block_id},
            {"prev_hash", to_hex(b.header.prev_hash)},
            {"tx_count", b.header.tx_count},
            {"nonce", b.header.nonce},
            {"merkle_root", to_hex(b.header.merkle_root)},
            {"timestamp", b.header.timestamp},
            {"hash", to_hex(ledger::block_hash(b))},
            {"transactions", txs}};
}

json to_json(const trading::DeskState& st)
{
    json listings = json::array(), deeds = json::array();
    for (const auto& l : st.listings) listings.push_back(to_json(l));
    for (const auto& d : st.deeds) deeds.push_back(to_json(d));
    return {{"listings", listings},
            {"deeds", deeds},
            {"next_listing", st.next_listing},
            {"next_deed", st.next_deed},
            {"version", st.version}};
}

crypto::DomainParams params_from_json(const json& j)
{
    return {bigint_field(j, "p"), bigint_field(j, "alpha")};
}

crypto::Signature signature_from_json(const json& j) { return {bigint_field(j, "r"), bigint_field(j, "s")}; }

LandInfo land_from_json(const json& j)
{
    LandInfo land{u64_field(j, "dag_number"), u64_field(j, "khatiayan_number"), "", ""};
    // area and unit are optional on input (listings fill them from the registry).
    if (j.contains("area") && !j["area"].is_null()) land.area = string_field(j, "area");
    if (j.contains("unit") && !j["unit"].is_null()) land.unit = string_field(j, "unit");
    return land;
}

trading::Price price_from_json(const json& j)
{
    return {string_field(j, "amount"), string_field(j, "currency")};
}

trading::Certificate certificate_from_json(const json& j)
{
    trading::Certificate c;
    c.serial = u64_field(j, "serial");
    c.subject_id = string_field(j, "subject_id");
    c.subject_params = params_from_json(field(j, "subject_params"));
    c.subject_beta = bigint_field(j, "subject_beta");
    c.issuer_id = string_field(j, "issuer_id");
    c.issued_at = u64_field(j, "issued_at");
    c.expires_at = u64_field(j, "expires_at");
    c.ca_signature = signature_from_json(field(j, "ca_signature"));
    return c;
}

trading::Listing listing_from_json(const json& j)
{
    trading::Listing l;
    l.listing_id = string_field(j, "listing_id");
    l.seller_id = string_field(j, "seller_id");
    l.land = land_from_json(field(j, "land"));
    l.asking_price = price_from_json(field(j, "asking_price"));
    try {
        l.status = trading::parse_listing_status(string_field(j, "status"));
    } catch (const Error& e) {
        bad(e.what());
    }
    l.created_at = u64_field(j, "created_at");
    l.seq = u64_field(j, "seq");
    if (j.contains("deed_id") && !j["deed_id"].is_null()) l.deed_id = string_field(j, "deed_id");
    return l;
}

trading::Deed deed_from_json(const json& j)
{
    trading::Deed d;
    d.deed_id = string_field(j, "deed_id");
    d.listing_id = string_field(j, "listing_id");
    d.seller_id = string_field(j, "seller_id");
    d.buyer_id = string_field(j, "buyer_id");
    d.land = land_from_json(field(j, "land"));
    d.price = price_from_json(field(j, "price"));
    d.transaction_id = string_field(j, "transaction_id");
    d.created_at = u64_field(j, "created_at");
    if (j.contains("signatures")) {
        const json& sigs = j["signatures"];
        if (!sigs.is_object()) bad("signatures must be an object");
        for (const auto& [role, s] : sigs.items()) {
            trading::DeedRole r;
            try {
                r = trading::parse_role(role);
            } catch (const Error& e) {
                bad(e.what());
            }
            d.signatures[r] = {signature_from_json(s), u64_field(s, "cert_serial")};
        }
    }
    if (j.contains("abandoned")) {
        if (!j["abandoned"].is_boolean()) bad("abandoned must be a boolean");
        d.abandoned = j["abandoned"].get<bool>();
    }
    if (j.contains("registered_block") && !j["registered_block"].is_null())
        d.registered_block = u64_field(j, "registered_block");
    return d;
}

trading::DeskState desk_state_from_json(const json& j)
{
    trading::DeskState st;
    for (const auto& l : field(j, "listings")) st.listings.push_back(listing_from_json(l));
    for (const auto& d : field(j, "deeds")) st.deeds.push_back(deed_from_json(d));
    st.next_listing = u64_field(j, "next_listing");
    st.next_deed = u64_field(j, "next_deed");
    st.version = u64_field(j, "version");
    return st;
}

} // namespace landrec::codec
