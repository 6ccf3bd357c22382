#include "landrec/trading.hpp"

#include "landrec/error.hpp"

#include <algorithm>

namespace landrec::trading {

const char* to_string(ListingStatus status)
{
    switch (status) {
    case ListingStatus::Open: return "OPEN";
    case ListingStatus::UnderDeed: return "UNDER_DEED";
    case ListingStatus::Sold: return "SOLD";
    case ListingStatus::Withdrawn: return "WITHDRAWN";
    }
    return "UNKNOWN";
}

ListingStatus parse_listing_status(std::string_view text)
{
    for (auto s : {ListingStatus::Open, ListingStatus::UnderDeed, ListingStatus::Sold,
                   ListingStatus::Withdrawn})
        if (text == to_string(s)) return s;
    throw Error("invalid-status", "unknown listing status " + std::string(text));
}

int compare_decimal(std::string_view a, std::string_view b)
{
    auto split = [](std::string_view s) {
        const auto dot = s.find('.');
        std::string_view whole = s.substr(0, dot);
        std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
        while (whole.size() > 1 && whole.front() == '0') whole.remove_prefix(1);
        return std::pair{whole, frac};
    };
    auto [aw, af] = split(a);
    auto [bw, bf] = split(b);
    if (aw.size() != bw.size()) return aw.size() < bw.size() ? -1 : 1;
    if (int c = aw.compare(bw); c != 0) return c < 0 ? -1 : 1;
    const std::size_t n = std::max(af.size(), bf.size());
    for (std::size_t i = 0; i < n; ++i) {
        const char x = i < af.size() ? af[i] : '0';
        const char y = i < bf.size() ? bf[i] : '0';
        if (x != y) return x < y ? -1 : 1;
    }
    return 0;
}

std::string make_transaction_id(crypto::RandomSource& rng)
{
    static constexpr char kDigits[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    std::string id = "BN";
    while (id.size() < 9) {
        Byte b[8];
        rng.fill(b);
        for (Byte v : b) {
            // 252 = 7 * 36; larger values would bias the draw.
            if (v < 252 && id.size() < 9) id.push_back(kDigits[v % 36]);
        }
    }
    return id;
}

namespace {

void check_price(const Price& price)
{
    if (!is_positive_decimal(price.amount) || price.currency.empty())
        throw Error("invalid-price", "price needs a positive decimal amount and a currency");
}

} // namespace

TradingDesk::TradingDesk(const CertificateAuthority& ca, registry::Registry& registry, ledger::Clock clock)
    : ca_(ca), registry_(registry), clock_(std::move(clock)), bank_id_(registry.config().bank_id)
{
}

void TradingDesk::check_session_cert(const registry::Session& session, const Certificate& cert) const
{
    if (cert.subject_id != session.subject_id || !ca_.is_issued(cert, clock_()))
        throw Error("invalid-certificate", "certificate does not verify for " + session.subject_id);
}

Listing& TradingDesk::listing_ref(const std::string& listing_id)
{
    auto it = listings_.find(listing_id);
    if (it == listings_.end()) throw Error("listing-not-found", "no listing " + listing_id);
    return it->second;
}

std::shared_ptr<TradingDesk::DeedSlot> TradingDesk::slot(const std::string& deed_id) const
{
    std::lock_guard lock(mu_);
    auto it = deeds_.find(deed_id);
    if (it == deeds_.end()) throw Error("deed-not-found", "no deed " + deed_id);
    return it->second;
}

Listing TradingDesk::post_listing(const registry::Session& session, const Certificate& cert,
                                  const LandInfo& land, const Price& asking_price)
{
    check_session_cert(session, cert);
    check_price(asking_price);
    auto entry = registry_.active_entry(key_of(land));
    if (!entry || entry->owner_id != session.subject_id)
        throw Error("not-owner", session.subject_id + " does not hold this parcel");
    LandInfo listed = entry->land;
    if ((!land.area.empty() && land.area != listed.area) || (!land.unit.empty() && land.unit != listed.unit))
        throw Error("land-mismatch", "land details differ from the registered parcel");

    std::lock_guard lock(mu_);
    for (const auto& [id, l] : listings_) {
        if (key_of(l.land) == key_of(listed) &&
            (l.status == ListingStatus::Open || l.status == ListingStatus::UnderDeed))
            throw Error("duplicate-listing", "parcel already listed as " + id);
    }
    Listing l;
    l.seq = next_listing_++;
    l.listing_id = "L" + std::to_string(l.seq);
    l.seller_id = session.subject_id;
    l.land = std::move(listed);
    l.asking_price = asking_price;
    l.created_at = clock_();
    listings_.emplace(l.listing_id, l);
    ++version_;
    return l;
}

std::vector<Listing> TradingDesk::search_listings(const ListingFilter& f) const
{
    std::vector<Listing> out;
    std::lock_guard lock(mu_);
    for (const auto& [id, l] : listings_) {
        if (f.dag_number && l.land.dag_number != *f.dag_number) continue;
        if (f.khatiayan_number && l.land.khatiayan_number != *f.khatiayan_number) continue;
        if (f.status && l.status != *f.status) continue;
        if (f.min_price && compare_decimal(l.asking_price.amount, *f.min_price) < 0) continue;
        if (f.max_price && compare_decimal(l.asking_price.amount, *f.max_price) > 0) continue;
        out.push_back(l);
    }
    std::sort(out.begin(), out.end(), [](const Listing& a, const Listing& b) { return a.seq > b.seq; });
    return out;
}

Listing TradingDesk::withdraw_listing(const registry::Session& session, const std::string& listing_id)
{
    std::lock_guard lock(mu_);
    Listing& l = listing_ref(listing_id);
    if (l.seller_id != session.subject_id)
        throw Error("not-owner", "only the seller may withdraw " + listing_id);
    if (l.status != ListingStatus::Open) throw Error("listing-not-open", listing_id + " is not open");
    l.status = ListingStatus::Withdrawn;
    ++version_;
    return l;
}

Listing TradingDesk::get_listing(const std::string& listing_id) const
{
    std::lock_guard lock(mu_);
    auto it = listings_.find(listing_id);
    if (it == listings_.end()) throw Error("listing-not-found", "no listing " + listing_id);
    return it->second;
}

Deed TradingDesk::create_deed(const std::string& listing_id, const registry::Session& buyer_session,
                              const Certificate& buyer_cert, std::optional<Price> agreed_price)
{
    check_session_cert(buyer_session, buyer_cert);
    if (agreed_price) check_price(*agreed_price);
    const std::string transaction_id = make_transaction_id();

    std::lock_guard lock(mu_);
    Listing& l = listing_ref(listing_id);
    if (buyer_session.subject_id == l.seller_id || buyer_session.subject_id == bank_id_)
        throw Error("self-dealing", "buyer must differ from the seller and the bank");
    if (l.status != ListingStatus::Open) throw Error("listing-not-open", listing_id + " is not open");

    auto s = std::make_shared<DeedSlot>();
    Deed& d = s->deed;
    d.deed_id = "D" + std::to_string(next_deed_++);
    d.listing_id = listing_id;
    d.seller_id = l.seller_id;
    d.buyer_id = buyer_session.subject_id;
    d.land = l.land;
    d.price = agreed_price ? *agreed_price : l.asking_price;
    d.transaction_id = transaction_id;
    d.created_at = clock_();
    deeds_.emplace(d.deed_id, s);
    l.status = ListingStatus::UnderDeed;
    l.deed_id = d.deed_id;
    ++version_;
    return d;
}

// Lock order: DeedSlot::mu, then mu_. The deed itself is written only
// while both are held, so readers need just one of them.

Deed TradingDesk::sign_deed(const std::string& deed_id, DeedRole role, const crypto::Signature& sig,
                            const Certificate& cert)
{
    auto s = slot(deed_id);
    std::lock_guard deed_lock(s->mu);
    const Deed& d = s->deed;
    const DeedState state = deed_state(d);
    const std::string role_name = to_string(role);

    if (state == DeedState::Abandoned) throw Error("deed-abandoned", deed_id + " was abandoned");
    if (d.signatures.contains(role))
        throw Error("already-signed", "already-signed(" + role_name + ")");
    if (role == DeedRole::Bank && state != DeedState::PartiesSigned)
        throw Error("premature-bank-signature", "bank signs only after seller and buyer");
    const std::string& expected = role == DeedRole::Seller ? d.seller_id
                                  : role == DeedRole::Buyer ? d.buyer_id
                                                            : bank_id_;
    if (cert.subject_id != expected)
        throw Error("wrong-party", cert.subject_id + " is not the deed's " + role_name);
    if (!ca_.is_issued(cert, clock_()))
        throw Error("invalid-certificate", "certificate does not verify");
    if (!crypto::verify(cert.subject_params, cert.subject_beta, deed_digest(d), sig))
        throw Error("bad-signature", role_name + " signature does not verify over the deed");

    std::lock_guard lock(mu_);
    s->deed.signatures[role] = DeedSignature{sig, cert.serial};
    ++version_;
    return s->deed;
}

Deed TradingDesk::abandon_deed(const std::string& deed_id, const registry::Session& session)
{
    auto s = slot(deed_id);
    std::lock_guard deed_lock(s->mu);
    const Deed& d = s->deed;
    if (session.subject_id != d.seller_id && session.subject_id != d.buyer_id)
        throw Error("wrong-party", "only the seller or buyer may abandon " + deed_id);
    switch (deed_state(d)) {
    case DeedState::Abandoned: throw Error("deed-abandoned", deed_id + " was abandoned");
    case DeedState::BankSigned:
    case DeedState::Registered:
        throw Error("deed-not-abandonable", "deed is already bank-signed");
    default: break;
    }

    std::lock_guard lock(mu_);
    s->deed.abandoned = true;
    auto it = listings_.find(d.listing_id);
    if (it != listings_.end() && it->second.status == ListingStatus::UnderDeed) {
        it->second.status = ListingStatus::Open;
        it->second.deed_id.clear();
    }
    ++version_;
    return s->deed;
}

std::uint64_t TradingDesk::settle_and_register(const std::string& deed_id)
{
    auto s = slot(deed_id);
    std::lock_guard deed_lock(s->mu);
    if (deed_state(s->deed) != DeedState::BankSigned)
        throw Error("deed-not-finalized", deed_id + " is " + to_string(deed_state(s->deed)));

    // On failure nothing has changed; the deed stays BANK_SIGNED.
    const std::uint64_t block_id = registry_.transfer_ownership(s->deed);

    std::lock_guard lock(mu_);
    s->deed.registered_block = block_id;
    auto it = listings_.find(s->deed.listing_id);
    if (it != listings_.end()) it->second.status = ListingStatus::Sold;
    ++version_;
    return block_id;
}

Deed TradingDesk::get_deed(const std::string& deed_id) const
{
    std::lock_guard lock(mu_);
    auto it = deeds_.find(deed_id);
    if (it == deeds_.end()) throw Error("deed-not-found", "no deed " + deed_id);
    return it->second->deed;
}

DeskState TradingDesk::snapshot() const
{
    std::lock_guard lock(mu_);
    DeskState st;
    for (const auto& [id, l] : listings_) st.listings.push_back(l);
    for (const auto& [id, s] : deeds_) st.deeds.push_back(s->deed);
    st.next_listing = next_listing_;
    st.next_deed = next_deed_;
    st.version = version_;
    return st;
}

void TradingDesk::restore(const DeskState& state)
{
    std::map<std::string, Listing> listings;
    for (const auto& l : state.listings) {
        if (l.seq >= state.next_listing) throw Error("invalid-state", "listing counter behind " + l.listing_id);
        listings.emplace(l.listing_id, l);
    }
    std::map<std::string, std::shared_ptr<DeedSlot>> deeds;
    for (const auto& d : state.deeds) {
        if (!listings.contains(d.listing_id))
            throw Error("invalid-state", d.deed_id + " references unknown listing " + d.listing_id);
        auto s = std::make_shared<DeedSlot>();
        s->deed = d;
        deeds.emplace(d.deed_id, std::move(s));
    }
    for (const auto& [id, l] : listings) {
        if (!l.deed_id.empty() && !deeds.contains(l.deed_id))
            throw Error("invalid-state", id + " references unknown deed " + l.deed_id);
    }
    std::lock_guard lock(mu_);
    listings_ = std::move(listings);
    deeds_ = std::move(deeds);
    next_listing_ = state.next_listing;
    next_deed_ = state.next_deed;
    version_ = state.version;
}

} // namespace landrec::trading
