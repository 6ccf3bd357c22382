#pragma once

// Advertising-agency desk: listings, deed creation and the deed signing
// state machine. Settlement hands the bank-signed deed to the registry.

#include "landrec/certificate.hpp"
#include "landrec/deed.hpp"
#include "landrec/ledger.hpp"
#include "landrec/registry.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace landrec::trading {

enum class ListingStatus { Open, UnderDeed, Sold, Withdrawn };

const char* to_string(ListingStatus status);
// Throws Error("invalid-status").
ListingStatus parse_listing_status(std::string_view text);

struct Listing {
    std::string listing_id;
    std::string seller_id;
    LandInfo land;
    Price asking_price;
    ListingStatus status = ListingStatus::Open;
    std::uint64_t created_at = 0;
    std::uint64_t seq = 0; // creation order
    std::string deed_id;   // deed in flight or the deed that sold it

    bool operator==(const Listing&) const = default;
};

struct ListingFilter {
    std::optional<std::uint64_t> dag_number;
    std::optional<std::uint64_t> khatiayan_number;
    std::optional<std::string> min_price; // inclusive decimal bounds
    std::optional<std::string> max_price;
    std::optional<ListingStatus> status;
};

// Numeric comparison of two positive decimal strings.
int compare_decimal(std::string_view a, std::string_view b);

// "BN" followed by 7 random base-36 characters.
std::string make_transaction_id(crypto::RandomSource& rng = crypto::system_random());

struct DeskState {
    std::vector<Listing> listings;
    std::vector<Deed> deeds;
    std::uint64_t next_listing = 1;
    std::uint64_t next_deed = 1;
    std::uint64_t version = 0; // bumped by every mutation

    bool operator==(const DeskState&) const = default;
};

class TradingDesk {
public:
    TradingDesk(const CertificateAuthority& ca, registry::Registry& registry,
                ledger::Clock clock = ledger::unix_now);

    TradingDesk(const TradingDesk&) = delete;
    TradingDesk& operator=(const TradingDesk&) = delete;

    // Empty area/unit are taken from the registered parcel; given ones must match.
    // Errors: invalid-certificate, invalid-price, not-owner, land-mismatch, duplicate-listing.
    Listing post_listing(const registry::Session& session, const Certificate& cert,
                         const LandInfo& land, const Price& asking_price);
    std::vector<Listing> search_listings(const ListingFilter& filter) const;
    // Errors: listing-not-found, not-owner, listing-not-open.
    Listing withdraw_listing(const registry::Session& session, const std::string& listing_id);
    Listing get_listing(const std::string& listing_id) const;

    // agreed_price defaults to the asking price.
    // Errors: listing-not-found, invalid-certificate, invalid-price, self-dealing, listing-not-open.
    Deed create_deed(const std::string& listing_id, const registry::Session& buyer_session,
                     const Certificate& buyer_cert, std::optional<Price> agreed_price = std::nullopt);

    // Errors in check order: deed-not-found, deed-abandoned, already-signed,
    // premature-bank-signature, wrong-party, invalid-certificate, bad-signature.
    Deed sign_deed(const std::string& deed_id, DeedRole role, const crypto::Signature& sig,
                   const Certificate& cert);

    // Seller or buyer, before the bank signs. Listing returns to OPEN.
    // Errors: deed-not-found, wrong-party, deed-abandoned, deed-not-abandonable.
    Deed abandon_deed(const std::string& deed_id, const registry::Session& session);

    // Errors: deed-not-found, deed-not-finalized, plus anything the registry raises.
    std::uint64_t settle_and_register(const std::string& deed_id);

    Deed get_deed(const std::string& deed_id) const;

    DeskState snapshot() const;
    // Replaces all state. Throws Error("invalid-state") on dangling references.
    void restore(const DeskState& state);

    const std::string& bank_id() const { return bank_id_; }

private:
    struct DeedSlot {
        std::mutex mu; // serializes operations on one deed
        Deed deed;
    };

    std::shared_ptr<DeedSlot> slot(const std::string& deed_id) const;
    Listing& listing_ref(const std::string& listing_id);
    void check_session_cert(const registry::Session& session, const Certificate& cert) const;

    const CertificateAuthority& ca_;
    registry::Registry& registry_;
    ledger::Clock clock_;
    std::string bank_id_;

    // Guards listings_, the deed map itself and the counters. Never held
    // while waiting on a DeedSlot lock.
    mutable std::mutex mu_;
    std::map<std::string, Listing> listings_;
    std::map<std::string, std::shared_ptr<DeedSlot>> deeds_;
    std::uint64_t next_listing_ = 1;
    std::uint64_t next_deed_ = 1;
    std::uint64_t version_ = 0;
};

} // namespace landrec::trading
