#include "doctest.h"

#include "deed_table.hpp"
#include "world.hpp"

#include <regex>
#include <set>
#include <thread>

using namespace landrec;
using namespace landrec::testing;
using trading::DeedRole;
using trading::DeedState;
using trading::ListingStatus;

namespace {

struct Market : World {
    Party x = party("Mr. X"), y = party("Mr. Y"), bank = party("Bn");
    registry::Session xs, ys;

    Market()
    {
        lrd->register_record(x.cert, sample_land(), "Mr. Z", "Mr. X", "BNX Y2345");
        xs = login(x);
        ys = login(y);
    }

    trading::Listing list(const LandInfo& land = sample_land(), std::string price = "5000000")
    {
        return desk->post_listing(xs, x.cert, land, {std::move(price), "BDT"});
    }
};

} // namespace

TEST_CASE("compare_decimal")
{
    using trading::compare_decimal;
    CHECK(compare_decimal("10", "9") == 1);
    CHECK(compare_decimal("009", "9") == 0);
    CHECK(compare_decimal("1.5", "1.50") == 0);
    CHECK(compare_decimal("1.05", "1.5") == -1);
    CHECK(compare_decimal("100", "99.999") == 1);
    CHECK(compare_decimal("0.1", "0.01") == 1);
}

TEST_CASE("transaction ids")
{
    const std::regex shape("BN[0-9A-Z]{7}");
    std::set<std::string> seen;
    for (int i = 0; i < 200; ++i) {
        auto id = trading::make_transaction_id();
        CHECK(std::regex_match(id, shape));
        seen.insert(id);
    }
    CHECK(seen.size() == 200);
}

TEST_CASE("posting listings")
{
    Market m;
    auto l = m.list({8000, 450, "", ""});
    CHECK(l.status == ListingStatus::Open);
    CHECK(l.seller_id == "Mr. X");
    CHECK(l.land == sample_land());

    CHECK(error_code([&] { m.list(); }) == "duplicate-listing");
    CHECK(error_code([&] { m.desk->post_listing(m.ys, m.y.cert, sample_land(), {"1", "BDT"}); }) ==
          "not-owner");
    CHECK(error_code([&] { m.desk->post_listing(m.xs, m.y.cert, sample_land(), {"1", "BDT"}); }) ==
          "invalid-certificate");
    CHECK(error_code([&] { m.list({8000, 450, "2001", "Shotangsho"}); }) == "land-mismatch");

    m.lrd->register_record(m.x.cert, {8001, 1, "5", "Katha"}, "Mr. Z", "Mr. X", "T");
    CHECK(error_code([&] { m.list({8001, 1, "5", "Katha"}, "0"); }) == "invalid-price");
    CHECK(error_code([&] { m.list({8001, 1, "5", "Katha"}, "abc"); }) == "invalid-price");
    CHECK(error_code([&] { m.list({8002, 1, "5", "Katha"}); }) == "not-owner");
}

TEST_CASE("searching listings")
{
    Market m;
    m.lrd->register_record(m.x.cert, {8000, 451, "10", "Katha"}, "Mr. Z", "Mr. X", "T2");
    m.lrd->register_record(m.x.cert, {7000, 12, "3", "Bigha"}, "Mr. Z", "Mr. X", "T3");
    auto a = m.list(sample_land(), "5000000");
    auto b = m.list({8000, 451, "", ""}, "250.5");
    auto c = m.list({7000, 12, "", ""}, "900");

    auto ids = [](const std::vector<trading::Listing>& ls) {
        std::vector<std::string> out;
        for (const auto& l : ls) out.push_back(l.listing_id);
        return out;
    };
    using V = std::vector<std::string>;
    CHECK(ids(m.desk->search_listings({})) == V{c.listing_id, b.listing_id, a.listing_id});
    CHECK(ids(m.desk->search_listings({.dag_number = 8000})) == V{b.listing_id, a.listing_id});
    CHECK(ids(m.desk->search_listings({.khatiayan_number = 12})) == V{c.listing_id});
    CHECK(ids(m.desk->search_listings({.min_price = "250.5", .max_price = "900"})) ==
          V{c.listing_id, b.listing_id});
    CHECK(m.desk->search_listings({.min_price = "10", .max_price = "5"}).empty());

    m.desk->withdraw_listing(m.xs, c.listing_id);
    CHECK(ids(m.desk->search_listings({.status = ListingStatus::Open})) == V{b.listing_id, a.listing_id});
    CHECK(ids(m.desk->search_listings({.status = ListingStatus::Withdrawn})) == V{c.listing_id});
    CHECK(error_code([&] { m.desk->withdraw_listing(m.xs, c.listing_id); }) == "listing-not-open");
    CHECK(error_code([&] { m.desk->withdraw_listing(m.ys, a.listing_id); }) == "not-owner");
    CHECK(error_code([&] { m.desk->withdraw_listing(m.xs, "L99"); }) == "listing-not-found");

    // A withdrawn parcel may be listed again.
    CHECK_NOTHROW(m.list({7000, 12, "", ""}, "800"));
}

TEST_CASE("creating deeds")
{
    Market m;
    auto l = m.list();
    auto d = m.desk->create_deed(l.listing_id, m.ys, m.y.cert);
    CHECK(trading::deed_state(d) == DeedState::Draft);
    CHECK(d.signatures.empty());
    CHECK(d.seller_id == "Mr. X");
    CHECK(d.buyer_id == "Mr. Y");
    CHECK(d.price == trading::Price{"5000000", "BDT"});
    CHECK(std::regex_match(d.transaction_id, std::regex("BN[0-9A-Z]{7}")));
    CHECK(m.desk->get_listing(l.listing_id).status == ListingStatus::UnderDeed);
    CHECK(m.desk->get_listing(l.listing_id).deed_id == d.deed_id);

    Party z = m.party("Mr. W");
    auto zs = m.login(z);
    CHECK(error_code([&] { m.desk->create_deed(l.listing_id, zs, z.cert); }) == "listing-not-open");
    CHECK(error_code([&] { m.desk->create_deed("L42", zs, z.cert); }) == "listing-not-found");
    CHECK(error_code([&] { m.desk->get_deed("D42"); }) == "deed-not-found");

    m.desk->abandon_deed(d.deed_id, m.ys);
    CHECK(error_code([&] { m.desk->create_deed(l.listing_id, m.xs, m.x.cert); }) == "self-dealing");
    Party bank_buyer = m.bank;
    CHECK(error_code([&] { m.desk->create_deed(l.listing_id, m.login(bank_buyer), bank_buyer.cert); }) ==
          "self-dealing");
    CHECK(error_code([&] { m.desk->create_deed(l.listing_id, zs, m.y.cert); }) == "invalid-certificate");
    auto d2 = m.desk->create_deed(l.listing_id, zs, z.cert, trading::Price{"4900000", "BDT"});
    CHECK(d2.price.amount == "4900000");
    CHECK(d2.deed_id != d.deed_id);
}

TEST_CASE("signing guards")
{
    Market m;
    auto id = m.desk->create_deed(m.list().listing_id, m.ys, m.y.cert).deed_id;
    Party q = m.party("Mr. Q");
    const auto digest = trading::deed_digest(m.desk->get_deed(id));
    auto sig_by = [&](const Party& p) { return crypto::sign(test_params(), p.key.private_a, digest); };

    CHECK(error_code([&] { m.desk->sign_deed("D9", DeedRole::Seller, sig_by(m.x), m.x.cert); }) ==
          "deed-not-found");
    CHECK(error_code([&] { m.desk->sign_deed(id, DeedRole::Seller, sig_by(q), q.cert); }) == "wrong-party");
    CHECK(error_code([&] { m.desk->sign_deed(id, DeedRole::Seller, sig_by(m.y), m.y.cert); }) ==
          "wrong-party");
    CHECK(error_code([&] { m.desk->sign_deed(id, DeedRole::Seller, sig_by(q), m.x.cert); }) ==
          "bad-signature");

    World foreign;
    Party fake_x = foreign.party("Mr. X");
    CHECK(error_code([&] { m.desk->sign_deed(id, DeedRole::Seller, sig_by(fake_x), fake_x.cert); }) ==
          "invalid-certificate");

    // A signature over a different deed body does not count.
    auto other = m.desk->get_deed(id);
    other.price.amount = "1";
    auto stale = crypto::sign(test_params(), m.x.key.private_a, trading::deed_digest(other));
    CHECK(error_code([&] { m.desk->sign_deed(id, DeedRole::Seller, stale, m.x.cert); }) == "bad-signature");

    CHECK(trading::deed_state(m.desk->get_deed(id)) == DeedState::Draft);
    CHECK(m.desk->sign_deed(id, DeedRole::Buyer, sig_by(m.y), m.y.cert).signatures.size() == 1);
    auto dup = m.desk->sign_deed(id, DeedRole::Seller, sig_by(m.x), m.x.cert);
    CHECK(trading::deed_state(dup) == DeedState::PartiesSigned);
    try {
        m.desk->sign_deed(id, DeedRole::Buyer, sig_by(m.y), m.y.cert);
        FAIL("expected already-signed");
    } catch (const Error& e) {
        CHECK(e.code() == "already-signed");
        CHECK(std::string(e.what()).find("already-signed(buyer)") != std::string::npos);
    }
    CHECK(error_code([&] { m.desk->abandon_deed(id, m.login(q)); }) == "wrong-party");
}

TEST_CASE("deed state machine table")
{
    for (auto row : expected_table()) {
        run_row(row);
        INFO(name(row.start), " x ", name(row.action));
        CHECK(row.observed == row.expected);
        CHECK(row.listing == listing_for(row.final_state));
    }
}

TEST_CASE("settlement happy path")
{
    Market m;
    auto l = m.list();
    auto id = m.desk->create_deed(l.listing_id, m.ys, m.y.cert).deed_id;
    m.sign(id, DeedRole::Seller, m.x);
    m.sign(id, DeedRole::Buyer, m.y);
    m.sign(id, DeedRole::Bank, m.bank);
    const auto block = m.desk->settle_and_register(id);
    const auto d = m.desk->get_deed(id);
    CHECK(trading::deed_state(d) == DeedState::Registered);
    CHECK(d.registered_block == block);
    CHECK(m.desk->get_listing(l.listing_id).status == ListingStatus::Sold);
    CHECK(m.lrd->is_active_owner("Mr. Y", key_of(sample_land())));
    CHECK(error_code([&] { m.desk->settle_and_register(id); }) == "deed-not-finalized");

    // The new owner can list the parcel again.
    auto resale = m.desk->post_listing(m.ys, m.y.cert, sample_land(), {"6000000", "BDT"});
    CHECK(resale.seller_id == "Mr. Y");
}

TEST_CASE("registry rejection leaves the deed bank-signed")
{
    Market m;
    auto l = m.list();
    auto id = m.desk->create_deed(l.listing_id, m.ys, m.y.cert).deed_id;
    m.sign(id, DeedRole::Seller, m.x);
    m.sign(id, DeedRole::Buyer, m.y);
    m.sign(id, DeedRole::Bank, m.bank);

    // A second desk holding the same deed settles it first.
    trading::TradingDesk rival(m.ca, *m.lrd, m.clock);
    rival.restore(m.desk->snapshot());
    rival.settle_and_register(id);

    CHECK(error_code([&] { m.desk->settle_and_register(id); }) == "seller-not-owner");
    CHECK(trading::deed_state(m.desk->get_deed(id)) == DeedState::BankSigned);
    CHECK(m.desk->get_listing(l.listing_id).status == ListingStatus::UnderDeed);
}

TEST_CASE("no deed registers without three distinct verifying signers")
{
    Market m;
    auto id = m.desk->create_deed(m.list().listing_id, m.ys, m.y.cert).deed_id;
    m.sign(id, DeedRole::Seller, m.x);
    m.sign(id, DeedRole::Buyer, m.y);
    // Seller tries to stand in for the bank.
    auto d = m.desk->get_deed(id);
    auto sig = crypto::sign(test_params(), m.x.key.private_a, trading::deed_digest(d));
    CHECK(error_code([&] { m.desk->sign_deed(id, DeedRole::Bank, sig, m.x.cert); }) == "wrong-party");
    CHECK(error_code([&] { m.desk->settle_and_register(id); }) == "deed-not-finalized");
}

TEST_CASE("snapshot and restore")
{
    Market m;
    auto l = m.list();
    auto id = m.desk->create_deed(l.listing_id, m.ys, m.y.cert).deed_id;
    m.sign(id, DeedRole::Seller, m.x);
    const auto st = m.desk->snapshot();
    CHECK(st.version == 3);

    trading::TradingDesk copy(m.ca, *m.lrd, m.clock);
    copy.restore(st);
    CHECK(copy.snapshot() == st);
    CHECK(copy.get_deed(id) == m.desk->get_deed(id));

    auto dangling = st;
    dangling.deeds[0].listing_id = "L77";
    CHECK(error_code([&] { copy.restore(dangling); }) == "invalid-state");
    auto behind = st;
    behind.next_listing = 1;
    CHECK(error_code([&] { copy.restore(behind); }) == "invalid-state");
}

TEST_CASE("distinct deeds progress concurrently")
{
    Market m;
    constexpr int kDeeds = 6;
    std::vector<std::string> deed_ids;
    std::vector<Party> buyers;
    for (int i = 0; i < kDeeds; ++i) {
        LandInfo land{100u + i, 1, "1", "Katha"};
        m.lrd->register_record(m.x.cert, land, "Mr. Z", "Mr. X", "T");
        auto l = m.list({land.dag_number, 1, "", ""});
        buyers.push_back(m.party("Buyer " + std::to_string(i)));
        deed_ids.push_back(m.desk->create_deed(l.listing_id, m.login(buyers.back()), buyers.back().cert).deed_id);
    }
    std::vector<std::thread> threads;
    for (int i = 0; i < kDeeds; ++i) {
        threads.emplace_back([&, i] {
            m.sign(deed_ids[i], DeedRole::Buyer, buyers[i]);
            m.sign(deed_ids[i], DeedRole::Seller, m.x);
            m.sign(deed_ids[i], DeedRole::Bank, m.bank);
            m.desk->settle_and_register(deed_ids[i]);
        });
    }
    for (auto& t : threads) t.join();
    for (int i = 0; i < kDeeds; ++i) {
        CHECK(trading::deed_state(m.desk->get_deed(deed_ids[i])) == DeedState::Registered);
        CHECK(m.lrd->is_active_owner(buyers[i].id, {100u + i, 1}));
    }
    CHECK(m.chain->height() == 2 + 2 * kDeeds);
    CHECK_FALSE(m.chain->verify());
    CHECK(m.lrd->check_coherence().empty());
}
