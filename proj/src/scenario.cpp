#include "landrec/scenario.hpp"

#include "landrec/client.hpp"
#include "landrec/error.hpp"
#include "landrec/keyfile.hpp"
#include "landrec/record_pipeline.hpp"

#include <chrono>
#include <ostream>

namespace landrec::scenario {

using client::ApiClient;
using codec::json;

namespace {

struct Actor {
    std::string id;
    crypto::DomainParams params;
    crypto::KeyPair key;
    std::uint64_t cert_serial = 0;
};

void require(bool ok, const std::string& what)
{
    if (!ok) throw Error("scenario-failed", what);
}

Actor from_key_file(const std::filesystem::path& path, const crypto::DomainParams& params)
{
    const KeyFile kf = read_key_file(path);
    require(kf.cert_serial.has_value(), path.string() + " carries no certificate serial");
    require(kf.params == params, path.string() + " uses different domain parameters");
    return {kf.subject_id, kf.params, kf.key, *kf.cert_serial};
}

std::string login(const ApiClient& api, const Actor& a)
{
    const json c = api.post("/auth/challenges", {{"subject_id", a.id}});
    const Hash256 digest = sha256(from_hex(codec::string_field(c, "nonce")));
    const auto sig = crypto::sign(a.params, a.key.private_a, digest);
    const json s = api.post("/auth/sessions", {{"challenge_id", codec::string_field(c, "challenge_id")},
                                               {"cert_serial", a.cert_serial},
                                               {"signature", codec::to_json(sig)}});
    return codec::string_field(s, "token");
}

std::vector<std::string> retrieve(const ApiClient& api, const Actor& a, const std::string& token,
                                  std::uint64_t* last_block = nullptr)
{
    const json r = api.get("/lrd/records?owner=" + client::escape(a.id), token);
    std::vector<std::string> out;
    for (const auto& rec : codec::field(r, "records")) {
        pipeline::DnaCiphertext ct{codec::string_field(rec, "dna_payload"),
                                   hash_from_hex(codec::string_field(rec, "key_fingerprint"))};
        out.push_back(pipeline::decrypt_record(a.params, a.key.private_a, ct));
        if (last_block) *last_block = codec::u64_field(rec, "block_id");
    }
    return out;
}

} // namespace

ScenarioReport run_full_trade(const ScenarioOptions& opt)
{
    const auto started = std::chrono::steady_clock::now();
    ScenarioReport report;
    auto step = [&](const std::string& line) {
        report.steps.push_back(line);
        if (opt.log) *opt.log << "[" << report.steps.size() << "] " << line << std::endl;
    };
    ApiClient api(opt.url);
    if (opt.observer) api.set_observer(opt.observer);

    const json health = api.get("/health");
    const auto ca_cert = codec::certificate_from_json(api.get("/ca/certificates/0"));
    const auto params = ca_cert.subject_params;
    step("service up at " + opt.url + ", " + std::to_string(params.bit_length()) + "-bit group, " +
         std::to_string(codec::u64_field(health, "height")) + " blocks");

    const Actor bank = from_key_file(opt.bank_key, params);
    const Actor registrar = from_key_file(opt.registrar_key, params);

    // A service that already ran the scenario holds the default names and
    // parcel; later runs use tagged names and a fresh khatiayan number.
    Bytes tag_bytes(2);
    crypto::system_random().fill(tag_bytes);
    const std::string tag = to_hex(tag_bytes);

    auto enroll = [&](const std::string& id) {
        Actor a{id, params, crypto::keygen(params), 0};
        auto issue = [&] {
            return api.post("/ca/certificates",
                            {{"subject_id", a.id}, {"subject_beta", crypto::to_decimal(a.key.public_beta)}});
        };
        json c;
        try {
            c = issue();
        } catch (const Error& e) {
            if (e.code() != "subject-taken") throw;
            a.id = id + "-" + tag;
            c = issue();
        }
        a.cert_serial = codec::u64_field(c, "serial");
        return a;
    };
    const Actor seller = enroll(opt.seller);
    const Actor buyer = enroll(opt.buyer);
    step("certificates issued: " + seller.id + " #" + std::to_string(seller.cert_serial) + ", " + buyer.id +
         " #" + std::to_string(buyer.cert_serial));

    const std::string registrar_token = login(api, registrar);
    LandInfo land = opt.land;
    auto register_parcel = [&] {
        return api.post("/lrd/records",
                        {{"owner_cert_serial", seller.cert_serial},
                         {"land", codec::to_json(land)},
                         {"seller_name", opt.prior_seller},
                         {"buyer_name", seller.id},
                         {"transaction_id", opt.prior_transaction}},
                        registrar_token);
    };
    json reg;
    for (int attempt = 0;; ++attempt) {
        try {
            reg = register_parcel();
            break;
        } catch (const Error& e) {
            if (e.code() != "duplicate-active-record" || attempt == 8) throw;
            land.khatiayan_number = opt.land.khatiayan_number + 1 +
                                    crypto::random_in_range(crypto::system_random(), 0, 999999).get_ui();
        }
    }
    report.register_block = codec::u64_field(reg, "block_id");
    report.land = land;
    step("registrar recorded " + seller.id + " as owner in block " + std::to_string(report.register_block));

    const std::string seller_token = login(api, seller);
    const auto held = retrieve(api, seller, seller_token);
    require(held.size() == 1, seller.id + " should hold exactly one record");
    report.seller_plaintext = held[0];
    require(report.seller_plaintext ==
                render_record(opt.prior_seller, seller.id, land, opt.prior_transaction),
            "seller record does not decrypt to the registered text");
    step(seller.id + " retrieved and decrypted the record: " + report.seller_plaintext);

    const json land_ref = {{"dag_number", land.dag_number}, {"khatiayan_number", land.khatiayan_number}};
    const json listing = api.post("/listings", {{"land", land_ref}, {"asking_price", codec::to_json(opt.price)}},
                                  seller_token);
    const std::string listing_id = codec::string_field(listing, "listing_id");
    step(seller.id + " posted listing " + listing_id);

    const std::string buyer_token = login(api, buyer);
    const json found = api.get("/listings?status=OPEN&dag=" + std::to_string(land.dag_number));
    bool seen = false;
    for (const auto& l : codec::field(found, "listings")) seen |= l.value("listing_id", "") == listing_id;
    require(seen, "listing not found by search");
    json deed = api.post("/deeds", {{"listing_id", listing_id}}, buyer_token);
    report.deed_id = codec::string_field(deed, "deed_id");
    step(buyer.id + " found the listing; deed " + report.deed_id + " created with transaction id " +
         codec::string_field(deed, "transaction_id"));

    auto sign_as = [&](const Actor& a, const char* role) {
        const json current = api.get("/deeds/" + report.deed_id);
        const Hash256 digest = trading::deed_digest(codec::deed_from_json(current));
        require(to_hex(digest) == codec::string_field(current, "digest"), "deed digest disagrees with server");
        const auto sig = crypto::sign(a.params, a.key.private_a, digest);
        deed = api.post("/deeds/" + report.deed_id + "/signatures",
                        {{"role", role}, {"signature", codec::to_json(sig)}, {"cert_serial", a.cert_serial}});
        step(a.id + " signed as " + role + " -> " + codec::string_field(deed, "state"));
    };
    sign_as(seller, "seller");
    sign_as(buyer, "buyer");
    sign_as(bank, "bank");

    const json settled = api.post("/deeds/" + report.deed_id + "/settle", json::object(), login(api, bank));
    report.transfer_block = codec::u64_field(settled, "block_id");
    report.final_state = codec::string_field(codec::field(settled, "deed"), "state");
    step("bank settled the deed: " + report.final_state + ", transfer block " +
         std::to_string(report.transfer_block));

    std::uint64_t buyer_block = 0;
    const auto bought = retrieve(api, buyer, login(api, buyer), &buyer_block);
    require(bought.size() == 1 && buyer_block == report.transfer_block, "buyer should hold the transfer record");
    report.buyer_plaintext = bought[0];
    require(report.buyer_plaintext == render_record(seller.id, buyer.id, land,
                                                    codec::string_field(deed, "transaction_id")),
            "buyer record does not match the deed");
    report.final_owner = buyer.id;
    step(buyer.id + " retrieved and decrypted the record: " + report.buyer_plaintext);

    try {
        retrieve(api, seller, login(api, seller));
        report.seller_retrieval = "ok";
    } catch (const Error& e) {
        report.seller_retrieval = e.code();
    }
    require(report.seller_retrieval == "no-active-record", "seller still holds a record");
    step(seller.id + " retrieval now fails with " + report.seller_retrieval);

    const json status = api.get("/listings/" + listing_id);
    require(codec::string_field(status, "status") == "SOLD", "listing should be SOLD");
    const json verify = api.get("/chain/verify");
    report.chain_ok = verify.value("ok", false);
    require(report.chain_ok, "chain verification failed");
    step("chain verifies (" + std::to_string(codec::u64_field(verify, "height")) + " blocks); owner of dag " +
         std::to_string(land.dag_number) + " khatiayan " + std::to_string(land.khatiayan_number) +
         " is " + report.final_owner);

    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

} // namespace landrec::scenario
