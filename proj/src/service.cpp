#include "landrec/service.hpp"

#include "landrec/certificate.hpp"
#include "landrec/error.hpp"
#include "landrec/json_codec.hpp"
#include "landrec/keyfile.hpp"
#include "landrec/registry.hpp"
#include "landrec/trading.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

namespace landrec::service {

namespace fs = std::filesystem;
using codec::json;
using httplib::Request;
using httplib::Response;

ServiceConfig config_from_env()
{
    ServiceConfig c;
    auto env = [](const char* name) -> const char* {
        const char* v = std::getenv(name);
        return v && *v ? v : nullptr;
    };
    auto number = [](const char* name, const char* text) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(text, &end, 10);
        if (*end != '\0') throw Error("invalid-config", std::string(name) + " must be a number");
        return v;
    };
    if (auto v = env("LANDREC_HOST")) c.host = v;
    if (auto v = env("LANDREC_PORT")) c.port = static_cast<int>(number("LANDREC_PORT", v));
    if (auto v = env("LANDREC_DATA_DIR")) c.data_dir = v;
    if (auto v = env("LANDREC_KEY_BITS")) c.key_bits = static_cast<unsigned>(number("LANDREC_KEY_BITS", v));
    if (auto v = env("LANDREC_CHUNK_DIGITS")) c.chunk_digits = number("LANDREC_CHUNK_DIGITS", v);
    return c;
}

int http_status_for(std::string_view code)
{
    static const std::map<std::string_view, int> table = {
        // malformed input
        {"invalid-request", 400}, {"invalid-land", 400}, {"invalid-price", 400},
        {"invalid-role", 400}, {"invalid-status", 400}, {"invalid-public-key", 400},
        {"invalid-subject", 400}, {"invalid-validity", 400}, {"invalid-integer", 400},
        {"invalid-parameter", 400}, {"unsupported-character", 400},
        // identity
        {"unauthenticated", 401}, {"invalid-session", 401}, {"unknown-challenge", 401},
        {"expired-challenge", 401}, {"replayed-challenge", 401}, {"subject-mismatch", 401},
        // authorization
        {"unauthorized", 403}, {"forbidden", 403}, {"not-owner", 403}, {"wrong-party", 403},
        {"self-dealing", 403}, {"invalid-certificate", 403},
        // lookups
        {"not-found", 404}, {"certificate-not-found", 404}, {"listing-not-found", 404},
        {"deed-not-found", 404}, {"no-active-record", 404},
        // state conflicts
        {"duplicate-listing", 409}, {"duplicate-active-record", 409}, {"listing-not-open", 409},
        {"already-signed", 409}, {"premature-bank-signature", 409}, {"deed-not-finalized", 409},
        {"deed-abandoned", 409}, {"deed-not-abandonable", 409}, {"seller-not-owner", 409},
        {"land-mismatch", 409}, {"subject-taken", 409},
        // cryptographic rejection
        {"bad-signature", 422}, {"signature-invalid", 422},
        // server side
        {"persistence-failure", 500}, {"internal", 500}, {"chain-corrupt", 500},
    };
    auto it = table.find(code);
    return it == table.end() ? 500 : it->second;
}

namespace {

void send_json(Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(Response& res, const std::string& code, const std::string& message,
                const json& detail = nullptr)
{
    send_json(res, http_status_for(code),
              {{"error", {{"code", code}, {"message", message}, {"detail", detail}}}});
}

std::uint64_t path_u64(const Request& req, std::size_t group)
{
    const std::string text = req.matches[group];
    if (text.empty() || text.size() > 19) throw Error("invalid-request", "bad numeric path segment");
    return std::stoull(text);
}

std::optional<std::uint64_t> query_u64(const Request& req, const char* name)
{
    if (!req.has_param(name)) return std::nullopt;
    const std::string v = req.get_param_value(name);
    if (v.empty()) return std::nullopt;
    if (v.size() > 19 || v.find_first_not_of("0123456789") != std::string::npos)
        throw Error("invalid-request", std::string(name) + " must be a non-negative integer");
    return std::stoull(v);
}

std::optional<std::string> query_str(const Request& req, const char* name)
{
    if (!req.has_param(name)) return std::nullopt;
    std::string v = req.get_param_value(name);
    if (v.empty()) return std::nullopt;
    return v;
}

json body_of(const Request& req)
{
    if (req.body.empty()) return json::object();
    json j = codec::parse(req.body);
    if (!j.is_object()) throw Error("invalid-request", "request body must be a JSON object");
    return j;
}

} // namespace

struct Service::Impl {
    ServiceConfig config;
    ledger::Clock clock;
    std::unique_ptr<trading::CertificateAuthority> ca;
    std::unique_ptr<ledger::Ledger> chain;
    std::unique_ptr<registry::Registry> lrd;
    std::unique_ptr<trading::TradingDesk> desk;
    httplib::Server http;

    std::mutex certs_mu;
    std::mutex persist_mu;
    std::uint64_t persisted_version = 0;

    fs::path path(const char* name) const { return config.data_dir / name; }
    void log(const std::string& line) const
    {
        if (!config.quiet) std::cerr << "landrec: " << line << '\n';
    }

    Impl(ServiceConfig c, ledger::Clock clk) : config(std::move(c)), clock(std::move(clk))
    {
        fs::create_directories(config.data_dir);
        // The chain is checked first so a damaged one is refused before any
        // key material is touched.
        chain = std::make_unique<ledger::Ledger>(std::make_unique<ledger::FileBlockStore>(config.data_dir), clock);
        load_ca();
        load_certificates();
        ensure_operator("bank", "bank.key", config.bank_id);
        ensure_operator("registrar", "registrar.key", config.registrar_id);

        registry::RegistryConfig rc;
        rc.chunk_digits = config.chunk_digits;
        rc.bank_id = config.bank_id;
        lrd = std::make_unique<registry::Registry>(*chain, *ca, path("index.jsonl"), rc, clock);
        desk = std::make_unique<trading::TradingDesk>(*ca, *lrd, clock);
        load_desk();
        routes();
    }

    void load_ca()
    {
        const fs::path key_path = path("ca.key");
        KeyFile kf;
        if (fs::exists(key_path)) {
            kf = read_key_file(key_path);
            if (kf.role != "ca") throw Error("invalid-key-file", key_path.string() + " is not a CA key");
        } else {
            log("generating " + std::to_string(config.key_bits) + "-bit domain parameters");
            kf.role = "ca";
            kf.subject_id = config.ca_id;
            kf.params = crypto::generate_domain_params(config.key_bits);
            kf.key = crypto::keygen(kf.params);
            write_key_file(key_path, kf);
        }
        ca = std::make_unique<trading::CertificateAuthority>(
            trading::CaKey{kf.subject_id, kf.params, kf.key}, clock(), 3650);
    }

    void load_certificates()
    {
        std::ifstream in(path("certs.jsonl"));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                ca->restore(codec::certificate_from_json(codec::parse(line)));
            } catch (const Error& e) {
                throw Error("certificates-corrupt",
                            "certs.jsonl line " + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    void persist_certificate(const trading::Certificate& cert)
    {
        std::lock_guard lock(certs_mu);
        std::ofstream out(path("certs.jsonl"), std::ios::app);
        out << codec::to_json(cert).dump() << '\n';
        out.flush();
        if (!out) throw Error("persistence-failure", "cannot append to certs.jsonl");
    }

    void ensure_operator(const std::string& role, const char* file, const std::string& subject)
    {
        const fs::path key_path = path(file);
        if (fs::exists(key_path)) {
            KeyFile kf = read_key_file(key_path);
            auto cert = kf.cert_serial ? ca->find(*kf.cert_serial) : std::nullopt;
            if (cert && cert->subject_id == subject && cert->subject_beta == kf.key.public_beta &&
                ca->verify(*cert, clock()))
                return;
            throw Error("invalid-key-file", key_path.string() + " has no valid certificate");
        }
        KeyFile kf;
        kf.role = role;
        kf.subject_id = subject;
        kf.params = ca->params();
        kf.key = crypto::keygen(kf.params);
        const auto cert = ca->issue(subject, kf.key.public_beta, kf.params, config.cert_validity_days, clock());
        persist_certificate(cert);
        kf.cert_serial = cert.serial;
        write_key_file(key_path, kf);
        log("bootstrapped " + role + " identity " + subject + " in " + key_path.string());
    }

    void load_desk()
    {
        const fs::path p = path("trading.json");
        if (!fs::exists(p)) return;
        trading::DeskState st;
        try {
            st = codec::desk_state_from_json(codec::parse(read_text_file(p)));
        } catch (const Error& e) {
            throw Error("trading-state-corrupt", std::string("trading.json: ") + e.what());
        }
        // A crash between the ledger append and the snapshot write leaves a
        // bank-signed deed whose transfer is already on chain.
        std::map<Hash256, std::uint64_t> transfers;
        for (const auto& b : chain->snapshot())
            for (const auto& tx : b.transactions)
                if (tx.kind == ledger::TxKind::Transfer) transfers[tx.deed_hash] = b.header.block_id;
        for (auto& d : st.deeds) {
            if (trading::deed_state(d) != trading::DeedState::BankSigned) continue;
            auto it = transfers.find(trading::deed_digest(d));
            if (it == transfers.end()) continue;
            d.registered_block = it->second;
            for (auto& l : st.listings)
                if (l.listing_id == d.listing_id) l.status = trading::ListingStatus::Sold;
            ++st.version;
        }
        desk->restore(st);
        persisted_version = st.version;
    }

    void persist_desk()
    {
        std::lock_guard lock(persist_mu);
        const auto st = desk->snapshot();
        if (st.version <= persisted_version) return;
        try {
            write_text_file(path("trading.json"), codec::to_json(st).dump());
        } catch (const Error& e) {
            throw Error("persistence-failure", e.what());
        }
        persisted_version = st.version;
    }

    registry::Session session_of(const Request& req) const
    {
        const std::string h = req.get_header_value("Authorization");
        constexpr std::string_view prefix = "Bearer ";
        if (h.size() <= prefix.size() || h.compare(0, prefix.size(), prefix) != 0)
            throw Error("unauthenticated", "missing bearer token");
        return lrd->authenticate(h.substr(prefix.size()));
    }

    trading::Certificate cert_by_serial(std::uint64_t serial) const
    {
        auto c = ca->find(serial);
        if (!c) throw Error("certificate-not-found", "no certificate " + std::to_string(serial));
        return *c;
    }

    template <class F>
    httplib::Server::Handler wrap(F f, int ok_status = 200)
    {
        return [this, f, ok_status](const Request& req, Response& res) {
            try {
                send_json(res, ok_status, f(req));
            } catch (const Error& e) {
                send_error(res, e.code(), e.what());
            } catch (const std::exception& e) {
                log(std::string("internal error: ") + e.what());
                send_error(res, "internal", "internal error");
            }
        };
    }

    void routes()
    {
        http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        http.Options(R"(.*)", [](const Request&, Response& res) { res.status = 204; });
        http.set_error_handler([](const Request& req, Response& res) {
            if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
            send_error(res, res.status == 404 ? "not-found" : "invalid-request",
                       res.status == 404 ? "no route for " + req.method + " " + req.path
                                         : "request rejected");
            return httplib::Server::HandlerResponse::Handled;
        });

        http.Get("/health", wrap([this](const Request&) {
            return json{{"status", "ok"},
                        {"height", chain->height()},
                        {"key_bits", ca->params().bit_length()},
                        {"bank_id", config.bank_id},
                        {"registrar_id", config.registrar_id}};
        }));

        // CA
        http.Post("/ca/certificates", wrap([this](const Request& req) {
            const json b = body_of(req);
            const auto params = b.contains("subject_params") ? codec::params_from_json(b["subject_params"])
                                                             : ca->params();
            const std::uint64_t days =
                b.contains("validity_days") ? codec::u64_field(b, "validity_days") : config.cert_validity_days;
            auto cert = ca->issue(codec::string_field(b, "subject_id"), codec::bigint_field(b, "subject_beta"),
                                  params, days, clock());
            persist_certificate(cert);
            return codec::to_json(cert);
        }, 201));
        http.Get(R"(/ca/certificates/(\d+))", wrap([this](const Request& req) {
            return codec::to_json(cert_by_serial(path_u64(req, 1)));
        }));

        // Identity
        http.Post("/auth/challenges", wrap([this](const Request& req) {
            const auto c = lrd->issue_challenge(codec::string_field(body_of(req), "subject_id"));
            return json{{"challenge_id", c.challenge_id},
                        {"nonce", to_hex(c.nonce)},
                        {"subject_id", c.subject_id},
                        {"expires_at", c.expires_at}};
        }, 201));
        http.Post("/auth/sessions", wrap([this](const Request& req) {
            const json b = body_of(req);
            const auto s = lrd->verify_challenge(codec::string_field(b, "challenge_id"),
                                                 codec::signature_from_json(codec::field(b, "signature")),
                                                 cert_by_serial(codec::u64_field(b, "cert_serial")));
            return json{{"token", s.token},
                        {"subject_id", s.subject_id},
                        {"cert_serial", s.cert_serial},
                        {"expires_at", s.expires_at}};
        }, 201));

        // Land registration department
        http.Get("/lrd/records", wrap([this](const Request& req) {
            const auto session = session_of(req);
            const std::string owner = query_str(req, "owner").value_or(session.subject_id);
            json records = json::array();
            for (const auto& r : lrd->retrieve_record(session, owner))
                records.push_back({{"block_id", r.block_id},
                                   {"dna_payload", r.payload.dna},
                                   {"key_fingerprint", to_hex(r.payload.key_fingerprint)}});
            return json{{"owner_id", owner}, {"records", records}};
        }));
        http.Post("/lrd/records", wrap([this](const Request& req) {
            const auto session = session_of(req);
            if (session.subject_id != config.registrar_id)
                throw Error("forbidden", "only the registrar may register records");
            const json b = body_of(req);
            const auto owner = cert_by_serial(codec::u64_field(b, "owner_cert_serial"));
            const std::string buyer =
                b.contains("buyer_name") ? codec::string_field(b, "buyer_name") : owner.subject_id;
            const auto id = lrd->register_record(owner, codec::land_from_json(codec::field(b, "land")),
                                                 codec::string_field(b, "seller_name"), buyer,
                                                 codec::string_field(b, "transaction_id"));
            return json{{"block_id", id}, {"owner_id", owner.subject_id}};
        }, 201));

        // Listings
        http.Get("/listings", wrap([this](const Request& req) {
            trading::ListingFilter f;
            f.dag_number = query_u64(req, "dag");
            f.khatiayan_number = query_u64(req, "khatiayan");
            f.min_price = query_str(req, "min_price");
            f.max_price = query_str(req, "max_price");
            for (const auto& p : {f.min_price, f.max_price})
                if (p && !(is_positive_decimal(*p) || *p == "0"))
                    throw Error("invalid-request", "price bounds must be decimals");
            if (auto s = query_str(req, "status")) f.status = trading::parse_listing_status(*s);
            json out = json::array();
            for (const auto& l : desk->search_listings(f)) out.push_back(codec::to_json(l));
            return json{{"listings", out}};
        }));
        http.Get(R"(/listings/([^/]+))", wrap([this](const Request& req) {
            return codec::to_json(desk->get_listing(req.matches[1]));
        }));
        http.Post("/listings", wrap([this](const Request& req) {
            const auto session = session_of(req);
            const json b = body_of(req);
            auto l = desk->post_listing(session, cert_by_serial(session.cert_serial),
                                        codec::land_from_json(codec::field(b, "land")),
                                        codec::price_from_json(codec::field(b, "asking_price")));
            persist_desk();
            return codec::to_json(l);
        }, 201));
        http.Post(R"(/listings/([^/]+)/withdraw)", wrap([this](const Request& req) {
            auto l = desk->withdraw_listing(session_of(req), req.matches[1]);
            persist_desk();
            return codec::to_json(l);
        }));

        // Deeds
        http.Post("/deeds", wrap([this](const Request& req) {
            const auto session = session_of(req);
            const json b = body_of(req);
            std::optional<trading::Price> price;
            if (b.contains("price") && !b["price"].is_null()) price = codec::price_from_json(b["price"]);
            auto d = desk->create_deed(codec::string_field(b, "listing_id"), session,
                                       cert_by_serial(session.cert_serial), price);
            persist_desk();
            return codec::to_json(d);
        }, 201));
        http.Get(R"(/deeds/([^/]+))", wrap([this](const Request& req) {
            return codec::to_json(desk->get_deed(req.matches[1]));
        }));
        http.Post(R"(/deeds/([^/]+)/signatures)", wrap([this](const Request& req) {
            const json b = body_of(req);
            auto d = desk->sign_deed(req.matches[1], trading::parse_role(codec::string_field(b, "role")),
                                     codec::signature_from_json(codec::field(b, "signature")),
                                     cert_by_serial(codec::u64_field(b, "cert_serial")));
            persist_desk();
            return codec::to_json(d);
        }));
        http.Post(R"(/deeds/([^/]+)/abandon)", wrap([this](const Request& req) {
            auto d = desk->abandon_deed(req.matches[1], session_of(req));
            persist_desk();
            return codec::to_json(d);
        }));
        http.Post(R"(/deeds/([^/]+)/settle)", wrap([this](const Request& req) {
            const auto session = session_of(req);
            if (session.subject_id != config.bank_id)
                throw Error("forbidden", "only the bank may settle a deed");
            const auto block_id = desk->settle_and_register(req.matches[1]);
            persist_desk();
            return json{{"block_id", block_id}, {"deed", codec::to_json(desk->get_deed(req.matches[1]))}};
        }));

        // Ledger
        http.Get(R"(/chain/blocks/(\d+))", wrap([this](const Request& req) {
            return codec::to_json(chain->get_block(path_u64(req, 1)));
        }));
        http.Get("/chain/tip", wrap([this](const Request&) { return codec::to_json(chain->tip()); }));
        http.Get("/chain/verify", wrap([this](const Request&) {
            const auto v = chain->verify();
            json out = {{"ok", !v.has_value()}, {"height", chain->height()}};
            if (v)
                out["violation"] = {{"position", v->position}, {"reason", v->reason}, {"detail", v->detail}};
            return out;
        }));
    }
};

Service::Service(ServiceConfig config, ledger::Clock clock)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(clock)))
{
}

Service::~Service() { stop(); }

int Service::bind()
{
    auto& c = impl_->config;
    if (c.port == 0) {
        const int port = impl_->http.bind_to_any_port(c.host);
        if (port <= 0) throw Error("bind-failed", "cannot bind " + c.host);
        c.port = port;
    } else if (!impl_->http.bind_to_port(c.host, c.port)) {
        throw Error("bind-failed", "cannot bind " + c.host + ":" + std::to_string(c.port));
    }
    impl_->log("listening on http://" + c.host + ":" + std::to_string(c.port) + " (data " +
               c.data_dir.string() + ", " + std::to_string(impl_->chain->height()) + " blocks)");
    return c.port;
}

void Service::listen() { impl_->http.listen_after_bind(); }

void Service::stop()
{
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

const ServiceConfig& Service::config() const { return impl_->config; }
const ledger::Ledger& Service::chain() const { return *impl_->chain; }

} // namespace landrec::service
