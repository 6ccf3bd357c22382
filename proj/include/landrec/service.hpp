#pragma once

// HTTP facade over the CA, registry, trading desk and ledger. One process
// hosts every authority; each keeps its own key.
//
// Data directory layout:
//   chain.dat, chain.idx   block records and their offset index
//   index.jsonl            owner index journal
//   certs.jsonl            every issued certificate
//   trading.json           listings and deeds
//   ca.key                 CA private key and the shared domain parameters
//   bank.key, registrar.key  operator identities, bootstrapped on first start

#include "landrec/ledger.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

namespace landrec::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080; // 0 picks a free port
    std::filesystem::path data_dir = "landrec-data";
    unsigned key_bits = 1024;
    std::size_t chunk_digits = 100;
    std::string ca_id = "CA";
    std::string bank_id = "Bn";
    std::string registrar_id = "LRD";
    std::uint64_t cert_validity_days = 365;
    bool quiet = false;
};

// Defaults overridden by LANDREC_HOST, LANDREC_PORT, LANDREC_DATA_DIR,
// LANDREC_KEY_BITS and LANDREC_CHUNK_DIGITS.
ServiceConfig config_from_env();

// Fixed code -> HTTP status table. Unknown codes map to 500.
int http_status_for(std::string_view code);

class Service {
public:
    // Loads or bootstraps the data directory. Throws Error("chain-corrupt")
    // (message names the first bad block) or Error("index-corrupt") and
    // serves nothing in that case.
    explicit Service(ServiceConfig config, ledger::Clock clock = ledger::unix_now);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Returns the bound port. Throws Error("bind-failed").
    int bind();
    // Blocks until stop().
    void listen();
    void stop();

    const ServiceConfig& config() const;
    const ledger::Ledger& chain() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace landrec::service
