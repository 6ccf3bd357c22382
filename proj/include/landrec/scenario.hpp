#pragma once

// Scripted full trade against a running service: certificates, initial
// registration, listing, deed, three signatures, settlement, retrieval.
// All private keys stay on this side of the wire.

#include "landrec/client.hpp"
#include "landrec/land.hpp"
#include "landrec/trading.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace landrec::scenario {

struct ScenarioOptions {
    std::string url = "http://127.0.0.1:8080";
    std::filesystem::path bank_key;      // bootstrap key files from the service data dir
    std::filesystem::path registrar_key;
    std::string seller = "Mr. X";
    std::string buyer = "Mr. Y";
    std::string prior_seller = "Mr. Z";
    std::string prior_transaction = "BNX Y2345";
    LandInfo land{8000, 450, "2000", "Shotangsho"};
    trading::Price price{"5000000", "BDT"};
    std::ostream* log = nullptr; // one line per step when set
    client::Observer observer;   // every request and response of the run
};

struct ScenarioReport {
    std::vector<std::string> steps;
    std::uint64_t register_block = 0;
    std::uint64_t transfer_block = 0;
    LandInfo land;                  // parcel actually traded
    std::string deed_id;
    std::string final_state;        // deed state after settlement
    std::string seller_plaintext;   // seller's record before the trade, decrypted locally
    std::string buyer_plaintext;    // buyer's record after the trade, decrypted locally
    std::string final_owner;        // holder of the parcel per the buyer's retrieval
    std::string seller_retrieval;   // error code the seller gets afterwards
    bool chain_ok = false;
    double seconds = 0;
};

// Throws Error with the server's code on any unexpected failure, or
// Error("scenario-failed") when a check does not hold.
ScenarioReport run_full_trade(const ScenarioOptions& options);

} // namespace landrec::scenario
