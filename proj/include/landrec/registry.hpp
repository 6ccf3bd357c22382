#pragma once

// Land registration department: encrypted record registration, the
// owner index over block ids, login challenges and ownership transfer.
//
// The registry never holds an owner's private key. Records are encrypted
// under the owner's certified public key and handed back as DNA text;
// a transfer re-renders the record from the signed deed instead of
// decrypting the old one.

#include "landrec/certificate.hpp"
#include "landrec/deed.hpp"
#include "landrec/land.hpp"
#include "landrec/ledger.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace landrec::registry {

using trading::Certificate;

struct RegistryConfig {
    std::size_t chunk_digits = pipeline::kDefaultChunkDigits;
    std::string bank_id = "Bn";
    std::uint64_t challenge_lifetime = 300;  // seconds
    std::uint64_t session_lifetime = 1800;   // seconds
};

struct OwnerIndexEntry {
    std::string owner_id;
    LandInfo land;
    std::vector<std::uint64_t> block_ids; // every block that granted this owner the parcel
    bool active = false;

    bool operator==(const OwnerIndexEntry&) const = default;
};

struct LoginChallenge {
    std::string challenge_id;
    Hash256 nonce{};
    std::string subject_id;
    std::uint64_t expires_at = 0;
};

struct Session {
    std::string token;
    std::string subject_id;
    std::uint64_t cert_serial = 0;
    std::uint64_t expires_at = 0;
};

struct RetrievedRecord {
    std::uint64_t block_id = 0;
    LandInfo land;
    pipeline::DnaCiphertext payload;
};

// What a client signs to answer a challenge.
Hash256 challenge_digest(const LoginChallenge& challenge);

class Registry {
public:
    // index_path may be empty for a purely in-memory index. A persisted
    // index is replayed and then checked against the ledger; Error("index-corrupt")
    // if an active entry does not resolve.
    Registry(ledger::Ledger& ledger, const trading::CertificateAuthority& ca,
             std::filesystem::path index_path, RegistryConfig config = {},
             ledger::Clock clock = ledger::unix_now);

    Registry(const Registry&) = delete;
    Registry& operator=(const Registry&) = delete;

    // Errors: invalid-certificate, invalid-land, duplicate-active-record.
    std::uint64_t register_record(const Certificate& owner_cert, const LandInfo& land,
                                  const std::string& seller_name, const std::string& buyer_name,
                                  const std::string& tx_label);

    LoginChallenge issue_challenge(const std::string& subject_id);
    // Errors: unknown-challenge, replayed-challenge, expired-challenge,
    // subject-mismatch, invalid-certificate, bad-signature.
    Session verify_challenge(const std::string& challenge_id, const crypto::Signature& sig,
                             const Certificate& cert);
    // Errors: invalid-session.
    Session authenticate(const std::string& token) const;

    // Active records held by owner_id. Errors: unauthorized, no-active-record.
    std::vector<RetrievedRecord> retrieve_record(const Session& session, const std::string& owner_id) const;

    // Errors: deed-not-finalized, signature-invalid, seller-not-owner.
    std::uint64_t transfer_ownership(const trading::Deed& deed);

    bool is_active_owner(const std::string& owner_id, const LandKey& land) const;
    std::optional<OwnerIndexEntry> active_entry(const LandKey& land) const;
    std::vector<OwnerIndexEntry> index_snapshot() const;

    // Every active entry resolves to a block whose transaction names the
    // same owner; at most one active entry per parcel. Empty when coherent.
    std::string check_coherence() const;

    const RegistryConfig& config() const { return config_; }

private:
    void activate(const std::string& owner_id, const LandInfo& land, std::uint64_t block_id);
    void deactivate(const std::string& owner_id, const LandKey& land);
    void journal(const std::string& event, const std::string& owner_id, const LandInfo& land,
                 std::uint64_t block_id);
    void replay_journal();
    std::size_t chunk_size_for(const crypto::DomainParams& params) const;
    void verify_deed_signature(const trading::Deed& deed, trading::DeedRole role,
                               const std::string& expected_subject, std::uint64_t now) const;

    ledger::Ledger& ledger_;
    const trading::CertificateAuthority& ca_;
    std::filesystem::path index_path_;
    RegistryConfig config_;
    ledger::Clock clock_;

    mutable std::mutex index_mu_;
    std::vector<OwnerIndexEntry> entries_;

    mutable std::mutex auth_mu_;
    std::map<std::string, LoginChallenge> challenges_;
    std::map<std::string, bool> consumed_;
    std::map<std::string, Session> sessions_;
};

} // namespace landrec::registry
