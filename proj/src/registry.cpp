#include "landrec/registry.hpp"

#include "landrec/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace landrec::registry {

using json = nlohmann::json;
using trading::DeedRole;

namespace {

std::string random_token(std::size_t bytes)
{
    Bytes buf(bytes);
    crypto::system_random().fill(buf);
    return to_hex(buf);
}

} // namespace

Hash256 challenge_digest(const LoginChallenge& challenge) { return sha256(challenge.nonce); }

Registry::Registry(ledger::Ledger& ledger, const trading::CertificateAuthority& ca,
                   std::filesystem::path index_path, RegistryConfig config, ledger::Clock clock)
    : ledger_(ledger), ca_(ca), index_path_(std::move(index_path)), config_(std::move(config)),
      clock_(std::move(clock))
{
    if (config_.chunk_digits < 2 || config_.chunk_digits > pipeline::kMaxChunkDigits ||
        config_.chunk_digits % 2 != 0)
        throw Error("invalid-chunking", "chunk digits must be even and within [2, 300]");
    if (!index_path_.empty()) replay_journal();
    if (auto why = check_coherence(); !why.empty()) throw Error("index-corrupt", why);
}

std::size_t Registry::chunk_size_for(const crypto::DomainParams& params) const
{
    const std::size_t fit = pipeline::max_chunk_digits(params);
    if (fit == 0) throw Error("invalid-chunking", "modulus too small to hold a record chunk");
    return std::min(config_.chunk_digits, fit);
}

std::uint64_t Registry::register_record(const Certificate& owner_cert, const LandInfo& land,
                                        const std::string& seller_name, const std::string& buyer_name,
                                        const std::string& tx_label)
{
    const std::uint64_t now = clock_();
    if (!ca_.is_issued(owner_cert, now))
        throw Error("invalid-certificate", "owner certificate does not verify");
    validate_land(land);

    std::lock_guard lock(index_mu_);
    const LandKey key = key_of(land);
    for (const auto& e : entries_)
        if (e.active && key_of(e.land) == key)
            throw Error("duplicate-active-record", "parcel already has an active record");

    const std::string text = render_record(seller_name, buyer_name, land, tx_label);
    pipeline::DnaCiphertext ct =
        pipeline::encrypt_record(owner_cert.subject_params, owner_cert.subject_beta, text,
                                 chunk_size_for(owner_cert.subject_params));
    auto tx = ledger::make_transaction(ledger::TxKind::Register, owner_cert.subject_id, std::move(ct),
                                       kZeroHash, now);
    const std::uint64_t block_id = ledger_.append_block({std::move(tx)});
    activate(owner_cert.subject_id, land, block_id);
    return block_id;
}

LoginChallenge Registry::issue_challenge(const std::string& subject_id)
{
    if (subject_id.empty()) throw Error("invalid-subject", "subject id is empty");
    LoginChallenge c;
    c.challenge_id = random_token(16);
    crypto::system_random().fill(c.nonce);
    c.subject_id = subject_id;
    c.expires_at = clock_() + config_.challenge_lifetime;
    std::lock_guard lock(auth_mu_);
    challenges_[c.challenge_id] = c;
    return c;
}

Session Registry::verify_challenge(const std::string& challenge_id, const crypto::Signature& sig,
                                   const Certificate& cert)
{
    const std::uint64_t now = clock_();
    LoginChallenge challenge;
    {
        std::lock_guard lock(auth_mu_);
        if (consumed_.contains(challenge_id))
            throw Error("replayed-challenge", "challenge was already used");
        auto it = challenges_.find(challenge_id);
        if (it == challenges_.end()) throw Error("unknown-challenge", "no such challenge");
        challenge = it->second;
        challenges_.erase(it);
        consumed_[challenge_id] = true;
    }
    if (now >= challenge.expires_at) throw Error("expired-challenge", "challenge expired");
    if (cert.subject_id != challenge.subject_id)
        throw Error("subject-mismatch", "certificate subject does not match the challenge");
    if (!ca_.is_issued(cert, now)) throw Error("invalid-certificate", "certificate does not verify");
    if (!crypto::verify(cert.subject_params, cert.subject_beta, challenge_digest(challenge), sig))
        throw Error("bad-signature", "challenge signature does not verify");

    Session s{random_token(32), cert.subject_id, cert.serial, now + config_.session_lifetime};
    std::lock_guard lock(auth_mu_);
    sessions_[s.token] = s;
    return s;
}

Session Registry::authenticate(const std::string& token) const
{
    std::lock_guard lock(auth_mu_);
    auto it = sessions_.find(token);
    if (it == sessions_.end() || clock_() >= it->second.expires_at)
        throw Error("invalid-session", "session token is unknown or expired");
    return it->second;
}

std::vector<RetrievedRecord> Registry::retrieve_record(const Session& session,
                                                       const std::string& owner_id) const
{
    if (session.subject_id != owner_id)
        throw Error("unauthorized", "session does not belong to " + owner_id);

    std::vector<OwnerIndexEntry> held;
    {
        std::lock_guard lock(index_mu_);
        for (const auto& e : entries_)
            if (e.active && e.owner_id == owner_id) held.push_back(e);
    }
    if (held.empty()) throw Error("no-active-record", owner_id + " holds no active record");

    std::vector<RetrievedRecord> out;
    for (const auto& e : held) {
        const ledger::Block block = ledger_.get_block(e.block_ids.back());
        for (const auto& tx : block.transactions) {
            if (tx.owner_id == owner_id && tx.kind != ledger::TxKind::Genesis) {
                out.push_back({block.header.block_id, e.land, tx.payload});
                break;
            }
        }
    }
    return out;
}

void Registry::verify_deed_signature(const trading::Deed& deed, DeedRole role,
                                     const std::string& expected_subject, std::uint64_t now) const
{
    const std::string role_name = trading::to_string(role);
    auto it = deed.signatures.find(role);
    if (it == deed.signatures.end())
        throw Error("deed-not-finalized", "missing " + role_name + " signature");
    auto cert = ca_.find(it->second.cert_serial);
    if (!cert || !ca_.verify(*cert, now) || cert->subject_id != expected_subject ||
        !crypto::verify(cert->subject_params, cert->subject_beta, trading::deed_digest(deed),
                        it->second.signature))
        throw Error("signature-invalid", role_name + " signature does not verify");
}

std::uint64_t Registry::transfer_ownership(const trading::Deed& deed)
{
    if (trading::deed_state(deed) != trading::DeedState::BankSigned)
        throw Error("deed-not-finalized", "deed is not bank-signed");
    if (deed.seller_id == deed.buyer_id || deed.seller_id == config_.bank_id ||
        deed.buyer_id == config_.bank_id)
        throw Error("self-dealing", "deed parties must be three distinct identities");

    const std::uint64_t now = clock_();
    verify_deed_signature(deed, DeedRole::Seller, deed.seller_id, now);
    verify_deed_signature(deed, DeedRole::Buyer, deed.buyer_id, now);
    verify_deed_signature(deed, DeedRole::Bank, config_.bank_id, now);
    const Certificate buyer_cert = *ca_.find(deed.signatures.at(DeedRole::Buyer).cert_serial);

    std::lock_guard lock(index_mu_);
    const LandKey key = key_of(deed.land);
    auto current = std::find_if(entries_.begin(), entries_.end(), [&](const OwnerIndexEntry& e) {
        return e.active && key_of(e.land) == key;
    });
    if (current == entries_.end() || current->owner_id != deed.seller_id)
        throw Error("seller-not-owner", deed.seller_id + " does not hold this parcel");
    if (!(current->land == deed.land))
        throw Error("land-mismatch", "deed land details differ from the registered parcel");

    const std::string text =
        render_record(deed.seller_id, deed.buyer_id, deed.land, deed.transaction_id);
    pipeline::DnaCiphertext ct =
        pipeline::encrypt_record(buyer_cert.subject_params, buyer_cert.subject_beta, text,
                                 chunk_size_for(buyer_cert.subject_params));
    auto tx = ledger::make_transaction(ledger::TxKind::Transfer, deed.buyer_id, std::move(ct),
                                       trading::deed_digest(deed), now);
    const std::uint64_t block_id = ledger_.append_block({std::move(tx)});
    deactivate(deed.seller_id, key);
    activate(deed.buyer_id, deed.land, block_id);
    return block_id;
}

bool Registry::is_active_owner(const std::string& owner_id, const LandKey& land) const
{
    auto e = active_entry(land);
    return e && e->owner_id == owner_id;
}

std::optional<OwnerIndexEntry> Registry::active_entry(const LandKey& land) const
{
    std::lock_guard lock(index_mu_);
    for (const auto& e : entries_)
        if (e.active && key_of(e.land) == land) return e;
    return std::nullopt;
}

std::vector<OwnerIndexEntry> Registry::index_snapshot() const
{
    std::lock_guard lock(index_mu_);
    return entries_;
}

std::string Registry::check_coherence() const
{
    std::lock_guard lock(index_mu_);
    std::set<LandKey> active_parcels;
    for (const auto& e : entries_) {
        if (!e.active) continue;
        if (!active_parcels.insert(key_of(e.land)).second)
            return "parcel " + std::to_string(e.land.dag_number) + "/" +
                   std::to_string(e.land.khatiayan_number) + " has two active owners";
        if (e.block_ids.empty()) return "active entry for " + e.owner_id + " has no block";
        try {
            const ledger::Block b = ledger_.get_block(e.block_ids.back());
            const bool named = std::any_of(b.transactions.begin(), b.transactions.end(),
                                           [&](const auto& tx) { return tx.owner_id == e.owner_id; });
            if (!named)
                return "block " + std::to_string(b.header.block_id) + " does not name " + e.owner_id;
        } catch (const Error&) {
            return "active entry for " + e.owner_id + " references a missing block";
        }
    }
    return {};
}

// Callers hold index_mu_ (or run during construction).
void Registry::activate(const std::string& owner_id, const LandInfo& land, std::uint64_t block_id)
{
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const OwnerIndexEntry& e) {
        return e.owner_id == owner_id && key_of(e.land) == key_of(land);
    });
    if (it == entries_.end()) {
        entries_.push_back({owner_id, land, {block_id}, true});
    } else {
        it->land = land;
        it->block_ids.push_back(block_id);
        it->active = true;
    }
    journal("activate", owner_id, land, block_id);
}

void Registry::deactivate(const std::string& owner_id, const LandKey& land)
{
    for (auto& e : entries_) {
        if (e.active && e.owner_id == owner_id && key_of(e.land) == land) {
            e.active = false;
            journal("deactivate", owner_id, e.land, e.block_ids.back());
        }
    }
}

void Registry::journal(const std::string& event, const std::string& owner_id, const LandInfo& land,
                       std::uint64_t block_id)
{
    if (index_path_.empty()) return;
    json line = {{"event", event},
                 {"owner_id", owner_id},
                 {"dag_number", land.dag_number},
                 {"khatiayan_number", land.khatiayan_number},
                 {"area", land.area},
                 {"unit", land.unit},
                 {"block_id", block_id}};
    std::ofstream out(index_path_, std::ios::app);
    out << line.dump() << '\n';
    out.flush();
    if (!out) throw Error("persistence-failure", "cannot append to owner index");
}

void Registry::replay_journal()
{
    std::ifstream in(index_path_);
    if (!in) return;
    const auto saved = index_path_;
    index_path_.clear(); // replay without re-journaling
    std::string line;
    std::size_t lineno = 0;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const json j = json::parse(line);
            LandInfo land{j.at("dag_number").get<std::uint64_t>(),
                          j.at("khatiayan_number").get<std::uint64_t>(),
                          j.at("area").get<std::string>(), j.at("unit").get<std::string>()};
            const auto owner = j.at("owner_id").get<std::string>();
            const auto event = j.at("event").get<std::string>();
            if (event == "activate")
                activate(owner, land, j.at("block_id").get<std::uint64_t>());
            else if (event == "deactivate")
                deactivate(owner, key_of(land));
            else
                throw Error("index-corrupt", "unknown event " + event);
        }
    } catch (const json::exception& e) {
        index_path_ = saved;
        throw Error("index-corrupt", "owner index line " + std::to_string(lineno) + ": " + e.what());
    }
    index_path_ = saved;
}

} // namespace landrec::registry
