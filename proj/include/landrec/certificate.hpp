#pragma once

// Toy PKI: the certification authority binds identity strings to ElGamal
// public keys with its own ElGamal signature.

#include "landrec/bytes.hpp"
#include "landrec/crypto.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace landrec::trading {

struct Certificate {
    std::uint64_t serial = 0;
    std::string subject_id;
    crypto::DomainParams subject_params;
    crypto::BigInt subject_beta;
    std::string issuer_id;
    std::uint64_t issued_at = 0;
    std::uint64_t expires_at = 0;
    crypto::Signature ca_signature;

    bool operator==(const Certificate&) const = default;
};

// 0x01 | serial u64 | subject str16 | public key | issuer str16 | issued_at u64 | expires_at u64
Bytes certificate_body(const Certificate& cert);
Hash256 certificate_digest(const Certificate& cert);

struct CaKey {
    std::string issuer_id;
    crypto::DomainParams params;
    crypto::KeyPair key;
};

inline constexpr std::uint64_t kSecondsPerDay = 86400;

// Throws Error("invalid-public-key") unless 2 <= beta <= p - 2, and
// Error("invalid-validity") for validity_days == 0.
Certificate ca_issue_certificate(const CaKey& ca, std::uint64_t serial, std::string subject_id,
                                 const crypto::BigInt& subject_beta,
                                 const crypto::DomainParams& subject_params,
                                 std::uint64_t validity_days, std::uint64_t now);

// Signature valid and issued_at <= now < expires_at.
bool ca_verify_certificate(const crypto::DomainParams& ca_params, const crypto::BigInt& ca_beta,
                           const Certificate& cert, std::uint64_t now);

// Issues serials, remembers every certificate and answers lookups.
// Serial 0 is the CA's self-signed certificate, which publishes the
// domain parameters clients generate their keys under.
class CertificateAuthority {
public:
    explicit CertificateAuthority(CaKey key, std::uint64_t now, std::uint64_t self_validity_days = 3650);

    // Validates subject_params (safe prime, generator) unless they equal the
    // CA's own parameters. A subject stays bound to the first key certified
    // for it; Error("subject-taken") for a different key.
    Certificate issue(const std::string& subject_id, const crypto::BigInt& subject_beta,
                      const crypto::DomainParams& subject_params, std::uint64_t validity_days,
                      std::uint64_t now);

    // Adds a previously issued certificate (reload from storage). Throws
    // Error("invalid-certificate") if it does not verify under this CA.
    void restore(const Certificate& cert);

    std::optional<Certificate> find(std::uint64_t serial) const;
    bool verify(const Certificate& cert, std::uint64_t now) const;
    // verify() plus: the certificate is one this CA actually issued.
    bool is_issued(const Certificate& cert, std::uint64_t now) const;

    const Certificate& self_certificate() const { return self_; }
    const crypto::DomainParams& params() const { return key_.params; }
    const crypto::BigInt& public_beta() const { return key_.key.public_beta; }
    const std::string& issuer_id() const { return key_.issuer_id; }

private:
    CaKey key_;
    Certificate self_;
    mutable std::mutex mu_;
    std::uint64_t next_serial_ = 1;
    std::map<std::uint64_t, Certificate> issued_;
};

} // namespace landrec::trading
