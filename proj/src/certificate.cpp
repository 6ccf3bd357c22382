#include "landrec/certificate.hpp"

#include "landrec/error.hpp"

namespace landrec::trading {

using crypto::BigInt;

Bytes certificate_body(const Certificate& cert)
{
    ByteWriter w;
    w.u8(0x01);
    w.u64(cert.serial);
    w.str16(cert.subject_id);
    w.raw(crypto::serialize_public_key(cert.subject_params, cert.subject_beta));
    w.str16(cert.issuer_id);
    w.u64(cert.issued_at);
    w.u64(cert.expires_at);
    return std::move(w).take();
}

Hash256 certificate_digest(const Certificate& cert) { return sha256(certificate_body(cert)); }

Certificate ca_issue_certificate(const CaKey& ca, std::uint64_t serial, std::string subject_id,
                                 const BigInt& subject_beta, const crypto::DomainParams& subject_params,
                                 std::uint64_t validity_days, std::uint64_t now)
{
    if (subject_id.empty()) throw Error("invalid-subject", "subject id is empty");
    if (subject_beta < 2 || subject_beta > subject_params.p - 2)
        throw Error("invalid-public-key", "public key outside [2, p - 2]");
    if (validity_days == 0)
        throw Error("invalid-validity", "certificate must expire after it is issued");

    Certificate cert;
    cert.serial = serial;
    cert.subject_id = std::move(subject_id);
    cert.subject_params = subject_params;
    cert.subject_beta = subject_beta;
    cert.issuer_id = ca.issuer_id;
    cert.issued_at = now;
    cert.expires_at = now + validity_days * kSecondsPerDay;
    cert.ca_signature = crypto::sign(ca.params, ca.key.private_a, certificate_digest(cert));
    return cert;
}

bool ca_verify_certificate(const crypto::DomainParams& ca_params, const BigInt& ca_beta,
                           const Certificate& cert, std::uint64_t now)
{
    if (cert.expires_at <= cert.issued_at) return false;
    if (now < cert.issued_at || now >= cert.expires_at) return false;
    try {
        return crypto::verify(ca_params, ca_beta, certificate_digest(cert), cert.ca_signature);
    } catch (const Error&) {
        // Body not serializable (e.g. beta wider than p).
        return false;
    }
}

CertificateAuthority::CertificateAuthority(CaKey key, std::uint64_t now, std::uint64_t self_validity_days)
    : key_(std::move(key))
{
    self_ = ca_issue_certificate(key_, 0, key_.issuer_id, key_.key.public_beta, key_.params,
                                 self_validity_days, now);
}

Certificate CertificateAuthority::issue(const std::string& subject_id, const BigInt& subject_beta,
                                        const crypto::DomainParams& subject_params,
                                        std::uint64_t validity_days, std::uint64_t now)
{
    if (!(subject_params == key_.params)) {
        try {
            crypto::validate_params(subject_params);
        } catch (const Error& e) {
            throw Error("invalid-public-key", e.what());
        }
    }
    if (subject_id == key_.issuer_id) throw Error("subject-taken", subject_id + " is the CA itself");
    std::lock_guard lock(mu_);
    for (const auto& [serial, held] : issued_) {
        if (held.subject_id == subject_id &&
            (held.subject_beta != subject_beta || !(held.subject_params == subject_params)))
            throw Error("subject-taken", subject_id + " is bound to another key");
    }
    Certificate cert = ca_issue_certificate(key_, next_serial_, subject_id, subject_beta,
                                            subject_params, validity_days, now);
    issued_.emplace(cert.serial, cert);
    ++next_serial_;
    return cert;
}

void CertificateAuthority::restore(const Certificate& cert)
{
    if (cert.serial == 0 || cert.issuer_id != key_.issuer_id ||
        !crypto::verify(key_.params, key_.key.public_beta, certificate_digest(cert), cert.ca_signature))
        throw Error("invalid-certificate", "certificate was not issued by this CA");
    std::lock_guard lock(mu_);
    issued_[cert.serial] = cert;
    next_serial_ = std::max(next_serial_, cert.serial + 1);
}

std::optional<Certificate> CertificateAuthority::find(std::uint64_t serial) const
{
    if (serial == 0) return self_;
    std::lock_guard lock(mu_);
    auto it = issued_.find(serial);
    if (it == issued_.end()) return std::nullopt;
    return it->second;
}

bool CertificateAuthority::verify(const Certificate& cert, std::uint64_t now) const
{
    return cert.issuer_id == key_.issuer_id &&
           ca_verify_certificate(key_.params, key_.key.public_beta, cert, now);
}

bool CertificateAuthority::is_issued(const Certificate& cert, std::uint64_t now) const
{
    if (!verify(cert, now)) return false;
    auto known = find(cert.serial);
    return known && *known == cert;
}

} // namespace landrec::trading
