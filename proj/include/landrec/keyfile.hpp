#pragma once

// Private key files: "name = value" lines, '#' comments, integers in decimal.
//
//   role = party
//   subject = Mr. X
//   p = ...
//   alpha = ...
//   a = ...
//   beta = ...
//   cert_serial = 3        (optional)

#include "landrec/crypto.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace landrec {

struct KeyFile {
    std::string role = "party"; // party, ca, bank, registrar
    std::string subject_id;
    crypto::DomainParams params;
    crypto::KeyPair key;
    std::optional<std::uint64_t> cert_serial;

    bool operator==(const KeyFile&) const = default;
};

std::string format_key_file(const KeyFile& kf);
// Throws Error("invalid-key-file") on unknown or missing fields, or when
// beta != alpha^a mod p.
KeyFile parse_key_file(std::string_view text);

// Written with owner-only permissions, via a temporary file and rename.
void write_key_file(const std::filesystem::path& path, const KeyFile& kf);
// Throws Error("io-error") or Error("invalid-key-file").
KeyFile read_key_file(const std::filesystem::path& path);

// Reads a whole file; Error("io-error") if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
// Atomic replace: write a sibling temporary, fsync, rename.
void write_text_file(const std::filesystem::path& path, std::string_view text,
                     std::filesystem::perms perms = std::filesystem::perms::owner_read |
                                                    std::filesystem::perms::owner_write |
                                                    std::filesystem::perms::group_read |
                                                    std::filesystem::perms::others_read);

} // namespace landrec
