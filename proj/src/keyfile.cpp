#include "landrec/keyfile.hpp"

#include "landrec/error.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <map>
#include <sstream>

namespace landrec {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

std::string format_key_file(const KeyFile& kf)
{
    std::ostringstream out;
    out << "# landrec private key; keep this file secret\n";
    out << "role = " << kf.role << '\n';
    out << "subject = " << kf.subject_id << '\n';
    out << "p = " << crypto::to_decimal(kf.params.p) << '\n';
    out << "alpha = " << crypto::to_decimal(kf.params.alpha) << '\n';
    out << "a = " << crypto::to_decimal(kf.key.private_a) << '\n';
    out << "beta = " << crypto::to_decimal(kf.key.public_beta) << '\n';
    if (kf.cert_serial) out << "cert_serial = " << *kf.cert_serial << '\n';
    return out.str();
}

KeyFile parse_key_file(std::string_view text)
{
    std::map<std::string, std::string> kv;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error("invalid-key-file", "line " + std::to_string(lineno) + ": expected name = value");
        std::string name = trim(std::string_view(t).substr(0, eq));
        if (kv.contains(name)) throw Error("invalid-key-file", "duplicate field " + name);
        kv[name] = trim(std::string_view(t).substr(eq + 1));
    }
    auto take = [&](const char* name) {
        auto it = kv.find(name);
        if (it == kv.end()) throw Error("invalid-key-file", std::string("missing field ") + name);
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto number = [&](const char* name) {
        try {
            return crypto::parse_decimal(take(name));
        } catch (const Error& e) {
            if (e.code() == "invalid-key-file") throw;
            throw Error("invalid-key-file", std::string(name) + " is not a decimal integer");
        }
    };

    KeyFile kf;
    kf.role = take("role");
    kf.subject_id = take("subject");
    kf.params.p = number("p");
    kf.params.alpha = number("alpha");
    kf.key.private_a = number("a");
    kf.key.public_beta = number("beta");
    if (kv.contains("cert_serial")) {
        const auto v = number("cert_serial");
        if (!v.fits_ulong_p()) throw Error("invalid-key-file", "cert_serial out of range");
        kf.cert_serial = v.get_ui();
    }
    if (!kv.empty()) throw Error("invalid-key-file", "unknown field " + kv.begin()->first);
    if (kf.params.p < 5 || kf.key.private_a < 1 || kf.key.private_a >= kf.params.p - 1 ||
        crypto::mod_pow(kf.params.alpha, kf.key.private_a, kf.params.p) != kf.key.public_beta)
        throw Error("invalid-key-file", "public key does not match the private exponent");
    return kf;
}

std::string read_text_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io-error", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text, fs::perms perms)
{
    const fs::path tmp = path.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd < 0) throw Error("io-error", "cannot write " + tmp.string());
    std::size_t done = 0;
    while (done < text.size()) {
        const auto n = ::write(fd, text.data() + done, text.size() - done);
        if (n <= 0) {
            ::close(fd);
            throw Error("io-error", "short write to " + tmp.string());
        }
        done += static_cast<std::size_t>(n);
    }
    const bool synced = ::fsync(fd) == 0;
    ::close(fd);
    if (!synced) throw Error("io-error", "fsync failed for " + tmp.string());
    std::error_code ec;
    fs::permissions(tmp, perms, ec);
    fs::rename(tmp, path, ec);
    if (ec) throw Error("io-error", "cannot replace " + path.string() + ": " + ec.message());
}

void write_key_file(const fs::path& path, const KeyFile& kf)
{
    write_text_file(path, format_key_file(kf), fs::perms::owner_read | fs::perms::owner_write);
}

KeyFile read_key_file(const fs::path& path) { return parse_key_file(read_text_file(path)); }

} // namespace landrec
