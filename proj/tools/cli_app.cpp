#include "cli_app.hpp"

#include "landrec/c2i.hpp"
#include "landrec/client.hpp"
#include "landrec/error.hpp"
#include "landrec/json_codec.hpp"
#include "landrec/keyfile.hpp"
#include "landrec/ledger.hpp"
#include "landrec/record_pipeline.hpp"
#include "landrec/scenario.hpp"
#include "landrec/service.hpp"

#include <CLI11.hpp>

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace landrec::cli {

namespace fs = std::filesystem;
using codec::json;

namespace {

// What a command produced: structured data for --json, lines otherwise.
struct Output {
    json data = json::object();
    std::vector<std::string> lines;
    int exit_code = kExitOk;
};

std::string default_url()
{
    const char* v = std::getenv("LANDREC_URL");
    return v && *v ? v : "http://127.0.0.1:8080";
}

const std::set<std::string>& verification_codes()
{
    static const std::set<std::string> codes = {
        "chain-corrupt", "chain-violation",     "index-corrupt", "scenario-failed",
        "certificate-invalid", "guard-digit-missing", "key-mismatch", "invalid-code",
    };
    return codes;
}

std::string read_input(const std::string& inline_text, const std::string& path)
{
    if (!path.empty()) return read_text_file(path);
    return inline_text;
}

void write_output(const std::string& path, std::string_view text)
{
    if (!path.empty()) write_text_file(path, text);
}

trading::Certificate fetch_certificate(const client::ApiClient& api, std::uint64_t serial)
{
    return codec::certificate_from_json(api.get("/ca/certificates/" + std::to_string(serial)));
}

trading::Certificate load_certificate(const std::string& url, std::optional<std::uint64_t> serial,
                                      const std::string& file)
{
    if (!file.empty()) return codec::certificate_from_json(codec::parse(read_text_file(file)));
    if (!serial) throw Error("usage", "give --serial or --file");
    return fetch_certificate(client::ApiClient(url), *serial);
}

json violation_json(const ledger::ChainViolation& v)
{
    return {{"position", v.position}, {"reason", v.reason}, {"detail", v.detail}};
}

std::string violation_text(const ledger::ChainViolation& v)
{
    std::string s = "violation at block " + std::to_string(v.position) + ": " + v.reason;
    if (!v.detail.empty()) s += " (" + v.detail + ")";
    return s;
}

void describe_block(Output& o, const ledger::Block& b)
{
    o.data = codec::to_json(b);
    o.lines.push_back("block " + std::to_string(b.header.block_id) + " hash " + to_hex(ledger::block_hash(b)));
    o.lines.push_back("  prev " + to_hex(b.header.prev_hash));
    o.lines.push_back("  merkle " + to_hex(b.header.merkle_root) + " timestamp " +
                      std::to_string(b.header.timestamp) + " nonce " + std::to_string(b.header.nonce));
    for (const auto& tx : b.transactions) {
        o.lines.push_back("  tx " + to_hex(tx.tx_id) + " " + ledger::to_string(tx.kind) +
                          (tx.owner_id.empty() ? "" : " owner " + tx.owner_id));
        if (!tx.payload.dna.empty())
            o.lines.push_back("    dna " + std::to_string(tx.payload.dna.size()) + " bases " +
                              tx.payload.dna.substr(0, 48) + "...");
    }
}

// serve: block SIGINT/SIGTERM and wait for them on a helper thread, so the
// HTTP threads inherit the mask and shutdown goes through Service::stop.
int serve(service::ServiceConfig config, std::ostream& out, std::ostream& err)
{
    std::unique_ptr<service::Service> svc;
    try {
        svc = std::make_unique<service::Service>(config);
    } catch (const Error& e) {
        err << "refusing to start: " << e.code() << ": " << e.what() << '\n';
        return verification_codes().contains(e.code()) ? kExitVerification : kExitApiError;
    }
    const int port = svc->bind();
    out << "listening on http://" << config.host << ":" << port << std::endl;

    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        svc->stop();
    });
    svc->listen();
    pthread_kill(waiter.native_handle(), SIGTERM); // no-op if the waiter already fired
    waiter.join();
    pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Land record ledger tool", "landrec"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "Structured output");

    std::function<Output()> action;
    auto bind = [&](CLI::App* cmd, std::function<Output()> f) { cmd->callback([&action, f] { action = f; }); };

    // keygen
    auto* keygen = app.add_subcommand("keygen", "Generate an ElGamal key pair into a key file");
    unsigned bits = crypto::kDefaultKeyBits;
    std::string key_out, subject, role = "party", params_from, keygen_url;
    keygen->add_option("--bits", bits, "Modulus size for fresh domain parameters")->capture_default_str();
    keygen->add_option("--out", key_out, "Key file to write")->required();
    keygen->add_option("--subject", subject, "Identity recorded in the key file");
    keygen->add_option("--role", role, "party, bank, registrar or ca")->capture_default_str();
    keygen->add_option("--params-from", params_from, "Reuse the group of an existing key file");
    keygen->add_option("--url", keygen_url, "Reuse the group of the service CA");
    bind(keygen, [&] {
        KeyFile kf;
        kf.role = role;
        kf.subject_id = subject;
        if (!params_from.empty())
            kf.params = read_key_file(params_from).params;
        else if (!keygen_url.empty())
            kf.params = fetch_certificate(client::ApiClient(keygen_url), 0).subject_params;
        else
            kf.params = crypto::generate_domain_params(bits);
        kf.key = crypto::keygen(kf.params);
        write_key_file(key_out, kf);
        Output o;
        const auto fp = to_hex(crypto::key_fingerprint(kf.params, kf.key.public_beta));
        o.data = {{"file", key_out}, {"bits", kf.params.bit_length()}, {"key_fingerprint", fp}};
        o.lines.push_back("wrote " + key_out + " (" + std::to_string(kf.params.bit_length()) +
                          "-bit group, fingerprint " + fp + ")");
        return o;
    });

    // cert
    auto* cert = app.add_subcommand("cert", "Certificates");
    cert->require_subcommand(1);
    std::string url = default_url(), cert_key, cert_out, cert_file;
    std::uint64_t validity_days = 365;
    std::optional<std::uint64_t> serial;
    auto* cert_issue = cert->add_subcommand("issue", "Request a certificate for a key file");
    cert_issue->add_option("--url", url)->capture_default_str();
    cert_issue->add_option("--key", cert_key, "Key file; its cert_serial is updated")->required();
    cert_issue->add_option("--subject", subject, "Overrides the key file subject");
    cert_issue->add_option("--validity-days", validity_days)->capture_default_str();
    cert_issue->add_option("--out", cert_out, "Also write the certificate JSON here");
    bind(cert_issue, [&] {
        KeyFile kf = read_key_file(cert_key);
        if (!subject.empty()) kf.subject_id = subject;
        if (kf.subject_id.empty()) throw Error("usage", "key file has no subject; pass --subject");
        client::ApiClient api(url);
        const json c = api.post("/ca/certificates", {{"subject_id", kf.subject_id},
                                                     {"subject_beta", crypto::to_decimal(kf.key.public_beta)},
                                                     {"subject_params", codec::to_json(kf.params)},
                                                     {"validity_days", validity_days}});
        kf.cert_serial = codec::u64_field(c, "serial");
        write_key_file(cert_key, kf);
        write_output(cert_out, c.dump(2));
        Output o;
        o.data = c;
        o.lines.push_back("issued certificate #" + std::to_string(*kf.cert_serial) + " for " + kf.subject_id);
        return o;
    });
    auto* cert_show = cert->add_subcommand("show", "Print a certificate");
    cert_show->add_option("--url", url)->capture_default_str();
    cert_show->add_option("--serial", serial);
    cert_show->add_option("--file", cert_file);
    bind(cert_show, [&] {
        const auto c = load_certificate(url, serial, cert_file);
        Output o;
        o.data = codec::to_json(c);
        o.lines = {"serial " + std::to_string(c.serial), "subject " + c.subject_id, "issuer " + c.issuer_id,
                   "valid " + std::to_string(c.issued_at) + " .. " + std::to_string(c.expires_at),
                   "group " + std::to_string(c.subject_params.bit_length()) + " bits",
                   "key fingerprint " + o.data["key_fingerprint"].get<std::string>()};
        return o;
    });
    auto* cert_verify = cert->add_subcommand("verify", "Check a certificate against the service CA");
    cert_verify->add_option("--url", url)->capture_default_str();
    cert_verify->add_option("--serial", serial);
    cert_verify->add_option("--file", cert_file);
    bind(cert_verify, [&] {
        client::ApiClient api(url);
        const auto ca = fetch_certificate(api, 0);
        const auto c = load_certificate(url, serial, cert_file);
        const auto now = ledger::unix_now();
        const bool ca_ok = trading::ca_verify_certificate(ca.subject_params, ca.subject_beta, ca, now);
        const bool ok = ca_ok && c.issuer_id == ca.subject_id &&
                        trading::ca_verify_certificate(ca.subject_params, ca.subject_beta, c, now);
        Output o;
        o.data = {{"serial", c.serial}, {"subject_id", c.subject_id}, {"valid", ok}};
        o.lines.push_back("certificate #" + std::to_string(c.serial) + " for " + c.subject_id + ": " +
                          (ok ? "valid" : "INVALID"));
        if (!ok) o.exit_code = kExitVerification;
        return o;
    });

    // record
    auto* record = app.add_subcommand("record", "C2I codec and the full record pipeline");
    record->require_subcommand(1);
    std::string text, in_path, out_path, record_key, record_cert;
    std::size_t chunk = pipeline::kDefaultChunkDigits;
    auto* encode = record->add_subcommand("encode", "Text to C2I digits");
    encode->add_option("--text", text);
    encode->add_option("--in", in_path);
    bind(encode, [&] {
        const std::string digits = c2i::encode_text(read_input(text, in_path));
        Output o;
        o.data = {{"digits", digits}};
        o.lines.push_back(digits);
        return o;
    });
    auto* decode = record->add_subcommand("decode", "C2I digits to text");
    decode->add_option("--digits", text);
    decode->add_option("--in", in_path);
    bind(decode, [&] {
        std::string digits = read_input(text, in_path);
        while (!digits.empty() && (digits.back() == '\n' || digits.back() == '\r')) digits.pop_back();
        const std::string plain = c2i::decode_digits(digits);
        Output o;
        o.data = {{"text", plain}};
        o.lines.push_back(plain);
        return o;
    });
    auto* encrypt = record->add_subcommand("encrypt", "Encrypt a record file to DNA");
    encrypt->add_option("--in", in_path)->required();
    encrypt->add_option("--out", out_path)->required();
    encrypt->add_option("--key", record_key, "Recipient key file");
    encrypt->add_option("--cert", record_cert, "Recipient certificate JSON");
    encrypt->add_option("--chunk-digits", chunk)->capture_default_str();
    bind(encrypt, [&] {
        crypto::DomainParams params;
        crypto::BigInt beta;
        if (!record_key.empty()) {
            const KeyFile kf = read_key_file(record_key);
            params = kf.params;
            beta = kf.key.public_beta;
        } else if (!record_cert.empty()) {
            const auto c = codec::certificate_from_json(codec::parse(read_text_file(record_cert)));
            params = c.subject_params;
            beta = c.subject_beta;
        } else {
            throw Error("usage", "give --key or --cert");
        }
        const auto ct = pipeline::encrypt_record(params, beta, read_text_file(in_path),
                                                 std::min(chunk, pipeline::max_chunk_digits(params)));
        const json file = {{"key_fingerprint", to_hex(ct.key_fingerprint)}, {"dna_payload", ct.dna}};
        write_output(out_path, file.dump() + "\n");
        Output o;
        o.data = {{"file", out_path}, {"bases", ct.dna.size()}, {"key_fingerprint", to_hex(ct.key_fingerprint)}};
        o.lines.push_back("wrote " + std::to_string(ct.dna.size()) + " bases to " + out_path);
        return o;
    });
    auto* decrypt = record->add_subcommand("decrypt", "Decrypt a DNA record with a private key file");
    decrypt->add_option("--in", in_path)->required();
    decrypt->add_option("--out", out_path, "Defaults to standard output");
    decrypt->add_option("--key", record_key)->required();
    bind(decrypt, [&] {
        const KeyFile kf = read_key_file(record_key);
        const json file = codec::parse(read_text_file(in_path));
        pipeline::DnaCiphertext ct{codec::string_field(file, "dna_payload"), {}};
        try {
            ct.key_fingerprint = hash_from_hex(codec::string_field(file, "key_fingerprint"));
        } catch (const Error&) {
            throw Error("invalid-request", "key_fingerprint must be 64 hex characters");
        }
        if (ct.key_fingerprint != crypto::key_fingerprint(kf.params, kf.key.public_beta))
            throw Error("key-mismatch", "record was sealed for a different key than " + record_key);
        const std::string plain = pipeline::decrypt_record(kf.params, kf.key.private_a, ct);
        Output o;
        if (!out_path.empty()) {
            write_output(out_path, plain);
            o.lines.push_back("wrote " + std::to_string(plain.size()) + " characters to " + out_path);
        } else {
            o.lines.push_back(plain);
        }
        o.data = {{"text", plain}};
        return o;
    });

    // chain
    auto* chain = app.add_subcommand("chain", "Inspect a chain directory or a running service");
    chain->require_subcommand(1);
    std::string data_dir, chain_url;
    std::uint64_t block_id = 0;
    auto add_source = [&](CLI::App* cmd) {
        cmd->add_option("--data-dir", data_dir, "Directory holding chain.dat");
        cmd->add_option("--url", chain_url, "Service to query instead");
    };
    auto need_source = [&] {
        if (data_dir.empty() == chain_url.empty()) throw Error("usage", "give exactly one of --data-dir, --url");
    };
    // Text summary of a block fetched as JSON from the service.
    auto describe_remote = [](Output& o, const json& j) {
        o.data = j;
        o.lines.push_back("block " + std::to_string(j.value("block_id", 0ull)) + " hash " + j.value("hash", ""));
        o.lines.push_back("  prev " + j.value("prev_hash", ""));
        o.lines.push_back("  merkle " + j.value("merkle_root", "") + " timestamp " +
                          std::to_string(j.value("timestamp", 0ull)));
        for (const auto& tx : j.value("transactions", json::array()))
            o.lines.push_back("  tx " + tx.value("tx_id", "") + " " + tx.value("kind", "") + " owner " +
                              tx.value("owner_id", ""));
    };

    auto* chain_init = chain->add_subcommand("init", "Create a chain with its genesis block");
    chain_init->add_option("--data-dir", data_dir)->required();
    bind(chain_init, [&] {
        fs::create_directories(data_dir);
        ledger::Ledger l(std::make_unique<ledger::FileBlockStore>(data_dir));
        Output o;
        const auto tip = to_hex(ledger::block_hash(l.tip()));
        o.data = {{"height", l.height()}, {"tip", tip}};
        o.lines.push_back(data_dir + ": " + std::to_string(l.height()) + " block(s), tip " + tip);
        return o;
    });

    auto* chain_verify = chain->add_subcommand("verify", "Verify every block");
    add_source(chain_verify);
    bind(chain_verify, [&] {
        need_source();
        Output o;
        std::optional<ledger::ChainViolation> v;
        std::uint64_t height = 0;
        if (!chain_url.empty()) {
            const json r = client::ApiClient(chain_url).get("/chain/verify");
            height = r.value("height", 0ull);
            if (!r.value("ok", false)) {
                const json& jv = codec::field(r, "violation");
                v = ledger::ChainViolation{jv.value("position", 0ull), jv.value("reason", ""), jv.value("detail", "")};
            }
        } else {
            const std::string raw = read_text_file(fs::path(data_dir) / "chain.dat");
            const auto parsed = ledger::parse_chain(as_bytes(raw));
            height = parsed.blocks.size();
            v = parsed.violation ? parsed.violation : ledger::verify_chain(parsed.blocks);
        }
        o.data = {{"ok", !v}, {"height", height}};
        if (v) {
            o.data["violation"] = violation_json(*v);
            o.lines.push_back(violation_text(*v));
            o.exit_code = kExitVerification;
        } else {
            o.lines.push_back("ok: " + std::to_string(height) + " blocks verified");
        }
        return o;
    });

    auto* chain_show = chain->add_subcommand("show", "Print one block");
    add_source(chain_show);
    chain_show->add_option("--block", block_id)->required();
    bind(chain_show, [&] {
        need_source();
        Output o;
        if (!chain_url.empty())
            describe_remote(o, client::ApiClient(chain_url).get("/chain/blocks/" + std::to_string(block_id)));
        else
            describe_block(o, ledger::read_block_from_dir(data_dir, block_id));
        return o;
    });

    auto* chain_tip = chain->add_subcommand("tip", "Print the newest block");
    add_source(chain_tip);
    bind(chain_tip, [&] {
        need_source();
        Output o;
        if (!chain_url.empty()) {
            describe_remote(o, client::ApiClient(chain_url).get("/chain/tip"));
        } else {
            const std::string raw = read_text_file(fs::path(data_dir) / "chain.dat");
            const auto parsed = ledger::parse_chain(as_bytes(raw));
            if (parsed.blocks.empty()) throw Error("not-found", "chain is empty");
            describe_block(o, parsed.blocks.back());
        }
        return o;
    });

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    service::ServiceConfig svc_config;
    try {
        svc_config = service::config_from_env();
    } catch (const Error& e) {
        err << "error: " << e.code() << ": " << e.what() << '\n';
        return kExitUsage;
    }
    serve_cmd->add_option("--host", svc_config.host)->capture_default_str();
    serve_cmd->add_option("--port", svc_config.port, "0 picks a free port")->capture_default_str();
    serve_cmd->add_option("--data-dir", svc_config.data_dir)->capture_default_str();
    serve_cmd->add_option("--key-bits", svc_config.key_bits, "Group size when bootstrapping")->capture_default_str();
    serve_cmd->add_option("--chunk-digits", svc_config.chunk_digits)->capture_default_str();
    serve_cmd->add_flag("--quiet", svc_config.quiet);
    bool serving = false;
    serve_cmd->callback([&] { serving = true; });

    // scenario
    auto* scenario_cmd = app.add_subcommand("scenario", "Scripted workflows");
    scenario_cmd->require_subcommand(1);
    auto* full_trade = scenario_cmd->add_subcommand("full-trade", "Certificates to ownership transfer");
    scenario::ScenarioOptions sopt;
    sopt.url = url;
    std::string scenario_dir;
    full_trade->add_option("--url", sopt.url)->capture_default_str();
    full_trade->add_option("--data-dir", scenario_dir, "Service data dir holding bank.key and registrar.key");
    full_trade->add_option("--bank-key", sopt.bank_key);
    full_trade->add_option("--registrar-key", sopt.registrar_key);
    bind(full_trade, [&] {
        if (scenario_dir.empty()) {
            const char* env = std::getenv("LANDREC_DATA_DIR");
            scenario_dir = env && *env ? env : "landrec-data";
        }
        if (sopt.bank_key.empty()) sopt.bank_key = fs::path(scenario_dir) / "bank.key";
        if (sopt.registrar_key.empty()) sopt.registrar_key = fs::path(scenario_dir) / "registrar.key";
        if (!as_json) sopt.log = &out;
        const auto r = scenario::run_full_trade(sopt);
        Output o;
        o.data = {{"steps", r.steps},
                  {"register_block", r.register_block},
                  {"transfer_block", r.transfer_block},
                  {"deed_id", r.deed_id},
                  {"deed_state", r.final_state},
                  {"land", codec::to_json(r.land)},
                  {"new_owner", r.final_owner},
                  {"seller_retrieval", r.seller_retrieval},
                  {"chain_ok", r.chain_ok},
                  {"seconds", r.seconds}};
        o.lines.push_back("new owner: " + r.final_owner);
        return o;
    });

    // bench
    auto* bench = app.add_subcommand("bench", "Measurements");
    bench->require_subcommand(1);
    auto* bench_c2i = bench->add_subcommand("c2i", "C2I against ASCII-decimal digit counts");
    std::size_t size = 1024;
    std::uint64_t seed = 1;
    bench_c2i->add_option("--size", size, "Characters of random printable text")->capture_default_str();
    bench_c2i->add_option("--seed", seed)->capture_default_str();
    bench_c2i->add_option("--text", text, "Measure this text instead");
    bind(bench_c2i, [&] {
        std::string sample = text;
        if (sample.empty()) {
            std::mt19937_64 gen(seed);
            std::uniform_int_distribution<std::size_t> pick(0, c2i::kAlphabet.size() - 1);
            sample.resize(size);
            for (auto& c : sample) c = c2i::kAlphabet[pick(gen)];
        }
        const auto r = c2i::measure_overhead(sample);
        char pct[32];
        std::snprintf(pct, sizeof pct, "%.2f", r.reduction_percent());
        Output o;
        o.data = {{"characters", r.characters},
                  {"c2i_digits", r.c2i_digits},
                  {"ascii_digits", r.ascii_digits},
                  {"reduction_percent", r.reduction_percent()}};
        o.lines = {"characters " + std::to_string(r.characters), "c2i digits " + std::to_string(r.c2i_digits),
                   "ascii decimal digits " + std::to_string(r.ascii_digits),
                   std::string("reduction ") + pct + "%"};
        return o;
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (serving) return serve(svc_config, out, err);
        Output o = action();
        if (as_json)
            out << o.data.dump(2) << '\n';
        else
            for (const auto& line : o.lines) out << line << '\n';
        return o.exit_code;
    } catch (const Error& e) {
        if (as_json)
            out << json{{"error", {{"code", e.code()}, {"message", e.what()}}}}.dump(2) << '\n';
        err << "error: " << e.code() << ": " << e.what() << '\n';
        if (e.code() == "usage") return kExitUsage;
        return verification_codes().contains(e.code()) ? kExitVerification : kExitApiError;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return kExitApiError;
    }
}

} // namespace landrec::cli
