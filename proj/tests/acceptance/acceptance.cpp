// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include "cli_app.hpp"
#include "deed_table.hpp"
#include "server.hpp"
#include "world.hpp"

#include "landrec/c2i.hpp"
#include "landrec/client.hpp"
#include "landrec/dna.hpp"
#include "landrec/keyfile.hpp"
#include "landrec/record_pipeline.hpp"
#include "landrec/scenario.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>

using namespace landrec;
using namespace landrec::testing;
using codec::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
    bool ok = true;
    std::string note;

    void expect(bool cond, const std::string& what)
    {
        if (!cond && ok) note = what;
        ok = ok && cond;
    }
};

int failures = 0;

void report(const std::string& name, const Verdict& v, double seconds)
{
    char t[32];
    std::snprintf(t, sizeof t, "%.2fs", seconds);
    std::cout << (v.ok ? "PASS " : "FAIL ") << name << " [" << t << "]";
    if (!v.note.empty()) std::cout << " - " << v.note;
    std::cout << std::endl;
    if (!v.ok) ++failures;
}

template <class F>
void criterion(const std::string& name, F body)
{
    Verdict v;
    const auto t0 = Clock::now();
    try {
        body(v);
    } catch (const std::exception& e) {
        v.expect(false, std::string("threw: ") + e.what());
    }
    report(name, v, since(t0));
}

const std::string kRecord = "Seller: Mr. X, Buyer: Mr. Y, Land information: Dag number: 8000, Khatiayan number: "
                            "450, Area:2000 Shotangsho, Transaction ID: BNX Y2345";

// Repeated multiplication, independent of the library's exponentiation.
long naive_pow(long base, long exp, long mod)
{
    long r = 1;
    for (long i = 0; i < exp; ++i) r = r * base % mod;
    return r;
}

bool is_acgt(const std::string& s)
{
    static const std::regex re("^[ACGT]+$");
    return std::regex_match(s, re);
}

std::string state_name(Start s)
{
    switch (s) {
    case Start::Draft: return "DRAFT";
    case Start::SellerSigned:
    case Start::BuyerSigned: return "PARTIALLY_SIGNED";
    case Start::PartiesSigned: return "PARTIES_SIGNED";
    case Start::BankSigned: return "BANK_SIGNED";
    case Start::Registered: return "REGISTERED";
    case Start::Abandoned: return "ABANDONED";
    }
    return "";
}

} // namespace

int main()
{
    criterion("c2i-overhead: 2n vs 3n digits, 33.33% reduction", [](Verdict& v) {
        std::mt19937_64 gen(2024);
        std::uniform_int_distribution<std::size_t> len(1, 400), pick(0, c2i::kAlphabet.size() - 1);
        for (int i = 0; i < 100; ++i) {
            std::string s(len(gen), ' ');
            for (auto& c : s) c = c2i::kAlphabet[pick(gen)];
            const auto r = c2i::measure_overhead(s);
            char pct[16];
            std::snprintf(pct, sizeof pct, "%.2f", r.reduction_percent());
            v.expect(r.c2i_digits == 2 * s.size(), "c2i digits != 2n");
            v.expect(r.ascii_digits == 3 * s.size(), "ascii digits != 3n");
            v.expect(c2i::ascii_decimal(s).size() == 3 * s.size(), "ascii_decimal length");
            v.expect(std::string(pct) == "33.33", std::string("reduction ") + pct);
            v.expect(c2i::decode_digits(c2i::encode_text(s)) == s, "round trip");
        }
        std::ostringstream out, err;
        v.expect(cli::run({"bench", "c2i", "--size", "4096"}, out, err) == 0, "bench exit status");
        v.expect(out.str().find("reduction 33.33%") != std::string::npos, "bench output: " + out.str());
    });

    crypto::DomainParams params1024;
    double keygen_seconds = 0;
    {
        const auto t0 = Clock::now();
        params1024 = crypto::generate_domain_params(1024);
        keygen_seconds = since(t0);
        std::cout << "  (1024-bit domain parameters generated in " << keygen_seconds << "s)" << std::endl;
    }

    criterion("sample record round trip at 1024 bits, DNA alphabet", [&](Verdict& v) {
        const auto t0 = Clock::now();
        v.expect(params1024.bit_length() == 1024, "modulus size");
        const auto key = crypto::keygen(params1024);
        v.expect(c2i::encode_text(kRecord).starts_with("294148484154"), "C2I prefix of the record");
        const auto ct = pipeline::encrypt_record(params1024, key.public_beta, kRecord);
        v.expect(is_acgt(ct.dna), "payload outside {A,C,G,T}");
        const auto back = pipeline::decrypt_record(params1024, key.private_a, ct);
        v.expect(back == kRecord, "decrypted text differs");
        const double s = since(t0);
        v.expect(s < 5.0, "slower than 5 s");
    });

    criterion("dna prefix fidelity", [](Verdict& v) {
        v.expect(dna::bits_to_dna("1000011001100100") == "TGCTCTCG", "bits -> DNA");
        v.expect(dna::dna_to_bits("TGCTCTCG") == "1000011001100100", "DNA -> bits");
    });

    criterion("elgamal small field p=23 exhaustive + worked example", [](Verdict& v) {
        const crypto::DomainParams p{23, 5};
        const long a = 6;
        const long beta = naive_pow(5, a, 23);
        v.expect(beta == 8, "beta");
        v.expect(crypto::mod_pow(5, a, 23) == beta, "library beta");
        int cases = 0;
        for (long x = 2; x <= 21; ++x)
            for (long k = 2; k <= 20; ++k) {
                const auto c = crypto::encrypt(p, beta, x, crypto::BigInt(k));
                v.expect(c.y1 == naive_pow(5, k, 23), "y1 oracle");
                v.expect(c.y2 == x * naive_pow(beta, k, 23) % 23, "y2 oracle");
                v.expect(crypto::decrypt(p, a, c) == x, "decrypt");
                ++cases;
            }
        v.expect(cases == 380, "case count");
        const auto w = crypto::encrypt(p, beta, 9, crypto::BigInt(3));
        v.expect(w.y1 == 10 && w.y2 == 8, "worked ciphertext (10, 8)");
        v.expect(crypto::decrypt(p, a, w) == 9, "worked plaintext 9");
    });

    criterion("tamper evidence: every byte x every value, plus service refusal", [](Verdict& v) {
        TempDir dir;
        {
            TestServer server(test_config(dir.path));
            scenario::ScenarioOptions o;
            o.url = server.url;
            o.bank_key = dir.path / "bank.key";
            o.registrar_key = dir.path / "registrar.key";
            scenario::run_full_trade(o);
            scenario::run_full_trade(o);
            v.expect(server.svc->chain().height() == 5, "expected a 5-block chain");
        }
        const std::string original = read_text_file(dir.path / "chain.dat");
        const Bytes image(original.begin(), original.end());
        v.expect(!ledger::verify_chain_bytes(image), "pristine chain must verify");

        // Every position x every value through verify_chain_bytes, which is
        // the same parse-and-check the ledger runs when the service starts.
        std::size_t mutations = 0, detected = 0;
        const auto sweep_start = Clock::now();
        Bytes m = image;
        for (std::size_t pos = 0; pos < m.size(); ++pos) {
            for (int delta = 1; delta < 256; ++delta) {
                m[pos] = static_cast<Byte>(image[pos] ^ delta);
                ++mutations;
                if (ledger::verify_chain_bytes(m)) ++detected;
            }
            m[pos] = image[pos];
        }
        const double sweep_seconds = since(sweep_start);
        v.expect(detected == mutations,
                 std::to_string(mutations - detected) + " of " + std::to_string(mutations) + " mutations verified");
        v.expect(sweep_seconds < 30.0, "exhaustive sweep slower than 30 s");
        const auto service_start = Clock::now();

        // The real service over the real file: every position with one
        // value, and every value at every 64th position.
        auto starts = [&](std::size_t pos, int delta) {
            std::string bad = original;
            bad[pos] = static_cast<char>(static_cast<Byte>(bad[pos]) ^ delta);
            std::ofstream(dir.path / "chain.dat", std::ios::binary | std::ios::trunc) << bad;
            try {
                service::Service svc(test_config(dir.path));
            } catch (const Error& e) {
                return e.code() != "chain-corrupt";
            }
            return true;
        };
        std::size_t service_runs = 0, service_started = 0;
        for (std::size_t pos = 0; pos < image.size(); ++pos) {
            ++service_runs;
            service_started += starts(pos, static_cast<int>(1 + pos % 255));
            if (pos % 64 == 0)
                for (int delta = 1; delta < 256; ++delta) {
                    ++service_runs;
                    service_started += starts(pos, delta);
                }
        }
        v.expect(service_started == 0,
                 "service started on " + std::to_string(service_started) + " tampered chains");
        std::ofstream(dir.path / "chain.dat", std::ios::binary | std::ios::trunc) << original;
        try {
            service::Service svc(test_config(dir.path));
        } catch (const Error& e) {
            v.expect(false, std::string("restored chain refused: ") + e.what());
        }
        std::cout << "  (" << image.size() << " bytes, " << mutations << " mutations in " << sweep_seconds << "s, "
                  << service_runs << " service starts in " << since(service_start) << "s)" << std::endl;
    });

    TempDir live_dir;
    std::unique_ptr<TestServer> live;
    criterion("end-to-end scenario full-trade at 1024 bits", [&](Verdict& v) {
        auto config = test_config(live_dir.path, 1024);
        live = std::make_unique<TestServer>(config);
        const auto t0 = Clock::now();
        std::ostringstream out, err;
        const int rc = cli::run({"scenario", "full-trade", "--url", live->url, "--data-dir", live_dir.path.string()},
                                out, err);
        const double s = since(t0);
        v.expect(rc == 0, "exit " + std::to_string(rc) + ": " + err.str());
        const std::string log = out.str();
        for (const char* step : {"certificates issued", "posted listing", "deed D1 created", "signed as seller",
                                 "signed as buyer", "signed as bank -> BANK_SIGNED", "REGISTERED, transfer block 2",
                                 "retrieval now fails with no-active-record", "new owner: Mr. Y"})
            v.expect(log.find(step) != std::string::npos, std::string("missing step: ") + step);
        client::ApiClient api(live->url);
        const json block = api.get("/chain/blocks/2");
        v.expect(block["transactions"].size() == 1 && block["transactions"][0]["kind"] == "TRANSFER" &&
                     block["transactions"][0]["owner_id"] == "Mr. Y",
                 "block 2 is not the transfer to Mr. Y");
        v.expect(api.get("/chain/verify")["ok"] == true, "chain verify");
        v.expect(api.get("/health")["key_bits"] == 1024, "service key size");
        v.expect(s < 60.0, "slower than 60 s");
    });

    criterion("deed state machine table", [](Verdict& v) {
        int illegal = 0;
        for (auto row : expected_table()) {
            run_row(row);
            const std::string pair = std::string(name(row.start)) + " x " + name(row.action);
            v.expect(row.observed == row.expected, pair + ": " + row.observed + " != " + row.expected);
            v.expect(row.listing == listing_for(row.final_state), pair + ": listing " + row.listing);
            if (std::islower(static_cast<unsigned char>(row.expected[0]))) { // an error code, not a state
                ++illegal;
                v.expect(row.final_state == state_name(row.start), pair + ": state moved on error");
            }
        }
        v.expect(expected_table().size() == 35, "table size");
        v.expect(illegal == 25, "illegal pair count " + std::to_string(illegal));
    });

    criterion("privacy: no plaintext on disk or on the wire, payloads are DNA", [&](Verdict& v) {
        if (!live) {
            v.expect(false, "no live service");
            return;
        }
        std::vector<std::string> wire;
        std::size_t payloads = 0;
        auto check_json = [&](const std::string& body) {
            if (body.empty()) return;
            const json j = json::parse(body);
            for (const char* list : {"records", "transactions"})
                if (j.contains(list))
                    for (const auto& r : j[list])
                        if (r.value("kind", "") != "GENESIS") {
                            ++payloads;
                            v.expect(is_acgt(r["dna_payload"]), "payload is not DNA");
                        }
        };
        scenario::ScenarioOptions o;
        o.url = live->url;
        o.bank_key = live_dir.path / "bank.key";
        o.registrar_key = live_dir.path / "registrar.key";
        o.observer = [&](const std::string&, const std::string& req, const std::string& res) {
            wire.push_back(req);
            wire.push_back(res);
            check_json(res);
        };
        const auto r = scenario::run_full_trade(o);
        v.expect(r.buyer_plaintext.find("Dag number") != std::string::npos, "client-side decryption");

        client::ApiClient api(live->url);
        api.set_observer([&](const std::string&, const std::string&, const std::string& res) {
            wire.push_back(res);
            check_json(res);
        });
        const auto height = api.get("/chain/tip")["block_id"].get<std::uint64_t>() + 1;
        for (std::uint64_t id = 0; id < height; ++id) api.get("/chain/blocks/" + std::to_string(id));
        api.get("/listings");
        api.get("/deeds/D1");
        api.get("/deeds/" + r.deed_id);
        api.get("/chain/verify");

        for (const auto& w : wire) v.expect(w.find("Dag number") == std::string::npos, "plaintext on the wire");
        const std::string disk = read_text_file(live_dir.path / "chain.dat");
        v.expect(disk.find("Dag number") == std::string::npos, "plaintext in chain.dat");
        for (const char* f : {"index.jsonl", "trading.json", "certs.jsonl"})
            v.expect(read_text_file(live_dir.path / f).find("Dag number") == std::string::npos,
                     std::string("plaintext in ") + f);
        // two retrievals in the run plus one per non-genesis block
        v.expect(payloads >= 2 + (height - 1), "too few payloads inspected: " + std::to_string(payloads));
    });
    live.reset();

    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
    return failures;
}
