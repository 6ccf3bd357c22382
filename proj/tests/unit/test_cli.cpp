#include "doctest.h"

#include "cli_app.hpp"
#include "server.hpp"
#include "world.hpp"

#include "landrec/keyfile.hpp"

#include <json.hpp>

#include <sstream>

using namespace landrec;
using namespace landrec::testing;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string kRecord = "Seller: Mr. X, Buyer: Mr. Y, Land information: Dag number: 8000, Khatiayan number: "
                            "450, Area:2000 Shotangsho, Transaction ID: BNX Y2345";

} // namespace

TEST_CASE("usage errors exit 2")
{
    CHECK(invoke({}).code == cli::kExitUsage);
    CHECK(invoke({"frobnicate"}).code == cli::kExitUsage);
    CHECK(invoke({"chain", "verify"}).code == cli::kExitUsage); // neither --data-dir nor --url
    CHECK(invoke({"--help"}).code == cli::kExitOk);
}

TEST_CASE("record encode and decode")
{
    auto r = invoke({"record", "encode", "--text", kRecord});
    REQUIRE(r.code == 0);
    CHECK(r.out.starts_with("294148484154"));
    const std::string digits = r.out.substr(0, r.out.find('\n'));
    CHECK(digits.size() == 2 * kRecord.size());

    r = invoke({"record", "decode", "--digits", digits});
    REQUIRE(r.code == 0);
    CHECK(r.out == kRecord + "\n");

    r = invoke({"record", "encode", "--text", "caf\xc3\xa9"});
    CHECK(r.code == cli::kExitApiError);
    CHECK(r.err.find("unsupported-character") != std::string::npos);
}

TEST_CASE("bench c2i")
{
    auto r = invoke({"bench", "c2i", "--size", "5000", "--seed", "7"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("c2i digits 10000") != std::string::npos);
    CHECK(r.out.find("ascii decimal digits 15000") != std::string::npos);
    CHECK(r.out.find("reduction 33.33%") != std::string::npos);

    r = invoke({"--json", "bench", "c2i", "--text", kRecord});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["c2i_digits"] == 2 * kRecord.size());
    CHECK(j["ascii_digits"] == 3 * kRecord.size());
}

TEST_CASE("keygen, encrypt and decrypt through files")
{
    TempDir dir;
    const auto key = (dir.path / "x.key").string();
    auto r = invoke({"keygen", "--bits", "128", "--subject", "Mr. X", "--out", key});
    REQUIRE(r.code == 0);
    const KeyFile kf = read_key_file(key);
    CHECK(kf.subject_id == "Mr. X");
    CHECK(kf.params.bit_length() == 128);

    const auto plain = (dir.path / "plain.txt").string();
    const auto sealed = (dir.path / "sealed.json").string();
    const auto back = (dir.path / "back.txt").string();
    write_text_file(plain, kRecord);
    REQUIRE(invoke({"record", "encrypt", "--key", key, "--in", plain, "--out", sealed}).code == 0);
    const json env = json::parse(read_text_file(sealed));
    CHECK(env["dna_payload"].get<std::string>().find_first_not_of("ACGT") == std::string::npos);
    REQUIRE(invoke({"record", "decrypt", "--key", key, "--in", sealed, "--out", back}).code == 0);
    CHECK(read_text_file(back) == kRecord);

    // someone else's key is refused rather than producing garbage
    const auto other = (dir.path / "y.key").string();
    REQUIRE(invoke({"keygen", "--params-from", key, "--subject", "Mr. Y", "--out", other}).code == 0);
    r = invoke({"record", "decrypt", "--key", other, "--in", sealed});
    CHECK(r.code == cli::kExitVerification);
    CHECK(r.err.find("key-mismatch") != std::string::npos);
}

TEST_CASE("chain commands on a data directory")
{
    TempDir dir;
    const std::string d = dir.path.string();
    REQUIRE(invoke({"chain", "init", "--data-dir", d}).code == 0);
    auto r = invoke({"chain", "verify", "--data-dir", d});
    CHECK(r.code == 0);
    CHECK(r.out.starts_with("ok: 1 blocks"));
    r = invoke({"--json", "chain", "show", "--data-dir", d, "--block", "0"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["transactions"][0]["kind"] == "GENESIS");
    CHECK(invoke({"chain", "show", "--data-dir", d, "--block", "1"}).code == cli::kExitApiError);

    auto bytes = read_text_file(dir.path / "chain.dat");
    bytes[10] ^= 1;
    write_text_file(dir.path / "chain.dat", bytes);
    r = invoke({"--json", "chain", "verify", "--data-dir", d});
    CHECK(r.code == cli::kExitVerification);
    const json j = json::parse(r.out);
    CHECK(j["ok"] == false);
    CHECK(j["violation"]["position"] == 0);
}

TEST_CASE("certificates, chain and scenario against a running service")
{
    TempDir dir;
    TestServer server(test_config(dir.path));
    const std::string key = (dir.path / "z.key").string();

    REQUIRE(invoke({"keygen", "--url", server.url, "--subject", "Mr. Z", "--out", key}).code == 0);
    auto r = invoke({"--json", "cert", "issue", "--url", server.url, "--key", key});
    REQUIRE(r.code == 0);
    const auto serial = json::parse(r.out)["serial"].get<std::uint64_t>();
    CHECK(read_key_file(key).cert_serial == serial);
    r = invoke({"cert", "verify", "--url", server.url, "--serial", std::to_string(serial)});
    CHECK(r.code == 0);
    // a second key for the same name is refused
    const std::string key2 = (dir.path / "z2.key").string();
    REQUIRE(invoke({"keygen", "--url", server.url, "--subject", "Mr. Z", "--out", key2}).code == 0);
    r = invoke({"cert", "issue", "--url", server.url, "--key", key2});
    CHECK(r.code == cli::kExitApiError);
    CHECK(r.err.find("subject-taken") != std::string::npos);

    r = invoke({"scenario", "full-trade", "--url", server.url, "--data-dir", dir.path.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("new owner: Mr. Y") != std::string::npos);
    CHECK(r.out.find("retrieval now fails with no-active-record") != std::string::npos);

    r = invoke({"--json", "chain", "tip", "--url", server.url});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["block_id"] == 2);
    r = invoke({"chain", "verify", "--url", server.url});
    CHECK(r.code == 0);
    CHECK(r.out.starts_with("ok: 3 blocks"));

    r = invoke({"chain", "verify", "--url", "http://127.0.0.1:1"});
    CHECK(r.code == cli::kExitApiError);
    CHECK(r.err.find("unreachable") != std::string::npos);
}
