#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sgt/record.hpp"

using namespace sgt;
using namespace sgt::record;

TEST_CASE("sha1 known vectors") {
    CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
    CHECK(sha1_hex("The quick brown fox jumps over the lazy dog") ==
          "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
}

TEST_CASE("record round trip") {
    ResultRecord rec;
    rec.command = "cov eval";
    rec.params.beta = 2.5;
    rec.params.mass = 1.25;
    rec.config.seed = 77;
    rec.config.samples = 1234;
    rec.config_hash = sha1_hex(rec.config.canonical_json());
    rec.add("value", 0.123456789012345, 1e-4);
    rec.add("margin", -3.5e-9);
    rec.wall_ms = 12.5;
    rec.timestamp = "1700000000000";
    const std::string text = rec.to_json();
    const ResultRecord back = ResultRecord::from_json(text);
    CHECK(back.equivalent(rec));
    CHECK(back.params.beta == rec.params.beta);
    CHECK(back.config.samples == rec.config.samples);
    // timestamp differences do not break equivalence
    ResultRecord later = back;
    later.timestamp = "1700000099999";
    later.wall_ms = 99.0;
    CHECK(later.equivalent(rec));
    // value differences do
    ResultRecord changed = back;
    changed.values[0].second.value += 1e-15;
    CHECK(!changed.equivalent(rec));
}

TEST_CASE("config hash is stable and content sensitive") {
    RunConfig a;
    RunConfig b;
    CHECK(sha1_hex(a.canonical_json()) == sha1_hex(b.canonical_json()));
    b.seed = 2;
    CHECK(sha1_hex(a.canonical_json()) != sha1_hex(b.canonical_json()));
}

TEST_CASE("csv schema") {
    ResultRecord rec;
    rec.command = "gas partition";
    rec.config_hash = "deadbeef";
    rec.add("value", 1.5, 0.1);
    const std::string csv = rec.to_csv();
    std::istringstream is(csv);
    std::string header;
    std::getline(is, header);
    CHECK(header == "command,name,value,std_error,seed,workers,config_hash");
}

TEST_CASE("run config validation") {
    RunConfig c;
    c.samples = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = RunConfig{};
    c.format = "xml";
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = RunConfig{};
    CHECK_NOTHROW(c.validate());
}

#ifdef SGT_CLI_PATH
TEST_CASE("cli exit codes") {
    const std::string cli = SGT_CLI_PATH;
    // unknown flag: configuration error
    CHECK(WEXITSTATUS(std::system((cli + " cov eval --no-such-flag 2>/dev/null").c_str())) == 1);
    // invalid model parameters: configuration error
    CHECK(WEXITSTATUS(std::system((cli + " cov eval --beta -1 2>/dev/null").c_str())) == 1);
    // singular evaluation point: computation error
    CHECK(WEXITSTATUS(
              std::system((cli + " cov eval --u 0 --x 0 --kind vacuum 2>/dev/null").c_str())) == 2);
    // healthy evaluation
    CHECK(WEXITSTATUS(std::system((cli + " cov eval --u 0.7 --x 1.3 >/dev/null").c_str())) == 0);
}
#endif
