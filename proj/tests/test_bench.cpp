#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bench.hpp"

using namespace polyattn;

namespace {

// Zeroes the wall-time column so deterministic CSV comparisons ignore it.
std::string strip_times(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    bool header = true;
    while (std::getline(in, line)) {
        if (!header) {
            int commas = 0;
            std::string cleaned;
            for (char c : line) {
                if (c == ',') ++commas;
                if (commas == 7 && c != ',') continue; // wall_time_seconds field
                cleaned += c;
            }
            line = cleaned;
        }
        header = false;
        out += line + "\n";
    }
    return out;
}

SweepConfig small_config() {
    SweepConfig cfg;
    cfg.n_values = {64, 128};
    cfg.d = 4;
    cfg.b_rule = BRule::constant;
    cfg.b_value = 0.5;
    cfg.eps_rule = EpsRule::constant;
    cfg.eps_value = 1e-3;
    cfg.methods = {Method::exact, Method::poly};
    cfg.seed = 42;
    cfg.repetitions = 2;
    return cfg;
}

} // namespace

TEST_CASE("generate_instance determinism by seed") {
    for (int rep = 0; rep < 100; ++rep) {
        const std::uint64_t seed = 42 + static_cast<std::uint64_t>(rep);
        const AttentionInstance a = generate_instance(10, 4, 0.5, 1e-3, seed);
        const AttentionInstance b = generate_instance(10, 4, 0.5, 1e-3, seed);
        CHECK(max_abs_diff(a.q(), b.q()) == 0.0);
        CHECK(max_abs_diff(a.k(), b.k()) == 0.0);
        CHECK(max_abs_diff(a.v(), b.v()) == 0.0);
        const AttentionInstance c = generate_instance(10, 4, 0.5, 1e-3, seed + 1);
        CHECK(max_abs_diff(a.q(), c.q()) > 0.0);
    }
}

TEST_CASE("generate_instance range contract") {
    const AttentionInstance inst = generate_instance(100, 8, 0.5, 1e-3, 7);
    CHECK(inf_norm(inst.q()) <= 0.5);
    CHECK(inf_norm(inst.k()) <= 0.5);
    CHECK(inf_norm(inst.v()) <= 0.5);
    CHECK(inf_norm(inst.q()) > 0.4); // uniform draws should get close to the bound
}

TEST_CASE("run_sweep exact-only produces one record without g, r") {
    SweepConfig cfg = small_config();
    cfg.n_values = {64};
    cfg.methods = {Method::exact};
    cfg.repetitions = 1;
    const auto recs = run_sweep(cfg);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].method == Method::exact);
    CHECK(!recs[0].degree.has_value());
    CHECK(!recs[0].rank.has_value());
    CHECK(!recs[0].max_abs_error.has_value());
}

TEST_CASE("run_sweep poly error stays within eps_a") {
    SweepConfig cfg = small_config();
    cfg.n_values = {256};
    cfg.d = 8;
    cfg.repetitions = 1;
    const auto recs = run_sweep(cfg);
    REQUIRE(recs.size() == 2);
    const SweepRecord& poly = recs[1];
    CHECK(poly.method == Method::poly);
    REQUIRE(poly.max_abs_error.has_value());
    CHECK(*poly.max_abs_error <= 1e-3);
    CHECK(poly.degree.has_value());
    CHECK(poly.rank.has_value());
}

TEST_CASE("scaled B rule uses the natural logarithm") {
    SweepConfig cfg = small_config();
    cfg.b_rule = BRule::scaled;
    cfg.b_value = 0.3;
    CHECK(resolve_entry_bound(cfg, 1024) ==
          doctest::Approx(0.3 * std::sqrt(std::log(1024.0))).epsilon(1e-15));
    CHECK(resolve_entry_bound(cfg, 1024) == doctest::Approx(0.79).epsilon(0.01));
    cfg.eps_rule = EpsRule::polynomial;
    cfg.eps_value = 2.0;
    CHECK(resolve_eps_a(cfg, 256) == doctest::Approx(std::pow(256.0, -2.0)).epsilon(1e-15));
}

TEST_CASE("exact cap skips exact above the cap") {
    SweepConfig cfg = small_config();
    cfg.n_values = {64, 128};
    cfg.exact_cap = 64;
    cfg.repetitions = 1;
    const auto recs = run_sweep(cfg);
    REQUIRE(recs.size() == 3); // exact+poly at 64, poly only at 128
    CHECK(recs[2].method == Method::poly);
    CHECK(!recs[2].max_abs_error.has_value());
}

TEST_CASE("CSV schema and determinism") {
    const SweepConfig cfg = small_config();
    const std::string a = records_to_csv(run_sweep(cfg));
    const std::string b = records_to_csv(run_sweep(cfg));
    CHECK(a.substr(0, a.find('\n')) ==
          "n,d,B,eps_a,method,g,r,wall_time_seconds,max_abs_error,seed");
    CHECK(strip_times(a) == strip_times(b));
    CHECK(a.find("exact") != std::string::npos);
    CHECK(a.find("poly") != std::string::npos);
}

TEST_CASE("JSON emission carries the same records") {
    const auto recs = run_sweep(small_config());
    const std::string json = records_to_json(recs);
    CHECK(json.find("\"method\": \"poly\"") != std::string::npos);
    CHECK(json.find("\"n\": 64") != std::string::npos);
}

TEST_CASE("config parsing") {
    const std::string text = R"({
        "n_values": [64, 128],
        "d": 4,
        "B_rule": {"kind": "scaled", "value": 0.3},
        "eps_rule": {"kind": "polynomial", "value": 2},
        "methods": ["exact", "poly"],
        "seed": 7,
        "repetitions": 3,
        "exact_cap": 4096
    })";
    const SweepConfig cfg = parse_sweep_config(text);
    CHECK(cfg.n_values == std::vector<std::size_t>{64, 128});
    CHECK(cfg.b_rule == BRule::scaled);
    CHECK(cfg.eps_rule == EpsRule::polynomial);
    CHECK(cfg.seed == 7);
    CHECK(cfg.repetitions == 3);
    CHECK(cfg.exact_cap == 4096);
    CHECK_THROWS_AS(parse_sweep_config("{not json"), Error);
    CHECK_THROWS_AS(parse_sweep_config("{}"), Error);
}

TEST_CASE("invalid configs are rejected") {
    SweepConfig cfg = small_config();
    cfg.n_values = {128, 64};
    CHECK_THROWS_AS(run_sweep(cfg), Error);
    cfg = small_config();
    cfg.repetitions = 0;
    CHECK_THROWS_AS(run_sweep(cfg), Error);
    cfg = small_config();
    cfg.methods = {};
    CHECK_THROWS_AS(run_sweep(cfg), Error);
}
