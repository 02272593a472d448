#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "polyattn/polyattn.h"

TEST_CASE("matrix create, data access, norms") {
    const double data[] = {1, -3, 2, 0};
    pa_matrix* m = nullptr;
    REQUIRE(pa_matrix_create(2, 2, data, &m) == PA_OK);
    CHECK(pa_matrix_rows(m) == 2);
    CHECK(pa_matrix_cols(m) == 2);
    CHECK(std::memcmp(pa_matrix_data(m), data, sizeof(data)) == 0);
    double nrm = 0.0;
    CHECK(pa_inf_norm(m, &nrm) == PA_OK);
    CHECK(nrm == 3.0);
    pa_matrix_destroy(m);
}

TEST_CASE("invalid dimensions surface as status codes with messages") {
    pa_matrix* m = nullptr;
    CHECK(pa_matrix_create(0, 2, nullptr, &m) == PA_INVALID_ARGUMENT);
    CHECK(std::string(pa_last_error()).size() > 0);
}

TEST_CASE("matmul and diff through the C API") {
    const double a[] = {1, 2, 3, 4};
    pa_matrix *ma = nullptr, *mi = nullptr;
    REQUIRE(pa_matrix_create(2, 2, a, &ma) == PA_OK);
    const double ident[] = {1, 0, 0, 1};
    REQUIRE(pa_matrix_create(2, 2, ident, &mi) == PA_OK);
    pa_matrix* prod = nullptr;
    REQUIRE(pa_matmul(ma, mi, &prod) == PA_OK);
    double diff = 1.0;
    CHECK(pa_max_abs_diff(ma, prod, &diff) == PA_OK);
    CHECK(diff == 0.0);
    pa_matrix_destroy(ma);
    pa_matrix_destroy(mi);
    pa_matrix_destroy(prod);
}

TEST_CASE("attention round trip: generate, solve, compare") {
    pa_matrix *q = nullptr, *k = nullptr, *v = nullptr;
    REQUIRE(pa_generate_instance(128, 8, 1.0, 7, &q, &k, &v) == PA_OK);
    pa_matrix *exact = nullptr, *poly = nullptr;
    REQUIRE(pa_exact_attention(q, k, v, 1.0, 1e-4, &exact) == PA_OK);
    pa_attn_report rep{};
    REQUIRE(pa_poly_attention(q, k, v, 1.0, 1e-4, &poly, &rep) == PA_OK);
    CHECK(rep.degree > 0);
    CHECK(rep.rank > 0);
    double err = 1.0;
    CHECK(pa_max_abs_diff(exact, poly, &err) == PA_OK);
    CHECK(err <= 1e-4);
    // Out-of-range eps_a is rejected.
    pa_matrix* bad = nullptr;
    CHECK(pa_exact_attention(q, k, v, 1.0, 0.5, &bad) == PA_INVALID_ARGUMENT);
    for (pa_matrix* m : {q, k, v, exact, poly}) pa_matrix_destroy(m);
}

TEST_CASE("matrix and instance file round trips") {
    pa_matrix *q = nullptr, *k = nullptr, *v = nullptr;
    REQUIRE(pa_generate_instance(4, 3, 0.5, 11, &q, &k, &v) == PA_OK);
    const char* path = "test_capi_instance.tmp";
    REQUIRE(pa_instance_save(path, q, k, v, 1) == PA_OK);
    pa_matrix *q2 = nullptr, *k2 = nullptr, *v2 = nullptr;
    REQUIRE(pa_instance_load(path, &q2, &k2, &v2) == PA_OK);
    double diff = 1.0;
    CHECK(pa_max_abs_diff(q, q2, &diff) == PA_OK);
    CHECK(diff == 0.0);
    CHECK(pa_max_abs_diff(v, v2, &diff) == PA_OK);
    CHECK(diff == 0.0);
    std::remove(path);
    CHECK(pa_matrix_load("does_not_exist.mat", &q2) == PA_IO_FAILURE);
    for (pa_matrix* m : {q, k, v, q2, k2, v2}) pa_matrix_destroy(m);
}

TEST_CASE("gap decision and search through the C API") {
    // 4 queries, 4 database points in {0,1}^6.
    const uint8_t a_bits[] = {0, 0, 0, 0, 0, 0,  //
                              1, 1, 1, 1, 1, 1,  //
                              1, 0, 0, 0, 0, 0,  //
                              0, 1, 1, 0, 0, 0};
    const uint8_t b_bits[] = {1, 1, 1, 1, 1, 1,  //
                              0, 0, 0, 0, 0, 0,  //
                              1, 0, 0, 0, 0, 0,  //
                              0, 1, 1, 0, 0, 0};
    pa_points* pts = nullptr;
    REQUIRE(pa_points_create(4, 6, a_bits, b_bits, &pts) == PA_OK);
    CHECK(pa_points_count(pts) == 4);
    CHECK(pa_points_dim(pts) == 6);
    int dists[4] = {-1, -1, -1, -1};
    REQUIRE(pa_hamming_bruteforce(pts, dists) == PA_OK);
    for (int d : dists) CHECK(d == 0);
    int flags[4] = {0, 0, 0, 0};
    pa_reduction_info info{};
    REQUIRE(pa_gap_ann_decide(pts, 1, 0.5, PA_ROUTE_AUTO, 0.0, flags, &info) == PA_OK);
    CHECK(info.used_attention == 0);
    for (int f : flags) CHECK(f == 1);
    int t_star = -1, calls = 0;
    REQUIRE(pa_ann_search(pts, 0.5, PA_ROUTE_AUTO, 0.0, &t_star, &calls) == PA_OK);
    CHECK(t_star == 0);
    CHECK(calls >= 1);
    pa_points_destroy(pts);
}

TEST_CASE("bench run emits CSV and JSON") {
    const char* cfg = R"({
        "n_values": [32],
        "d": 4,
        "B_rule": {"kind": "constant", "value": 0.5},
        "eps_rule": {"kind": "constant", "value": 1e-3},
        "methods": ["exact", "poly"],
        "seed": 3,
        "repetitions": 1
    })";
    char* text = nullptr;
    REQUIRE(pa_bench_run(cfg, 0, &text) == PA_OK);
    CHECK(std::string(text).rfind("n,d,B,eps_a,method,", 0) == 0);
    pa_string_free(text);
    REQUIRE(pa_bench_run(cfg, 1, &text) == PA_OK);
    CHECK(std::string(text).find("\"method\"") != std::string::npos);
    pa_string_free(text);
    CHECK(pa_bench_run("{broken", 0, &text) == PA_PARSE_FAILURE);
}
