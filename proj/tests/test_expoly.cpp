#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "expoly.hpp"

using namespace polyattn;

TEST_CASE("eval_poly basic cases") {
    ExpPolynomial c1;
    c1.coeffs = {1.0};
    CHECK(eval_poly(c1, 5.0) == 1.0);
    ExpPolynomial t2;
    t2.coeffs = {1.0, 1.0, 0.5};
    CHECK(eval_poly(t2, 1.0) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("eval_poly matches a naive power-sum oracle") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        ExpPolynomial p;
        const int g = static_cast<int>(rng() % 9);
        for (int i = 0; i <= g; ++i) p.coeffs.push_back(dist(rng));
        const double x = dist(rng) * 2.0;
        double naive = 0.0;
        for (int i = 0; i <= g; ++i) naive += p.coeffs[static_cast<std::size_t>(i)] * std::pow(x, i);
        CHECK(eval_poly(p, x) == doctest::Approx(naive).epsilon(1e-12));
    }
}

TEST_CASE("taylor_exp_poly coefficients") {
    CHECK(taylor_exp_poly(0).coeffs == std::vector<double>{1.0});
    const ExpPolynomial p3 = taylor_exp_poly(3);
    CHECK(p3.coeffs[2] == 0.5);
    CHECK(p3.coeffs[3] == doctest::Approx(1.0 / 6.0).epsilon(1e-16));
    CHECK(eval_poly(p3, 1.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("degree-10 truncation error at x = 2") {
    // Frozen oracle value: |P_10(2) - e^2| = 6.1390...e-5. (The first
    // neglected term alone, 2^11/11!, is 5.13e-5; the full tail is larger.)
    const double err = std::fabs(eval_poly(taylor_exp_poly(10), 2.0) - std::exp(2.0));
    CHECK(err <= 6.2e-5);
    CHECK(err >= 6.0e-5);
}

TEST_CASE("degree cap") {
    CHECK_THROWS_AS(taylor_exp_poly(171), Error);
    CHECK_NOTHROW(taylor_exp_poly(170));
}

TEST_CASE("min_degree_additive frozen oracle values") {
    CHECK(min_degree_additive(1.0, 0.1) == 3);
    CHECK(min_degree_additive(1.0, 0.09999) == 3);
    CHECK(min_degree_additive(1.0, 0.06) == 3);
    // Frozen: grid search gives 13 on [0, 2] at 1e-6. (Note 2^{g+1}e^2/(g+1)!
    // at g = 13 is 2.9e-8 <= 1e-6; the analytic bound is loose, the grid
    // certificate is what is asserted.)
    CHECK(min_degree_additive(2.0, 1e-6) == 13);
    const int g = min_degree_additive(2.0, 1e-6);
    CHECK(grid_max_error(taylor_exp_poly(g), 0.0, 2.0, false) <= 1e-6);
    CHECK(grid_max_error(taylor_exp_poly(g - 1), 0.0, 2.0, false) > 1e-6);
}

TEST_CASE("min_degree_additive monotonicity lattice") {
    const double ms[] = {0.5, 1.0, 2.0, 4.0};
    const double es[] = {0.09, 0.01, 1e-4, 1e-6};
    for (double m : ms) {
        int prev = -1;
        for (double e : es) { // eps decreasing -> g nondecreasing
            const int g = min_degree_additive(m, e);
            CHECK(g >= prev);
            prev = g;
        }
    }
    for (double e : es) {
        int prev = -1;
        for (double m : ms) { // M increasing -> g nondecreasing
            const int g = min_degree_additive(m, e);
            CHECK(g >= prev);
            prev = g;
        }
    }
}

TEST_CASE("relative_exp_poly certification") {
    for (double b : {0.25, 1.0, 4.0}) {
        for (double eps : {1e-2, 1e-4}) {
            const ExpPolynomial p = relative_exp_poly(b, eps);
            CHECK(p.err_kind == ErrKind::relative);
            CHECK(p.err_bound == eps);
            CHECK(p.domain_lo == -b);
            CHECK(p.domain_hi == b);
            CHECK(grid_max_error(p, -b, b, true) <= eps);
            CHECK(std::fabs(eval_poly(p, 0.0) - 1.0) <= eps);
            CHECK(std::fabs(eval_poly(p, -b) - std::exp(-b)) <= eps * std::exp(-b));
        }
    }
}

TEST_CASE("relative_exp_poly B=1 eps=1e-3") {
    const ExpPolynomial p = relative_exp_poly(1.0, 1e-3);
    CHECK(grid_max_error(p, -1.0, 1.0, true) <= 1e-3);
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(min_degree_additive(-1.0, 0.01), Error);
    CHECK_THROWS_AS(min_degree_additive(1.0, 0.5), Error);
    CHECK_THROWS_AS(relative_exp_poly(0.001, 0.01), Error);
    CHECK_THROWS_AS(relative_exp_poly(1.0, 0.0), Error);
}

TEST_CASE("degree stays within the bounded-entry budget") {
    // With eps = n^-2 and B = 0.3 sqrt(ln n), the certified degree satisfies
    // g <= 5 ln n / ln ln n + 5 B^2 across the sampled range.
    for (int logn : {8, 12, 16, 20}) {
        const double n = std::pow(2.0, logn);
        const double ln_n = std::log(n);
        const double b = 0.3 * std::sqrt(ln_n);
        double eps = std::pow(n, -2.0) / (2.0 * b);
        if (eps >= 0.1) eps = 0.099;
        const ExpPolynomial p = relative_exp_poly(std::max(b * b, 0.01), eps);
        const double budget = 5.0 * ln_n / std::log(ln_n) + 5.0 * b * b;
        CHECK(p.degree() <= budget);
    }
}

TEST_CASE("cached construction returns the identical polynomial") {
    const ExpPolynomial& a = relative_exp_poly_cached(1.0, 1e-3);
    const ExpPolynomial& b = relative_exp_poly_cached(1.0, 1e-3);
    CHECK(&a == &b);
}
