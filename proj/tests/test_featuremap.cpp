#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "featuremap.hpp"

using namespace polyattn;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                          double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = dist(rng);
    return m;
}

ExpPolynomial random_poly(int g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ExpPolynomial p;
    for (int i = 0; i <= g; ++i) p.coeffs.push_back(dist(rng));
    return p;
}

DenseMatrix apply_poly_to_product(const DenseMatrix& x, const DenseMatrix& y,
                                  const ExpPolynomial& p, double scale) {
    DenseMatrix out(x.rows(), y.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < y.rows(); ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < x.cols(); ++c) dot += x(i, c) * y(j, c);
            out(i, j) = eval_poly(p, scale * dot);
        }
    return out;
}

} // namespace

TEST_CASE("enumeration small cases and order") {
    const auto one = enumerate_multi_indices(1, 2);
    REQUIRE(one.size() == 3);
    CHECK(one[0].exponents == std::vector<std::uint32_t>{0});
    CHECK(one[1].exponents == std::vector<std::uint32_t>{1});
    CHECK(one[2].exponents == std::vector<std::uint32_t>{2});

    const auto two = enumerate_multi_indices(2, 1);
    REQUIRE(two.size() == 3);
    CHECK(two[0].exponents == std::vector<std::uint32_t>{0, 0});
    CHECK(two[1].exponents == std::vector<std::uint32_t>{1, 0});
    CHECK(two[2].exponents == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("enumeration d=3 g=4 matches the exhaustive oracle") {
    const auto list = enumerate_multi_indices(3, 4);
    CHECK(list.size() == 35); // C(7,4)
    // Exhaustive nested-loop oracle.
    std::size_t count = 0;
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; b <= 4; ++b)
            for (int c = 0; c <= 4; ++c)
                if (a + b + c <= 4) ++count;
    CHECK(list.size() == count);
    // Graded order: totals ascending.
    for (std::size_t i = 1; i < list.size(); ++i) CHECK(list[i - 1].total <= list[i].total);
    // All distinct.
    for (std::size_t i = 0; i < list.size(); ++i)
        for (std::size_t j = i + 1; j < list.size(); ++j)
            CHECK(list[i].exponents != list[j].exponents);
}

TEST_CASE("feature_rank examples and budgets") {
    CHECK(feature_rank(2, 2) == 6);
    CHECK(feature_rank(8, 5) == 1287);
    CHECK(binomial_checked(26, 10, false) == 5311735); // the loose budget it stays under
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 50; ++rep) {
        const int d = 1 + static_cast<int>(rng() % 10);
        const int g = 1 + static_cast<int>(rng() % 6);
        const double r = static_cast<double>(feature_rank(d, g));
        CHECK(r <= std::pow(std::exp(1.0) * (d + g) / g, g) * (1.0 + 1e-12));
    }
}

TEST_CASE("feature_rank overflow guard") {
    CHECK_THROWS_AS(feature_rank(128, 20), Error);
}

TEST_CASE("multinomial expansion identity") {
    // sum_{|alpha| = k} multinom(k; alpha) prod (u_i v_i)^{alpha_i} = <u,v>^k
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    for (int rep = 0; rep < 100; ++rep) {
        const int d = 1 + static_cast<int>(rng() % 5);
        const int k = 1 + static_cast<int>(rng() % 6);
        const FeatureTable& t = feature_table_cached(d, k);
        std::vector<double> u(static_cast<std::size_t>(d)), v(static_cast<std::size_t>(d));
        for (auto& x : u) x = dist(rng);
        for (auto& x : v) x = dist(rng);
        std::vector<double> fu(static_cast<std::size_t>(t.rank)), fv(fu.size());
        monomial_features(t, u.data(), fu.data());
        monomial_features(t, v.data(), fv.data());
        double lhs = 0.0;
        for (std::int64_t i = 0; i < t.rank; ++i)
            if (t.total[static_cast<std::size_t>(i)] == static_cast<std::uint32_t>(k))
                lhs += t.multinomial[static_cast<std::size_t>(i)] *
                       fu[static_cast<std::size_t>(i)] * fv[static_cast<std::size_t>(i)];
        double dot = 0.0;
        for (int c = 0; c < d; ++c)
            dot += u[static_cast<std::size_t>(c)] * v[static_cast<std::size_t>(c)];
        const double rhs = std::pow(dot, k);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("build_factors degree-1 example") {
    DenseMatrix x(1, 1, {1.0});
    ExpPolynomial p;
    p.coeffs = {1.0, 1.0};
    const LowRankFactors f = build_factors(x, x, p, 1.0);
    REQUIRE(f.rank == 2);
    CHECK(f.u1(0, 0) == 1.0);
    CHECK(f.u1(0, 1) == 1.0);
    CHECK(f.u2(0, 0) == 1.0);
    CHECK(f.u2(0, 1) == 1.0);
    CHECK(f.u1(0, 0) * f.u2(0, 0) + f.u1(0, 1) * f.u2(0, 1) == 2.0); // P(1) = 2
}

TEST_CASE("build_factors zero input gives the constant coefficient") {
    std::mt19937_64 rng(31);
    DenseMatrix x(4, 3); // zeros
    const DenseMatrix y = random_matrix(4, 3, rng);
    const ExpPolynomial p = random_poly(4, rng);
    const LowRankFactors f = build_factors(x, y, p, 0.5);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(f.u1(i, 0) == p.coeffs[0]);
        for (std::int64_t j = 1; j < f.rank; ++j)
            CHECK(f.u1(i, static_cast<std::size_t>(j)) == 0.0);
    }
}

TEST_CASE("exact reconstruction property") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rng() % 6;
        const std::size_t d = 1 + rng() % 8;
        const int g = static_cast<int>(rng() % 7);
        const DenseMatrix x = random_matrix(n, d, rng);
        const DenseMatrix y = random_matrix(n, d, rng);
        const ExpPolynomial p = random_poly(g, rng);
        const double scale = 1.0 / static_cast<double>(d);
        const LowRankFactors f = build_factors(x, y, p, scale);
        const DenseMatrix ref = apply_poly_to_product(x, y, p, scale);
        DenseMatrix u2t(f.u2.cols() ? f.u2.cols() : 1, f.u2.rows());
        for (std::size_t i = 0; i < f.u2.rows(); ++i)
            for (std::size_t j = 0; j < f.u2.cols(); ++j) u2t(j, i) = f.u2(i, j);
        const DenseMatrix prod = matmul(f.u1, u2t);
        CHECK(max_abs_diff(prod, ref) <= 1e-9 * (1.0 + inf_norm(ref)));
    }
}

TEST_CASE("feature table parents form a valid one-multiply chain") {
    const FeatureTable& t = feature_table_cached(4, 5);
    const auto list = enumerate_multi_indices(4, 5);
    REQUIRE(static_cast<std::size_t>(t.rank) == list.size());
    for (std::int64_t i = 1; i < t.rank; ++i) {
        const auto& child = list[static_cast<std::size_t>(i)].exponents;
        auto parent = list[static_cast<std::size_t>(t.parent[static_cast<std::size_t>(i)])]
                          .exponents;
        parent[static_cast<std::size_t>(t.var[static_cast<std::size_t>(i)])] += 1;
        CHECK(parent == child);
    }
}
