#include "featuremap.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>

namespace polyattn {

std::int64_t binomial_checked(std::int64_t a, std::int64_t b, bool cap2_31) {
    if (b < 0 || b > a) return 0;
    b = std::min(b, a - b);
    unsigned __int128 acc = 1;
    for (std::int64_t i = 1; i <= b; ++i) {
        acc = acc * static_cast<unsigned __int128>(a - b + i);
        acc /= static_cast<unsigned __int128>(i);
        if (cap2_31 && acc > (static_cast<unsigned __int128>(1) << 31))
            fail(ErrorCode::overflow,
                 "feature count C(d+g, g) exceeds 2^31; reduce g or d");
    }
    if (acc > static_cast<unsigned __int128>(INT64_MAX))
        fail(ErrorCode::overflow, "binomial overflows int64");
    return static_cast<std::int64_t>(acc);
}

std::int64_t feature_rank(int d, int g) {
    if (d < 1 || g < 0) fail(ErrorCode::invalid_argument, "feature_rank: need d >= 1, g >= 0");
    const std::int64_t r = binomial_checked(d + g, g, true);
    // Sanity budget r <= C(2(g+d), 2g), compared in log space to avoid overflow.
    const double log_r = std::lgamma(double(d + g) + 1) - std::lgamma(double(g) + 1) -
                         std::lgamma(double(d) + 1);
    const double log_budget = std::lgamma(2.0 * (d + g) + 1) - std::lgamma(2.0 * g + 1) -
                              std::lgamma(2.0 * d + 1);
    if (log_r > log_budget + 1e-9)
        fail(ErrorCode::numeric_failure, "feature_rank: rank exceeds C(2(g+d), 2g) budget");
    return r;
}

namespace {

std::string key_of(const std::vector<std::uint32_t>& exps) {
    std::string k(exps.size(), '\0');
    for (std::size_t i = 0; i < exps.size(); ++i) k[i] = static_cast<char>(exps[i] & 0xff);
    return k;
}

// Emits the compositions of k into d parts with the first coordinate
// decreasing first (graded-lex within a grade).
template <typename Fn>
void for_each_composition(int d, int k, std::vector<std::uint32_t>& exps, int pos, int rem,
                          Fn&& emit) {
    if (pos == d - 1) {
        exps[static_cast<std::size_t>(pos)] = static_cast<std::uint32_t>(rem);
        emit(exps);
        return;
    }
    for (int a = rem; a >= 0; --a) {
        exps[static_cast<std::size_t>(pos)] = static_cast<std::uint32_t>(a);
        for_each_composition(d, k, exps, pos + 1, rem - a, emit);
    }
    exps[static_cast<std::size_t>(pos)] = 0;
    (void)k;
}

} // namespace

std::vector<MultiIndex> enumerate_multi_indices(int d, int g) {
    const std::int64_t r = feature_rank(d, g);
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(r));
    std::vector<std::uint32_t> exps(static_cast<std::size_t>(d), 0);
    for (int k = 0; k <= g; ++k) {
        for_each_composition(d, k, exps, 0, k, [&](const std::vector<std::uint32_t>& e) {
            out.push_back(MultiIndex{e, static_cast<std::uint32_t>(k)});
        });
    }
    return out;
}

FeatureTable build_feature_table(int d, int g) {
    const std::int64_t r = feature_rank(d, g);
    FeatureTable t;
    t.d = d;
    t.g = g;
    t.rank = r;
    t.var.resize(static_cast<std::size_t>(r), -1);
    t.parent.resize(static_cast<std::size_t>(r), -1);
    t.total.resize(static_cast<std::size_t>(r), 0);
    t.multinomial.resize(static_cast<std::size_t>(r), 1.0);

    std::vector<std::uint32_t> exps(static_cast<std::size_t>(d), 0);
    std::unordered_map<std::string, std::int64_t> prev_grade; // alpha -> feature index
    std::int64_t idx = 0;
    for (int k = 0; k <= g; ++k) {
        std::unordered_map<std::string, std::int64_t> this_grade;
        for_each_composition(d, k, exps, 0, k, [&](std::vector<std::uint32_t>& e) {
            if (k > 0) {
                int v = d - 1;
                while (e[static_cast<std::size_t>(v)] == 0) --v;
                e[static_cast<std::size_t>(v)] -= 1;
                const auto pit = prev_grade.find(key_of(e));
                e[static_cast<std::size_t>(v)] += 1;
                const std::int64_t par = pit->second;
                t.var[static_cast<std::size_t>(idx)] = v;
                t.parent[static_cast<std::size_t>(idx)] = par;
                t.total[static_cast<std::size_t>(idx)] = static_cast<std::uint32_t>(k);
                // multinom(k; a) = multinom(k-1; a - e_v) * k / a_v
                t.multinomial[static_cast<std::size_t>(idx)] =
                    t.multinomial[static_cast<std::size_t>(par)] * double(k) /
                    double(e[static_cast<std::size_t>(v)]);
            }
            this_grade.emplace(key_of(e), idx);
            ++idx;
        });
        prev_grade = std::move(this_grade);
    }
    return t;
}

const FeatureTable& feature_table_cached(int d, int g) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, FeatureTable> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(d, g);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_feature_table(d, g)).first;
    return it->second;
}

void monomial_features(const FeatureTable& t, const double* point, double* feats) {
    feats[0] = 1.0;
    const std::int64_t r = t.rank;
    for (std::int64_t i = 1; i < r; ++i)
        feats[i] = feats[t.parent[static_cast<std::size_t>(i)]] *
                   point[t.var[static_cast<std::size_t>(i)]];
}

std::vector<double> u1_feature_weights(const FeatureTable& t, const ExpPolynomial& p,
                                       double inner_scale) {
    if (p.degree() != t.g)
        fail(ErrorCode::invalid_argument, "feature weights: polynomial degree != table degree");
    std::vector<double> scale_pow(static_cast<std::size_t>(t.g) + 1, 1.0);
    for (int k = 1; k <= t.g; ++k)
        scale_pow[static_cast<std::size_t>(k)] = scale_pow[static_cast<std::size_t>(k - 1)] * inner_scale;
    std::vector<double> w(static_cast<std::size_t>(t.rank));
    for (std::int64_t i = 0; i < t.rank; ++i) {
        const std::uint32_t k = t.total[static_cast<std::size_t>(i)];
        w[static_cast<std::size_t>(i)] =
            p.coeffs[k] * t.multinomial[static_cast<std::size_t>(i)] * scale_pow[k];
    }
    return w;
}

LowRankFactors build_factors(const DenseMatrix& x, const DenseMatrix& y,
                             const ExpPolynomial& p, double inner_scale) {
    if (x.cols() != y.cols() || x.rows() != y.rows())
        fail(ErrorCode::dimension_mismatch, "build_factors: X and Y must have the same shape");
    const int d = static_cast<int>(x.cols());
    const int g = p.degree();
    const FeatureTable& t = feature_table_cached(d, g);
    const std::int64_t r = t.rank;
    const std::size_t n = x.rows();
    if (static_cast<unsigned __int128>(n) * static_cast<unsigned __int128>(r) >
        (static_cast<unsigned __int128>(1) << 31))
        fail(ErrorCode::overflow, "build_factors: n*r too large to materialize");

    LowRankFactors f;
    f.rank = r;
    f.degree_used = g;
    f.u1 = DenseMatrix(n, static_cast<std::size_t>(r));
    f.u2 = DenseMatrix(n, static_cast<std::size_t>(r));
    const std::vector<double> w = u1_feature_weights(t, p, inner_scale);
    for (std::size_t i = 0; i < n; ++i) {
        monomial_features(t, x.row(i), f.u1.row(i));
        double* u1 = f.u1.row(i);
        for (std::int64_t j = 0; j < r; ++j) u1[j] *= w[static_cast<std::size_t>(j)];
        monomial_features(t, y.row(i), f.u2.row(i));
    }
    return f;
}

} // namespace polyattn
