#pragma once

#include <cstdint>
#include <vector>

#include "expoly.hpp"
#include "matrix.hpp"

namespace polyattn {

/// Exponent vector alpha_1..alpha_d with |alpha| <= g.
struct MultiIndex {
    std::vector<std::uint32_t> exponents;
    std::uint32_t total = 0;
};

/// All alpha with |alpha| <= g in graded-lex order: ascending by total,
/// then within a grade the first coordinate decreases first
/// (d=2, g=1 -> (0,0), (1,0), (0,1)). Count is C(d+g, g).
std::vector<MultiIndex> enumerate_multi_indices(int d, int g);

/// r = C(d+g, g); errors if it exceeds 2^31. Also checks r <= C(2(g+d), 2g).
std::int64_t feature_rank(int d, int g);

/// Flat form of the enumeration used by the hot loops. Feature 0 is the
/// constant monomial; every other feature extends its parent by one variable,
/// so a row's feature vector is computed with one multiply per feature.
struct FeatureTable {
    int d = 0;
    int g = 0;
    std::int64_t rank = 0;
    std::vector<std::int32_t> var;      // variable multiplied onto the parent (entry 0 unused)
    std::vector<std::int64_t> parent;   // parent feature index (entry 0 unused)
    std::vector<std::uint32_t> total;   // |alpha| per feature
    // multinomial(|alpha|; alpha) per feature, built by the recurrence
    // multinom(k; a) = multinom(k-1; a - e_v) * k / a_v (relative error <= g ulp).
    std::vector<double> multinomial;
};

FeatureTable build_feature_table(int d, int g);

/// Memoized build_feature_table (thread-safe).
const FeatureTable& feature_table_cached(int d, int g);

/// Fills feats (length rank) with the pure monomials of point (length d).
void monomial_features(const FeatureTable& t, const double* point, double* feats);

/// Per-feature weights folded into U1:
/// w_alpha = c_{|alpha|} * multinomial(|alpha|; alpha) * inner_scale^{|alpha|}.
std::vector<double> u1_feature_weights(const FeatureTable& t, const ExpPolynomial& p,
                                       double inner_scale);

struct LowRankFactors {
    DenseMatrix u1; // n x r, coefficient-weighted monomials of X rows
    DenseMatrix u2; // n x r, pure monomials of Y rows
    std::int64_t rank = 0;
    int degree_used = 0;
};

/// U1 U2^T = P(inner_scale * X Y^T) entrywise, rank C(d+g, g).
LowRankFactors build_factors(const DenseMatrix& x, const DenseMatrix& y,
                             const ExpPolynomial& p, double inner_scale);

/// C(a, b) as int64; errors on overflow past 2^31 when cap2_31 is set.
std::int64_t binomial_checked(std::int64_t a, std::int64_t b, bool cap2_31);

} // namespace polyattn
