#pragma once

#include <vector>

#include "featuremap.hpp"
#include "matrix.hpp"

namespace polyattn {

/// (Q, K, V, B, eps_a) with the norm guarantees validated on construction.
class AttentionInstance {
public:
    AttentionInstance(DenseMatrix q, DenseMatrix k, DenseMatrix v, double entry_bound,
                      double eps_a);

    const DenseMatrix& q() const { return q_; }
    const DenseMatrix& k() const { return k_; }
    const DenseMatrix& v() const { return v_; }
    std::size_t n() const { return q_.rows(); }
    std::size_t d() const { return q_.cols(); }
    double entry_bound() const { return entry_bound_; }
    double eps_a() const { return eps_a_; }

private:
    DenseMatrix q_, k_, v_;
    double entry_bound_;
    double eps_a_;
};

/// Per-run diagnostics from poly_attention.
struct ApproxReport {
    int degree = 0;           // g
    std::int64_t rank = 0;    // r = C(d+g, g)
    double epsilon = 0.0;     // per-entry relative accuracy used
    double build_seconds = 0.0;   // key-side pass (U2^T 1, U2^T V)
    double rowsum_seconds = 0.0;  // query-side pass (w~ and D~^-1 U1 (U2^T V))
    double total_seconds = 0.0;
};

/// Exact reference: T = D^-1 A V with A = exp(Q K^T / d) materialized.
/// O(n^2 d) time, O(n^2) memory. Entries of Q K^T / d must stay <= 300.
DenseMatrix exact_attention(const AttentionInstance& inst);

/// Algorithm: pick eps = eps_a / (2B) clamped to (0, 0.1); certify a relative
/// exp polynomial on [-B^2, B^2]; factor P(QK^T/d) through monomial features;
/// w~ = U1 (U2^T 1); T = diag(w~)^-1 U1 (U2^T V). Never materializes the
/// n x n attention matrix (factor rows are streamed; peak extra memory
/// O(r d + r)). Guarantee: ||T - exact||_inf <= eps_a.
DenseMatrix poly_attention(const AttentionInstance& inst, ApproxReport* report = nullptr);

/// w~ = U1 (U2^T 1_n) on materialized factors.
std::vector<double> approx_row_sums(const LowRankFactors& f);

/// ||T_exact - T_approx||_inf.
double error_report(const DenseMatrix& t_exact, const DenseMatrix& t_approx);

} // namespace polyattn
