#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "attention.hpp"
#include "matrix.hpp"

namespace polyattn {

using BitVector = std::vector<std::uint8_t>;

/// Gap nearest-neighbor promise instance over {0,1}^d: for each query a_i,
/// decide "some b_j within Hamming distance t" (Case 1) vs "all b_j at
/// distance >= (1+eps)*t" (Case 2).
struct GapAnnInstance {
    std::vector<BitVector> points_a;
    std::vector<BitVector> points_b;
    int t = 0;
    double eps = 0.0;

    std::size_t n() const { return points_a.size(); }
    int d() const { return points_a.empty() ? 0 : static_cast<int>(points_a[0].size()); }
};

/// Validates shapes, 0/1 coordinates, t >= 0, eps > 0.
void validate_instance(const GapAnnInstance& inst);

/// Constants derived when a gap instance is compiled down to attention.
struct ReductionParams {
    std::size_t n_tilde = 0; // 2n
    std::size_t d_tilde = 0; // 2d
    double c_big = 0.0;      // C   = d / ln n
    double c0 = 0.0;         // C0  = t / ln n
    double cb = 0.0;         // Cb  = sqrt(scale * 40 C / (C0 eps))
    double ca = 0.0;         // Ca  = 2 + Cb^2 (1 + C0/C)
    double scale = 0.0;      // knob multiplying Cb^2 (auto-picked when <= 0)
    double beta = 0.0;       // B^2
    double entry_bound = 0.0; // B = Cb sqrt(ln n)
    double tau = 0.0;        // exp(beta/2): the largest attention entry
    double eps_a = 0.0;      // n^-Ca
    double t_tilde = 0.0;    // decision margin
    double t_tilde0 = 0.0;   // decision threshold = 2 t_tilde
};

/// a -> (a, 1-a): balances every vector (weight d of 2d) and doubles all
/// pairwise Hamming distances.
BitVector complement_transform(const BitVector& a);

/// Applies complement_transform to every point and doubles t.
GapAnnInstance complement_transform(const GapAnnInstance& inst);

/// Exhaustive per-query minimum Hamming distance, O(n^2 d). Validation oracle.
std::vector<int> hamming_bruteforce(const GapAnnInstance& inst);

/// Lookup-table path: store b_1..b_n keyed by bit pattern, then for each a_i
/// enumerate the radius-t Hamming ball around a_i and test membership.
/// Requires n * C(d, <=t) <= hamming_ball_budget(); errors past the budget,
/// directing the caller to the attention path.
std::vector<bool> hamming_ball_decide(const GapAnnInstance& inst);

/// Enumeration budget for hamming_ball_decide (elementary steps).
std::int64_t hamming_ball_budget();

/// n * C(d, <=t), saturating at int64 max.
std::int64_t hamming_ball_work(std::size_t n, int d, int t);

/// Compiles an already-transformed (balanced) gap instance into an attention
/// instance: Q, K are the sqrt(beta)-scaled block layouts over (points, pads),
/// V's first column is (1_n, 0_n). The decision value for query i is the
/// i-th entry of the first output column. scale <= 0 picks the smallest
/// default with a certified threshold gap.
std::pair<AttentionInstance, ReductionParams> build_attention_instance(
    const GapAnnInstance& transformed, double c_big, double c0, double scale = 0.0);

using AttentionSolver = std::function<DenseMatrix(const AttentionInstance&)>;

enum class AnnRoute { automatic, brute, attention };

/// Per-query Case-1 flags. Route: brute-force ball enumeration when the work
/// fits the budget (or forced), otherwise through the attention solver with
/// the threshold rule u_i >= t_tilde0. params_out, if given, receives the
/// reduction constants when the attention path ran.
std::vector<bool> gap_ann_decide(const GapAnnInstance& inst, double c_big, double c0,
                                 const AttentionSolver& attn,
                                 AnnRoute route = AnnRoute::automatic,
                                 ReductionParams* params_out = nullptr, double scale = 0.0);

/// Binary search over t in [0, d] with "any query flagged Case 1" as the
/// predicate; returns t* with true-min-distance in [t*, (1+eps) t*] under the
/// promise semantics. call_count_out, if given, receives the number of
/// gap_ann_decide invocations.
int ann_binary_search(const std::vector<BitVector>& points_a,
                      const std::vector<BitVector>& points_b, double eps,
                      const AttentionSolver& attn, int* call_count_out = nullptr,
                      AnnRoute route = AnnRoute::automatic, double scale = 0.0);

/// Point-set file: first line "n d", then 2n lines of d space-separated 0/1
/// digits (A block then B block). t and eps are not stored.
GapAnnInstance read_point_set(std::istream& in);
GapAnnInstance load_point_set(const std::string& path);
void write_point_set(std::ostream& out, const GapAnnInstance& inst);
void save_point_set(const std::string& path, const GapAnnInstance& inst);

} // namespace polyattn
