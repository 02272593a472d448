#include "attention.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <type_traits>

#include "expoly.hpp"

namespace polyattn {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Exponents of QK^T/d beyond this would push exp() toward double overflow
// territory once row sums are formed.
constexpr double kMaxExponent = 300.0;

// Both streaming passes are strip-mined over W columns so the long loop runs
// over features with a fixed-width register accumulator, instead of a short
// d-length loop restarted r times per row. Every W entry accumulates rows in
// ascending order; T entries combine four feature-interleaved partial sums in
// a fixed order, so outputs are deterministic for a given instance.
constexpr std::size_t kStrip = 8;

// W[f][c0..c0+W) += feats_b[f] * v_b[c0..c0+W), rows b ascending inside f.
// When sp is non-null (first strip only) the same sweep also accumulates
// s[f] += sum_b feats_b[f], saving a separate pass over the feature block.
template <int W>
void key_strip(const double* __restrict feat_block, std::size_t rs,
               const double* __restrict v_rows, std::size_t nb, std::size_t d,
               std::size_t c0, std::int64_t f0, std::int64_t f1,
               double* __restrict w_mat, double* __restrict sp) {
    double* __restrict wf = w_mat + static_cast<std::size_t>(f0) * d + c0;
    for (std::int64_t f = f0; f < f1; ++f, wf += d) {
        const std::size_t fu = static_cast<std::size_t>(f);
        double acc[W];
        for (int j = 0; j < W; ++j) acc[j] = wf[j];
        double acc_s = sp ? sp[fu] : 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            const double fv = feat_block[b * rs + fu];
            acc_s += fv;
            const double* __restrict vb = v_rows + b * d + c0;
            for (int j = 0; j < W; ++j) acc[j] += fv * vb[j];
        }
        for (int j = 0; j < W; ++j) wf[j] = acc[j];
        if (sp) sp[fu] = acc_s;
    }
}

// trow[c0..c0+W) += sum_f feats[f] * W[f][c0..c0+W). Four feature-interleaved
// partial sums break the FMA latency chain; the combination order is fixed, so
// results stay deterministic for a given (d, chunk size).
template <int W>
void query_strip(const double* __restrict feats, const double* __restrict w_mat,
                 std::size_t d, std::size_t c0, std::int64_t f0, std::int64_t f1,
                 double* __restrict trow, const double* __restrict sp,
                 double* __restrict wt) {
    double a0[W], a1[W], a2[W], a3[W];
    for (int j = 0; j < W; ++j) {
        a0[j] = trow[c0 + static_cast<std::size_t>(j)];
        a1[j] = a2[j] = a3[j] = 0.0;
    }
    double w0 = 0.0, w1 = 0.0, w2 = 0.0, w3 = 0.0;
    const double* __restrict wf = w_mat + static_cast<std::size_t>(f0) * d + c0;
    std::int64_t f = f0;
    for (; f + 4 <= f1; f += 4, wf += 4 * d) {
        const double c_0 = feats[static_cast<std::size_t>(f)];
        const double c_1 = feats[static_cast<std::size_t>(f) + 1];
        const double c_2 = feats[static_cast<std::size_t>(f) + 2];
        const double c_3 = feats[static_cast<std::size_t>(f) + 3];
        if (sp) {
            w0 += c_0 * sp[static_cast<std::size_t>(f)];
            w1 += c_1 * sp[static_cast<std::size_t>(f) + 1];
            w2 += c_2 * sp[static_cast<std::size_t>(f) + 2];
            w3 += c_3 * sp[static_cast<std::size_t>(f) + 3];
        }
        for (int j = 0; j < W; ++j) a0[j] += c_0 * wf[j];
        for (int j = 0; j < W; ++j) a1[j] += c_1 * wf[d + static_cast<std::size_t>(j)];
        for (int j = 0; j < W; ++j) a2[j] += c_2 * wf[2 * d + static_cast<std::size_t>(j)];
        for (int j = 0; j < W; ++j) a3[j] += c_3 * wf[3 * d + static_cast<std::size_t>(j)];
    }
    for (; f < f1; ++f, wf += d) {
        const double fv = feats[static_cast<std::size_t>(f)];
        if (sp) w0 += fv * sp[static_cast<std::size_t>(f)];
        for (int j = 0; j < W; ++j) a0[j] += fv * wf[j];
    }
    for (int j = 0; j < W; ++j)
        trow[c0 + static_cast<std::size_t>(j)] = (a0[j] + a1[j]) + (a2[j] + a3[j]);
    if (sp) *wt += (w0 + w1) + (w2 + w3);
}

// Four-row variant of query_strip: W is loaded once per four output rows.
// Each output entry keeps one accumulator per row and lane, summing features
// in ascending order; deterministic for a given instance.
template <int W>
void query_strip4(const double* __restrict feats, std::size_t rs,
                  const double* __restrict w_mat, std::size_t d, std::size_t c0,
                  std::int64_t f0, std::int64_t f1, double* __restrict t_rows,
                  std::size_t t_stride, const double* __restrict sp,
                  double* __restrict wt) {
    double a0[W], a1[W], a2[W], a3[W];
    for (int j = 0; j < W; ++j) {
        const std::size_t c = c0 + static_cast<std::size_t>(j);
        a0[j] = t_rows[c];
        a1[j] = t_rows[t_stride + c];
        a2[j] = t_rows[2 * t_stride + c];
        a3[j] = t_rows[3 * t_stride + c];
    }
    double w0 = 0.0, w1 = 0.0, w2 = 0.0, w3 = 0.0;
    const double* __restrict wf = w_mat + static_cast<std::size_t>(f0) * d + c0;
    for (std::int64_t f = f0; f < f1; ++f, wf += d) {
        const std::size_t fu = static_cast<std::size_t>(f);
        const double c_0 = feats[fu];
        const double c_1 = feats[rs + fu];
        const double c_2 = feats[2 * rs + fu];
        const double c_3 = feats[3 * rs + fu];
        if (sp) {
            const double sv = sp[fu];
            w0 += c_0 * sv;
            w1 += c_1 * sv;
            w2 += c_2 * sv;
            w3 += c_3 * sv;
        }
        for (int j = 0; j < W; ++j) a0[j] += c_0 * wf[j];
        for (int j = 0; j < W; ++j) a1[j] += c_1 * wf[j];
        for (int j = 0; j < W; ++j) a2[j] += c_2 * wf[j];
        for (int j = 0; j < W; ++j) a3[j] += c_3 * wf[j];
    }
    for (int j = 0; j < W; ++j) {
        const std::size_t c = c0 + static_cast<std::size_t>(j);
        t_rows[c] = a0[j];
        t_rows[t_stride + c] = a1[j];
        t_rows[2 * t_stride + c] = a2[j];
        t_rows[3 * t_stride + c] = a3[j];
    }
    if (sp) {
        wt[0] += w0;
        wt[1] += w1;
        wt[2] += w2;
        wt[3] += w3;
    }
}

template <typename Strip>
void for_each_strip(std::size_t d, Strip&& strip) {
    std::size_t c0 = 0;
    for (; c0 + 2 * kStrip <= d; c0 += 2 * kStrip) strip(std::integral_constant<int, 16>{}, c0);
    for (; c0 + kStrip <= d; c0 += kStrip) strip(std::integral_constant<int, 8>{}, c0);
    switch (d - c0) {
    case 1: strip(std::integral_constant<int, 1>{}, c0); break;
    case 2: strip(std::integral_constant<int, 2>{}, c0); break;
    case 3: strip(std::integral_constant<int, 3>{}, c0); break;
    case 4: strip(std::integral_constant<int, 4>{}, c0); break;
    case 5: strip(std::integral_constant<int, 5>{}, c0); break;
    case 6: strip(std::integral_constant<int, 6>{}, c0); break;
    case 7: strip(std::integral_constant<int, 7>{}, c0); break;
    default: break;
    }
}

} // namespace

AttentionInstance::AttentionInstance(DenseMatrix q, DenseMatrix k, DenseMatrix v,
                                     double entry_bound, double eps_a)
    : q_(std::move(q)), k_(std::move(k)), v_(std::move(v)), entry_bound_(entry_bound),
      eps_a_(eps_a) {
    if (q_.rows() != k_.rows() || q_.rows() != v_.rows() || q_.cols() != k_.cols() ||
        q_.cols() != v_.cols())
        fail(ErrorCode::dimension_mismatch, "attention instance: Q, K, V must be n x d");
    if (!(entry_bound_ > 0.0))
        fail(ErrorCode::invalid_argument, "attention instance: B must be > 0");
    if (!(eps_a_ > 0.0 && eps_a_ < 0.1))
        fail(ErrorCode::invalid_argument, "attention instance: eps_a must be in (0, 0.1)");
    const double slack = entry_bound_ * (1.0 + 1e-12);
    if (inf_norm(q_) > slack || inf_norm(k_) > slack || inf_norm(v_) > slack)
        fail(ErrorCode::invalid_argument, "attention instance: ||Q||, ||K||, ||V|| must be <= B");
}

DenseMatrix exact_attention(const AttentionInstance& inst) {
    const std::size_t n = inst.n(), d = inst.d();
    const DenseMatrix& q = inst.q();
    const DenseMatrix& k = inst.k();
    const DenseMatrix& v = inst.v();
    const double inv_d = 1.0 / static_cast<double>(d);

    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* qi = q.row(i);
        double* ai = a.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* kj = k.row(j);
            double s = 0.0;
            for (std::size_t l = 0; l < d; ++l) s += qi[l] * kj[l];
            s *= inv_d;
            if (std::fabs(s) > kMaxExponent)
                fail(ErrorCode::numeric_failure,
                     "exact_attention: |QK^T/d| entry exceeds the supported bound 300");
            ai[j] = std::exp(s);
        }
    }

    DenseMatrix t(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        double di = 0.0;
        for (std::size_t j = 0; j < n; ++j) di += ai[j];
        double* ti = t.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double w = ai[j];
            const double* vj = v.row(j);
            for (std::size_t c = 0; c < d; ++c) ti[c] += w * vj[c];
        }
        const double inv_di = 1.0 / di;
        for (std::size_t c = 0; c < d; ++c) ti[c] *= inv_di;
        if (n <= 512) {
            // Row-stochasticity of D^-1 A, checked where it is cheap.
            double rs = 0.0;
            for (std::size_t j = 0; j < n; ++j) rs += ai[j] * inv_di;
            if (std::fabs(rs - 1.0) > 1e-12)
                fail(ErrorCode::numeric_failure, "exact_attention: softmax row sum drifted");
        }
    }
    return t;
}

DenseMatrix poly_attention(const AttentionInstance& inst, ApproxReport* report) {
    const auto t_start = std::chrono::steady_clock::now();
    const std::size_t n = inst.n(), d = inst.d();
    const double b = inst.entry_bound();

    double eps = inst.eps_a() / (2.0 * b);
    if (eps >= 0.1) eps = 0.099;
    const double domain = std::max(b * b, 0.01); // entries of QK^T/d live in [-B^2, B^2]

    const ExpPolynomial& p = relative_exp_poly_cached(domain, eps);
    const int g = p.degree();
    const FeatureTable& table = feature_table_cached(static_cast<int>(d), g);
    const std::int64_t r = table.rank;
    const std::vector<double> w1 = u1_feature_weights(table, p, 1.0 / static_cast<double>(d));

    // Streamed low-rank evaluation: one pass over K/V rows accumulating
    // s = U2^T 1 and W = U2^T V, one pass over Q rows emitting
    // w~_i = <phi_u(Q_i), s> and T_i = <phi_u(Q_i), W> / w~_i.
    // The key pass uses a larger row block because it read-modify-writes all
    // of W once per block; the query pass only reads it.
    constexpr std::size_t kKeyBlock = 32;
    constexpr std::size_t kRowBlock = 32;
    constexpr std::int64_t kFeatChunk = 4096;
    const std::size_t rs = static_cast<std::size_t>(r);

    std::vector<double> feat_block(kKeyBlock * rs);
    std::vector<double> s(rs, 0.0);
    std::vector<double> w_mat(rs * d, 0.0); // r x d accumulator for U2^T V

    const auto t_pass1 = std::chrono::steady_clock::now();
    std::vector<double> v_rows(kKeyBlock * d);
    for (std::size_t i0 = 0; i0 < n; i0 += kKeyBlock) {
        const std::size_t nb = std::min(kKeyBlock, n - i0);
        for (std::size_t b_i = 0; b_i < nb; ++b_i) {
            monomial_features(table, inst.k().row(i0 + b_i), feat_block.data() + b_i * rs);
            std::memcpy(v_rows.data() + b_i * d, inst.v().row(i0 + b_i), d * sizeof(double));
        }
        for (std::int64_t f0 = 0; f0 < r; f0 += kFeatChunk) {
            const std::int64_t f1 = std::min(r, f0 + kFeatChunk);
            for_each_strip(d, [&](auto width, std::size_t c0) {
                key_strip<decltype(width)::value>(feat_block.data(), rs, v_rows.data(), nb,
                                                  d, c0, f0, f1, w_mat.data(),
                                                  c0 == 0 ? s.data() : nullptr);
            });
        }
    }
    // Fold the U1 feature weights into s and W once, so the query pass can
    // use raw monomial features instead of rescaling r of them per row.
    for (std::size_t f = 0; f < rs; ++f) {
        const double wgt = w1[f];
        s[f] *= wgt;
        double* __restrict wf = w_mat.data() + f * d;
        for (std::size_t c = 0; c < d; ++c) wf[c] *= wgt;
    }
    const double build_s = seconds_since(t_pass1);

    const auto t_pass2 = std::chrono::steady_clock::now();
    DenseMatrix t_out(n, d);
    std::vector<double> wt(kRowBlock);
    for (std::size_t i0 = 0; i0 < n; i0 += kRowBlock) {
        const std::size_t nb = std::min(kRowBlock, n - i0);
        for (std::size_t b_i = 0; b_i < nb; ++b_i) {
            monomial_features(table, inst.q().row(i0 + b_i), feat_block.data() + b_i * rs);
            wt[b_i] = 0.0;
        }
        for (std::int64_t f0 = 0; f0 < r; f0 += kFeatChunk) {
            const std::int64_t f1 = std::min(r, f0 + kFeatChunk);
            std::size_t b_i = 0;
            for (; b_i + 4 <= nb; b_i += 4) {
                for_each_strip(d, [&](auto width, std::size_t c0) {
                    query_strip4<decltype(width)::value>(feat_block.data() + b_i * rs, rs,
                                                         w_mat.data(), d, c0, f0, f1,
                                                         t_out.row(i0 + b_i), d,
                                                         c0 == 0 ? s.data() : nullptr,
                                                         wt.data() + b_i);
                });
            }
            for (; b_i < nb; ++b_i) {
                for_each_strip(d, [&](auto width, std::size_t c0) {
                    query_strip<decltype(width)::value>(feat_block.data() + b_i * rs,
                                                        w_mat.data(), d, c0, f0, f1,
                                                        t_out.row(i0 + b_i),
                                                        c0 == 0 ? s.data() : nullptr,
                                                        wt.data() + b_i);
                });
            }
        }
        for (std::size_t b_i = 0; b_i < nb; ++b_i) {
            if (!(wt[b_i] > 0.0))
                fail(ErrorCode::numeric_failure,
                     "poly_attention: low-rank row-sum nonpositive (certification bug)");
            const double inv = 1.0 / wt[b_i];
            double* trow = t_out.row(i0 + b_i);
            for (std::size_t c = 0; c < d; ++c) trow[c] *= inv;
        }
    }
    const double rowsum_s = seconds_since(t_pass2);

    if (report) {
        report->degree = g;
        report->rank = r;
        report->epsilon = eps;
        report->build_seconds = build_s;
        report->rowsum_seconds = rowsum_s;
        report->total_seconds = seconds_since(t_start);
    }
    return t_out;
}

std::vector<double> approx_row_sums(const LowRankFactors& f) {
    const std::size_t n = f.u1.rows();
    const std::size_t r = f.u1.cols();
    std::vector<double> col_sums(r, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double* u2 = f.u2.row(j);
        for (std::size_t c = 0; c < r; ++c) col_sums[c] += u2[c];
    }
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* u1 = f.u1.row(i);
        double acc = 0.0;
        for (std::size_t c = 0; c < r; ++c) acc += u1[c] * col_sums[c];
        w[i] = acc;
    }
    return w;
}

double error_report(const DenseMatrix& t_exact, const DenseMatrix& t_approx) {
    return max_abs_diff(t_exact, t_approx);
}

} // namespace polyattn
