#include "annreduce.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace polyattn {

void validate_instance(const GapAnnInstance& inst) {
    if (inst.points_a.empty() || inst.points_a.size() != inst.points_b.size())
        fail(ErrorCode::invalid_argument, "gap instance: |A| and |B| must be equal and >= 1");
    const std::size_t d = inst.points_a[0].size();
    if (d == 0) fail(ErrorCode::invalid_argument, "gap instance: d must be >= 1");
    for (const auto* side : {&inst.points_a, &inst.points_b})
        for (const auto& p : *side) {
            if (p.size() != d)
                fail(ErrorCode::dimension_mismatch, "gap instance: inconsistent point dimension");
            for (std::uint8_t c : p)
                if (c > 1)
                    fail(ErrorCode::invalid_argument, "gap instance: coordinates must be 0/1");
        }
    if (inst.t < 0) fail(ErrorCode::invalid_argument, "gap instance: t must be >= 0");
    if (!(inst.eps > 0.0)) fail(ErrorCode::invalid_argument, "gap instance: eps must be > 0");
}

BitVector complement_transform(const BitVector& a) {
    BitVector out(2 * a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > 1)
            fail(ErrorCode::invalid_argument, "complement_transform: coordinates must be 0/1");
        out[i] = a[i];
        out[a.size() + i] = static_cast<std::uint8_t>(1 - a[i]);
    }
    return out;
}

GapAnnInstance complement_transform(const GapAnnInstance& inst) {
    GapAnnInstance out;
    out.t = 2 * inst.t;
    out.eps = inst.eps;
    out.points_a.reserve(inst.points_a.size());
    out.points_b.reserve(inst.points_b.size());
    for (const auto& p : inst.points_a) out.points_a.push_back(complement_transform(p));
    for (const auto& p : inst.points_b) out.points_b.push_back(complement_transform(p));
    return out;
}

namespace {

std::vector<std::uint64_t> pack_bits(const BitVector& p) {
    std::vector<std::uint64_t> w((p.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i]) w[i / 64] |= std::uint64_t{1} << (i % 64);
    return w;
}

std::string packed_key(const std::vector<std::uint64_t>& w) {
    return std::string(reinterpret_cast<const char*>(w.data()), w.size() * sizeof(std::uint64_t));
}

} // namespace

std::vector<int> hamming_bruteforce(const GapAnnInstance& inst) {
    validate_instance(inst);
    const std::size_t n = inst.n();
    std::vector<std::vector<std::uint64_t>> a, b;
    a.reserve(n);
    b.reserve(n);
    for (const auto& p : inst.points_a) a.push_back(pack_bits(p));
    for (const auto& p : inst.points_b) b.push_back(pack_bits(p));
    std::vector<int> out(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int best = inst.d() + 1;
        for (std::size_t j = 0; j < n; ++j) {
            int dist = 0;
            for (std::size_t w = 0; w < a[i].size(); ++w)
                dist += __builtin_popcountll(a[i][w] ^ b[j][w]);
            if (dist < best) best = dist;
        }
        out[i] = best;
    }
    return out;
}

std::int64_t hamming_ball_budget() { return 100'000'000; }

std::int64_t hamming_ball_work(std::size_t n, int d, int t) {
    unsigned __int128 ball = 0;
    unsigned __int128 c = 1; // C(d, k)
    for (int k = 0; k <= std::min(t, d); ++k) {
        ball += c;
        c = c * static_cast<unsigned __int128>(d - k) / static_cast<unsigned __int128>(k + 1);
        if (ball > static_cast<unsigned __int128>(INT64_MAX) / n) return INT64_MAX;
    }
    const unsigned __int128 work = ball * static_cast<unsigned __int128>(n);
    if (work > static_cast<unsigned __int128>(INT64_MAX)) return INT64_MAX;
    return static_cast<std::int64_t>(work);
}

namespace {

// Flips up to `remaining` bits at positions >= pos, testing membership after
// each flip. Returns true as soon as some point of the table is hit.
bool ball_search(std::vector<std::uint64_t>& cur, int d, int pos, int remaining,
                 const std::unordered_set<std::string>& table) {
    if (remaining == 0) return false;
    for (int p = pos; p < d; ++p) {
        cur[static_cast<std::size_t>(p) / 64] ^= std::uint64_t{1} << (p % 64);
        const bool hit = table.count(packed_key(cur)) != 0 ||
                         ball_search(cur, d, p + 1, remaining - 1, table);
        cur[static_cast<std::size_t>(p) / 64] ^= std::uint64_t{1} << (p % 64);
        if (hit) return true;
    }
    return false;
}

} // namespace

std::vector<bool> hamming_ball_decide(const GapAnnInstance& inst) {
    validate_instance(inst);
    if (hamming_ball_work(inst.n(), inst.d(), inst.t) > hamming_ball_budget())
        fail(ErrorCode::budget_exceeded,
             "hamming_ball_decide: n*C(d,<=t) exceeds the enumeration budget; "
             "use the attention path");
    std::unordered_set<std::string> table;
    table.reserve(inst.n() * 2);
    for (const auto& p : inst.points_b) table.insert(packed_key(pack_bits(p)));
    std::vector<bool> flags(inst.n(), false);
    const int d = inst.d();
    for (std::size_t i = 0; i < inst.n(); ++i) {
        std::vector<std::uint64_t> cur = pack_bits(inst.points_a[i]);
        flags[i] = table.count(packed_key(cur)) != 0 ||
                   ball_search(cur, d, 0, inst.t, table);
    }
    return flags;
}

std::pair<AttentionInstance, ReductionParams> build_attention_instance(
    const GapAnnInstance& transformed, double c_big, double c0, double scale) {
    validate_instance(transformed);
    const std::size_t n = transformed.n();
    const int d = transformed.d();
    if (n < 2) fail(ErrorCode::invalid_argument, "attention reduction: need n >= 2");
    if (d % 2 != 0)
        fail(ErrorCode::invalid_argument, "attention reduction: inputs must be balanced "
                                          "(complement-transformed), so d must be even");
    for (const auto* side : {&transformed.points_a, &transformed.points_b})
        for (const auto& p : *side) {
            int w = 0;
            for (std::uint8_t c : p) w += c;
            if (w * 2 != d)
                fail(ErrorCode::invalid_argument,
                     "attention reduction: inputs must be balanced (weight d/2)");
        }
    if (transformed.t < 1)
        fail(ErrorCode::invalid_argument, "attention reduction: t must be >= 1");

    const double log_n = std::log(static_cast<double>(n));
    ReductionParams prm;
    prm.n_tilde = 2 * n;
    prm.d_tilde = 2 * static_cast<std::size_t>(d);
    prm.c_big = c_big > 0.0 ? c_big : static_cast<double>(d) / log_n;
    prm.c0 = c0 > 0.0 ? c0 : static_cast<double>(transformed.t) / log_n;
    // Auto scale: the Case-2 separation needs exp(0.25 beta eps t / d) > 6n,
    // and that exponent is exactly 10 * scale * ln n.
    prm.scale = scale > 0.0 ? scale
                            : (std::log(6.0 * static_cast<double>(n)) + 0.5) / (10.0 * log_n);
    const double cb2 = prm.scale * 40.0 * prm.c_big / (prm.c0 * transformed.eps);
    prm.cb = std::sqrt(cb2);
    prm.ca = 2.0 + cb2 * (1.0 + prm.c0 / prm.c_big);
    prm.beta = cb2 * log_n;
    prm.entry_bound = std::sqrt(prm.beta);
    if (prm.beta > 300.0)
        fail(ErrorCode::overflow,
             "attention reduction: beta = " + std::to_string(prm.beta) +
                 " would overflow exp(); shrink the scale knob");
    if (prm.beta < 1.0)
        fail(ErrorCode::invalid_argument,
             "attention reduction: beta < 1 breaks the entry bound on V; raise the scale knob");
    const double gap = 10.0 * prm.scale * log_n; // 0.25 beta eps t / d
    if (!(std::exp(gap) > 6.0 * static_cast<double>(n)))
        fail(ErrorCode::certification_failure,
             "attention reduction: threshold gap exp(0.25 beta eps t/d) <= 6n; "
             "raise the scale knob");
    prm.tau = std::exp(prm.beta / 2.0);
    double eps_a = std::pow(static_cast<double>(n), -prm.ca);
    if (eps_a >= 0.1) eps_a = 0.099; // only reachable at toy scales
    if (eps_a <= 0.0) eps_a = std::numeric_limits<double>::min(); // n^-Ca underflowed
    prm.eps_a = eps_a;
    const double t_over_d = static_cast<double>(transformed.t) / static_cast<double>(d);
    prm.t_tilde = std::exp(0.25 * prm.beta * (1.0 - t_over_d)) /
                  (3.0 * 2.0 * static_cast<double>(n) * prm.tau);
    prm.t_tilde0 = 2.0 * prm.t_tilde;
    if (!(prm.t_tilde >= prm.eps_a))
        fail(ErrorCode::certification_failure,
             "attention reduction: t_tilde < eps_a; the solver accuracy cannot "
             "resolve the decision threshold");

    const double rb = prm.entry_bound; // sqrt(beta)
    DenseMatrix q(prm.n_tilde, prm.d_tilde);
    DenseMatrix k(prm.n_tilde, prm.d_tilde);
    DenseMatrix v(prm.n_tilde, prm.d_tilde);
    const std::size_t du = static_cast<std::size_t>(d);
    for (std::size_t i = 0; i < n; ++i) {
        double* qi = q.row(i);
        double* ki = k.row(i);
        for (std::size_t c = 0; c < du; ++c) {
            qi[c] = rb * transformed.points_a[i][c];
            qi[du + c] = rb;
            ki[c] = rb * transformed.points_b[i][c];
        }
        v(i, 0) = 1.0;
    }
    for (std::size_t i = n; i < prm.n_tilde; ++i) {
        double* qi = q.row(i);
        double* ki = k.row(i);
        for (std::size_t c = 0; c < du; ++c) {
            qi[du + c] = rb;
            ki[du + c] = rb;
        }
    }
    AttentionInstance attn(std::move(q), std::move(k), std::move(v), prm.entry_bound, prm.eps_a);
    return {std::move(attn), prm};
}

std::vector<bool> gap_ann_decide(const GapAnnInstance& inst, double c_big, double c0,
                                 const AttentionSolver& attn, AnnRoute route,
                                 ReductionParams* params_out, double scale) {
    validate_instance(inst);
    if (route == AnnRoute::automatic)
        route = hamming_ball_work(inst.n(), inst.d(), inst.t) <= hamming_ball_budget()
                    ? AnnRoute::brute
                    : AnnRoute::attention;
    if (route == AnnRoute::brute) return hamming_ball_decide(inst);

    const GapAnnInstance transformed = complement_transform(inst);
    auto [attn_inst, prm] = build_attention_instance(transformed, c_big, c0, scale);
    const DenseMatrix out = attn(attn_inst);
    if (out.rows() != prm.n_tilde || out.cols() != prm.d_tilde)
        fail(ErrorCode::dimension_mismatch, "gap_ann_decide: solver returned wrong shape");
    std::vector<bool> flags(inst.n(), false);
    for (std::size_t i = 0; i < inst.n(); ++i) flags[i] = out(i, 0) >= prm.t_tilde0;
    if (params_out) *params_out = prm;
    return flags;
}

int ann_binary_search(const std::vector<BitVector>& points_a,
                      const std::vector<BitVector>& points_b, double eps,
                      const AttentionSolver& attn, int* call_count_out, AnnRoute route,
                      double scale) {
    GapAnnInstance inst;
    inst.points_a = points_a;
    inst.points_b = points_b;
    inst.t = 0;
    inst.eps = eps;
    validate_instance(inst);
    int calls = 0;
    const auto any_case1 = [&](int t) {
        GapAnnInstance probe = inst;
        probe.t = t;
        ++calls;
        const std::vector<bool> flags = gap_ann_decide(probe, 0.0, 0.0, attn, route, nullptr,
                                                       scale);
        for (bool f : flags)
            if (f) return true;
        return false;
    };
    int lo = 0, hi = inst.d(); // any_case1(d) is vacuously true: distances are <= d
    while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (any_case1(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    if (call_count_out) *call_count_out = calls;
    return lo;
}

GapAnnInstance read_point_set(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line))
            fail(ErrorCode::parse_failure,
                 "point set: unexpected end of file after line " + std::to_string(line_no));
        ++line_no;
    };
    next_line();
    std::istringstream head(line);
    long long n = 0, d = 0;
    if (!(head >> n >> d) || n < 1 || d < 1)
        fail(ErrorCode::parse_failure, "point set: line 1 must be 'n d' with n, d >= 1");
    GapAnnInstance inst;
    inst.eps = 1.0; // placeholder; t and eps are not stored in the file
    for (int side = 0; side < 2; ++side) {
        auto& pts = side == 0 ? inst.points_a : inst.points_b;
        pts.reserve(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i) {
            next_line();
            std::istringstream row(line);
            BitVector p(static_cast<std::size_t>(d));
            for (long long c = 0; c < d; ++c) {
                int bit = -1;
                if (!(row >> bit) || (bit != 0 && bit != 1))
                    fail(ErrorCode::parse_failure,
                         "point set: line " + std::to_string(line_no) + " needs " +
                             std::to_string(d) + " space-separated 0/1 digits");
                p[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(bit);
            }
            double extra;
            if (row >> extra)
                fail(ErrorCode::parse_failure,
                     "point set: line " + std::to_string(line_no) + " has more than " +
                         std::to_string(d) + " values");
            pts.push_back(std::move(p));
        }
    }
    return inst;
}

GapAnnInstance load_point_set(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::io_failure, "cannot open point set file: " + path);
    return read_point_set(f);
}

void write_point_set(std::ostream& out, const GapAnnInstance& inst) {
    out << inst.n() << ' ' << inst.d() << '\n';
    for (const auto* side : {&inst.points_a, &inst.points_b})
        for (const auto& p : *side) {
            for (std::size_t c = 0; c < p.size(); ++c)
                out << (c ? " " : "") << static_cast<int>(p[c]);
            out << '\n';
        }
}

void save_point_set(const std::string& path, const GapAnnInstance& inst) {
    std::ofstream f(path);
    if (!f) fail(ErrorCode::io_failure, "cannot open point set file for writing: " + path);
    write_point_set(f, inst);
    if (!f) fail(ErrorCode::io_failure, "write failed: " + path);
}

} // namespace polyattn
