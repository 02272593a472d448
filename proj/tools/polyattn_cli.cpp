// Command-line front end over the polyattn C API.
// Exit codes: 0 success (and verification pass), 1 runtime or verification
// failure, 2 usage or input-format error.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyattn/polyattn.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct MatrixDeleter {
    void operator()(pa_matrix* m) const { pa_matrix_destroy(m); }
};
struct PointsDeleter {
    void operator()(pa_points* p) const { pa_points_destroy(p); }
};
using MatrixPtr = std::unique_ptr<pa_matrix, MatrixDeleter>;
using PointsPtr = std::unique_ptr<pa_points, PointsDeleter>;

// Throws CLI::RuntimeError so CLI11's exit path prints nothing extra;
// parse/usage-ish failures get exit 2, everything else 1.
void check(pa_status s) {
    if (s == PA_OK) return;
    std::cerr << "error: " << pa_last_error() << "\n";
    const bool usage = s == PA_PARSE_FAILURE || s == PA_INVALID_ARGUMENT || s == PA_IO_FAILURE;
    throw CLI::RuntimeError(usage ? kExitUsage : kExitFailure);
}

MatrixPtr own(pa_matrix* m) { return MatrixPtr(m); }

double derived_entry_bound(const pa_matrix* q, const pa_matrix* k, const pa_matrix* v) {
    double b = 0.0;
    for (const pa_matrix* m : {q, k, v}) {
        double nrm = 0.0;
        check(pa_inf_norm(m, &nrm));
        if (nrm > b) b = nrm;
    }
    return b > 0.0 ? b : 1.0;
}

void print_report(const pa_attn_report& r) {
    std::printf("degree g        : %d\n", r.degree);
    std::printf("rank r          : %lld\n", static_cast<long long>(r.rank));
    std::printf("entry epsilon   : %.6g\n", r.epsilon);
    std::printf("key pass        : %.6f s\n", r.build_seconds);
    std::printf("query pass      : %.6f s\n", r.rowsum_seconds);
    std::printf("total           : %.6f s\n", r.total_seconds);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"polyattn: exact and polynomial-method softmax attention, with a "
                 "Hamming gap-nearest-neighbor reduction and a benchmark sweep"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker threads (only 1 is implemented)")
        ->envname("POLYATTN_THREADS");

    // attn-exact
    std::string in_path, out_path;
    bool out_binary = false;
    auto* c_exact = app.add_subcommand("attn-exact", "exact attention on an instance file");
    c_exact->add_option("input", in_path, "instance file (Q, K, V concatenated)")->required();
    c_exact->add_option("output", out_path, "output matrix file")->required();
    c_exact->add_flag("--binary", out_binary, "write the output in binary format")
        ->envname("POLYATTN_BINARY");

    // attn-poly
    double opt_b = 1.0, opt_eps = 1e-3;
    auto* c_poly = app.add_subcommand("attn-poly", "polynomial-method attention with report");
    c_poly->add_option("input", in_path, "instance file (Q, K, V concatenated)")->required();
    c_poly->add_option("output", out_path, "output matrix file")->required();
    c_poly->add_option("--B", opt_b, "entry bound B (max |Q|,|K|,|V|)")
        ->required()
        ->envname("POLYATTN_B");
    c_poly->add_option("--eps", opt_eps, "additive accuracy eps_a, in (0, 0.1)")
        ->required()
        ->envname("POLYATTN_EPS");
    c_poly->add_flag("--binary", out_binary, "write the output in binary format")
        ->envname("POLYATTN_BINARY");

    // verify
    std::size_t opt_n = 128, opt_d = 8;
    std::uint64_t opt_seed = 0;
    auto* c_verify =
        app.add_subcommand("verify", "generate an instance, run both solvers, compare");
    c_verify->add_option("--n", opt_n, "rows")->required()->envname("POLYATTN_N");
    c_verify->add_option("--d", opt_d, "columns")->required()->envname("POLYATTN_D");
    c_verify->add_option("--B", opt_b, "entry bound")->required()->envname("POLYATTN_B");
    c_verify->add_option("--eps", opt_eps, "additive accuracy eps_a")
        ->required()
        ->envname("POLYATTN_EPS");
    c_verify->add_option("--seed", opt_seed, "PRNG seed")->required()->envname("POLYATTN_SEED");

    // bench
    std::string cfg_path;
    std::string bench_out;
    bool as_json = false;
    auto* c_bench = app.add_subcommand("bench", "run a sweep from a JSON config");
    c_bench->add_option("--config", cfg_path, "sweep config file (JSON)")
        ->required()
        ->envname("POLYATTN_CONFIG");
    c_bench->add_flag("--json", as_json, "emit a JSON array instead of CSV")
        ->envname("POLYATTN_JSON");
    c_bench->add_option("--out", bench_out, "write records to this file instead of stdout")
        ->envname("POLYATTN_OUT");

    // ann
    std::string points_path;
    int opt_t = 0;
    double ann_eps = 0.5, opt_scale = 0.0;
    bool force_attention = false, force_brute = false;
    auto* c_ann = app.add_subcommand("ann", "gap decision with brute-force cross-check");
    c_ann->add_option("--points", points_path, "point-set file")
        ->required()
        ->envname("POLYATTN_POINTS");
    c_ann->add_option("--t", opt_t, "distance threshold")->required()->envname("POLYATTN_T");
    c_ann->add_option("--eps", ann_eps, "gap parameter (> 0)")
        ->required()
        ->envname("POLYATTN_EPS");
    c_ann->add_option("--scale", opt_scale, "reduction scale knob (<= 0 picks the default)")
        ->envname("POLYATTN_SCALE");
    c_ann->add_flag("--force-attention", force_attention, "always use the attention path")
        ->envname("POLYATTN_FORCE_ATTENTION");
    c_ann->add_flag("--force-brute", force_brute, "always use the ball-enumeration path")
        ->envname("POLYATTN_FORCE_BRUTE");

    // ann-search
    auto* c_search = app.add_subcommand("ann-search", "approximate minimum Hamming distance");
    c_search->add_option("--points", points_path, "point-set file")
        ->required()
        ->envname("POLYATTN_POINTS");
    c_search->add_option("--eps", ann_eps, "approximation parameter (> 0)")
        ->required()
        ->envname("POLYATTN_EPS");
    c_search->add_option("--scale", opt_scale, "reduction scale knob (<= 0 picks the default)")
        ->envname("POLYATTN_SCALE");

    CLI11_PARSE(app, argc, argv);
    if (threads != 1) {
        std::cerr << "error: only --threads 1 is implemented\n";
        return kExitUsage;
    }

    try {
        if (c_exact->parsed() || c_poly->parsed()) {
            pa_matrix *qr = nullptr, *kr = nullptr, *vr = nullptr;
            check(pa_instance_load(in_path.c_str(), &qr, &kr, &vr));
            MatrixPtr q = own(qr), k = own(kr), v = own(vr);
            pa_matrix* out = nullptr;
            if (c_exact->parsed()) {
                const double b = derived_entry_bound(q.get(), k.get(), v.get());
                check(pa_exact_attention(q.get(), k.get(), v.get(), b, 0.05, &out));
            } else {
                pa_attn_report rep{};
                check(pa_poly_attention(q.get(), k.get(), v.get(), opt_b, opt_eps, &out, &rep));
                print_report(rep);
            }
            MatrixPtr t = own(out);
            check(pa_matrix_save(out_path.c_str(), t.get(), out_binary ? 1 : 0));
            return kExitOk;
        }

        if (c_verify->parsed()) {
            pa_matrix *qr = nullptr, *kr = nullptr, *vr = nullptr;
            check(pa_generate_instance(opt_n, opt_d, opt_b, opt_seed, &qr, &kr, &vr));
            MatrixPtr q = own(qr), k = own(kr), v = own(vr);
            pa_matrix* er = nullptr;
            check(pa_exact_attention(q.get(), k.get(), v.get(), opt_b, opt_eps, &er));
            MatrixPtr exact = own(er);
            pa_matrix* pr = nullptr;
            pa_attn_report rep{};
            check(pa_poly_attention(q.get(), k.get(), v.get(), opt_b, opt_eps, &pr, &rep));
            MatrixPtr poly = own(pr);
            double err = 0.0;
            check(pa_max_abs_diff(exact.get(), poly.get(), &err));
            print_report(rep);
            std::printf("max abs error   : %.6e (budget %.6e)\n", err, opt_eps);
            const bool pass = err <= opt_eps;
            std::printf("verification    : %s\n", pass ? "PASS" : "FAIL");
            return pass ? kExitOk : kExitFailure;
        }

        if (c_bench->parsed()) {
            std::ifstream f(cfg_path);
            if (!f) {
                std::cerr << "error: cannot open config file: " << cfg_path << "\n";
                return kExitUsage;
            }
            const std::string cfg((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
            char* text = nullptr;
            check(pa_bench_run(cfg.c_str(), as_json ? 1 : 0, &text));
            std::unique_ptr<char, decltype(&pa_string_free)> guard(text, &pa_string_free);
            if (bench_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream of(bench_out);
                if (!of) {
                    std::cerr << "error: cannot open output file: " << bench_out << "\n";
                    return kExitUsage;
                }
                of << text;
            }
            return kExitOk;
        }

        if (c_ann->parsed()) {
            if (force_attention && force_brute) {
                std::cerr << "error: --force-attention and --force-brute are exclusive\n";
                return kExitUsage;
            }
            pa_points* praw = nullptr;
            check(pa_points_load(points_path.c_str(), &praw));
            PointsPtr pts(praw);
            const std::size_t n = pa_points_count(pts.get());
            const pa_route route = force_attention  ? PA_ROUTE_ATTENTION
                                   : force_brute    ? PA_ROUTE_BRUTE
                                                    : PA_ROUTE_AUTO;
            std::vector<int> flags(n, 0), dists(n, 0);
            pa_reduction_info info{};
            check(pa_gap_ann_decide(pts.get(), opt_t, ann_eps, route, opt_scale, flags.data(),
                                    &info));
            check(pa_hamming_bruteforce(pts.get(), dists.data()));
            std::printf("path: %s\n", info.used_attention ? "attention" : "brute-force");
            if (info.used_attention)
                std::printf("beta=%.4f B=%.4f tau=%.6e t~=%.6e t~0=%.6e scale=%.4f\n", info.beta,
                            info.entry_bound, info.tau, info.t_tilde, info.t_tilde0, info.scale);
            std::size_t mismatches = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const bool oracle = dists[i] <= opt_t;
                if (oracle != (flags[i] != 0)) ++mismatches;
                std::printf("i=%zu decision=%s min_dist=%d oracle=%s\n", i,
                            flags[i] ? "case1" : "case2", dists[i], oracle ? "case1" : "case2");
            }
            std::printf("oracle mismatches: %zu of %zu\n", mismatches, n);
            return kExitOk;
        }

        if (c_search->parsed()) {
            pa_points* praw = nullptr;
            check(pa_points_load(points_path.c_str(), &praw));
            PointsPtr pts(praw);
            int t_star = 0, calls = 0;
            check(pa_ann_search(pts.get(), ann_eps, PA_ROUTE_AUTO, opt_scale, &t_star, &calls));
            std::printf("t* = %d (decide calls: %d); true minimum lies in [%d, %.2f]\n", t_star,
                        calls, t_star, (1.0 + ann_eps) * t_star);
            return kExitOk;
        }
    } catch (const CLI::RuntimeError& e) {
        return e.get_exit_code();
    }
    return kExitUsage;
}
