#include "polyattn/polyattn.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "annreduce.hpp"
#include "attention.hpp"
#include "bench.hpp"
#include "matrix.hpp"

using namespace polyattn;

struct pa_matrix {
    DenseMatrix m;
};

struct pa_points {
    GapAnnInstance inst; // t/eps filled per call
};

namespace {

thread_local std::string g_last_error = "ok";

pa_status status_of(ErrorCode c) {
    switch (c) {
    case ErrorCode::invalid_argument: return PA_INVALID_ARGUMENT;
    case ErrorCode::dimension_mismatch: return PA_DIMENSION_MISMATCH;
    case ErrorCode::io_failure: return PA_IO_FAILURE;
    case ErrorCode::parse_failure: return PA_PARSE_FAILURE;
    case ErrorCode::overflow: return PA_OVERFLOW;
    case ErrorCode::certification_failure: return PA_CERTIFICATION_FAILURE;
    case ErrorCode::numeric_failure: return PA_NUMERIC_FAILURE;
    case ErrorCode::budget_exceeded: return PA_BUDGET_EXCEEDED;
    }
    return PA_INTERNAL;
}

template <typename Fn>
pa_status guarded(Fn&& fn) {
    try {
        fn();
        return PA_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return PA_OVERFLOW;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PA_INTERNAL;
    }
}

pa_status require(bool ok, const char* msg) {
    if (ok) return PA_OK;
    g_last_error = msg;
    return PA_INVALID_ARGUMENT;
}

AttentionInstance make_instance(const pa_matrix* q, const pa_matrix* k, const pa_matrix* v,
                                double entry_bound, double eps_a) {
    return AttentionInstance(q->m, k->m, v->m, entry_bound, eps_a);
}

AnnRoute route_of(pa_route r) {
    switch (r) {
    case PA_ROUTE_BRUTE: return AnnRoute::brute;
    case PA_ROUTE_ATTENTION: return AnnRoute::attention;
    default: return AnnRoute::automatic;
    }
}

} // namespace

extern "C" {

const char* pa_last_error(void) { return g_last_error.c_str(); }

pa_status pa_matrix_create(size_t rows, size_t cols, const double* data_or_null,
                           pa_matrix** out) {
    if (pa_status s = require(out != nullptr, "pa_matrix_create: out is NULL")) return s;
    return guarded([&] {
        auto* m = new pa_matrix{DenseMatrix(rows, cols)};
        if (data_or_null)
            std::memcpy(m->m.data().data(), data_or_null, rows * cols * sizeof(double));
        *out = m;
    });
}

void pa_matrix_destroy(pa_matrix* m) { delete m; }

size_t pa_matrix_rows(const pa_matrix* m) { return m ? m->m.rows() : 0; }
size_t pa_matrix_cols(const pa_matrix* m) { return m ? m->m.cols() : 0; }
const double* pa_matrix_data(const pa_matrix* m) { return m ? m->m.data().data() : nullptr; }

pa_status pa_matrix_load(const char* path, pa_matrix** out) {
    if (pa_status s = require(path && out, "pa_matrix_load: NULL argument")) return s;
    return guarded([&] { *out = new pa_matrix{load_matrix(path)}; });
}

pa_status pa_matrix_save(const char* path, const pa_matrix* m, int binary) {
    if (pa_status s = require(path && m, "pa_matrix_save: NULL argument")) return s;
    return guarded([&] { save_matrix(path, m->m, binary != 0); });
}

pa_status pa_instance_load(const char* path, pa_matrix** q, pa_matrix** k, pa_matrix** v) {
    if (pa_status s = require(path && q && k && v, "pa_instance_load: NULL argument")) return s;
    return guarded([&] {
        std::ifstream f(path, std::ios::binary);
        if (!f) fail(ErrorCode::io_failure, std::string("cannot open instance file: ") + path);
        std::size_t line_no = 0;
        DenseMatrix qm = read_matrix_any(f, line_no);
        DenseMatrix km = read_matrix_any(f, line_no);
        DenseMatrix vm = read_matrix_any(f, line_no);
        *q = new pa_matrix{std::move(qm)};
        *k = new pa_matrix{std::move(km)};
        *v = new pa_matrix{std::move(vm)};
    });
}

pa_status pa_instance_save(const char* path, const pa_matrix* q, const pa_matrix* k,
                           const pa_matrix* v, int binary) {
    if (pa_status s = require(path && q && k && v, "pa_instance_save: NULL argument")) return s;
    return guarded([&] {
        std::ofstream f(path, std::ios::binary);
        if (!f) fail(ErrorCode::io_failure, std::string("cannot open for writing: ") + path);
        for (const pa_matrix* m : {q, k, v})
            binary ? write_matrix_binary(f, m->m) : write_matrix_text(f, m->m);
        if (!f) fail(ErrorCode::io_failure, std::string("write failed: ") + path);
    });
}

pa_status pa_matmul(const pa_matrix* a, const pa_matrix* b, pa_matrix** out) {
    if (pa_status s = require(a && b && out, "pa_matmul: NULL argument")) return s;
    return guarded([&] { *out = new pa_matrix{matmul(a->m, b->m)}; });
}

pa_status pa_inf_norm(const pa_matrix* m, double* out) {
    if (pa_status s = require(m && out, "pa_inf_norm: NULL argument")) return s;
    return guarded([&] { *out = inf_norm(m->m); });
}

pa_status pa_max_abs_diff(const pa_matrix* a, const pa_matrix* b, double* out) {
    if (pa_status s = require(a && b && out, "pa_max_abs_diff: NULL argument")) return s;
    return guarded([&] { *out = max_abs_diff(a->m, b->m); });
}

pa_status pa_generate_instance(size_t n, size_t d, double entry_bound, uint64_t seed,
                               pa_matrix** q, pa_matrix** k, pa_matrix** v) {
    if (pa_status s = require(q && k && v, "pa_generate_instance: NULL argument")) return s;
    return guarded([&] {
        // eps_a only gates the solvers; any in-range value works for generation.
        AttentionInstance inst = generate_instance(n, d, entry_bound, 0.05, seed);
        *q = new pa_matrix{inst.q()};
        *k = new pa_matrix{inst.k()};
        *v = new pa_matrix{inst.v()};
    });
}

pa_status pa_exact_attention(const pa_matrix* q, const pa_matrix* k, const pa_matrix* v,
                             double entry_bound, double eps_a, pa_matrix** out) {
    if (pa_status s = require(q && k && v && out, "pa_exact_attention: NULL argument")) return s;
    return guarded(
        [&] { *out = new pa_matrix{exact_attention(make_instance(q, k, v, entry_bound, eps_a))}; });
}

pa_status pa_poly_attention(const pa_matrix* q, const pa_matrix* k, const pa_matrix* v,
                            double entry_bound, double eps_a, pa_matrix** out,
                            pa_attn_report* report_or_null) {
    if (pa_status s = require(q && k && v && out, "pa_poly_attention: NULL argument")) return s;
    return guarded([&] {
        ApproxReport rep;
        *out = new pa_matrix{poly_attention(make_instance(q, k, v, entry_bound, eps_a), &rep)};
        if (report_or_null) {
            report_or_null->degree = rep.degree;
            report_or_null->rank = rep.rank;
            report_or_null->epsilon = rep.epsilon;
            report_or_null->build_seconds = rep.build_seconds;
            report_or_null->rowsum_seconds = rep.rowsum_seconds;
            report_or_null->total_seconds = rep.total_seconds;
        }
    });
}

pa_status pa_points_load(const char* path, pa_points** out) {
    if (pa_status s = require(path && out, "pa_points_load: NULL argument")) return s;
    return guarded([&] { *out = new pa_points{load_point_set(path)}; });
}

pa_status pa_points_create(size_t n, size_t d, const uint8_t* a_bits, const uint8_t* b_bits,
                           pa_points** out) {
    if (pa_status s = require(a_bits && b_bits && out, "pa_points_create: NULL argument"))
        return s;
    return guarded([&] {
        GapAnnInstance inst;
        inst.eps = 1.0;
        inst.points_a.resize(n);
        inst.points_b.resize(n);
        for (size_t i = 0; i < n; ++i) {
            inst.points_a[i].assign(a_bits + i * d, a_bits + (i + 1) * d);
            inst.points_b[i].assign(b_bits + i * d, b_bits + (i + 1) * d);
        }
        validate_instance(inst);
        *out = new pa_points{std::move(inst)};
    });
}

void pa_points_destroy(pa_points* p) { delete p; }

size_t pa_points_count(const pa_points* p) { return p ? p->inst.n() : 0; }
size_t pa_points_dim(const pa_points* p) { return p ? static_cast<size_t>(p->inst.d()) : 0; }

pa_status pa_hamming_bruteforce(const pa_points* p, int* dists_out) {
    if (pa_status s = require(p && dists_out, "pa_hamming_bruteforce: NULL argument")) return s;
    return guarded([&] {
        const std::vector<int> d = hamming_bruteforce(p->inst);
        std::memcpy(dists_out, d.data(), d.size() * sizeof(int));
    });
}

pa_status pa_gap_ann_decide(const pa_points* p, int t, double eps, pa_route route,
                            double scale, int* flags_out, pa_reduction_info* info_or_null) {
    if (pa_status s = require(p && flags_out, "pa_gap_ann_decide: NULL argument")) return s;
    return guarded([&] {
        GapAnnInstance inst = p->inst;
        inst.t = t;
        inst.eps = eps;
        ReductionParams prm;
        const AnnRoute r = route_of(route);
        const bool attention_path =
            r == AnnRoute::attention ||
            (r == AnnRoute::automatic &&
             hamming_ball_work(inst.n(), inst.d(), inst.t) > hamming_ball_budget());
        const std::vector<bool> flags =
            gap_ann_decide(inst, 0.0, 0.0, exact_attention, r, &prm, scale);
        for (std::size_t i = 0; i < flags.size(); ++i) flags_out[i] = flags[i] ? 1 : 0;
        if (info_or_null) {
            *info_or_null = pa_reduction_info{};
            info_or_null->used_attention = attention_path ? 1 : 0;
            if (attention_path) {
                info_or_null->scale = prm.scale;
                info_or_null->beta = prm.beta;
                info_or_null->entry_bound = prm.entry_bound;
                info_or_null->tau = prm.tau;
                info_or_null->eps_a = prm.eps_a;
                info_or_null->t_tilde = prm.t_tilde;
                info_or_null->t_tilde0 = prm.t_tilde0;
            }
        }
    });
}

pa_status pa_ann_search(const pa_points* p, double eps, pa_route route, double scale,
                        int* t_out, int* calls_out_or_null) {
    if (pa_status s = require(p && t_out, "pa_ann_search: NULL argument")) return s;
    return guarded([&] {
        int calls = 0;
        *t_out = ann_binary_search(p->inst.points_a, p->inst.points_b, eps, exact_attention,
                                   &calls, route_of(route), scale);
        if (calls_out_or_null) *calls_out_or_null = calls;
    });
}

pa_status pa_bench_run(const char* config_json, int as_json, char** out_text) {
    if (pa_status s = require(config_json && out_text, "pa_bench_run: NULL argument")) return s;
    return guarded([&] {
        const SweepConfig cfg = parse_sweep_config(config_json);
        const std::vector<SweepRecord> recs = run_sweep(cfg);
        const std::string text = as_json ? records_to_json(recs) : records_to_csv(recs);
        char* buf = static_cast<char*>(std::malloc(text.size() + 1));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out_text = buf;
    });
}

void pa_string_free(char* s) { std::free(s); }

} // extern "C"
