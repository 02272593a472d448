/* C interface to the polyattn library: exact and polynomial-method softmax
 * attention, the Hamming gap-nearest-neighbor reduction, and the benchmark
 * sweep. All functions return pa_status; outputs are via pointers. On any
 * non-PA_OK status, pa_last_error() describes the failure (thread-local). */
#ifndef POLYATTN_H
#define POLYATTN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pa_status {
    PA_OK = 0,
    PA_INVALID_ARGUMENT = 1,
    PA_DIMENSION_MISMATCH = 2,
    PA_IO_FAILURE = 3,
    PA_PARSE_FAILURE = 4,
    PA_OVERFLOW = 5,
    PA_CERTIFICATION_FAILURE = 6,
    PA_NUMERIC_FAILURE = 7,
    PA_BUDGET_EXCEEDED = 8,
    PA_INTERNAL = 9
} pa_status;

/* Message for the most recent failure on this thread. Never NULL. */
const char* pa_last_error(void);

/* ---- dense matrices (row-major doubles) ---- */

typedef struct pa_matrix pa_matrix;

pa_status pa_matrix_create(size_t rows, size_t cols, const double* data_or_null,
                           pa_matrix** out);
void pa_matrix_destroy(pa_matrix* m);
size_t pa_matrix_rows(const pa_matrix* m);
size_t pa_matrix_cols(const pa_matrix* m);
/* Read-only view of the rows*cols row-major payload. */
const double* pa_matrix_data(const pa_matrix* m);

/* Text format: "rows cols" then one line per row. Binary format: magic
 * "PATN", u64-LE rows, cols, then row-major f64-LE. Loading sniffs the
 * format from the leading bytes. */
pa_status pa_matrix_load(const char* path, pa_matrix** out);
pa_status pa_matrix_save(const char* path, const pa_matrix* m, int binary);

/* Instance file: Q, K, V concatenated in one file, each section in either
 * matrix format. pa_instance_save writes all three in one format. */
pa_status pa_instance_load(const char* path, pa_matrix** q, pa_matrix** k, pa_matrix** v);
pa_status pa_instance_save(const char* path, const pa_matrix* q, const pa_matrix* k,
                           const pa_matrix* v, int binary);

pa_status pa_matmul(const pa_matrix* a, const pa_matrix* b, pa_matrix** out);
pa_status pa_inf_norm(const pa_matrix* m, double* out);
pa_status pa_max_abs_diff(const pa_matrix* a, const pa_matrix* b, double* out);

/* ---- attention ---- */

/* Q, K, V entries i.i.d. uniform on [-B, B] from a documented deterministic
 * generator (see README); same seed gives bit-identical matrices. */
pa_status pa_generate_instance(size_t n, size_t d, double entry_bound, uint64_t seed,
                               pa_matrix** q, pa_matrix** k, pa_matrix** v);

/* T = D^-1 exp(QK^T/d) V, materializing the n x n matrix. Requires
 * max |Q|,|K|,|V| <= B and eps_a in (0, 0.1). */
pa_status pa_exact_attention(const pa_matrix* q, const pa_matrix* k, const pa_matrix* v,
                             double entry_bound, double eps_a, pa_matrix** out);

typedef struct pa_attn_report {
    int degree;             /* certified polynomial degree g */
    int64_t rank;           /* feature count r = C(d+g, g) */
    double epsilon;         /* per-entry relative accuracy used */
    double build_seconds;   /* key-side pass */
    double rowsum_seconds;  /* query-side pass */
    double total_seconds;
} pa_attn_report;

/* Polynomial-method approximation with |T - exact|_inf <= eps_a, without
 * materializing the n x n matrix. report_or_null receives diagnostics. */
pa_status pa_poly_attention(const pa_matrix* q, const pa_matrix* k, const pa_matrix* v,
                            double entry_bound, double eps_a, pa_matrix** out,
                            pa_attn_report* report_or_null);

/* ---- Hamming gap-nearest-neighbor reduction ---- */

typedef struct pa_points pa_points;

/* File: first line "n d", then 2n lines of d space-separated 0/1 digits
 * (query block then database block). */
pa_status pa_points_load(const char* path, pa_points** out);
pa_status pa_points_create(size_t n, size_t d, const uint8_t* a_bits, const uint8_t* b_bits,
                           pa_points** out);
void pa_points_destroy(pa_points* p);
size_t pa_points_count(const pa_points* p);
size_t pa_points_dim(const pa_points* p);

/* dists_out must hold n ints: exhaustive per-query minimum Hamming distance. */
pa_status pa_hamming_bruteforce(const pa_points* p, int* dists_out);

typedef enum pa_route {
    PA_ROUTE_AUTO = 0,   /* brute force when n*C(d,<=t) fits the budget */
    PA_ROUTE_BRUTE = 1,
    PA_ROUTE_ATTENTION = 2
} pa_route;

typedef struct pa_reduction_info {
    int used_attention;  /* 0 when the brute-force path ran (rest is zero) */
    double scale;
    double beta;
    double entry_bound;
    double tau;
    double eps_a;
    double t_tilde;
    double t_tilde0;
} pa_reduction_info;

/* flags_out must hold n ints; flag i is 1 iff some database point lies within
 * Hamming distance t of query i (Case 1), under the (1+eps) gap promise.
 * scale <= 0 picks the default reduction scale. */
pa_status pa_gap_ann_decide(const pa_points* p, int t, double eps, pa_route route,
                            double scale, int* flags_out, pa_reduction_info* info_or_null);

/* Binary search over t; returns t* with true minimum distance in
 * [t*, (1+eps) t*]. calls_out_or_null receives the decide-call count. */
pa_status pa_ann_search(const pa_points* p, double eps, pa_route route, double scale,
                        int* t_out, int* calls_out_or_null);

/* ---- benchmark sweep ---- */

/* config_json schema is documented in the README. Emits CSV (as_json == 0)
 * or a JSON array. *out_text is malloc'd; free with pa_string_free. */
pa_status pa_bench_run(const char* config_json, int as_json, char** out_text);
void pa_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* POLYATTN_H */
