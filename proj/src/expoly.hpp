#pragma once

#include <vector>

#include "error.hpp"

namespace polyattn {

enum class ErrKind { unset, additive, relative };

/// Polynomial approximation of exp(x), certified on [domain_lo, domain_hi]
/// by a dense-grid check performed at construction.
struct ExpPolynomial {
    std::vector<double> coeffs; // c0..cg
    double domain_lo = 0.0;
    double domain_hi = 0.0;
    ErrKind err_kind = ErrKind::unset;
    double err_bound = 0.0;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// Horner evaluation of sum c_i x^i.
double eval_poly(const ExpPolynomial& p, double x);

/// Maclaurin truncation: c_i = 1/i! for i = 0..g. Error fields unset.
/// g is capped at 170 (1/171! underflows a double).
ExpPolynomial taylor_exp_poly(int g);

constexpr int kDegreeCap = 170;
constexpr int kCertGridPoints = 10001;
// Grid max approximates the sup; the selection margin documents the
// certification convention (exp and low-degree polynomials are smooth).
constexpr double kCertMargin = 1.0 - 1e-6;

/// Smallest g whose Maclaurin truncation satisfies
/// max over a 10,001-point grid of [0, M] of |P(x)-exp(x)| <= eps*(1-1e-6).
int min_degree_additive(double m, double eps);

/// Degree-g polynomial with |P(x)-exp(x)| <= eps*exp(x) for all x on a
/// 10,001-point grid of [-B, B], at the minimal such g; throws
/// certification_failure if no degree up to the cap passes.
ExpPolynomial relative_exp_poly(double b, double eps);

/// Memoized relative_exp_poly (thread-safe); same result, shared across calls.
const ExpPolynomial& relative_exp_poly_cached(double b, double eps);

/// Max over the certification grid of |P(x)-exp(x)| (additive) or
/// |P(x)-exp(x)|/exp(x) (relative); used by tests as the certificate oracle.
double grid_max_error(const ExpPolynomial& p, double lo, double hi, bool relative,
                      int points = kCertGridPoints);

} // namespace polyattn
