#include "expoly.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace polyattn {

double eval_poly(const ExpPolynomial& p, double x) {
    double acc = 0.0;
    for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

ExpPolynomial taylor_exp_poly(int g) {
    if (g < 0) fail(ErrorCode::invalid_argument, "taylor_exp_poly: degree must be >= 0");
    if (g > kDegreeCap)
        fail(ErrorCode::overflow, "taylor_exp_poly: 1/g! underflows doubles beyond g=170");
    ExpPolynomial p;
    p.coeffs.resize(static_cast<std::size_t>(g) + 1);
    double c = 1.0;
    p.coeffs[0] = 1.0;
    for (int i = 1; i <= g; ++i) {
        c /= i;
        p.coeffs[static_cast<std::size_t>(i)] = c;
    }
    return p;
}

double grid_max_error(const ExpPolynomial& p, double lo, double hi, bool relative, int points) {
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        const double ex = std::exp(x);
        double err = std::fabs(eval_poly(p, x) - ex);
        if (relative) err /= ex;
        if (err > worst) worst = err;
    }
    return worst;
}

int min_degree_additive(double m, double eps) {
    if (!(m > 0.0)) fail(ErrorCode::invalid_argument, "min_degree_additive: M must be > 0");
    if (!(eps > 0.0 && eps <= 0.1))
        fail(ErrorCode::invalid_argument, "min_degree_additive: eps must be in (0, 0.1]");
    for (int g = 0; g <= kDegreeCap; ++g) {
        ExpPolynomial p = taylor_exp_poly(g);
        if (grid_max_error(p, 0.0, m, false) <= eps * kCertMargin) return g;
    }
    fail(ErrorCode::overflow, "min_degree_additive: required degree exceeds cap 170");
}

ExpPolynomial relative_exp_poly(double b, double eps) {
    if (!(b >= 0.01))
        fail(ErrorCode::invalid_argument, "relative_exp_poly: B must be >= 0.01");
    if (!(eps > 0.0 && eps < 0.1))
        fail(ErrorCode::invalid_argument, "relative_exp_poly: eps must be in (0, 0.1)");
    for (int g = 0; g <= kDegreeCap; ++g) {
        ExpPolynomial p = taylor_exp_poly(g);
        if (grid_max_error(p, -b, b, true) <= eps * kCertMargin) {
            p.domain_lo = -b;
            p.domain_hi = b;
            p.err_kind = ErrKind::relative;
            p.err_bound = eps;
            return p;
        }
    }
    fail(ErrorCode::certification_failure,
         "relative_exp_poly: no degree up to 170 certifies on the grid "
         "(domain too wide for double precision at this eps)");
}

const ExpPolynomial& relative_exp_poly_cached(double b, double eps) {
    static std::mutex mu;
    static std::map<std::pair<double, double>, ExpPolynomial> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(b, eps);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, relative_exp_poly(b, eps)).first;
    return it->second;
}

} // namespace polyattn
