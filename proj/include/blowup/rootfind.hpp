#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "errors.hpp"

namespace blowup {

// Safeguarded scalar root finding: Newton steps accepted only while they
// stay inside the current bracket, bisection otherwise.  The bracket
// [lo, hi] must satisfy g(lo) * g(hi) <= 0.

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

inline RootResult solve_bracketed(const std::function<double(double)>& g,
                                  const std::function<double(double)>& gprime,
                                  double lo, double hi, double x_tol = 1e-14,
                                  double g_tol = 0.0, int max_iter = 200) {
    double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return {lo, 0.0, 0};
    if (ghi == 0.0) return {hi, 0.0, 0};
    if (glo * ghi > 0.0)
        throw numerical_error("root bracket [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "] does not straddle a sign change");
    double x = 0.5 * (lo + hi);
    double gx = g(x);
    for (int it = 1; it <= max_iter; ++it) {
        if (gx == 0.0 || std::fabs(gx) <= g_tol) return {x, gx, it};
        if ((glo < 0.0) == (gx < 0.0)) {
            lo = x;
            glo = gx;
        } else {
            hi = x;
            ghi = gx;
        }
        double width = hi - lo;
        if (width <= x_tol * (std::fabs(lo) + std::fabs(hi) + 1e-300))
            return {x, gx, it};
        double next;
        double d = gprime ? gprime(x) : 0.0;
        if (d != 0.0) {
            next = x - gx / d;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        } else {
            next = 0.5 * (lo + hi);
        }
        x = next;
        gx = g(x);
    }
    return {x, gx, max_iter};
}

// Expands a bracket for g starting from x0 by geometric growth in the
// direction that reduces |g|; throws when no sign change is found.
inline std::pair<double, double> expand_bracket(const std::function<double(double)>& g,
                                                double x0, double step,
                                                double lo_limit, double hi_limit,
                                                int max_expand = 200) {
    double g0 = g(x0);
    if (g0 == 0.0) return {x0, x0};
    double a = x0, b = x0, ga = g0, gb = g0;
    for (int i = 0; i < max_expand; ++i) {
        if (a - step > lo_limit) {
            double na = std::max(lo_limit, a - step);
            double gna = g(na);
            if (gna * g0 <= 0.0) return {na, a};
            a = na;
            ga = gna;
        }
        if (b + step < hi_limit) {
            double nb = std::min(hi_limit, b + step);
            double gnb = g(nb);
            if (gnb * g0 <= 0.0) return {b, nb};
            b = nb;
            gb = gnb;
        }
        step *= 2.0;
        if (a <= lo_limit && b >= hi_limit) break;
    }
    (void)ga;
    (void)gb;
    throw numerical_error("failed to bracket a root from x0 = " + std::to_string(x0));
}

} // namespace blowup
