#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"

namespace blowup {

// Adaptive Gauss-7 / Kronrod-15 quadrature on finite intervals, plus
// improper integrals over [a, inf) and over (0, a] with integrable endpoint
// behaviour.  Tail integrals are accumulated over dyadic panels and closed
// with an asymptotic model supplied by the caller (typically a power-law /
// regularly-varying closure); the panel loop stops once the closed estimate
// is self-consistent between successive panel counts.

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
    std::string warning; // non-fatal diagnostics (empty when clean)
};

namespace detail {

// Kronrod-15 abscissae (positive half) and weights; Gauss-7 weights.
inline constexpr double kron_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kron_w[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gauss_w[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelEstimate {
    double kronrod;
    double error;
};

template <class F>
PanelEstimate gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double kron = kron_w[7] * fc;
    double gauss = gauss_w[3] * fc;
    for (int i = 0; i < 7; ++i) {
        double x = h * kron_x[i];
        double fv = f(c - x) + f(c + x);
        kron += kron_w[i] * fv;
        if (i % 2 == 1) gauss += gauss_w[i / 2] * fv;
    }
    kron *= h;
    gauss *= h;
    double err = std::fabs(kron - gauss);
    // standard sharpened G-K error model
    err = err > 0.0 ? std::pow(200.0 * err, 1.5) : 0.0;
    if (!(err < std::fabs(kron) || kron == 0.0)) err = std::fabs(kron - gauss);
    return {kron, err};
}

} // namespace detail

// Adaptive quadrature of f over the finite interval [a, b].
template <class F>
QuadResult integrate(const F& f, double a, double b, double rel_tol = 1e-12,
                     double abs_tol = 1e-300, std::size_t max_panels = 4000) {
    QuadResult out;
    if (a == b) return out;
    struct Seg {
        double a, b, value, error;
    };
    auto first = detail::gk15(f, a, b);
    std::vector<Seg> segs{{a, b, first.kronrod, first.error}};
    out.evaluations = 15;
    double total = first.kronrod, total_err = first.error;
    std::size_t splits = 0;
    while (total_err > std::max(abs_tol, rel_tol * std::fabs(total))) {
        if (splits++ >= max_panels) {
            out.converged = false;
            out.warning = "adaptive quadrature: panel budget exhausted (error " +
                          std::to_string(total_err) + ")";
            break;
        }
        // split the worst segment
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].error > segs[worst].error) worst = i;
        Seg s = segs[worst];
        double m = 0.5 * (s.a + s.b);
        if (m <= s.a || m >= s.b) {
            out.converged = false;
            out.warning = "adaptive quadrature: interval below machine resolution";
            break;
        }
        auto left = detail::gk15(f, s.a, m);
        auto right = detail::gk15(f, m, s.b);
        out.evaluations += 30;
        total += left.kronrod + right.kronrod - s.value;
        total_err += left.error + right.error - s.error;
        segs[worst] = {s.a, m, left.kronrod, left.error};
        segs.push_back({m, s.b, right.kronrod, right.error});
    }
    // recompute totals from scratch to avoid drift
    total = 0.0;
    total_err = 0.0;
    for (const auto& s : segs) {
        total += s.value;
        total_err += s.error;
    }
    out.value = total;
    out.error_estimate = total_err;
    return out;
}

// Asymptotic closure model for a tail integral int_X^inf f, given X and f(X).
using TailClosure = std::function<double(double X, double fX)>;

// Closure for integrands asymptotic to a power law f ~ C x^p with p < -1:
// int_X^inf f ≈ X f(X) / (-p - 1).
inline TailClosure power_tail(double p) {
    if (!(p < -1.0))
        throw divergence_error("tail exponent " + std::to_string(p) +
                               " gives a divergent upper integral (need p < -1)");
    return [p](double X, double fX) { return X * fX / (-p - 1.0); };
}

// Integral of f over [a, inf).  Dyadic panels [a 2^k, a 2^(k+1)] are summed
// and the remainder past the current panel is closed with `closure`; the
// loop stops when successive closed estimates agree to rel_tol.  If the two
// final estimates disagree by more than warn_tol a warning is recorded.
template <class F>
QuadResult integrate_upper(const F& f, double a, const TailClosure& closure,
                           double rel_tol = 1e-10, int max_doublings = 400,
                           double warn_tol = 1e-6) {
    if (!(a > 0.0))
        throw precondition_error("integrate_upper requires a positive lower limit");
    QuadResult out;
    double partial = 0.0;
    double lo = a;
    double prev_est = std::numeric_limits<double>::quiet_NaN();
    double last_gap = std::numeric_limits<double>::quiet_NaN();
    bool done = false;
    for (int k = 0; k < max_doublings; ++k) {
        double hi = 2.0 * lo;
        QuadResult panel = integrate(f, lo, hi, rel_tol * 0.1);
        out.evaluations += panel.evaluations;
        partial += panel.value;
        out.error_estimate += panel.error_estimate;
        double fX = f(hi);
        double est = partial + closure(hi, fX);
        if (std::isfinite(prev_est)) {
            double gap = std::fabs(est - prev_est);
            last_gap = gap;
            if (gap <= rel_tol * std::fabs(est) + 1e-300) {
                out.value = est;
                done = true;
                break;
            }
        }
        prev_est = est;
        lo = hi;
        if (!std::isfinite(hi)) break;
    }
    if (!done) {
        out.value = prev_est;
        out.converged = false;
        out.warning = "upper integral: tail closure did not stabilise (last gap " +
                      std::to_string(last_gap) + ")";
    } else if (std::isfinite(last_gap) && last_gap > warn_tol * std::fabs(out.value)) {
        out.warning = "upper integral: closure agreement only " + std::to_string(last_gap);
    }
    return out;
}

// Integral of f over (0, a] with an integrable singularity allowed at 0.
// Geometric panels [a 2^-(k+1), a 2^-k] are accumulated until the panel
// contribution is negligible relative to the running total; the remaining
// sliver at the origin is closed with the measured geometric decay rate of
// the panel contributions (exact for power-law endpoint behaviour).
template <class F>
QuadResult integrate_origin(const F& f, double a, double rel_tol = 1e-12,
                            int max_halvings = 2000) {
    if (!(a > 0.0))
        throw precondition_error("integrate_origin requires a positive upper limit");
    QuadResult out;
    double total = 0.0;
    double hi = a;
    double panel_value = 0.0, prev_panel = 0.0;
    bool done = false;
    for (int k = 0; k < max_halvings; ++k) {
        double lo = 0.5 * hi;
        QuadResult panel = integrate(f, lo, hi, rel_tol * 0.1);
        out.evaluations += panel.evaluations;
        prev_panel = panel_value;
        panel_value = panel.value;
        total += panel_value;
        out.error_estimate += panel.error_estimate;
        if (k > 3 && std::fabs(panel_value) <= rel_tol * std::fabs(total)) {
            done = true;
            break;
        }
        hi = lo;
        if (hi < std::numeric_limits<double>::min() * 16) break;
    }
    if (prev_panel != 0.0) {
        double r = panel_value / prev_panel;
        if (r > 0.0 && r < 0.95) total += panel_value * r / (1.0 - r);
    }
    out.value = total;
    if (!done) {
        out.converged = false;
        out.warning = "origin integral: panel contributions did not become negligible";
    }
    return out;
}

} // namespace blowup
