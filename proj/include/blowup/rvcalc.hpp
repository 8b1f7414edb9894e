#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "quadrature.hpp"
#include "trend.hpp"

namespace blowup {

// Calculus of regular variation at infinity: index estimation from ratio
// statistics, normalised-slow-variation residuals, the integral
// representation of slowly varying functions, tail-integral ratio limits,
// the Keller-Osserman convergence test, and rapid-variation verdicts.
// Every asymptotic statement is certified by a trend over a geometric grid,
// never by a single evaluation.

// --- classification types --------------------------------------------------

struct RVClass {
    double index = 0.0;
    bool normalised = false;
    ScalarFunction fn;      // the full function R
    ScalarFunction sv_part; // slowly varying factor L in R(u) = u^index L(u)
};

struct RepresentationSpec {
    double M_hat = 1.0;   // limiting constant
    ScalarFunction phi;   // phi(t) -> 0 at infinity
    double B = std::exp(1.0); // lower integration bound
};

// --- index estimation ------------------------------------------------------

struct IndexEstimate {
    std::vector<double> u;       // usable grid points (truncated at overflow)
    std::vector<double> index;   // per-point estimates log(R(xi u)/R(u))/log xi
    double value = 0.0;          // final-point estimate
    std::vector<double> residual; // |index_k - value|
    double band_lo = 0.0, band_hi = 0.0; // oscillation band over the upper half grid
    bool truncated_overflow = false;     // grid cut at the largest usable point
};

inline IndexEstimate rv_index_estimate(const ScalarFunction& R, double xi,
                                       const std::vector<double>& u_grid) {
    if (!(xi > 0.0) || xi == 1.0)
        throw validation_error("rv_index_estimate: scale factor must be positive and != 1");
    if (u_grid.size() < 4)
        throw validation_error("rv_index_estimate: grid needs at least 4 points");
    for (std::size_t i = 1; i < u_grid.size(); ++i)
        if (!(u_grid[i] > u_grid[i - 1]))
            throw validation_error("rv_index_estimate: grid must be strictly increasing");

    IndexEstimate out;
    const double lx = std::log(xi);
    for (double u : u_grid) {
        double la = R.log_eval(u);
        double lb = R.log_eval(xi * u);
        if (!std::isfinite(la) || !std::isfinite(lb)) {
            out.truncated_overflow = true;
            break;
        }
        out.u.push_back(u);
        out.index.push_back((lb - la) / lx);
    }
    if (out.u.size() < 2)
        throw numerical_error("rv_index_estimate: no usable grid points before overflow");
    out.value = out.index.back();
    for (double e : out.index) out.residual.push_back(std::fabs(e - out.value));
    std::size_t half = out.index.size() / 2;
    auto [lo, hi] = std::minmax_element(out.index.begin() + half, out.index.end());
    out.band_lo = *lo;
    out.band_hi = *hi;
    return out;
}

// --- normalised slow variation ---------------------------------------------

struct SvCheck {
    std::vector<double> u;
    std::vector<double> residual; // u L'(u) / L(u)
    TrendVerdict verdict;         // on |residual|
    bool normalised_slowly_varying = false;
};

inline SvCheck normalised_sv_check(const ScalarFunction& L,
                                   const std::vector<double>& u_grid,
                                   double threshold = 1e-2) {
    SvCheck out;
    std::vector<double> mags;
    for (double u : u_grid) {
        double lv = L.eval(u);
        if (!(lv > 0.0))
            throw domain_error("normalised_sv_check: function non-positive at u = " +
                               std::to_string(u));
        double r = u * L.deriv(u) / lv;
        out.u.push_back(u);
        out.residual.push_back(r);
        mags.push_back(std::fabs(r));
    }
    out.verdict = assess_trend(mags, threshold);
    out.normalised_slowly_varying = out.verdict.pass;
    return out;
}

// --- representation of slowly varying functions ----------------------------

// L(u) = M_hat * exp( int_B^u phi(t)/t dt ).
inline double representation_eval(const RepresentationSpec& spec, double u,
                                  double rel_tol = 1e-10) {
    if (!(u >= spec.B))
        throw domain_error("representation_eval: u = " + std::to_string(u) +
                           " below the lower bound B = " + std::to_string(spec.B));
    if (u == spec.B) return spec.M_hat;
    auto integrand = [&spec](double t) { return spec.phi.eval(t) / t; };
    QuadResult q = integrate(integrand, spec.B, u, rel_tol);
    return spec.M_hat * std::exp(q.value);
}

// phi(u) = u L'(u)/L(u), the exponent density recovered from L.
inline ScalarFunction extract_phi(const ScalarFunction& L) {
    return ScalarFunction::identity() * L.derivative() / L;
}

// --- tail-integral ratio limit ---------------------------------------------

struct KaramataResult {
    double u = 0.0;
    double ratio = 0.0;     // u^(j+1) R(u) / int_u^inf x^j R(x) dx
    double expected = 0.0;  // -(j + rho + 1)
    double residual = 0.0;  // ratio - expected
    double tail = 0.0;      // the tail integral value
    std::string warning;
};

// Tail closure for integrands behaving like C x^{-1} (log x)^{-s}, s > 1:
// the exponent s is measured from the integrand at X and X^2.
template <class G>
double marginal_log_tail(const G& g, double X) {
    double w1 = X * g(X);
    double X2 = X * X;
    double w2 = X2 * g(X2);
    if (!(w1 > 0.0) || !(w2 > 0.0))
        throw divergence_error("marginal tail: integrand not positive at closure points");
    double s = -std::log(w2 / w1) / std::log(2.0);
    if (!(s > 1.02))
        throw divergence_error("marginal tail integral appears divergent (log exponent " +
                               std::to_string(s) + " <= 1)");
    return w1 * std::log(X) / (s - 1.0);
}

inline KaramataResult karamata_residual(const ScalarFunction& R, double rho, double j,
                                        double u, double rel_tol = 1e-10) {
    if (!(u > 0.0)) throw validation_error("karamata_residual: u must be positive");
    const double p = j + rho; // tail-integrand growth exponent
    auto g = [&R, j](double x) { return std::pow(x, j) * R.eval(x); };

    KaramataResult out;
    out.u = u;
    out.expected = -(j + rho + 1.0);
    if (p < -1.0 - 1e-9) {
        // cutoff pushed past 1e3 * u (>= 10 doublings) before closure applies
        QuadResult partial;
        double lo = u, tail_val = 0.0;
        TailClosure closure = power_tail(p);
        double prev = std::numeric_limits<double>::quiet_NaN();
        bool done = false;
        for (int k = 0; k < 400; ++k) {
            double hi = 2.0 * lo;
            QuadResult panel = integrate(g, lo, hi, rel_tol * 0.1);
            partial.value += panel.value;
            double est = partial.value + closure(hi, g(hi));
            if (k >= 10 && std::isfinite(prev) &&
                std::fabs(est - prev) <= rel_tol * std::fabs(est)) {
                tail_val = est;
                done = true;
                break;
            }
            prev = est;
            lo = hi;
        }
        if (!done) {
            tail_val = prev;
            out.warning = "tail closure did not stabilise";
        }
        out.tail = tail_val;
    } else if (std::fabs(p + 1.0) <= 1e-9) {
        // marginally integrable only through a decaying slowly varying factor
        double X = 1024.0 * u;
        QuadResult head = integrate(g, u, X, rel_tol);
        out.tail = head.value + marginal_log_tail(g, X);
        out.warning = "marginal tail: log-model closure in use";
    } else {
        throw divergence_error("tail integral diverges: exponent j + rho = " +
                               std::to_string(p) + " >= -1");
    }
    if (!(out.tail > 0.0))
        throw numerical_error("karamata_residual: nonpositive tail integral");
    out.ratio = std::pow(u, j + 1.0) * R.eval(u) / out.tail;
    out.residual = out.ratio - out.expected;
    return out;
}

// --- Keller-Osserman test --------------------------------------------------

enum class KOVerdict { converges, diverges, inconclusive };

struct KOResult {
    KOVerdict verdict = KOVerdict::inconclusive;
    double value = std::numeric_limits<double>::quiet_NaN(); // finite when convergent
    std::vector<double> increments; // per-decade panel integrals of 1/sqrt(F)
    std::vector<double> ratios;     // successive increment ratios
};

// Convergence of int_start^inf dt / sqrt(F(t)).  Partial integrals are
// accumulated over decade panels [10^k, 10^(k+1)); the verdict compares the
// decay of increments against geometric rates: clearly geometric decay
// certifies convergence, non-decaying increments certify divergence, the
// band in between stays inconclusive (never a false positive).
inline KOResult keller_osserman_integral(const std::function<double(double)>& F,
                                         double start = 1.0, int max_decades = 12,
                                         double rel_tol = 1e-12) {
    if (!(start > 0.0)) throw validation_error("keller_osserman: start must be positive");
    auto G = [&F](double t) {
        double Ft = F(t);
        if (Ft < 0.0)
            throw domain_error("keller_osserman: negative antiderivative at t = " +
                               std::to_string(t));
        double s = std::sqrt(Ft);
        return s > 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity();
    };
    if (!(F(start) > 0.0))
        throw domain_error("keller_osserman: antiderivative must be positive at the start point");

    KOResult out;
    double partial = 0.0;
    int negligible_streak = 0;
    for (int k = 0; k < max_decades; ++k) {
        double lo = start * std::pow(10.0, k);
        double hi = 10.0 * lo;
        QuadResult panel = integrate(G, lo, hi, rel_tol);
        out.increments.push_back(panel.value);
        partial += panel.value;
        if (panel.value <= 1e-16 * partial)
            ++negligible_streak;
        else
            negligible_streak = 0;
        if (negligible_streak >= 2) break; // tail numerically exhausted
    }
    for (std::size_t k = 0; k + 1 < out.increments.size(); ++k) {
        double a = out.increments[k], b = out.increments[k + 1];
        out.ratios.push_back(a > 0.0 ? b / a : 0.0);
    }
    if (out.ratios.empty()) return out;

    std::size_t look = std::min<std::size_t>(3, out.ratios.size());
    bool geometric = true, flat = true, nonincreasing = true;
    for (std::size_t i = out.ratios.size() - look; i < out.ratios.size(); ++i) {
        double r = out.ratios[i];
        geometric = geometric && r <= 0.95;
        flat = flat && r >= 0.999;
        if (i > out.ratios.size() - look)
            nonincreasing = nonincreasing && out.ratios[i] <= out.ratios[i - 1] * 1.001 + 1e-6;
    }
    if (negligible_streak >= 2 || (geometric && nonincreasing)) {
        out.verdict = KOVerdict::converges;
        double r = out.ratios.back();
        double closure = (r > 0.0 && r < 1.0) ? out.increments.back() * r / (1.0 - r) : 0.0;
        out.value = partial + closure;
    } else if (flat) {
        out.verdict = KOVerdict::diverges;
        out.value = std::numeric_limits<double>::infinity();
    }
    return out;
}

// --- rapid variation -------------------------------------------------------

struct RapidVariationReport {
    struct PerLambda {
        double lambda = 1.0;
        std::vector<double> u;
        std::vector<double> log_ratio; // log( Linv(lambda u) / Linv(u) )
        bool pass = false;
    };
    std::vector<PerLambda> entries;
    bool rapidly_varying = false;
};

// Verdict that Linv(lambda u)/Linv(u) tends to infinity for lambda > 1,
// to 0 for lambda < 1, and equals 1 for lambda = 1.  Evaluated in log space
// so exponential towers never overflow.
inline RapidVariationReport rapid_variation_check(const ScalarFunction& Linv,
                                                  const std::vector<double>& lambdas,
                                                  const std::vector<double>& u_grid,
                                                  double big = std::log(1e6)) {
    RapidVariationReport out;
    out.rapidly_varying = true;
    for (double lam : lambdas) {
        if (!(lam > 0.0))
            throw validation_error("rapid_variation_check: lambda must be positive");
        RapidVariationReport::PerLambda e;
        e.lambda = lam;
        for (double u : u_grid) {
            e.u.push_back(u);
            e.log_ratio.push_back(Linv.log_eval(lam * u) - Linv.log_eval(u));
        }
        if (lam == 1.0) {
            e.pass = true;
            for (double lr : e.log_ratio) e.pass = e.pass && std::fabs(lr) <= 1e-10;
        } else if (lam > 1.0) {
            e.pass = strictly_increasing(e.log_ratio) && e.log_ratio.back() >= big;
        } else {
            std::vector<double> neg;
            for (double lr : e.log_ratio) neg.push_back(-lr);
            e.pass = strictly_increasing(neg) && e.log_ratio.back() <= -big;
        }
        out.rapidly_varying = out.rapidly_varying && e.pass;
        out.entries.push_back(std::move(e));
    }
    return out;
}

// --- named scalar functions (shared by tests and the CLI front end) --------

inline ScalarFunction named_scalar_function(const std::string& name,
                                            const std::vector<double>& params) {
    auto want = [&](std::size_t n) {
        if (params.size() != n)
            throw validation_error("function '" + name + "' expects " + std::to_string(n) +
                                   " parameter(s), got " + std::to_string(params.size()));
    };
    ScalarFunction u = ScalarFunction::identity();
    if (name == "power") {
        want(1);
        return pow_of(u, params[0]).with_domain_lo(0.0);
    }
    if (name == "power_log") { // u^p * (log u)^alpha
        want(2);
        return (pow_of(u, params[0]) * pow_of(log_of(u), params[1])).with_domain_lo(1.0);
    }
    if (name == "constant") {
        want(1);
        return ScalarFunction::constant(params[0]);
    }
    if (name == "log") {
        want(0);
        return log_of(u).with_domain_lo(1.0);
    }
    if (name == "loglog") {
        want(0);
        return log_of(log_of(u)).with_domain_lo(std::exp(1.0));
    }
    if (name == "exp") {
        want(0);
        return exp_of(u);
    }
    if (name == "exp_rho") { // e^(rho u)
        want(1);
        return exp_of(params[0] * u);
    }
    if (name == "expm1") {
        want(0);
        return (exp_of(u) - 1.0).with_domain_lo(0.0);
    }
    if (name == "sinh") {
        want(0);
        return sinh_of(u).with_domain_lo(0.0);
    }
    if (name == "coshm1") {
        want(0);
        return (cosh_of(u) - 1.0).with_domain_lo(0.0);
    }
    if (name == "exp2_m_e") { // exp(exp u) - e
        want(0);
        return (exp_of(exp_of(u)) - std::exp(1.0)).with_domain_lo(0.0);
    }
    if (name == "osc") { // exp{ (log u)^(1/3) cos((log u)^(1/3)) }, slowly varying
        want(0);
        ScalarFunction cube_root_log = pow_of(log_of(u), 1.0 / 3.0);
        return exp_of(cube_root_log * cos_of(cube_root_log)).with_domain_lo(1.0);
    }
    throw validation_error("unknown function name '" + name + "'");
}

} // namespace blowup
