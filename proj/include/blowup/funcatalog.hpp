#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "rootfind.hpp"
#include "rvcalc.hpp"

namespace blowup {

// Catalogued building blocks of the problem class: nonlinearities f with
// their antiderivative F and slow-variation decomposition f = g(Linv(u)),
// the slowly varying scale functions L (with L' of index -1), boundary
// weights K of index theta at the origin, and the coefficient field
// b(x) = K(d(x))^2.

// --- slow-variation scale function L ---------------------------------------

// L grows to infinity, varies slowly, and L' has index -1, so that
// L(u) = C exp( int_B^u ell(t)/t dt ) with ell = u L'/L slowly varying and
// tending to 0.  Catalogued instances are (log_m u)^alpha.
struct SlowVariationProfile {
    ScalarFunction L;    // the scale function
    ScalarFunction Lp;   // L'
    ScalarFunction Lpp;  // L''
    ScalarFunction ell;  // u L'(u)/L(u), the exponent density
    double B = std::exp(1.0); // reconstruction base with L(B) = C
    double C = 1.0;
    int m = 1;           // iterated-log depth
    double alpha = 1.0;  // outermost exponent
    double positive_lo = 1.0; // L > 0 (and Lp > 0) for u > positive_lo
    std::function<double(double)> inverse_hint; // closed-form inverse, optional

    // (log_m u)^alpha with the canonical base B = exp_m(1), C = 1.
    static SlowVariationProfile iterated_log_power(int m, double alpha) {
        if (m < 1) throw validation_error("scale function: iterated-log depth must be >= 1");
        if (!(alpha > 0.0)) throw validation_error("scale function: exponent must be > 0");
        SlowVariationProfile p;
        p.m = m;
        p.alpha = alpha;
        p.L = pow_of(iterated_log(m), alpha);
        p.Lp = p.L.derivative();
        p.Lpp = p.Lp.derivative();
        p.ell = extract_phi(p.L);
        p.B = iterated_exp_value(1.0, m);
        p.C = 1.0;
        p.positive_lo = iterated_exp_value(1.0, m - 1);
        p.L = p.L.with_domain_lo(p.positive_lo);
        p.inverse_hint = [m, alpha](double v) {
            return iterated_exp_value(std::pow(v, 1.0 / alpha), m);
        };
        return p;
    }

    // Numeric inverse: monotone bracketing plus safeguarded Newton,
    // relative tolerance 1e-12.
    double Linv(double v) const {
        if (!(v > 0.0))
            throw domain_error("inverse scale: argument must be positive, got " +
                               std::to_string(v));
        double lo = positive_lo * (1.0 + 1e-12) + 1e-300;
        double hi = std::numeric_limits<double>::quiet_NaN();
        if (inverse_hint) {
            double x0 = inverse_hint(v);
            if (std::isfinite(x0) && x0 > lo) hi = 2.0 * x0;
        }
        if (!std::isfinite(hi)) hi = std::max(4.0 * lo, 4.0);
        while (L.eval(hi) < v) {
            hi *= 4.0;
            if (hi > 1e300)
                throw numerical_error("inverse scale: value " + std::to_string(v) +
                                      " exceeds the representable range of the inverse");
        }
        auto g = [this, v](double x) { return L.eval(x) - v; };
        auto gp = [this](double x) { return Lp.eval(x); };
        RootResult r = solve_bracketed(g, gp, lo, hi, 1e-13);
        return r.x;
    }

    // C exp( int_B^u ell(t)/t dt ), the canonical reconstruction of L.
    double reconstruct(double u, double rel_tol = 1e-12) const {
        if (!(u >= B))
            throw domain_error("reconstruct: argument below the base B");
        if (u == B) return C;
        QuadResult q = integrate([this](double t) { return ell.eval(t) / t; }, B, u, rel_tol);
        return C * std::exp(q.value);
    }
};

// --- monotonicity certificate for f ----------------------------------------

struct A1Certificate {
    bool f_zero_at_zero = false;   // |f(0)| <= 1e-9
    bool f_positive = false;       // f > 0 on the sampled grid
    bool ratio_increasing = false; // f(u)/u strictly increasing on the grid
    double u_max_checked = 0.0;    // grid truncated where f overflows
    bool holds() const { return f_zero_at_zero && f_positive && ratio_increasing; }
};

inline A1Certificate a1_certificate(const ScalarFunction& f, double u_lo = 1e-2,
                                    double u_hi = 1e6, int n = 60) {
    A1Certificate c;
    double f0 = f.eval(0.0);
    c.f_zero_at_zero = std::fabs(f0) <= 1e-9;
    double step = std::pow(u_hi / u_lo, 1.0 / (n - 1));
    double prev_ratio = -std::numeric_limits<double>::infinity();
    bool positive = true, increasing = true;
    int usable = 0;
    double u = u_lo;
    for (int i = 0; i < n; ++i, u *= step) {
        double fu = f.eval(u);
        if (!std::isfinite(fu)) break;
        ++usable;
        c.u_max_checked = u;
        if (!(fu > 0.0)) positive = false;
        double ratio = fu / u;
        if (!(ratio > prev_ratio)) increasing = false;
        prev_ratio = ratio;
    }
    if (usable < 10)
        throw numerical_error("monotonicity certificate: fewer than 10 usable grid points");
    c.f_positive = positive;
    c.ratio_increasing = increasing;
    return c;
}

// --- nonlinearity ----------------------------------------------------------

struct NonlinearitySpec {
    std::string name;
    std::vector<double> params;

    ScalarFunction f;
    ScalarFunction F;      // antiderivative with F(0) = 0
    bool closed_F = true;  // false when F is quadrature-backed

    double rho = 1.0;      // index of f(L(u)) (decomposition) or of f' (regular branch)
    bool has_decomposition = false;
    bool regular_branch = false;
    SlowVariationProfile Lprof; // meaningful when has_decomposition
    ScalarFunction Lf;          // normalised slowly varying factor of f(L(u))/u^rho
    double zeta_lo = 1.0;       // profile integrand positive for y > zeta_lo
    int m = 0;                  // iterated-log depth of L (0 for regular branch)
    double alpha = 1.0;

    A1Certificate a1;

    // f composed with the scale function, as an expression tree.
    ScalarFunction f_of_L() const {
        if (!has_decomposition)
            throw precondition_error("nonlinearity '" + name + "' has no scale decomposition");
        return compose(f, Lprof.L);
    }
};

// F(t) = int_0^t f by adaptive quadrature (for families without a closed form).
inline ScalarFunction antiderivative_by_quadrature(const ScalarFunction& f,
                                                   const std::string& label) {
    auto feval = [f](double t) {
        if (t == 0.0) return 0.0;
        if (!(t > 0.0))
            throw domain_error("antiderivative evaluated at negative argument");
        return integrate([&f](double s) { return f.eval(s); }, 0.0, t, 1e-12).value;
    };
    return ScalarFunction::opaque(feval, label, [f](double t) { return f.eval(t); });
}

namespace detail {

// Boundary term of integrating cos(w)/(w log w) by parts twice; the
// difference B(W1) - B(W0) equals the integral up to O(1/(W0^3 log W0)).
inline double cos_tail_boundary(double w) {
    double lw = std::log(w);
    double phi = 1.0 / (w * lw);
    double phip = -(lw + 1.0) / (w * w * lw * lw);
    return std::sin(w) * phi + std::cos(w) * phip;
}

} // namespace detail

inline const std::vector<std::string>& catalog_f_names() {
    static const std::vector<std::string> names = {
        "expm1", "sinh", "coshm1", "exp_log", "power_exp",
        "exp2_m_e", "exp2_cos", "power", "exp_rho"};
    return names;
}

inline NonlinearitySpec catalog_f(const std::string& name,
                                  const std::vector<double>& params = {}) {
    auto want = [&](std::size_t k) {
        if (params.size() != k)
            throw validation_error("nonlinearity '" + name + "' expects " + std::to_string(k) +
                                   " parameter(s), got " + std::to_string(params.size()));
    };
    const ScalarFunction u = ScalarFunction::identity();
    const double e = std::exp(1.0);
    NonlinearitySpec s;
    s.name = name;
    s.params = params;

    if (name == "expm1") {
        want(0);
        s.f = exp_of(u) - 1.0;
        // e^t - t - 1, in the cancellation-safe form expm1(t) - t
        s.F = ScalarFunction::opaque([](double t) { return std::expm1(t) - t; },
                                     "F[expm1]", [](double t) { return std::expm1(t); });
        s.rho = 1.0;
        s.has_decomposition = true;
        s.Lprof = SlowVariationProfile::iterated_log_power(1, 1.0);
        s.Lf = (u - 1.0) / u;
        s.zeta_lo = 1.0;
        s.m = 1;
    } else if (name == "sinh") {
        want(0);
        s.f = sinh_of(u);
        // cosh(t) - 1 = 2 sinh^2(t/2), exact near 0
        s.F = ScalarFunction::opaque(
            [](double t) { double h = std::sinh(0.5 * t); return 2.0 * h * h; },
            "F[sinh]", [](double t) { return std::sinh(t); });
        s.rho = 1.0;
        s.has_decomposition = true;
        s.Lprof = SlowVariationProfile::iterated_log_power(1, 1.0);
        s.Lf = (u * u - 1.0) / (2.0 * u * u);
        s.zeta_lo = 1.0;
        s.m = 1;
    } else if (name == "coshm1") {
        want(0);
        s.f = cosh_of(u) - 1.0;
        // sinh(t) - t, by Taylor series below 1e-3 where the difference drowns
        s.F = ScalarFunction::opaque(
            [](double t) {
                if (std::fabs(t) < 1e-3) {
                    double t2 = t * t;
                    return t * t2 * (1.0 / 6.0 + t2 * (1.0 / 120.0 + t2 / 5040.0));
                }
                return std::sinh(t) - t;
            },
            "F[coshm1]",
            [](double t) { double h = std::sinh(0.5 * t); return 2.0 * h * h; });
        s.rho = 1.0;
        s.has_decomposition = true;
        s.Lprof = SlowVariationProfile::iterated_log_power(1, 1.0);
        s.Lf = (u - 1.0) * (u - 1.0) / (2.0 * u * u);
        s.zeta_lo = 1.0;
        s.m = 1;
    } else if (name == "exp_log") {
        want(0);
        s.f = exp_of(u) * log_of(1.0 + u);
        // int_0^t e^s log(1+s) ds = e^t log(1+t) - (Ei(t+1) - Ei(1))/e
        {
            ScalarFunction f_copy = s.f;
            auto Feval = [e](double t) {
                if (t == 0.0) return 0.0;
                return std::exp(t) * std::log1p(t) -
                       (std::expint(t + 1.0) - std::expint(1.0)) / e;
            };
            s.F = ScalarFunction::opaque(Feval, "F[exp_log]",
                                         [f_copy](double t) { return f_copy.eval(t); });
        }
        s.rho = 1.0;
        s.has_decomposition = true;
        s.Lprof = SlowVariationProfile::iterated_log_power(1, 1.0);
        s.Lf = log_of(1.0 + log_of(u));
        s.zeta_lo = 1.0;
        s.m = 1;
    } else if (name == "power_exp") { // u^beta exp(rho u^(1/alpha))
        want(3);
        double beta = params[0], rho = params[1], alpha = params[2];
        if (!(beta >= 1.0))
            throw validation_error("power_exp: need beta >= 1 so that f(0) = 0 and f/u grows");
        if (!(rho > 0.0)) throw validation_error("power_exp: need rho > 0");
        if (!(alpha > 0.0)) throw validation_error("power_exp: need alpha > 0");
        s.f = pow_of(u, beta) * exp_of(rho * pow_of(u, 1.0 / alpha));
        if (beta == 1.0 && rho == 1.0 && alpha == 1.0) {
            s.F = (u - 1.0) * exp_of(u) + 1.0; // int_0^t s e^s ds
        } else {
            s.F = antiderivative_by_quadrature(s.f, "F[power_exp]");
            s.closed_F = false;
        }
        s.rho = rho;
        s.has_decomposition = true;
        s.Lprof = SlowVariationProfile::iterated_log_power(1, alpha);
        s.Lf = pow_of(log_of(u), alpha * beta); // f(L(u)) = u^rho (log u)^(alpha beta)
        s.zeta_lo = 1.0;
        s.m = 1;
        s.alpha = alpha;
    } else if (name == "exp2_m_e") { // exp(exp(u)) - e
        want(0);
        s.f = exp_of(exp_of(u)) - e;
        // int_0^t (exp(exp(s)) - e) ds = Ei(e^t) - Ei(1) - e t
        {
            ScalarFunction f_copy = s.f;
            auto Feval = [e](double t) {
                if (t == 0.0) return 0.0;
                double et = std::exp(t);
                if (et > 700.0) return std::numeric_limits<double>::infinity();
                return std::expint(et) - std::expint(1.0) - e * t;
            };
            s.F = ScalarFunction::opaque(Feval, "F[exp2_m_e]",
                                         [f_copy](double t) { return f_copy.eval(t); });
        }
        s.rho = 1.0;
        s.has_decomposition = true;
        s.Lprof = SlowVariationProfile::iterated_log_power(2, 1.0);
        s.Lf = (u - e) / u;
        s.zeta_lo = e;
        s.m = 2;
    } else if (name == "exp2_cos") {
        // exp(exp(u)) + cos(exp(exp(u))) above u = 1.5, extended below by the
        // power f_c (u/u_c)^s matching value and slope at the junction.  The
        // oscillatory form makes f(u)/u dip on short intervals around points
        // where sin(exp(exp(u))) = 1; below the junction those dips are wide
        // enough to matter, so the extension — which is ours to choose — uses
        // a power law that keeps f(u)/u strictly increasing there.  Above it
        // the dips shrink double-exponentially fast.
        want(0);
        const double uc = 1.5;
        const double wc = std::exp(std::exp(uc));
        const double fc = wc + std::cos(wc);
        const double dc = wc * std::exp(uc) * (1.0 - std::sin(wc));
        const double sp = uc * dc / fc; // splice exponent, ~3.97
        auto fev = [uc, wc, fc, sp](double v) {
            if (v >= uc) {
                double ev = std::exp(v);
                double w = ev > 700.0 ? std::numeric_limits<double>::infinity()
                                      : std::exp(ev);
                return w + std::cos(w);
            }
            return fc * std::pow(v / uc, sp);
        };
        auto fdv = [uc, fc, sp](double v) {
            if (v >= uc) {
                double ev = std::exp(v);
                double w = std::exp(ev);
                return w * ev * (1.0 - std::sin(w));
            }
            return sp * fc * std::pow(v / uc, sp - 1.0) / uc;
        };
        s.f = ScalarFunction::opaque(fev, "exp2_cos", fdv);
        {
            const double Fc = fc * uc / (sp + 1.0);
            auto Feval = [uc, wc, fc, sp, Fc](double t) {
                if (t <= uc)
                    return t <= 0.0 ? 0.0 : Fc * std::pow(t / uc, sp + 1.0);
                double et = std::exp(t);
                if (et > 700.0) return std::numeric_limits<double>::infinity();
                double W = std::exp(et);
                double osc = -detail::cos_tail_boundary(wc);
                if (W < 1e12) osc += detail::cos_tail_boundary(W);
                return Fc + std::expint(et) - std::expint(std::exp(uc)) + osc;
            };
            ScalarFunction f_copy = s.f;
            s.F = ScalarFunction::opaque(Feval, "F[exp2_cos]",
                                         [f_copy](double t) { return f_copy.eval(t); });
            s.closed_F = false;
        }
        s.rho = 1.0;
        s.has_decomposition = true;
        s.Lprof = SlowVariationProfile::iterated_log_power(2, 1.0);
        // f(L(u)) = u + cos(u) = u (1 + o(1)): the slowly varying factor is
        // identically 1; the oscillation lives in the o(1).
        s.Lf = ScalarFunction::constant(1.0);
        s.zeta_lo = e;
        s.m = 2;
    } else if (name == "power") { // u^p, the regularly varying branch
        want(1);
        double p = params[0];
        if (!(p >= 1.0)) throw validation_error("power: need exponent p >= 1");
        s.f = pow_of(u, p);
        s.F = pow_of(u, p + 1.0) / (p + 1.0);
        s.rho = p - 1.0; // index of f'
        s.regular_branch = true;
        s.Lf = ScalarFunction::constant(1.0);
        s.m = 0;
    } else if (name == "exp_rho") { // e^(rho u): the closed-form fixture
        want(1);
        double rho = params[0];
        if (!(rho > 0.0)) throw validation_error("exp_rho: need rho > 0");
        s.f = exp_of(rho * u);
        s.F = (exp_of(rho * u) - 1.0) / rho;
        s.rho = rho;
        s.has_decomposition = true;
        s.Lprof = SlowVariationProfile::iterated_log_power(1, 1.0);
        s.Lf = ScalarFunction::constant(1.0); // f(log u) = u^rho exactly
        s.zeta_lo = 1.0;
        s.m = 1;
    } else {
        std::string known;
        for (const auto& n : catalog_f_names()) known += (known.empty() ? "" : ", ") + n;
        throw validation_error("unknown nonlinearity '" + name + "' (known: " + known + ")");
    }
    s.a1 = a1_certificate(s.f);
    return s;
}

// f(u) = g(Linv(u)) above the junction L(B) = C, spliced to a monotone C^1
// cubic through the origin below it (slope at 0 set to half the junction
// slope).  The slowly varying factor of f(L(u)) is g's own.
inline NonlinearitySpec compose_f(const RVClass& g, const SlowVariationProfile& Lprof) {
    if (!(g.index > 0.0))
        throw validation_error("compose_f: need a positive index for g");
    const double uj = Lprof.C; // junction value L(B)
    auto gfn = g.fn;
    auto Lp = Lprof;
    auto raw = [gfn, Lp](double v) { return gfn.eval(Lp.Linv(v)); };
    auto raw_d = [gfn, Lp](double v) {
        double x = Lp.Linv(v);
        return gfn.deriv(x) / Lp.Lp.eval(x);
    };
    double fj = raw(uj), dj = raw_d(uj);
    if (!(fj > 0.0 && dj > 0.0))
        throw validation_error("compose_f: composed function not positive/increasing at the junction");
    // cubic Hermite through (0,0) with slope dj/2 and (uj, fj) with slope dj
    double d0 = 0.5 * dj;
    double h00_c3, h00_c2; // p(v) = a v^3 + b v^2 + c v on [0, uj]
    {
        double c = d0;
        double A = (dj + c) * uj - 2.0 * fj;   // a uj^3
        double Bc = 3.0 * fj - (dj + 2.0 * c) * uj; // b uj^2
        h00_c3 = A / (uj * uj * uj);
        h00_c2 = Bc / (uj * uj);
    }
    double c1 = d0;
    auto splice = [h00_c3, h00_c2, c1](double v) {
        return ((h00_c3 * v + h00_c2) * v + c1) * v;
    };
    auto splice_d = [h00_c3, h00_c2, c1](double v) {
        return (3.0 * h00_c3 * v + 2.0 * h00_c2) * v + c1;
    };
    for (int i = 0; i <= 64; ++i) {
        double v = uj * i / 64.0;
        if (!(splice_d(v) > 0.0))
            throw validation_error("compose_f: splice loses monotonicity near v = " +
                                   std::to_string(v) + " (junction " + std::to_string(uj) + ")");
    }
    auto fev = [raw, splice, uj](double v) { return v >= uj ? raw(v) : splice(v); };
    auto fdv = [raw_d, splice_d, uj](double v) { return v >= uj ? raw_d(v) : splice_d(v); };
    // f(u)/u must be increasing near infinity: u f'(u)/f(u) > 1 at large u
    for (double mul : {10.0, 100.0}) {
        double v = std::max(mul * uj, mul);
        double el = v * raw_d(v) / raw(v);
        if (!(el > 1.0))
            throw validation_error("compose_f: u f'(u)/f(u) = " + std::to_string(el) +
                                   " at u = " + std::to_string(v) +
                                   "; the composed f(u)/u is not increasing near infinity");
    }

    NonlinearitySpec s;
    s.name = "composed";
    s.f = ScalarFunction::opaque(fev, "g(Linv)", fdv);
    s.F = antiderivative_by_quadrature(s.f, "F[composed]");
    s.closed_F = false;
    s.rho = g.index;
    s.has_decomposition = true;
    s.Lprof = Lprof;
    s.Lf = g.sv_part;
    s.zeta_lo = std::max({Lprof.positive_lo, g.sv_part.domain_lo(), 1.0});
    s.m = Lprof.m;
    s.alpha = Lprof.alpha;
    s.a1 = a1_certificate(s.f);
    return s;
}

// --- boundary weights ------------------------------------------------------

struct WeightSpec {
    std::string name;
    std::vector<double> params;
    double theta = 0.0; // effective index at 0+ (includes any log(1+t)^alpha power)
    ScalarFunction K;   // on (0, nu)
    ScalarFunction L_K; // slowly varying factor K(t) / t^theta
    double nu = std::numeric_limits<double>::infinity();
    bool ik_closed = false;
    bool h_monotone_ok = true; // nondecreasing near 0 when theta = 0

    // I_K(t) = int_0^t K(s) ds
    double IK(double t, double rel_tol = 1e-12) const {
        if (!(t > 0.0) || !(t < nu))
            throw domain_error("cumulative weight: t = " + std::to_string(t) +
                               " outside (0, nu)");
        if (ik_closed) return std::pow(t, theta + 1.0) / (theta + 1.0);
        QuadResult q = integrate_origin([this](double s) { return K.eval(s); }, t, rel_tol);
        return q.value;
    }
};

inline const std::vector<std::string>& catalog_weight_names() {
    static const std::vector<std::string> names = {
        "power", "sin_power", "power_log", "power_itlog", "power_expgamma"};
    return names;
}

inline WeightSpec catalog_weight(const std::string& name, double theta,
                                 const std::vector<double>& params = {}) {
    auto want = [&](std::size_t k) {
        if (params.size() != k)
            throw validation_error("weight '" + name + "' expects " + std::to_string(k) +
                                   " extra parameter(s), got " + std::to_string(params.size()));
    };
    if (!(theta >= 0.0))
        throw validation_error("weight index theta must be >= 0, got " + std::to_string(theta));
    const ScalarFunction t = ScalarFunction::identity();
    WeightSpec w;
    w.name = name;
    w.params = params;

    if (name == "power") { // t^theta
        want(0);
        w.theta = theta;
        w.K = pow_of(t, theta);
        w.L_K = ScalarFunction::constant(1.0);
        w.nu = std::numeric_limits<double>::infinity();
        w.ik_closed = true;
    } else if (name == "sin_power") { // (sin t)^theta
        want(0);
        w.theta = theta;
        w.K = pow_of(sin_of(t), theta);
        w.L_K = pow_of(sin_of(t) / t, theta);
        w.nu = std::acos(-1.0);
    } else if (name == "power_log") { // t^theta log(1+t)^alpha, index theta + alpha at 0+
        want(1);
        double alpha = params[0];
        if (!(alpha >= 0.0)) throw validation_error("power_log: need alpha >= 0");
        w.theta = theta + alpha;
        w.K = pow_of(t, theta) * pow_of(log_of(1.0 + t), alpha);
        w.L_K = pow_of(log_of(1.0 + t) / t, alpha);
        w.nu = std::numeric_limits<double>::infinity();
    } else if (name == "power_itlog") { // t^theta [log_m(1/t)]^(-alpha)
        want(2);
        double alpha = params[0];
        int m = static_cast<int>(params[1]);
        if (m < 1 || params[1] != m)
            throw validation_error("power_itlog: iteration depth must be a positive integer");
        if (theta == 0.0 && !(alpha >= 0.0))
            throw validation_error("power_itlog: theta = 0 with alpha < 0 makes the weight "
                                   "decreasing near 0 (nondecreasing hypothesis fails)");
        w.theta = theta;
        ScalarFunction it = iterated_log(m); // applied to 1/t below
        ScalarFunction factor = pow_of(compose(it, 1.0 / t), -alpha);
        w.K = pow_of(t, theta) * factor;
        w.L_K = factor;
        w.nu = 1.0 / iterated_exp_value(1.0, m - 1);
    } else if (name == "power_expgamma") { // t^theta exp(-[log(1/t)]^gamma)
        want(1);
        double gamma = params[0];
        if (!(gamma > 0.0 && gamma < 1.0))
            throw validation_error("power_expgamma: need gamma in (0, 1), got " +
                                   std::to_string(gamma));
        w.theta = theta;
        ScalarFunction factor = exp_of(-1.0 * pow_of(log_of(1.0 / t), gamma));
        w.K = pow_of(t, theta) * factor;
        w.L_K = factor;
        w.nu = 1.0;
    } else {
        std::string known;
        for (const auto& n : catalog_weight_names()) known += (known.empty() ? "" : ", ") + n;
        throw validation_error("unknown weight '" + name + "' (known: " + known + ")");
    }

    if (w.theta == 0.0) {
        // nondecreasing near the origin, sampled on a geometric grid
        double hi = std::min(w.nu * 0.5, 0.25);
        double prev = -std::numeric_limits<double>::infinity();
        bool ok = true;
        for (int k = 40; k >= 0; --k) {
            double tt = hi * std::pow(0.7, k);
            double kv = w.K.eval(tt);
            if (kv < prev * (1.0 - 1e-12)) ok = false;
            prev = kv;
        }
        w.h_monotone_ok = ok;
    }
    return w;
}

// --- coefficient field b(x) ------------------------------------------------

// b(x) = K(d(x))^2 with d the distance to the blow-up boundary; zero on the
// degenerate set omega0 and blended to the outside value by a C^1 cubic over
// a collar of width 0.05 * diam(omega0).  The weight argument is clamped at
// 0.9 nu so b stays defined deep in the interior.  An optional multiplicative
// perturbation (1 + eta d/(1+d)) vanishes at the boundary, for robustness
// experiments against coefficients that are only asymptotically K^2(d).
struct BField {
    WeightSpec weight;
    Domain dom;
    Omega0 omega0;
    double eta_amp = 0.0;
    double collar = 0.0;

    double operator()(double x) const { return value_with_distance(x, dom.distance(x)); }

    // Same field with the boundary distance supplied by the caller; lets mesh
    // code evaluate b at d = 0 (boundary nodes), where the distance function
    // itself would reject the coordinate.
    double value_with_distance(double x, double d) const {
        if (omega0.covers(x)) return 0.0;
        double dc = std::min(d, 0.9 * weight.nu);
        double k = weight.K.eval(dc);
        double b = k * k;
        if (omega0.present) b *= smoothstep01(omega0.distance_to(x) / collar);
        if (eta_amp != 0.0) b *= 1.0 + eta_amp * d / (1.0 + d);
        return b;
    }
};

inline BField weight_to_b(const WeightSpec& w, const Domain& dom,
                          const Omega0& omega0 = Omega0::none(), double eta_amp = 0.0) {
    if (!(std::fabs(eta_amp) < 1.0))
        throw validation_error("perturbation amplitude must satisfy |eta| < 1");
    omega0.validate_inside(dom);
    BField b;
    b.weight = w;
    b.dom = dom;
    b.omega0 = omega0;
    b.eta_amp = eta_amp;
    b.collar = omega0.present ? 0.05 * omega0.diameter() : 0.0;
    return b;
}

// Keller-Osserman test driven by the catalogued antiderivative.
inline KOResult keller_osserman(const NonlinearitySpec& n, double start = 1.0) {
    return keller_osserman_integral([&n](double t) { return n.F.eval(t); }, start);
}

} // namespace blowup
