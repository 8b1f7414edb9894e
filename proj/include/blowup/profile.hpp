#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "funcatalog.hpp"
#include "quadrature.hpp"
#include "rootfind.hpp"
#include "trend.hpp"

namespace blowup {

// Blow-up profiles.  Phi is defined implicitly by
//   zeta(Phi(t)) = I_K(t),  zeta(x) = int_x^inf sqrt(L'(y)) y^(-(rho+1)/2) / sqrt(Lf(y)) dy,
// and carries the boundary rate L(Phi(d)) of the slowly-varying branch.  The
// classical profile h of the regularly-varying branch solves
//   int_h(t)^inf ds / sqrt(2 F(s)) = I_K(t).

// Geometric grid from `from` to `to` inclusive (works in either direction).
inline std::vector<double> geometric_grid(double from, double to, int n) {
    if (!(from > 0.0) || !(to > 0.0) || n < 2)
        throw validation_error("geometric grid needs positive endpoints and n >= 2");
    std::vector<double> g(n);
    double r = std::pow(to / from, 1.0 / (n - 1));
    double x = from;
    for (int i = 0; i < n; ++i, x *= r) g[i] = x;
    g.back() = to;
    return g;
}

struct ZetaValue {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    std::string warning; // nonempty when the tail closure agreed worse than 1e-6
};

struct PhiPoint {
    double t = 0.0;
    double phi = 0.0;
    double phi_p = 0.0;
    double phi_pp = 0.0;
    double rate = 0.0;      // L(Phi(t))
    double roundtrip = 0.0; // |zeta(Phi) - I_K(t)| / I_K(t)
};

struct ProfileTable {
    std::vector<PhiPoint> rows;
    double beta = 0.0;
    double rel_tol = 0.0;
    double max_roundtrip = 0.0;

    std::string to_csv() const {
        std::string out = "t,phi,phi_prime,phi_double_prime,rate,residual\n";
        char line[256];
        for (const auto& r : rows) {
            std::snprintf(line, sizeof line,
                          "%.16e,%.16e,%.16e,%.16e,%.16e,%.16e\n", r.t, r.phi,
                          r.phi_p, r.phi_pp, r.rate, r.roundtrip);
            out += line;
        }
        return out;
    }
};

// Shared machinery for one (nonlinearity, weight) pair: the zeta integral,
// its inversion to Phi, closed-relation derivatives, and the validity
// threshold beta (largest t with I_K(t) < 0.99 * zeta(just above the
// integrand's positivity edge), capped below the weight's domain edge nu).
class ProfileContext {
  public:
    ProfileContext(NonlinearitySpec n, WeightSpec w, double rel_tol = 1e-10)
        : n_(std::move(n)), w_(std::move(w)), rel_tol_(rel_tol) {
        if (!n_.has_decomposition)
            throw precondition_error("profile: nonlinearity '" + n_.name +
                                     "' has no slow-variation decomposition; "
                                     "use the classical-profile branch instead");
        edge_ = n_.zeta_lo * (1.0 + 1e-8) + 1e-300;
        zeta_sup_ = zeta_value(edge_);
        beta_ = detect_beta();
    }

    const NonlinearitySpec& nonlinearity() const { return n_; }
    const WeightSpec& weight() const { return w_; }
    double beta() const { return beta_; }
    double zeta_sup() const { return zeta_sup_; }

    double integrand(double y) const {
        if (!(y > n_.zeta_lo))
            throw domain_error("profile integrand evaluated at y = " + std::to_string(y) +
                               " <= " + std::to_string(n_.zeta_lo));
        double lp = n_.Lprof.Lp.eval(y);
        double lf = n_.Lf.eval(y);
        if (!(lp > 0.0) || !(lf > 0.0) || !std::isfinite(lp) || !std::isfinite(lf))
            throw domain_error("profile integrand not positive/finite at y = " +
                               std::to_string(y));
        return std::sqrt(lp) * std::pow(y, -0.5 * (n_.rho + 1.0)) / std::sqrt(lf);
    }

    ZetaValue zeta(double x) const {
        QuadResult q = zeta_quad(x);
        return {q.value, q.error_estimate, q.evaluations, q.warning};
    }

    double zeta_deriv(double x) const { return -integrand(x); }

    // Phi(t) by bracketing plus safeguarded Newton on zeta(x) = I_K(t).
    double phi(double t) const {
        double target = target_for(t);
        auto g = [this, target](double x) { return zeta_value(x) - target; };
        auto gp = [this](double x) { return -integrand(x); };

        // initial guess from the power-law asymptote zeta(x) ~ (2/rho) x integrand(x)
        double x0 = std::max(4.0 * n_.zeta_lo, 100.0);
        for (int i = 0; i < 8; ++i) {
            double A = (2.0 / n_.rho) * x0 * integrand(x0);
            double fac = std::pow(A / target, 2.0 / n_.rho);
            fac = std::min(std::max(fac, 1e-8), 1e8);
            double next = x0 * fac;
            if (!(next > n_.zeta_lo * (1.0 + 1e-6)) || !(next < 1e290)) break;
            if (std::fabs(std::log(next / x0)) < 1e-3) { x0 = next; break; }
            x0 = next;
        }
        double lo = std::max(x0 / 4.0, edge_);
        double hi = std::min(x0 * 4.0, 1e295);
        int guard = 0;
        while (zeta_value(hi) > target) { // zeta decreasing: push hi out
            hi *= 4.0;
            if (hi > 1e300 || ++guard > 200)
                throw numerical_error("profile inversion: no upper bracket below overflow "
                                      "(t = " + std::to_string(t) + ")");
        }
        guard = 0;
        while (zeta_value(lo) < target) {
            lo = edge_ + (lo - edge_) / 16.0;
            if (++guard > 200)
                throw numerical_error("profile inversion: no lower bracket above the "
                                      "integrand edge (t = " + std::to_string(t) + ")");
        }
        RootResult r = solve_bracketed(g, gp, lo, hi, 1e-13);
        return r.x;
    }

    // Phi'(t) from the first closed relation.
    double phi_prime(double t, double phi_v) const {
        double kf = w_.K.eval(t);
        double lf = n_.Lf.eval(phi_v);
        double lp = n_.Lprof.Lp.eval(phi_v);
        return -kf * std::pow(phi_v, 0.5 * (n_.rho + 1.0)) * std::sqrt(lf) / std::sqrt(lp);
    }

    // Phi''(t) from differentiating the first relation: prefactor times the
    // four-term bracket (rho+1)/2 + K'Phi/(K Phi') + Phi Lf'/(2Lf) - Phi L''/(2L').
    double phi_second(double t, double phi_v, double phi_p) const {
        double kf = w_.K.eval(t);
        double kp = w_.K.deriv(t);
        double lf = n_.Lf.eval(phi_v);
        double lfp = n_.Lf.deriv(phi_v);
        double lp = n_.Lprof.Lp.eval(phi_v);
        double lpp = n_.Lprof.Lpp.eval(phi_v);
        double bracket = 0.5 * (n_.rho + 1.0) + kp * phi_v / (kf * phi_p) +
                         0.5 * phi_v * lfp / lf - 0.5 * phi_v * lpp / lp;
        double pref = -kf * phi_p * std::sqrt(lf) /
                      (std::sqrt(lp) * std::pow(phi_v, 0.5 * (1.0 - n_.rho)));
        return pref * bracket;
    }

    PhiPoint phi_point(double t) const {
        PhiPoint p;
        p.t = t;
        p.phi = phi(t);
        p.phi_p = phi_prime(t, p.phi);
        p.phi_pp = phi_second(t, p.phi, p.phi_p);
        p.rate = n_.Lprof.L.eval(p.phi);
        double target = w_.IK(t);
        p.roundtrip = std::fabs(zeta_value(p.phi) - target) / target;
        return p;
    }

    double rate(double d) const { return n_.Lprof.L.eval(phi(d)); }

    ProfileTable table(const std::vector<double>& t_grid) const {
        ProfileTable tab;
        tab.beta = beta_;
        tab.rel_tol = rel_tol_;
        tab.rows.reserve(t_grid.size());
        for (double t : t_grid) tab.rows.push_back(phi_point(t));
        for (std::size_t i = 0; i < tab.rows.size(); ++i) {
            const auto& r = tab.rows[i];
            if (!(r.phi_p < 0.0) || !(r.phi_pp > 0.0))
                throw numerical_error("profile table: derivative signs violated at t = " +
                                      std::to_string(r.t));
            if (!(r.roundtrip <= 1e-9))
                throw numerical_error("profile table: round-trip residual " +
                                      std::to_string(r.roundtrip) + " at t = " +
                                      std::to_string(r.t) + " exceeds 1e-9");
            tab.max_roundtrip = std::max(tab.max_roundtrip, r.roundtrip);
            if (i > 0) {
                bool same_order = tab.rows[i - 1].t < r.t;
                double prev = tab.rows[i - 1].phi;
                if (same_order ? !(r.phi < prev) : !(r.phi > prev))
                    throw numerical_error("profile table: Phi not strictly decreasing in t");
            }
        }
        return tab;
    }

  private:
    double target_for(double t) const {
        if (!(t > 0.0) || !(t < beta_))
            throw domain_error("profile: t = " + std::to_string(t) +
                               " outside (0, beta) with beta = " + std::to_string(beta_));
        return w_.IK(t);
    }

    QuadResult zeta_quad(double x) const {
        if (!(x > n_.zeta_lo))
            throw domain_error("zeta evaluated at x = " + std::to_string(x) +
                               " <= positivity edge " + std::to_string(n_.zeta_lo));
        QuadResult q = integrate_upper([this](double y) { return integrand(y); }, x,
                                       power_tail(-1.0 - 0.5 * n_.rho), rel_tol_);
        if (!q.converged)
            throw numerical_error("zeta(" + std::to_string(x) + "): " + q.warning);
        return q;
    }

    double zeta_value(double x) const { return zeta_quad(x).value; }

    double detect_beta() const {
        double cap = std::isfinite(w_.nu) ? 0.999 * w_.nu : 1e6;
        double goal = 0.99 * zeta_sup_;
        if (w_.IK(cap) < goal) return cap;
        double lo = std::min(1e-12, 0.5 * cap), hi = cap;
        if (!(w_.IK(lo) < goal))
            throw numerical_error("profile: no solvable t-range (I_K exceeds the zeta "
                                  "supremum already at t = " + std::to_string(lo) + ")");
        for (int i = 0; i < 80; ++i) {
            double mid = std::sqrt(lo * hi);
            (w_.IK(mid) < goal ? lo : hi) = mid;
        }
        return lo;
    }

    NonlinearitySpec n_;
    WeightSpec w_;
    double rel_tol_;
    double edge_ = 0.0;
    double zeta_sup_ = 0.0;
    double beta_ = 0.0;
};

// Tail closure that measures the local power-law exponent of the integrand;
// exact for power decay, conservative (keeps integrating) until the measured
// exponent is safely below -1.
inline TailClosure measured_tail(std::function<double(double)> f) {
    return [f](double X, double fX) {
        if (!(fX > 0.0)) return 0.0;
        double f2 = f(2.0 * X);
        if (!(f2 > 0.0)) return 0.0;
        double p = std::log2(f2 / fX);
        if (!(p < -1.0 - 1e-6)) return std::numeric_limits<double>::infinity();
        return X * fX / (-p - 1.0);
    };
}

// Classical profile h of the regularly-varying branch (and of the classical
// one-dimensional blow-up ODE when K = 1).
class ClassicalProfile {
  public:
    ClassicalProfile(NonlinearitySpec n, WeightSpec w, double rel_tol = 1e-10)
        : n_(std::move(n)), w_(std::move(w)), rel_tol_(rel_tol) {
        KOResult ko = keller_osserman(n_);
        if (ko.verdict != KOVerdict::converges)
            throw precondition_error(
                "classical profile: the finite-blow-up integral test did not converge "
                "for '" + n_.name + "' (verdict " +
                (ko.verdict == KOVerdict::diverges ? std::string("diverges")
                                                   : std::string("inconclusive")) + ")");
        tail_sup_ = tail(h_floor_);
        beta_ = detect_beta();
    }

    double beta() const { return beta_; }

    // int_u^inf ds / sqrt(2 F(s))
    double tail(double u) const {
        if (!(u > 0.0)) throw domain_error("classical tail needs u > 0");
        QuadResult q = integrate_upper([this](double s) { return g_(s); }, u,
                                       measured_tail([this](double s) { return g_(s); }),
                                       rel_tol_);
        if (!q.converged)
            throw numerical_error("classical tail(" + std::to_string(u) + "): " + q.warning);
        return q.value;
    }

    double h(double t) const {
        if (!(t > 0.0) || !(t < beta_))
            throw domain_error("classical profile: t = " + std::to_string(t) +
                               " outside (0, beta) with beta = " + std::to_string(beta_));
        double target = w_.IK(t);
        auto g = [this, target](double u) { return tail(u) - target; };
        auto gp = [this](double u) { return -g_(u); };
        double lo = h_floor_, hi = 10.0;
        int guard = 0;
        while (tail(hi) > target) {
            hi *= 4.0;
            if (hi > 1e300 || ++guard > 200)
                throw numerical_error("classical profile: no upper bracket below overflow");
        }
        RootResult r = solve_bracketed(g, gp, lo, hi, 1e-13);
        return r.x;
    }

    // Fourth-order five-point second difference of h, step frac * t.
    double h_second_fd(double t, double frac = 0.02) const {
        double s = frac * t;
        double m2 = h(t - 2 * s), m1 = h(t - s), p0 = h(t), p1 = h(t + s), p2 = h(t + 2 * s);
        return (-m2 + 16.0 * m1 - 30.0 * p0 + 16.0 * p1 - p2) / (12.0 * s * s);
    }

  private:
    double g_(double s) const {
        double F = n_.F.eval(s);
        if (!(F > 0.0)) {
            if (std::isinf(F)) return 0.0; // overflowed antiderivative: negligible tail
            throw domain_error("classical profile: antiderivative not positive at s = " +
                               std::to_string(s));
        }
        return 1.0 / std::sqrt(2.0 * F);
    }

    double detect_beta() const {
        double cap = std::isfinite(w_.nu) ? 0.999 * w_.nu : 1e6;
        double goal = 0.99 * tail_sup_;
        if (w_.IK(cap) < goal) return cap;
        double lo = std::min(1e-12, 0.5 * cap), hi = cap;
        if (!(w_.IK(lo) < goal))
            throw numerical_error("classical profile: no solvable t-range");
        for (int i = 0; i < 80; ++i) {
            double mid = std::sqrt(lo * hi);
            (w_.IK(mid) < goal ? lo : hi) = mid;
        }
        return lo;
    }

    NonlinearitySpec n_;
    WeightSpec w_;
    double rel_tol_;
    double h_floor_ = 1e-6; // below this F(s) drowns in rounding for some families
    double tail_sup_ = 0.0;
    double beta_ = 0.0;
};

// --- rate predictions ------------------------------------------------------

enum class RateBranch { nonregular, regular };

struct RatePrediction {
    RateBranch kind = RateBranch::nonregular;
    double constant = 1.0;            // multiplies h on the regular branch
    double corollary_constant = std::numeric_limits<double>::quiet_NaN();
    std::function<double(double)> eval; // d -> predicted boundary value
    std::shared_ptr<ProfileContext> profile;   // set on the nonregular branch
    std::shared_ptr<ClassicalProfile> classical; // set on the regular branch
};

// The predicted boundary behaviour; independent of the linear growth
// parameter a, which is accepted only to document that independence.
inline RatePrediction rate_predict(RateBranch branch, const NonlinearitySpec& n,
                                   const WeightSpec& w, double /*a*/ = 0.0) {
    RatePrediction r;
    r.kind = branch;
    if (branch == RateBranch::nonregular) {
        if (!n.has_decomposition)
            throw validation_error("rate_predict: '" + n.name +
                                   "' has no slow-variation decomposition "
                                   "(branch mismatch; use the regular branch)");
        r.profile = std::make_shared<ProfileContext>(n, w);
        r.constant = 1.0;
        if (n.m >= 2)
            r.corollary_constant = 1.0;
        else if (n.m == 1)
            r.corollary_constant = std::pow(2.0 * (1.0 + w.theta) / n.rho, n.alpha);
        auto ctx = r.profile;
        r.eval = [ctx](double d) { return ctx->rate(d); };
    } else {
        if (!n.regular_branch)
            throw validation_error("rate_predict: '" + n.name +
                                   "' is not on the regularly-varying branch "
                                   "(branch mismatch; use the nonregular branch)");
        if (!(n.rho > 0.0))
            throw validation_error("rate_predict: regular branch needs f' of positive "
                                   "index (power exponent > 1)");
        double rho = n.rho, th = w.theta;
        r.constant = std::pow((2.0 * th + rho + 2.0) / ((2.0 + rho) * (th + 1.0)), 1.0 / rho);
        r.classical = std::make_shared<ClassicalProfile>(n, w);
        auto cp = r.classical;
        double c = r.constant;
        r.eval = [cp, c](double d) { return c * cp->h(d); };
    }
    return r;
}

// --- the six profile limits ------------------------------------------------

struct LemmaProReport {
    std::vector<LimitSeries> limits; // (a)..(f)
    ProfileTable table;
    bool all_pass = false;
};

// Verifies the six limits of the profile lemma on a decreasing geometric
// t-grid.  Limits (a) and (f) compare logarithms across decades, so they are
// measured as difference quotients between consecutive grid points (the
// pointwise ratio carries an O(1/log t) drift that never resolves on any
// attainable grid; the quotient removes the constant offset).
inline LemmaProReport lemma_pro_verify(const NonlinearitySpec& n, const WeightSpec& w,
                                       const std::vector<double>& t_grid,
                                       double threshold = 1e-2) {
    if (t_grid.size() < 4)
        throw validation_error("lemma_pro_verify needs at least 4 grid points");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i - 1]))
            throw validation_error("lemma_pro_verify expects a decreasing t-grid");

    ProfileContext ctx(n, w);
    LemmaProReport rep;
    rep.table = ctx.table(t_grid);
    const auto& rows = rep.table.rows;
    const double rho = n.rho, th = w.theta;
    const int m = n.m;

    std::vector<double> x(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) x[i] = rows[i].t;
    std::vector<double> xq(x.begin() + 1, x.end()); // grid for difference quotients

    // (a) iterated-log growth: slope of log_m Phi against log_m(1/t)
    {
        std::vector<double> s;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            double num = iterated_log_value(rows[i].phi, m) -
                         iterated_log_value(rows[i - 1].phi, m);
            double den = iterated_log_value(1.0 / rows[i].t, m) -
                         iterated_log_value(1.0 / rows[i - 1].t, m);
            s.push_back(num / den);
        }
        double lim = m == 1 ? 2.0 * (1.0 + th) / rho : 1.0;
        rep.limits.push_back(make_limit_series(
            "iterated_log_growth", "profile-limit-a", lim, xq, s, threshold));
    }
    // (b) Phi Phi'' / (Phi')^2, grouped as (Phi/Phi')(Phi''/Phi') so that the
    // square of a huge Phi' never overflows
    {
        std::vector<double> s;
        for (const auto& r : rows)
            s.push_back((r.phi / r.phi_p) * (r.phi_pp / r.phi_p));
        rep.limits.push_back(make_limit_series(
            "curvature_ratio", "profile-limit-b", 1.0 + rho / (2.0 * (th + 1.0)), x, s,
            threshold));
    }
    // (c) L(Phi) Phi / (L'(Phi) (Phi')^2) -> 0, grouped likewise
    {
        std::vector<double> s;
        for (const auto& r : rows) {
            double ratio = n.Lprof.L.eval(r.phi) / n.Lprof.Lp.eval(r.phi);
            s.push_back(ratio / r.phi_p * (r.phi / r.phi_p));
        }
        rep.limits.push_back(
            make_limit_series("scale_vs_flux", "profile-limit-c", 0.0, x, s, threshold));
    }
    // (d) t Phi' / Phi
    {
        std::vector<double> s;
        for (const auto& r : rows) s.push_back(r.t * r.phi_p / r.phi);
        rep.limits.push_back(make_limit_series(
            "index_at_origin", "profile-limit-d", -2.0 * (th + 1.0) / rho, x, s, threshold));
    }
    // (e) sqrt(L'(Phi)) Phi^((1-rho)/2) / (sqrt(Lf(Phi)) I_K(t))
    {
        std::vector<double> s;
        for (const auto& r : rows) {
            double lp = n.Lprof.Lp.eval(r.phi);
            double lf = n.Lf.eval(r.phi);
            s.push_back(std::sqrt(lp) * std::pow(r.phi, 0.5 * (1.0 - rho)) /
                        (std::sqrt(lf) * w.IK(r.t)));
        }
        rep.limits.push_back(make_limit_series(
            "tail_closure_ratio", "profile-limit-e", 0.5 * rho, x, s, threshold));
    }
    // (f) plain-log growth: slope of log Phi against log t
    {
        std::vector<double> s;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            double num = std::log(rows[i].phi) - std::log(rows[i - 1].phi);
            double den = std::log(rows[i].t) - std::log(rows[i - 1].t);
            s.push_back(num / den);
        }
        rep.limits.push_back(make_limit_series(
            "log_growth", "profile-limit-f", -2.0 * (1.0 + th) / rho, xq, s, threshold));
    }

    rep.all_pass = true;
    for (const auto& l : rep.limits) rep.all_pass = rep.all_pass && l.verdict.pass;
    return rep;
}

} // namespace blowup
