#pragma once

/* The acceptance registry: twelve self-contained numerical verifications of
 * the library's headline claims, each with its fixtures and tolerances pinned
 * in code.  The command-line `verify` subcommand and the acceptance
 * executable both report through run_criterion/run_suite, so there is exactly
 * one code path that decides pass or fail.
 *
 * A deliberate wrong-constant hook (CriterionOptions::wrong_constant_for)
 * perturbs the pinned oracle constant of a single criterion; it exists so the
 * harness can demonstrate that a wrong value makes exactly that record fail. */

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "blowup/bvp.hpp"
#include "blowup/profile.hpp"
#include "blowup/report.hpp"
#include "blowup/rvcalc.hpp"

namespace blowup {

struct CriterionOptions {
    /* When nonzero, the criterion with this id swaps its pinned oracle
     * constant for a deliberately wrong one (harness sanity check). */
    int wrong_constant_for = 0;

    double pinned(int id, double v) const {
        return id == wrong_constant_for ? 1.5 * v : v;
    }
    /* For thresholds, a wrong constant means an absurdly tightened one. */
    double pinned_tol(int id, double v) const {
        return id == wrong_constant_for ? 1e-7 * v : v;
    }
    /* For sign conventions, the wrong constant is the opposite direction. */
    double pinned_sign(int id) const { return id == wrong_constant_for ? -1.0 : 1.0; }
};

struct CriterionSpec {
    int id;
    const char* name;
    const char* anchor;
};

inline const std::vector<CriterionSpec>& acceptance_criteria() {
    static const std::vector<CriterionSpec> table = {
        {1, "truncated_continuation_exactness", "closed-form-interval-solution"},
        {2, "boundary_rate_first_log", "rate-theorem-m1"},
        {3, "profile_closed_family", "profile-closed-family"},
        {4, "classical_profile_closed", "classical-profile-closed"},
        {5, "profile_lemma_limits", "profile-lemma-limits"},
        {6, "iterated_log_rate_independence", "corollary-iterated-log"},
        {7, "tail_ratio_limit", "tail-ratio-limit"},
        {8, "finite_blowup_integral", "finite-blowup-integral"},
        {9, "core_eigenvalue_gate", "core-eigenvalue-gate"},
        {10, "ordered_barrier_signs", "ordered-barrier-signs"},
        {11, "continuation_monotone_uniqueness", "continuation-monotone-uniqueness"},
        {12, "rate_growth_parameter_independence", "rate-a-independence"},
    };
    return table;
}

inline std::vector<int> all_criterion_ids() {
    std::vector<int> ids;
    for (const auto& c : acceptance_criteria()) ids.push_back(c.id);
    return ids;
}

namespace verifdetail {

template <class... Args>
inline std::string fmt(const char* pattern, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

inline ProblemSpec interval_problem(double a, const char* fname,
                                    std::vector<double> fparams, double theta) {
    return make_problem(a, catalog_f(fname, std::move(fparams)),
                        catalog_weight("power", theta), Domain::interval(0.0, 1.0));
}

/* exp(u), a = 0, b == 1 on (0,1): the interval fixture with the closed-form
 * large solution log(2 pi^2 / sin^2(pi x)). */
inline ProblemSpec exp_interval_problem() {
    return interval_problem(0.0, "exp_rho", {1.0}, 0.0);
}

/* ---- 1: closed-form exactness of the truncated continuation ------------- */

inline void crit_exactness(CheckRecord& rec, const CriterionOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    ProblemSpec p = exp_interval_problem();
    Mesh mesh = make_mesh(p.dom, 4096, 3.0);

    std::shared_ptr<RatePrediction> store;
    const RatePrediction* pred = bvpdetail::problem_prediction(p, store);
    bvpdetail::RateSeed seed = bvpdetail::make_rate_seed(pred, mesh);
    std::vector<double> u0 = bvpdetail::build_init(mesh, 30.0, InitStrategy::rate_clip, seed);
    SolutionGrid sol = solve_truncated(p, 30.0, mesh, &u0);

    const double pi = std::acos(-1.0);
    const double C = opt.pinned(1, 2.0 * pi * pi);
    double err = 0.0, mid_u = 0.0, mid_gap = 1e300;
    for (std::size_t i = 0; i < sol.u.size(); ++i) {
        double s = std::sin(pi * mesh.x[i]);
        if (mesh.d[i] >= 0.1)
            err = std::max(err, std::fabs(sol.u[i] - std::log(C / (s * s))));
        if (std::fabs(mesh.x[i] - 0.5) < mid_gap) {
            mid_gap = std::fabs(mesh.x[i] - 0.5);
            mid_u = sol.u[i];
        }
    }
    double mid_err = std::fabs(mid_u - std::log(C));
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool ok = err <= 1e-3 && mid_err <= 1e-3 && elapsed <= 10.0;
    rec.verdict = ok ? Verdict::pass : Verdict::fail;
    rec.details = fmt("interior max error %.3e (tol 1e-3, d >= 0.1) at truncation level 30; "
                      "center value error %.3e; solve took %.2f s (cap 10 s)",
                      err, mid_err, elapsed);
}

/* ---- 2: boundary rate against log(1/d^2) -------------------------------- */

inline void crit_rate_first_log(CheckRecord& rec, const CriterionOptions& opt) {
    ProblemSpec p = exp_interval_problem();
    LargeSolveReport rep = solve_large(p);
    if (!rep.converged) {
        rec.verdict = Verdict::fail;
        rec.details = "continuation did not converge: " + rep.diagnostic;
        return;
    }
    const double slope = opt.pinned(2, 2.0);
    RateFitOptions o;
    o.d_hi = 1e-2;
    o.d_lo = 1e-4;
    o.decade_step = 1.0;
    o.ratio_threshold = 0.05;
    RateFitReport fit = boundary_rate_fit(
        rep.sol, [slope](double d) { return slope * std::log(1.0 / d); }, o);

    /* exact-ratio oracle from the closed-form solution at the fitted node */
    const double pi = std::acos(-1.0);
    double dn = fit.ratio.x.back();
    double s = std::sin(pi * dn);
    double oracle = std::log(2.0 * pi * pi / (s * s)) / (2.0 * std::log(1.0 / dn));
    double final_ratio = fit.ratio.measured.back();
    double oracle_gap = std::fabs(final_ratio - oracle);

    bool ok = fit.ratio.verdict.pass && oracle_gap <= 5e-4;
    rec.verdict = ok ? Verdict::pass : Verdict::fail;
    rec.details = fmt("ratio u/(2 log(1/d)) at d ~ {1e-2,1e-3,1e-4}: final %.6f, "
                      "|ratio-1| final %.3e (tol 5e-2, decreasing), closed-form oracle gap "
                      "%.1e (tol 5e-4)",
                      final_ratio, fit.ratio.verdict.final_residual, oracle_gap);
    rec.series.push_back(fit.ratio);
}

/* ---- 3: closed-form profile family -------------------------------------- */

inline void crit_profile_family(CheckRecord& rec, const CriterionOptions& opt) {
    const double pairs[3][2] = {{1.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}};
    double worst_phi = 0.0, worst_curv = 0.0;
    for (const auto& pr : pairs) {
        double rho = pr[0], th = pr[1];
        ProfileContext ctx(catalog_f("exp_rho", {rho}), catalog_weight("power", th));
        std::vector<double> grid = geometric_grid(1e-1, 1e-6, 21);
        const double C = opt.pinned(3, 2.0 * (th + 1.0) / rho);
        for (double t : grid) {
            double closed = std::pow(C / std::pow(t, th + 1.0), 2.0 / rho);
            worst_phi = std::max(worst_phi, std::fabs(ctx.phi(t) / closed - 1.0));
        }
        ProfileTable tab = ctx.table(grid);
        const double curv = 1.0 + rho / (2.0 * (th + 1.0));
        for (const auto& r : tab.rows) {
            double measured = (r.phi / r.phi_p) * (r.phi_pp / r.phi_p);
            worst_curv = std::max(worst_curv, std::fabs(measured - curv));
        }
    }
    bool ok = worst_phi <= 1e-6 && worst_curv <= 1e-8;
    rec.verdict = ok ? Verdict::pass : Verdict::fail;
    rec.details = fmt("three (rho, theta) pairs on t in [1e-6, 1e-1]: max profile deviation "
                      "%.2e (tol 1e-6 relative), max curvature-identity deviation %.2e "
                      "(tol 1e-8)",
                      worst_phi, worst_curv);
}

/* ---- 4: closed-form classical profile ----------------------------------- */

inline void crit_classical_closed(CheckRecord& rec, const CriterionOptions& opt) {
    NonlinearitySpec cubic = catalog_f("power", {3.0});
    WeightSpec w0 = catalog_weight("power", 0.0);
    WeightSpec w1 = catalog_weight("power", 1.0);
    ClassicalProfile h0(cubic, w0);
    ClassicalProfile h1(cubic, w1);

    const double s2 = opt.pinned(4, std::sqrt(2.0));
    double worst0 = 0.0, worst1 = 0.0;
    for (double t : geometric_grid(1.0, 1e-3, 13)) {
        worst0 = std::max(worst0, std::fabs(h0.h(t) * t / s2 - 1.0));
        worst1 = std::max(worst1, std::fabs(h1.h(t) * t * t / (2.0 * s2) - 1.0));
    }

    RatePrediction pr = rate_predict(RateBranch::regular, cubic, w0);
    double const_gap = std::fabs(pr.constant - opt.pinned(4, 1.0));

    double worst_ode = 0.0;
    for (double t : {0.03, 0.1, 0.3, 1.0}) {
        double hv = h0.h(t);
        worst_ode = std::max(worst_ode,
                             std::fabs(h0.h_second_fd(t) / cubic.f.eval(hv) - 1.0));
    }

    bool ok = worst0 <= 1e-8 && worst1 <= 1e-8 && const_gap <= 1e-12 && worst_ode <= 1e-6;
    rec.verdict = ok ? Verdict::pass : Verdict::fail;
    rec.details = fmt("cubic profile vs sqrt(2)/t: %.2e; vs 2 sqrt(2)/t^2: %.2e "
                      "(tol 1e-8); branch constant gap %.1e (tol 1e-12); "
                      "second-derivative identity %.2e (tol 1e-6)",
                      worst0, worst1, const_gap, worst_ode);
}

/* ---- 5: the six profile-lemma limits ------------------------------------ */

inline void crit_lemma_limits(CheckRecord& rec, const CriterionOptions& opt) {
    const double threshold = opt.wrong_constant_for == 5 ? 1e-2 / 3.0 : 1e-2;
    const char* families[3] = {"expm1", "sinh", "exp2_m_e"};
    std::vector<double> grid = geometric_grid(1e-2, 1e-8, 13);

    bool all = true;
    std::string detail;
    for (const char* fam : families) {
        for (double th : {0.0, 1.0}) {
            LemmaProReport rep = lemma_pro_verify(catalog_f(fam), catalog_weight("power", th),
                                                  grid, threshold);
            detail += std::string(fam) + fmt("[theta=%.0f]: ", th);
            if (rep.all_pass) {
                detail += "pass; ";
            } else {
                all = false;
                detail += "FAIL (";
                for (const auto& s : rep.limits)
                    if (!s.verdict.pass) {
                        detail += s.name + fmt(" %.2e%s, ", s.verdict.final_residual,
                                               s.verdict.decreasing ? "" : " not-decreasing");
                        rec.series.push_back(s);
                    }
                detail += "); ";
            }
        }
    }
    rec.verdict = all ? Verdict::pass : Verdict::fail;
    rec.details = detail +
                  fmt("[threshold %.1e on t in [1e-8, 1e-2]; the doubly-exponential "
                      "family converges at 1/log(1/t) speed, so its residuals cannot "
                      "reach the band on this grid -- the extended-grid test shows them "
                      "continuing to fall]",
                      threshold);
}

/* ---- 6: iterated-log rate, independent of theta and a ------------------- */

inline void crit_iterated_log_rate(CheckRecord& rec, const CriterionOptions& opt) {
    const double scale = opt.pinned(6, 1.0);
    auto pred = [scale](double d) { return scale * std::log(std::log(1.0 / d)); };
    const double runs[3][2] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}; /* (theta, a) */

    bool all = true;
    std::string detail = "fitted slope of u against log log(1/d): ";
    for (const auto& r : runs) {
        ProblemSpec p = interval_problem(r[1], "exp2_m_e", {}, r[0]);
        LargeSolveReport rep = solve_large(p);
        if (!rep.converged) {
            all = false;
            detail += fmt("(theta=%.0f, a=%.0f): no convergence; ", r[0], r[1]);
            continue;
        }
        RateFitReport fit = boundary_rate_fit(rep.sol, pred);
        all = all && fit.slope.verdict.pass;
        detail += fmt("(theta=%.0f, a=%.0f) final residual %.3e%s; ", r[0], r[1],
                      fit.slope.verdict.final_residual,
                      fit.slope.verdict.pass ? "" : " FAIL");
        rec.series.push_back(fit.slope);
    }
    rec.verdict = all ? Verdict::pass : Verdict::fail;
    rec.details = detail + "[tol 0.1, decreasing]";
}

/* ---- 7: tail-integral ratio limit --------------------------------------- */

/* For R(u) = u^2 log u with j = -4 the tail integral has the closed form
 * (log u + 1)/u by integration by parts, so the exact ratio at finite u is
 * log u / (log u + 1): the distance to the limit 1 is 1/(log u + 1), about
 * 5.2e-2 at u = 1e8, for ANY correct evaluation.  The 1e-3 budget therefore
 * measures agreement with the closed-form finite-u oracle; the approach to
 * the limit itself is certified as a decreasing trend over u = 1e4..1e8. */
inline void crit_tail_ratio(CheckRecord& rec, const CriterionOptions& opt) {
    ScalarFunction R = named_scalar_function("power_log", {2.0, 1.0});
    KaramataResult res = karamata_residual(R, 2.0, -4.0, 1e8);

    double lu = std::log(1e8);
    double oracle = opt.pinned(7, lu / (lu + 1.0));
    double gap = std::fabs(res.ratio - oracle);

    std::vector<double> us, dist;
    for (double k = 4.0; k <= 8.0; k += 1.0) {
        double u = std::pow(10.0, k);
        dist.push_back(std::fabs(karamata_residual(R, 2.0, -4.0, u).ratio - 1.0));
        us.push_back(u);
    }
    LimitSeries trend = make_limit_series("tail_ratio_to_limit", rec.anchor, 0.0, us, dist,
                                          1e-1, 4);
    rec.series.push_back(trend);

    bool ok = gap <= 1e-3 && trend.verdict.pass;
    rec.verdict = ok ? Verdict::pass : Verdict::fail;
    rec.details = fmt("ratio at u = 1e8: %.9f vs closed-form value %.9f, gap %.2e "
                      "(tol 1e-3); distance to the limit 1 falls %.3e -> %.3e over "
                      "u = 1e4..1e8 (the logarithmic correction the theorem prescribes)",
                      res.ratio, oracle, gap, dist.front(), dist.back()) +
                  (res.warning.empty() ? "" : " [" + res.warning + "]");
}

/* ---- 8: finite-blow-up integral verdicts -------------------------------- */

inline void crit_blowup_integral(CheckRecord& rec, const CriterionOptions& opt) {
    struct Case {
        const char* name;
        std::vector<double> params;
        KOVerdict expect;
    };
    const Case cases[] = {
        {"power", {1.0}, KOVerdict::diverges},  {"power", {2.0}, KOVerdict::converges},
        {"power", {3.0}, KOVerdict::converges}, {"expm1", {}, KOVerdict::converges},
        {"exp2_m_e", {}, KOVerdict::converges}, {"sinh", {}, KOVerdict::converges},
    };
    bool all = true;
    double cubic_gap = -1.0;
    std::string detail;
    for (const auto& c : cases) {
        KOResult ko = keller_osserman(catalog_f(c.name, c.params));
        bool ok = ko.verdict == c.expect;
        if (c.params.size() == 1 && c.params[0] == 3.0) {
            cubic_gap = std::fabs(ko.value - opt.pinned(8, 2.0));
            ok = ok && cubic_gap <= 1e-8;
        }
        all = all && ok;
        detail += std::string(c.name);
        if (!c.params.empty()) detail += fmt(":%g", c.params[0]);
        detail += std::string("=") +
                  (ko.verdict == KOVerdict::converges
                       ? "converges"
                       : ko.verdict == KOVerdict::diverges ? "diverges" : "inconclusive") +
                  (ok ? "" : " UNEXPECTED") + "; ";
    }
    rec.verdict = all ? Verdict::pass : Verdict::fail;
    rec.details = detail + fmt("cubic tail value gap %.2e (tol 1e-8)", cubic_gap);
}

/* ---- 9: eigenvalue oracle and the existence gate ------------------------ */

inline void crit_existence_gate(CheckRecord& rec, const CriterionOptions& opt) {
    const double pi = std::acos(-1.0);
    double lam = eigen_dirichlet(Domain::interval(0.0, 1.0), 1024);
    double pi2 = opt.pinned(9, pi * pi);
    double eig_rel = std::fabs(lam / pi2 - 1.0);

    NonlinearitySpec f = catalog_f("expm1");
    WeightSpec w = catalog_weight("power", 0.0);
    Domain dom = Domain::interval(0.0, 1.0);
    Omega0 core = Omega0::range(0.25, 0.75);

    bool refused = false;
    double lam_core = 0.0, core_rel = 1.0;
    try {
        make_problem(50.0, f, w, dom, core);
    } catch (const existence_gate_error& e) {
        refused = true;
        lam_core = e.eigenvalue();
        core_rel = std::fabs(lam_core / (4.0 * pi * pi) - 1.0);
    }

    bool ran = false;
    std::string run_note = "below-threshold run failed";
    try {
        ProblemSpec ok = make_problem(30.0, f, w, dom, core);
        /* near the core eigenvalue the interior amplifies above the boundary
         * datum, so the boundary-rate seed is a poor first iterate; the
         * constant-level start from M0 = 8 converges robustly */
        SolveOptions o;
        o.n = 1024;
        o.M0 = 8.0;
        o.start = InitStrategy::constant_level;
        LargeSolveReport rep = solve_large(ok, o);
        ran = rep.converged && rep.monotone_ok;
        double umid = 0.0;
        for (std::size_t i = 0; i < rep.sol.u.size(); ++i)
            if (std::fabs(rep.sol.mesh.x[i] - 0.5) < 1e-9) umid = rep.sol.u[i];
        run_note = fmt("a = 30 run converged (%.0f levels to M = %.0f, monotone, "
                       "center value %.3f above the datum via core amplification)",
                       static_cast<double>(rep.steps.size()), rep.sol.M, umid);
    } catch (const std::exception& e) {
        run_note = std::string("a = 30 run failed: ") + e.what();
    }

    bool ok = eig_rel <= 1e-3 && refused && core_rel <= 1e-3 && ran;
    rec.verdict = ok ? Verdict::pass : Verdict::fail;
    rec.details = fmt("unit-interval eigenvalue %.6f (rel gap %.2e, tol 1e-3); core "
                      "eigenvalue %.4f (rel gap %.2e); ",
                      lam, eig_rel, lam_core, core_rel) +
                  (refused ? "a = 50 refused by the gate; " : "a = 50 NOT refused; ") +
                  run_note;
}

/* ---- 10: ordered barrier signs ------------------------------------------ */

inline void crit_barrier_signs(CheckRecord& rec, const CriterionOptions& opt) {
    ProblemSpec p = exp_interval_problem();
    SubsuperReport sup = subsuper_residual(p, 1e-4, 0.25, +1, 0.05);
    SubsuperReport sub = subsuper_residual(p, 1e-4, 0.25, -1, 0.05);

    const double sgn = opt.pinned_sign(10);
    double sup_max = -1e300, sub_min = 1e300;
    for (double r : sup.residual) sup_max = std::max(sup_max, sgn * r);
    for (double r : sub.residual) sub_min = std::min(sub_min, sgn * r);

    bool theta_ok = std::fabs(sup.theta_const - 1.0) <= 1e-12 &&
                    std::fabs(sub.theta_const - 1.0 / 3.0) <= 1e-12;
    bool ok = sup.sign_ok && sub.sign_ok && sup.delta_certified > 0.0 &&
              sub.delta_certified > 0.0 && sup_max <= 0.0 && sub_min >= 0.0 && theta_ok;
    rec.verdict = ok ? Verdict::pass : Verdict::fail;
    rec.details = fmt("supersolution residual max %.3e (needs <= 0, delta %.3f certified); ",
                      sup_max, sup.delta_certified) +
                  fmt("subsolution residual min %.3e (needs >= 0, delta %.3f certified); ",
                      sub_min, sub.delta_certified) +
                  fmt("branch constants %.6f / %.6f (1 and 1/3)", sup.theta_const,
                      sub.theta_const);
}

/* ---- 11: monotone continuation and the uniqueness probe ----------------- */

inline void crit_monotone_uniqueness(CheckRecord& rec, const CriterionOptions& opt) {
    struct Fixture {
        const char* label;
        ProblemSpec p;
        SolveOptions o;
        double thr;
    };
    SolveOptions base;
    SolveOptions power_opts;
    power_opts.k_max = 27; /* algebraic truncation decay needs the longer schedule */

    std::vector<Fixture> fixtures;
    fixtures.push_back({"exp interval", exp_interval_problem(), base, 1e-8});
    fixtures.push_back({"cubic interval", interval_problem(0.0, "power", {3.0}, 0.0),
                        power_opts, 1e-8});
    fixtures.push_back({"expm1 theta=1 a=1", interval_problem(1.0, "expm1", {}, 1.0), base,
                        1e-6});

    bool all = true;
    std::string detail;
    for (const auto& fx : fixtures) {
        UniquenessReport uq = uniqueness_probe(fx.p, fx.o);
        bool mono = true;
        for (const auto& run : uq.runs)
            for (const auto& st : run.steps) mono = mono && st.monotone_ok;
        double thr = opt.pinned_tol(11, fx.thr);
        bool ok = uq.all_converged && mono && uq.discrepancy <= thr;
        all = all && ok;
        detail += std::string(fx.label) +
                  fmt(": cross-start discrepancy %.2e (tol %.0e)%s%s; ", uq.discrepancy, thr,
                      mono ? "" : " NON-MONOTONE STEP", ok ? "" : " FAIL");
    }
    rec.verdict = all ? Verdict::pass : Verdict::fail;
    rec.details = detail + "[every continuation step nodewise monotone in the level]";
}

/* ---- 12: rate independent of the linear growth parameter ---------------- */

inline void crit_a_independence(CheckRecord& rec, const CriterionOptions& opt) {
    NonlinearitySpec f = catalog_f("expm1");
    WeightSpec w = catalog_weight("power", 1.0);
    RatePrediction pred = rate_predict(RateBranch::nonregular, f, w);
    const double scale = opt.pinned(12, 1.0);
    auto predfn = [eval = pred.eval, scale](double d) { return scale * eval(d); };

    RateFitOptions o;
    o.d_hi = 1e-2;
    o.d_lo = 1e-5;

    bool all = true;
    double lo = 1e300, hi = -1e300;
    std::string detail = "ratio u/prediction for a in {-1, 0, 1}: finals ";
    for (double a : {-1.0, 0.0, 1.0}) {
        ProblemSpec p = make_problem(a, f, w, Domain::interval(0.0, 1.0));
        LargeSolveReport rep = solve_large(p);
        if (!rep.converged) {
            all = false;
            detail += fmt("(a=%g: no convergence) ", a);
            continue;
        }
        RateFitReport fit = boundary_rate_fit(rep.sol, predfn, o);
        all = all && fit.ratio.verdict.pass;
        double fin = fit.ratio.verdict.final_residual;
        lo = std::min(lo, fin);
        hi = std::max(hi, fin);
        detail += fmt("%.4e%s ", fin, fit.ratio.verdict.pass ? "" : " FAIL");
        rec.series.push_back(fit.ratio);
    }
    rec.verdict = all ? Verdict::pass : Verdict::fail;
    rec.details =
        detail + fmt("[same prediction for all runs; tol 0.05, decreasing; spread %.1e]",
                     hi - lo);
}

} // namespace verifdetail

inline CheckRecord run_criterion(int id, const CriterionOptions& opt = {}) {
    const CriterionSpec* spec = nullptr;
    for (const auto& c : acceptance_criteria())
        if (c.id == id) spec = &c;
    if (!spec)
        throw validation_error("unknown acceptance criterion id " + std::to_string(id));

    CheckRecord rec;
    rec.name = spec->name;
    rec.anchor = spec->anchor;
    auto t0 = std::chrono::steady_clock::now();
    try {
        switch (id) {
            case 1: verifdetail::crit_exactness(rec, opt); break;
            case 2: verifdetail::crit_rate_first_log(rec, opt); break;
            case 3: verifdetail::crit_profile_family(rec, opt); break;
            case 4: verifdetail::crit_classical_closed(rec, opt); break;
            case 5: verifdetail::crit_lemma_limits(rec, opt); break;
            case 6: verifdetail::crit_iterated_log_rate(rec, opt); break;
            case 7: verifdetail::crit_tail_ratio(rec, opt); break;
            case 8: verifdetail::crit_blowup_integral(rec, opt); break;
            case 9: verifdetail::crit_existence_gate(rec, opt); break;
            case 10: verifdetail::crit_barrier_signs(rec, opt); break;
            case 11: verifdetail::crit_monotone_uniqueness(rec, opt); break;
            case 12: verifdetail::crit_a_independence(rec, opt); break;
        }
    } catch (const std::exception& e) {
        rec.verdict = Verdict::fail;
        rec.details = std::string("exception: ") + e.what();
    }
    rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/* Thread cap: BLOWUP_LAB_THREADS when set, hardware concurrency otherwise. */
inline unsigned suite_thread_cap(std::size_t n_jobs) {
    unsigned cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("BLOWUP_LAB_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1 && v <= 256) cap = static_cast<unsigned>(v);
    }
    if (n_jobs < cap) cap = static_cast<unsigned>(n_jobs);
    return cap == 0 ? 1 : cap;
}

/* Runs the listed criteria (deterministic report order = the given order);
 * a crash inside one criterion is recorded as its failure, never the
 * suite's.  Criteria are independent, so they may run in parallel. */
inline VerificationReport run_suite(const std::vector<int>& ids,
                                    const CriterionOptions& opt = {}) {
    VerificationReport rep;
    rep.checks.resize(ids.size());
    if (ids.empty()) return rep;

    unsigned n_threads = suite_thread_cap(ids.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= ids.size()) return;
            rep.checks[i] = run_criterion(ids[i], opt);
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rep;
}

} // namespace blowup
