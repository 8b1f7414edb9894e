/* Boundary profile machinery: the zeta integral and its inversion to the
 * profile Phi, closed-form cross-checks, the classical (regularly varying)
 * profile, rate predictions on both branches, and the six profile limits. */

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "blowup/profile.hpp"

using Catch::Approx;
using namespace blowup;

static ProfileContext make_ctx(const char* fname, std::vector<double> fpar,
                               double theta) {
    return ProfileContext(catalog_f(fname, fpar), catalog_weight("power", theta));
}

TEST_CASE("geometric grid spans its endpoints and decreases", "[profile]") {
    std::vector<double> g = geometric_grid(1e-2, 1e-8, 13);
    REQUIRE(g.size() == 13);
    REQUIRE(g.front() == Approx(1e-2));
    REQUIRE(g.back() == Approx(1e-8));
    REQUIRE(strictly_decreasing(g));
    REQUIRE_THROWS_AS(geometric_grid(-1.0, 1e-8, 13), validation_error);
    REQUIRE_THROWS_AS(geometric_grid(1e-2, 1e-8, 1), validation_error);
}

TEST_CASE("pure-exponential profile matches its closed form", "[profile]") {
    /* f = e^(rho u), weight t^theta: Phi(t) = (2(theta+1)/(rho t^(theta+1)))^(2/rho) */
    struct Case { double rho, theta; };
    for (Case c : {Case{1.0, 0.0}, Case{1.0, 1.0}, Case{2.0, 0.0}}) {
        ProfileContext ctx = make_ctx("exp_rho", {c.rho}, c.theta);
        INFO("rho = " << c.rho << ", theta = " << c.theta);
        for (double t : geometric_grid(1e-1, 1e-6, 11)) {
            double closed = std::pow(
                2.0 * (c.theta + 1.0) / (c.rho * std::pow(t, c.theta + 1.0)),
                2.0 / c.rho);
            REQUIRE(ctx.phi(t) == Approx(closed).epsilon(1e-6));
        }
        /* zeta itself: (2/rho) x^(-rho/2) */
        double x = 1e4;
        REQUIRE(ctx.zeta(x).value ==
                Approx((2.0 / c.rho) * std::pow(x, -0.5 * c.rho)).epsilon(1e-8));
    }
}

TEST_CASE("profile curvature ratio approaches its limiting constant",
          "[profile]") {
    /* (Phi/Phi')(Phi''/Phi') -> 1 + rho/(2(theta+1)), computed through the
     * closed derivative relations (no finite differencing) */
    ProfileContext ctx = make_ctx("exp_rho", {2.0}, 0.0);
    PhiPoint p = ctx.phi_point(1e-6);
    double ratio = (p.phi / p.phi_p) * (p.phi_pp / p.phi_p);
    REQUIRE(ratio == Approx(1.0 + 2.0 / 2.0).epsilon(1e-8));
}

TEST_CASE("expm1 profile equals csc^2(t/2)", "[profile]") {
    /* zeta(x) = pi - 2 atan(sqrt(x-1)) inverts to Phi = csc^2(t/2) exactly */
    ProfileContext ctx = make_ctx("expm1", {}, 0.0);
    for (double t : {1e-2, 1e-3, 1e-4}) {
        double csc = 1.0 / std::sin(0.5 * t);
        REQUIRE(ctx.phi(t) == Approx(csc * csc).epsilon(1e-8));
    }
    double x = 400.0;
    REQUIRE(ctx.zeta(x).value ==
            Approx(std::acos(-1.0) - 2.0 * std::atan(std::sqrt(x - 1.0)))
                .epsilon(1e-9));
}

TEST_CASE("coshm1 profile equals coth^2(t/(2 sqrt 2))", "[profile]") {
    ProfileContext ctx = make_ctx("coshm1", {}, 0.0);
    for (double t : {1e-2, 1e-3}) {
        double c = 1.0 / std::tanh(t / (2.0 * std::sqrt(2.0)));
        REQUIRE(ctx.phi(t) == Approx(c * c).epsilon(1e-8));
    }
}

TEST_CASE("profile table round-trip residuals stay at quadrature level",
          "[profile]") {
    ProfileContext ctx = make_ctx("expm1", {}, 0.0);
    ProfileTable tab = ctx.table(geometric_grid(1e-2, 1e-8, 13));
    REQUIRE(tab.rows.size() == 13);
    REQUIRE(tab.max_roundtrip <= 1e-9);
    REQUIRE(tab.beta > 1.0); /* validity threshold well above the grid */
    for (const auto& r : tab.rows) {
        REQUIRE(r.phi > 0.0);
        REQUIRE(r.phi_p < 0.0); /* Phi decreases toward the boundary... */
        REQUIRE(r.rate > 0.0);
    }
    /* ...so Phi grows as t falls */
    REQUIRE(tab.rows.back().phi > tab.rows.front().phi);
}

TEST_CASE("nonregular rate prediction evaluates log of the profile",
          "[profile]") {
    NonlinearitySpec f = catalog_f("expm1");
    WeightSpec w = catalog_weight("power", 0.0);
    RatePrediction pred = rate_predict(RateBranch::nonregular, f, w);
    REQUIRE(pred.kind == RateBranch::nonregular);
    REQUIRE(pred.constant == Approx(1.0));
    /* L(Phi(d)) = log(csc^2(d/2)) at d = 1e-3 */
    REQUIRE(pred.eval(1e-3) == Approx(15.20180500).margin(1e-5));
    /* first-depth scale: first-log constant (2(1+theta)/rho)^alpha = 2 */
    REQUIRE(pred.corollary_constant == Approx(2.0).epsilon(1e-12));

    /* second-depth scale: the constant collapses to 1 */
    RatePrediction deep =
        rate_predict(RateBranch::nonregular, catalog_f("exp2_m_e"), w);
    REQUIRE(deep.corollary_constant == Approx(1.0));
}

TEST_CASE("rate prediction is independent of the linear growth parameter",
          "[profile]") {
    NonlinearitySpec f = catalog_f("expm1");
    WeightSpec w = catalog_weight("power", 0.0);
    double at_m1 = rate_predict(RateBranch::nonregular, f, w, -1.0).eval(1e-4);
    double at_p1 = rate_predict(RateBranch::nonregular, f, w, +1.0).eval(1e-4);
    REQUIRE(at_m1 == Approx(at_p1).epsilon(1e-14));
}

TEST_CASE("classical profile of a cubic is sqrt(2)/t", "[profile]") {
    NonlinearitySpec cubic = catalog_f("power", {3.0});
    WeightSpec w = catalog_weight("power", 0.0);
    ClassicalProfile cp(cubic, w);
    for (double t : {0.03, 0.1, 0.3, 1.0}) {
        REQUIRE(cp.h(t) * t == Approx(std::sqrt(2.0)).epsilon(1e-8));
    }
    /* h solves h'' = f(h): check via the five-point second difference */
    for (double t : {0.1, 0.3}) {
        double h = cp.h(t);
        REQUIRE(cp.h_second_fd(t) == Approx(h * h * h).epsilon(1e-6));
    }
}

TEST_CASE("classical profile of a square is 6/t^2", "[profile]") {
    NonlinearitySpec sq = catalog_f("power", {2.0});
    WeightSpec w = catalog_weight("power", 0.0);
    ClassicalProfile cp(sq, w);
    for (double t : {0.1, 0.5, 1.0}) {
        REQUIRE(cp.h(t) * t * t == Approx(6.0).epsilon(1e-8));
    }
}

TEST_CASE("regular-branch rate constant matches its closed form", "[profile]") {
    NonlinearitySpec cubic = catalog_f("power", {3.0}); /* f' index rho = 2 */
    /* ((2 theta + rho + 2)/((2 + rho)(theta + 1)))^(1/rho) */
    RatePrediction flat =
        rate_predict(RateBranch::regular, cubic, catalog_weight("power", 0.0));
    REQUIRE(flat.constant == Approx(1.0).margin(1e-12));

    RatePrediction sloped =
        rate_predict(RateBranch::regular, cubic, catalog_weight("power", 1.0));
    REQUIRE(sloped.constant == Approx(std::sqrt(0.75)).epsilon(1e-12));
    /* prediction = constant * h, with h = 2 sqrt(2)/t^2 under the linear
     * weight (the cumulative weight t^2/2 replaces t in the profile) */
    REQUIRE(sloped.eval(0.1) ==
            Approx(std::sqrt(0.75) * 2.0 * std::sqrt(2.0) / 0.01).epsilon(1e-7));
}

TEST_CASE("branch mismatches are rejected", "[profile]") {
    WeightSpec w = catalog_weight("power", 0.0);
    REQUIRE_THROWS_AS(
        rate_predict(RateBranch::nonregular, catalog_f("power", {3.0}), w),
        validation_error);
    REQUIRE_THROWS_AS(rate_predict(RateBranch::regular, catalog_f("expm1"), w),
                      validation_error);
    REQUIRE_THROWS_AS(ProfileContext(catalog_f("power", {3.0}), w),
                      precondition_error);
    /* classical branch needs the finite-blow-up integral to converge */
    REQUIRE_THROWS_AS(ClassicalProfile(catalog_f("power", {1.0}), w),
                      precondition_error);
}

TEST_CASE("profile limits pass for the single-log families", "[profile]") {
    std::vector<double> grid = geometric_grid(1e-2, 1e-8, 13);
    for (const char* fname : {"expm1", "sinh"}) {
        for (double theta : {0.0, 1.0}) {
            INFO("family " << fname << ", theta = " << theta);
            LemmaProReport rep =
                lemma_pro_verify(catalog_f(fname), catalog_weight("power", theta),
                                 grid, 1e-2);
            REQUIRE(rep.limits.size() == 6);
            REQUIRE(rep.all_pass);
        }
    }
}

TEST_CASE("profile limits of the double-exponential family converge at "
          "1/log(1/t) speed", "[profile]") {
    /* On the working grid down to 1e-8 several of the six limits still sit
     * above a 1e-2 band: the approach is O(1/log(1/t)), so ~1e-8 grids leave
     * residuals of a few percent.  This test characterises that honestly:
     * the residuals are where the convergence speed says they should be, and
     * a far deeper grid moves them inside a 2e-2 band. */
    NonlinearitySpec f = catalog_f("exp2_m_e");
    WeightSpec w = catalog_weight("power", 0.0);

    LemmaProReport shallow =
        lemma_pro_verify(f, w, geometric_grid(1e-2, 1e-8, 13), 1e-2);
    REQUIRE_FALSE(shallow.all_pass);
    double shallow_worst = 0.0;
    for (const auto& s : shallow.limits)
        shallow_worst = std::max(shallow_worst, s.verdict.final_residual);
    /* worst offender is a few percent, not orders of magnitude off */
    REQUIRE(shallow_worst > 1e-2);
    REQUIRE(shallow_worst < 1e-1);

    LemmaProReport deep =
        lemma_pro_verify(f, w, geometric_grid(1e-2, 1e-50, 21), 2e-2);
    REQUIRE(deep.all_pass);
    for (std::size_t i = 0; i < deep.limits.size(); ++i) {
        INFO("limit series: " << deep.limits[i].name);
        REQUIRE(deep.limits[i].verdict.final_residual <=
                shallow.limits[i].verdict.final_residual + 1e-12);
    }
}

TEST_CASE("profile limit grids are validated", "[profile]") {
    NonlinearitySpec f = catalog_f("expm1");
    WeightSpec w = catalog_weight("power", 0.0);
    REQUIRE_THROWS_AS(lemma_pro_verify(f, w, {1e-2, 1e-3, 1e-4}, 1e-2),
                      validation_error);
    std::vector<double> increasing = {1e-8, 1e-6, 1e-4, 1e-2};
    REQUIRE_THROWS_AS(lemma_pro_verify(f, w, increasing, 1e-2), validation_error);
}

TEST_CASE("iterated logarithm helper", "[profile]") {
    REQUIRE(iterated_log_value(std::exp(2.0), 1) == Approx(2.0).epsilon(1e-12));
    REQUIRE(iterated_log_value(std::exp(std::exp(2.0)), 2) ==
            Approx(2.0).epsilon(1e-12));
}
