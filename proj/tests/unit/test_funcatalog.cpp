/* Nonlinearity and weight catalogues: antiderivative consistency, slow
 * variation decompositions, monotonicity certificates, weight indices,
 * and assembly of the coefficient field b(x). */

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "blowup/funcatalog.hpp"
#include "blowup/geometry.hpp"

using Catch::Approx;
using namespace blowup;

/* valid default parameters for each catalogued nonlinearity */
static std::vector<double> default_params(const std::string& name) {
    if (name == "power") return {2.0};
    if (name == "exp_rho") return {1.0};
    if (name == "power_exp") return {1.0, 1.0, 1.0};
    return {};
}

/* central difference of F, for checking F' = f */
static double F_diff(const NonlinearitySpec& s, double t, double h) {
    return (s.F.eval(t + h) - s.F.eval(t - h)) / (2.0 * h);
}

TEST_CASE("every catalogued nonlinearity has F(0) = 0 and F' = f",
          "[funcatalog]") {
    for (const std::string& name : catalog_f_names()) {
        NonlinearitySpec s = catalog_f(name, default_params(name));
        INFO("family: " << name);
        REQUIRE(s.F.eval(0.0) == Approx(0.0).margin(1e-14));
        /* exp2_cos oscillates at double-exponential frequency above its
         * junction; probe it below, the others at a generic point */
        double t = (name == "exp2_cos") ? 1.0 : 2.0;
        double fd = F_diff(s, t, 1e-5 * t);
        REQUIRE(fd == Approx(s.f.eval(t)).epsilon(1e-6));
    }
}

TEST_CASE("monotonicity certificate holds on the smooth families",
          "[funcatalog]") {
    for (const std::string& name :
         {"expm1", "sinh", "coshm1", "exp_log", "exp2_m_e", "power"}) {
        NonlinearitySpec s = catalog_f(name, default_params(name));
        INFO("family: " << name);
        REQUIRE(s.a1.holds());
        REQUIRE(s.a1.u_max_checked > 1.0);
    }
    /* e^(rho u) has f(0) = 1 and e^u/u dips below u = 1: the certificate
     * records both violated hypotheses instead of hiding them */
    NonlinearitySpec er = catalog_f("exp_rho", {1.0});
    REQUIRE_FALSE(er.a1.f_zero_at_zero);
    REQUIRE_FALSE(er.a1.ratio_increasing);
    REQUIRE(er.a1.f_positive);
}

TEST_CASE("monotonicity certificate rejects bad shapes", "[funcatalog]") {
    /* f(0) != 0 */
    A1Certificate c1 = a1_certificate(ScalarFunction::constant(1.0));
    REQUIRE_FALSE(c1.f_zero_at_zero);
    REQUIRE_FALSE(c1.holds());
    /* f/u decreasing */
    A1Certificate c2 = a1_certificate(pow_of(ScalarFunction::identity(), 0.5));
    REQUIRE_FALSE(c2.ratio_increasing);
    REQUIRE_FALSE(c2.holds());
}

TEST_CASE("decomposition metadata: growth index and iterated-log depth",
          "[funcatalog]") {
    NonlinearitySpec em1 = catalog_f("expm1");
    REQUIRE(em1.has_decomposition);
    REQUIRE(em1.rho == Approx(1.0));
    REQUIRE(em1.m == 1);

    NonlinearitySpec e2 = catalog_f("exp2_m_e");
    REQUIRE(e2.m == 2);
    REQUIRE(e2.rho == Approx(1.0));

    NonlinearitySpec cubic = catalog_f("power", {3.0});
    REQUIRE(cubic.regular_branch);
    REQUIRE_FALSE(cubic.has_decomposition);
    REQUIRE(cubic.rho == Approx(2.0)); /* index of f' = 3u^2 */
    REQUIRE(cubic.m == 0);

    NonlinearitySpec pe = catalog_f("power_exp", {1.5, 2.0, 3.0});
    REQUIRE(pe.rho == Approx(2.0));
    REQUIRE(pe.alpha == Approx(3.0));
    REQUIRE_FALSE(pe.closed_F);
}

TEST_CASE("composition with the scale function collapses to a power",
          "[funcatalog]") {
    /* expm1: f(log u) = u - 1; exp_rho(1): f(log u) = u */
    NonlinearitySpec em1 = catalog_f("expm1");
    REQUIRE(em1.f_of_L().eval(100.0) == Approx(99.0).epsilon(1e-12));

    NonlinearitySpec er = catalog_f("exp_rho", {1.0});
    REQUIRE(er.f_of_L().eval(50.0) == Approx(50.0).epsilon(1e-12));

    REQUIRE_THROWS_AS(catalog_f("power", {3.0}).f_of_L(), precondition_error);
}

TEST_CASE("nonlinearity parameter validation", "[funcatalog]") {
    REQUIRE_THROWS_AS(catalog_f("power", {0.5}), validation_error);
    REQUIRE_THROWS_AS(catalog_f("power", {}), validation_error);
    REQUIRE_THROWS_AS(catalog_f("exp_rho", {-1.0}), validation_error);
    REQUIRE_THROWS_AS(catalog_f("power_exp", {0.5, 1.0, 1.0}), validation_error);
    REQUIRE_THROWS_AS(catalog_f("no_such_family"), validation_error);
}

TEST_CASE("quadrature-backed antiderivative integrates a polynomial",
          "[funcatalog]") {
    ScalarFunction f = 3.0 * pow_of(ScalarFunction::identity(), 2.0);
    ScalarFunction F = antiderivative_by_quadrature(f, "F[test]");
    REQUIRE(F.eval(2.0) == Approx(8.0).epsilon(1e-9));
    REQUIRE(F.eval(0.0) == Approx(0.0).margin(1e-14));
}

TEST_CASE("composed nonlinearity carries its pieces' metadata",
          "[funcatalog]") {
    /* g(u) = u^2 through the scale L = log: f = g(exp(.)), so that
     * f(L(u)) = g(u) = u^2 exactly above the junction. */
    RVClass g;
    g.index = 2.0;
    g.fn = pow_of(ScalarFunction::identity(), 2.0);
    g.sv_part = ScalarFunction::constant(1.0);
    SlowVariationProfile L = SlowVariationProfile::iterated_log_power(1, 1.0);
    NonlinearitySpec s = compose_f(g, L);
    REQUIRE(s.rho == Approx(2.0));
    REQUIRE(s.m == 1);
    REQUIRE(s.has_decomposition);
    /* f(v) = e^(2v) above the junction v = 1 = log(e) */
    REQUIRE(s.f.eval(3.0) == Approx(std::exp(6.0)).epsilon(1e-10));
    REQUIRE(s.f_of_L().eval(50.0) == Approx(2500.0).epsilon(1e-10));
    /* splice keeps f(0) = 0 */
    REQUIRE(s.f.eval(0.0) == Approx(0.0).margin(1e-14));
}

TEST_CASE("weight catalogue: indices and cumulative integrals",
          "[funcatalog]") {
    /* pure power: closed cumulative integral t^(theta+1)/(theta+1) */
    WeightSpec power = catalog_weight("power", 1.5);
    REQUIRE(power.ik_closed);
    REQUIRE(power.IK(0.2) == Approx(std::pow(0.2, 2.5) / 2.5).epsilon(1e-12));

    /* sin_power: K = (sin t)^theta, finite domain edge at pi */
    WeightSpec sp = catalog_weight("sin_power", 2.0);
    REQUIRE(sp.nu == Approx(std::acos(-1.0)));
    REQUIRE(sp.K.eval(0.5) == Approx(std::pow(std::sin(0.5), 2.0)).epsilon(1e-12));
    /* quadrature cumulative integral agrees with the power model near 0 */
    REQUIRE(sp.IK(1e-3) == Approx(std::pow(1e-3, 3.0) / 3.0).epsilon(1e-4));

    /* power_log folds the log exponent into the effective index */
    WeightSpec pl = catalog_weight("power_log", 1.0, {0.5});
    REQUIRE(pl.theta == Approx(1.5));

    /* power_itlog: slowly decaying correction, finite nu */
    WeightSpec pit = catalog_weight("power_itlog", 1.0, {1.0, 1.0});
    REQUIRE(pit.theta == Approx(1.0));
    REQUIRE(pit.nu == Approx(1.0));

    /* power_expgamma: gamma constrained to (0, 1) */
    WeightSpec pg = catalog_weight("power_expgamma", 0.0, {0.5});
    REQUIRE(pg.K.eval(0.01) ==
            Approx(std::exp(-std::pow(std::log(100.0), 0.5))).epsilon(1e-12));
}

TEST_CASE("weight slowly varying factor tends to 1 for sin_power",
          "[funcatalog]") {
    WeightSpec sp = catalog_weight("sin_power", 2.0);
    /* K(t)/t^theta = (sin t / t)^theta -> 1 */
    REQUIRE(sp.L_K.eval(1e-4) == Approx(1.0).margin(1e-6));
}

TEST_CASE("weight parameter validation", "[funcatalog]") {
    REQUIRE_THROWS_AS(catalog_weight("power", -0.5), validation_error);
    REQUIRE_THROWS_AS(catalog_weight("power", 0.0, {1.0}), validation_error);
    REQUIRE_THROWS_AS(catalog_weight("power_expgamma", 0.0, {1.5}),
                      validation_error);
    REQUIRE_THROWS_AS(catalog_weight("power_itlog", 0.0, {1.0, 1.5}),
                      validation_error);
    REQUIRE_THROWS_AS(catalog_weight("no_such_weight", 0.0), validation_error);
}

TEST_CASE("coefficient field squares the weight of the boundary distance",
          "[funcatalog]") {
    WeightSpec w = catalog_weight("power", 1.0);
    Domain dom = Domain::interval(0.0, 1.0);
    BField b = weight_to_b(w, dom);
    /* b(x) = K(d)^2 = d^2 on the left half */
    REQUIRE(b(0.1) == Approx(0.01).epsilon(1e-12));
    REQUIRE(b(0.9) == Approx(0.01).epsilon(1e-12));
}

TEST_CASE("coefficient field vanishes on the degenerate core and blends "
          "over a collar", "[funcatalog]") {
    WeightSpec w = catalog_weight("power", 0.0);
    Domain dom = Domain::interval(0.0, 1.0);
    Omega0 core = Omega0::range(0.4, 0.6);
    BField b = weight_to_b(w, dom, core);
    REQUIRE(b(0.5) == 0.0);
    REQUIRE(b(0.41) == 0.0);
    /* collar width = 0.05 * diam = 0.01: blend strictly between 0 and the
     * outside value, continuous at both collar edges */
    double outside = b(0.2);
    REQUIRE(outside > 0.0);
    double mid = b(0.6 + 0.005);
    REQUIRE(mid > 0.0);
    REQUIRE(mid < outside);
    REQUIRE(b(0.6 + 0.0099) == Approx(outside).epsilon(1e-2));
    REQUIRE(b(0.6 + 0.0001) == Approx(0.0).margin(1e-3 * outside));
}

TEST_CASE("coefficient perturbation vanishes at the boundary and respects "
          "the amplitude bound", "[funcatalog]") {
    WeightSpec w = catalog_weight("power", 1.0);
    Domain dom = Domain::interval(0.0, 1.0);
    BField plain = weight_to_b(w, dom);
    BField bumped = weight_to_b(w, dom, Omega0::none(), 0.5);
    double x = 0.25; /* d = 0.25 */
    REQUIRE(bumped(x) / plain(x) == Approx(1.0 + 0.5 * 0.25 / 1.25).epsilon(1e-12));
    /* near the boundary the perturbation factor tends to 1 */
    REQUIRE(bumped(1e-6) / plain(1e-6) == Approx(1.0).margin(1e-5));
    REQUIRE_THROWS_AS(weight_to_b(w, dom, Omega0::none(), 1.0), validation_error);
}

TEST_CASE("degenerate core must sit inside the domain", "[funcatalog]") {
    WeightSpec w = catalog_weight("power", 0.0);
    Domain dom = Domain::interval(0.0, 1.0);
    REQUIRE_THROWS_AS(weight_to_b(w, dom, Omega0::range(0.9, 1.1)),
                      validation_error);
}
