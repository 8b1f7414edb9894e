/* Regular-variation calculus: index estimation, slow-variation checks,
 * integral representation, Karamata tail ratios, the finite-blow-up
 * (Keller-Osserman) integral test, and rapid variation of inverse scales. */

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "blowup/funcatalog.hpp"
#include "blowup/rvcalc.hpp"

using Catch::Approx;
using namespace blowup;

/* geometric grid u_0 * step^k, handy for index grids on [1e2, 1e12] */
static std::vector<double> geo(double lo, double hi, int n) {
    std::vector<double> g(n);
    double r = std::pow(hi / lo, 1.0 / (n - 1));
    double x = lo;
    for (int i = 0; i < n; ++i, x *= r) g[i] = x;
    return g;
}

TEST_CASE("index estimate recovers a pure power exactly", "[rvcalc]") {
    ScalarFunction R = pow_of(ScalarFunction::identity(), 2.5);
    IndexEstimate est = rv_index_estimate(R, 2.0, geo(1e2, 1e10, 25));
    REQUIRE(est.value == Approx(2.5).margin(1e-12));
    REQUIRE(est.band_lo == Approx(2.5).margin(1e-12));
    REQUIRE(est.band_hi == Approx(2.5).margin(1e-12));
}

TEST_CASE("index estimate of a power with a log factor drifts to the power",
          "[rvcalc]") {
    /* R(u) = u^3 log u: the per-point estimate is 3 + log(log(xi u)/log u)/log xi,
     * which decreases to 3; the oscillation band brackets the limit. */
    ScalarFunction R = named_scalar_function("power_log", {3.0, 1.0});
    IndexEstimate est = rv_index_estimate(R, 2.0, geo(1e2, 1e12, 41));
    REQUIRE(est.value > 3.0);
    REQUIRE(est.value == Approx(3.0).margin(0.06));
    REQUIRE(est.band_lo <= est.value);
    REQUIRE(est.band_hi >= est.value);
    /* residuals relative to the final estimate shrink along the grid */
    REQUIRE(est.residual.front() > est.residual.back());
}

TEST_CASE("index estimate validates its inputs", "[rvcalc]") {
    ScalarFunction R = ScalarFunction::identity();
    REQUIRE_THROWS_AS(rv_index_estimate(R, 1.0, geo(1e2, 1e6, 12)),
                      validation_error);
    REQUIRE_THROWS_AS(rv_index_estimate(R, -2.0, geo(1e2, 1e6, 12)),
                      validation_error);
    REQUIRE_THROWS_AS(rv_index_estimate(R, 2.0, {1.0, 2.0, 3.0}),
                      validation_error);
    REQUIRE_THROWS_AS(rv_index_estimate(R, 2.0, {1.0, 3.0, 2.0, 4.0}),
                      validation_error);
}

TEST_CASE("normalised slow-variation check accepts log and rejects a power",
          "[rvcalc]") {
    /* u L'/L = 1/log u decays to 4.3e-2 by u = 1e10: band it at 5e-2 */
    SvCheck ok = normalised_sv_check(named_scalar_function("log", {}),
                                     geo(1e2, 1e10, 17), 5e-2);
    REQUIRE(ok.verdict.pass);
    /* u L'/L = 1/log u for L = log */
    REQUIRE(ok.residual.back() == Approx(1.0 / std::log(1e10)).epsilon(1e-10));

    SvCheck bad = normalised_sv_check(pow_of(ScalarFunction::identity(), 0.3),
                                      geo(1e2, 1e10, 17), 5e-2);
    REQUIRE_FALSE(bad.verdict.pass);
    REQUIRE(bad.residual.back() == Approx(0.3).margin(1e-12));
}

TEST_CASE("integral representation reproduces a pure-power slow drift",
          "[rvcalc]") {
    /* phi ~= c constant reconstructs M_hat (u/B)^c */
    RepresentationSpec spec;
    spec.phi = ScalarFunction::constant(0.25);
    spec.M_hat = 2.0;
    spec.B = std::exp(1.0);
    double u = 50.0;
    double expected = 2.0 * std::pow(u / spec.B, 0.25);
    REQUIRE(representation_eval(spec, u) == Approx(expected).epsilon(1e-10));
    REQUIRE(representation_eval(spec, spec.B) == Approx(2.0));
    REQUIRE_THROWS_AS(representation_eval(spec, 0.5), domain_error);
}

TEST_CASE("exponent density of log is 1 over log", "[rvcalc]") {
    ScalarFunction phi = extract_phi(named_scalar_function("log", {}));
    REQUIRE(phi.eval(std::exp(2.0)) == Approx(0.5).epsilon(1e-12));
    REQUIRE(phi.eval(std::exp(8.0)) == Approx(0.125).epsilon(1e-12));
}

TEST_CASE("Karamata tail ratio is exact for a pure power", "[rvcalc]") {
    /* R = u^2, j = -4: tail = 1/u, ratio = u^{-3} u^2 / (1/u) = 1,
     * and -(j + rho + 1) = 1 as well. */
    ScalarFunction R = named_scalar_function("power", {2.0});
    KaramataResult k = karamata_residual(R, 2.0, -4.0, 1e5);
    REQUIRE(k.expected == Approx(1.0));
    REQUIRE(k.ratio == Approx(1.0).epsilon(1e-8));
    REQUIRE(std::fabs(k.residual) < 1e-8);
}

TEST_CASE("Karamata tail ratio matches the closed form for u^2 log u",
          "[rvcalc]") {
    /* int_u^inf x^{-2} log x dx = (log u + 1)/u, so the ratio equals
     * log u / (log u + 1) exactly. */
    ScalarFunction R = named_scalar_function("power_log", {2.0, 1.0});
    for (double u : {1e4, 1e6, 1e8}) {
        KaramataResult k = karamata_residual(R, 2.0, -4.0, u);
        double lu = std::log(u);
        REQUIRE(k.ratio == Approx(lu / (lu + 1.0)).epsilon(1e-8));
        REQUIRE(k.expected == Approx(1.0));
    }
}

TEST_CASE("Karamata distance to the limit shrinks like 1 over log u",
          "[rvcalc]") {
    ScalarFunction R = named_scalar_function("power_log", {2.0, 1.0});
    std::vector<double> dist;
    for (int e = 4; e <= 8; ++e) {
        KaramataResult k = karamata_residual(R, 2.0, -4.0, std::pow(10.0, e));
        dist.push_back(std::fabs(k.ratio / k.expected - 1.0));
    }
    REQUIRE(strictly_decreasing(dist));
    /* |ratio - 1| = 1/(log u + 1): still 5.1e-2 at u = 1e8 */
    REQUIRE(dist.back() == Approx(1.0 / (std::log(1e8) + 1.0)).epsilon(1e-6));
}

TEST_CASE("Karamata rejects a divergent tail exponent", "[rvcalc]") {
    ScalarFunction R = named_scalar_function("power", {2.0});
    /* j + rho = 0 > -1: the tail integral diverges */
    REQUIRE_THROWS_AS(karamata_residual(R, 2.0, -2.0, 1e5), divergence_error);
    REQUIRE_THROWS_AS(karamata_residual(R, 2.0, -4.0, -1.0), validation_error);
}

TEST_CASE("finite-blow-up integral test separates linear from superlinear",
          "[rvcalc]") {
    /* f = u: F = u^2/2, integrand ~ 1/u, logarithmic divergence */
    NonlinearitySpec lin = catalog_f("power", {1.0});
    REQUIRE(keller_osserman(lin).verdict == KOVerdict::diverges);

    /* f = u^3: integral from 1 equals exactly 2 */
    NonlinearitySpec cubic = catalog_f("power", {3.0});
    KOResult ko = keller_osserman(cubic);
    REQUIRE(ko.verdict == KOVerdict::converges);
    REQUIRE(ko.value == Approx(2.0).epsilon(1e-8));

    for (const char* name : {"expm1", "sinh", "exp2_m_e"}) {
        KOResult k = keller_osserman(catalog_f(name, {}));
        REQUIRE(k.verdict == KOVerdict::converges);
        REQUIRE(std::isfinite(k.value));
        REQUIRE(k.value > 0.0);
    }
}

TEST_CASE("finite-blow-up integral validates the start point", "[rvcalc]") {
    auto F = [](double u) { return u * u; };
    REQUIRE_THROWS_AS(keller_osserman_integral(F, -1.0), validation_error);
}

TEST_CASE("rapid variation of the exponential scale inverse", "[rvcalc]") {
    /* L = log has inverse exp: exp(lambda u)/exp(u) escapes to infinity for
     * lambda > 1 and to zero for lambda < 1, monotonically in u. */
    ScalarFunction Linv = named_scalar_function("exp", {});
    RapidVariationReport rep =
        rapid_variation_check(Linv, {0.5, 1.0, 2.0}, geo(10.0, 100.0, 9));
    REQUIRE(rep.rapidly_varying);
    REQUIRE(rep.entries.size() == 3);
    for (const auto& e : rep.entries) REQUIRE(e.pass);

    /* a pure power is not rapidly varying */
    ScalarFunction power = named_scalar_function("power", {3.0});
    RapidVariationReport no =
        rapid_variation_check(power, {2.0}, geo(10.0, 100.0, 9));
    REQUIRE_FALSE(no.rapidly_varying);

    REQUIRE_THROWS_AS(rapid_variation_check(Linv, {-1.0}, geo(10.0, 100.0, 9)),
                      validation_error);
}
