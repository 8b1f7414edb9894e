#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "funcatalog.hpp"
#include "geometry.hpp"
#include "profile.hpp"
#include "trend.hpp"

namespace blowup {

/* ---------------------------------------------------------------- meshes --
 * Boundary-graded meshes: the distance of the i-th node from the blow-up
 * boundary is prescribed as d_i = D * (i/n)^q, which clusters nodes
 * geometrically where the solution blows up.  Distances are stored exactly
 * (computed from the grading formula, not by subtracting coordinates), so
 * the finest layers keep full relative precision.
 */

struct Mesh {
    Domain dom;
    double q = 3.0;  // grading exponent
    int n_layer = 0; // nodes per boundary layer

    std::vector<double> x;       // ascending node coordinates
    std::vector<double> d;       // distance of each node to the blow-up boundary
    std::vector<char> blowup_bc; // 1 where the u = M condition applies
    bool center_symmetry = false; // ball only: node 0 sits at r = 0

    std::size_t size() const { return x.size(); }
};

inline Mesh make_mesh(const Domain& dom, int n = 4096, double q = 3.0) {
    if (n < 16) throw validation_error("mesh: need at least 16 nodes per layer");
    if (!(q >= 1.0)) throw validation_error("mesh: grading exponent must be >= 1");
    Mesh m;
    m.dom = dom;
    m.q = q;
    m.n_layer = n;

    auto grade = [&](int i) { return std::pow(static_cast<double>(i) / n, q); };

    if (dom.kind == Domain::Kind::ball) {
        /* single layer from the center to r = R; clustering at r = R */
        double R = dom.hi;
        m.center_symmetry = true;
        for (int i = 0; i <= n; ++i) {
            double dist = R * grade(n - i);
            m.x.push_back(R - dist);
            m.d.push_back(dist);
            m.blowup_bc.push_back(i == n ? 1 : 0);
        }
    } else {
        /* two layers meeting at the midpoint; blow-up at both ends */
        double half = 0.5 * (dom.hi - dom.lo);
        for (int i = 0; i <= n; ++i) {
            double dist = half * grade(i);
            m.x.push_back(dom.lo + dist);
            m.d.push_back(dist);
            m.blowup_bc.push_back(i == 0 ? 1 : 0);
        }
        for (int i = n - 1; i >= 0; --i) {
            double dist = half * grade(i);
            m.x.push_back(dom.hi - dist);
            m.d.push_back(dist);
            m.blowup_bc.push_back(i == 0 ? 1 : 0);
        }
    }
    return m;
}

/* ------------------------------------------- tridiagonal linear algebra --
 * Gaussian elimination with partial pivoting on a tridiagonal system.
 * Pivoting introduces one extra superdiagonal of fill-in; it keeps the
 * solve stable when the shifted operator loses diagonal dominance (a > 0
 * over a degenerate core).
 */
namespace bvpdetail {

inline std::vector<double> solve_tridiagonal(std::vector<double> sub,
                                             std::vector<double> diag,
                                             std::vector<double> sup,
                                             std::vector<double> rhs) {
    const std::size_t n = diag.size();
    if (sub.size() != n || sup.size() != n || rhs.size() != n)
        throw validation_error("tridiagonal solve: band size mismatch");
    std::vector<double> sup2(n, 0.0); // fill-in band
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (std::fabs(sub[k + 1]) > std::fabs(diag[k])) {
            std::swap(diag[k], sub[k + 1]);
            std::swap(sup[k], diag[k + 1]);
            std::swap(sup2[k], sup[k + 1]);
            std::swap(rhs[k], rhs[k + 1]);
        }
        if (diag[k] == 0.0)
            throw numerical_error("tridiagonal solve: zero pivot at row " + std::to_string(k));
        double mlt = sub[k + 1] / diag[k];
        diag[k + 1] -= mlt * sup[k];
        sup[k + 1] -= mlt * sup2[k];
        rhs[k + 1] -= mlt * rhs[k];
    }
    if (diag[n - 1] == 0.0)
        throw numerical_error("tridiagonal solve: zero pivot at last row");
    std::vector<double> sol(n, 0.0);
    sol[n - 1] = rhs[n - 1] / diag[n - 1];
    if (n >= 2) sol[n - 2] = (rhs[n - 2] - sup[n - 2] * sol[n - 1]) / diag[n - 2];
    for (std::size_t k = n; k-- > 2;) {
        std::size_t i = k - 2;
        sol[i] = (rhs[i] - sup[i] * sol[i + 1] - sup2[i] * sol[i + 2]) / diag[i];
    }
    return sol;
}

} // namespace bvpdetail

/* ----------------------------------------------------- eigenvalue gate --
 * Smallest Dirichlet eigenvalue of -Laplace on an interval or a radial
 * ball/annulus, by inverse power iteration on the finite-difference
 * operator.  Convention: the returned value is positive (lambda_1 of
 * -Laplace); an empty region maps to +infinity at the call sites.
 */

inline double eigen_dirichlet(const Domain& region, int n_nodes = 1024) {
    if (n_nodes < 64) throw validation_error("eigen_dirichlet: need n_nodes >= 64");
    const double h = (region.hi - region.lo) / n_nodes;
    const bool ball = region.kind == Domain::Kind::ball;
    const int N = region.N;

    /* unknowns: interior nodes; for a ball the center is an unknown with the
     * symmetry stencil -2N (u1 - u0)/h^2 for -Laplace */
    std::vector<double> r; // coordinate per unknown
    if (ball)
        for (int i = 0; i < n_nodes; ++i) r.push_back(i * h);
    else
        for (int i = 1; i < n_nodes; ++i) r.push_back(region.lo + i * h);
    const std::size_t n = r.size();

    std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (ball && i == 0) {
            diag[0] = 2.0 * N / (h * h);
            sup[0] = -2.0 * N / (h * h);
            continue;
        }
        diag[i] = 2.0 / (h * h);
        double drift = region.radial() ? (N - 1) / (2.0 * r[i] * h) : 0.0;
        if (i > 0) sub[i] = -1.0 / (h * h) + drift;
        if (i + 1 < n) sup[i] = -1.0 / (h * h) - drift;
    }
    auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * v[i];
            if (i > 0) s += sub[i] * v[i - 1];
            if (i + 1 < n) s += sup[i] * v[i + 1];
            out[i] = s;
        }
    };

    /* deterministic positive start vector (mt19937 output mapped manually so
     * the sequence is identical on every platform) */
    std::mt19937 gen(1234567u);
    std::vector<double> v(n);
    for (auto& e : v) e = 0.5 + static_cast<double>(gen() >> 8) / 16777216.0;

    double lambda = 0.0, lambda_prev = std::numeric_limits<double>::infinity();
    std::vector<double> history;
    std::vector<double> w(n), av(n);
    const int max_iter = 20000;
    for (int it = 0; it < max_iter; ++it) {
        w = bvpdetail::solve_tridiagonal(sub, diag, sup, v);
        double norm = 0.0;
        for (double e : w) norm += e * e;
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) throw numerical_error("eigen_dirichlet: iteration collapsed to zero");
        for (auto& e : w) e /= norm;
        apply(w, av);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += w[i] * av[i];
            den += w[i] * w[i];
        }
        lambda = num / den;
        history.push_back(lambda);
        if (std::fabs(lambda - lambda_prev) <= 1e-10 * std::max(1.0, std::fabs(lambda)))
            return lambda;
        lambda_prev = lambda;
        v = w;
    }
    std::string tail;
    for (std::size_t i = history.size() >= 6 ? history.size() - 6 : 0; i < history.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.12g", history[i]);
        tail += buf;
    }
    throw numerical_error("eigen_dirichlet: inverse iteration stagnated; Rayleigh history:" +
                          tail);
}

/* -------------------------------------------------------- problem spec -- */

struct GateReport {
    A1Certificate a1;          // nonlinearity certificate (recorded, not enforced)
    bool h_ok = true;          // weight monotonicity certificate
    double lambda1 = std::numeric_limits<double>::infinity(); // of the degenerate core
    bool existence_ok = true;  // a < lambda1
    std::string message;
};

inline GateReport gate_check(double a, const NonlinearitySpec& f, const WeightSpec& w,
                             const Domain& dom, const Omega0& omega0 = Omega0::none(),
                             int eigen_nodes = 1024) {
    GateReport g;
    g.a1 = f.a1;
    g.h_ok = w.h_monotone_ok;
    g.lambda1 = omega0.present
                    ? eigen_dirichlet(omega0.as_domain(dom), eigen_nodes)
                    : std::numeric_limits<double>::infinity();
    g.existence_ok = a < g.lambda1;
    char buf[160];
    if (g.existence_ok) {
        std::snprintf(buf, sizeof buf, "existence gate passed: a = %g < lambda_1 = %g", a,
                      g.lambda1);
    } else {
        std::snprintf(buf, sizeof buf,
                      "existence gate refused: a = %g >= lambda_{infty,1} ~= %.2f "
                      "(no large solutions at or above the core eigenvalue)",
                      a, g.lambda1);
    }
    g.message = buf;
    return g;
}

struct ProblemSpec {
    double a = 0.0;
    NonlinearitySpec f;
    WeightSpec weight;
    Domain dom;
    Omega0 omega0;
    double eta_amp = 0.0;
    BField b;
    GateReport gates;
};

/* Builds a full problem instance; evaluates the spectral existence gate
 * before anything else and refuses the instance when a >= lambda_1 of the
 * degenerate core. */
inline ProblemSpec make_problem(double a, const NonlinearitySpec& f, const WeightSpec& w,
                                const Domain& dom, const Omega0& omega0 = Omega0::none(),
                                double eta_amp = 0.0, int eigen_nodes = 1024) {
    ProblemSpec p;
    p.a = a;
    p.f = f;
    p.weight = w;
    p.dom = dom;
    p.omega0 = omega0;
    p.eta_amp = eta_amp;
    p.b = weight_to_b(w, dom, omega0, eta_amp);
    p.gates = gate_check(a, f, w, dom, omega0, eigen_nodes);
    if (!p.gates.existence_ok)
        throw existence_gate_error(p.gates.message, a, p.gates.lambda1);
    return p;
}

/* -------------------------------------------------------- solution grid -- */

struct NewtonStats {
    int iterations = 0;
    double final_residual = 0.0; // max_i |G_i| / scale_i at acceptance
    bool projected = false;      // a trial iterate was clipped at u = 0
    std::vector<double> merit_history;
};

struct SolutionGrid {
    Mesh mesh;
    std::vector<double> u;
    std::vector<double> bval;     // coefficient b at the nodes
    std::vector<double> residual; // raw discrete residual (0 on boundary rows)
    double M = 0.0;               // effective truncation level
    double M_requested = 0.0;
    NewtonStats newton;
    bool converged_interior = false; // vs the previous continuation level
    double interior_change = std::numeric_limits<double>::infinity();

    std::string to_csv() const {
        std::string out = "x,d,u,b,residual\n";
        char line[192];
        for (std::size_t i = 0; i < u.size(); ++i) {
            std::snprintf(line, sizeof line, "%.16e,%.16e,%.16e,%.16e,%.16e\n", mesh.x[i],
                          mesh.d[i], u[i], bval[i], residual[i]);
            out += line;
        }
        return out;
    }
};

/* ------------------------------------------------------- solver options -- */

enum class InitStrategy { rate_clip, constant_level, over_relaxed, ramp };

struct SolveOptions {
    int n = 4096;        // nodes per boundary layer
    double q = 3.0;      // mesh grading exponent
    double newton_tol = 1e-10;
    int newton_max = 100;
    double M0 = 4.0;     // first truncation level
    int k_max = 20;      // M-schedule cap: M = M0 * 2^k
    double tol_interior = 1e-6;
    double d_min = 0.1;  // interior comparison subgrid {d >= d_min}
    InitStrategy start = InitStrategy::rate_clip;
};

namespace bvpdetail {

/* Largest u at which f can be evaluated without overflowing; truncation
 * levels are clamped here so every Newton residual stays finite. */
inline double finite_evaluation_cap(const ScalarFunction& f) {
    const double big = 1e290;
    auto over = [&](double u) {
        double v = f.eval(u);
        return !(std::fabs(v) <= big);
    };
    if (!over(1e6)) return std::numeric_limits<double>::infinity();
    double lo = 1.0, hi = 1e6;
    if (over(lo)) return 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        (over(mid) ? hi : lo) = mid;
    }
    return lo;
}

/* Per-node second-difference and drift coefficients on the nonuniform mesh. */
struct Stencil {
    std::vector<double> cm, c0, cp; // u_{i-1}, u_i, u_{i+1} weights of the Laplacian
    std::vector<double> mag;        // |cm| + |c0| + |cp|, for rounding floors
};

inline Stencil build_stencil(const Mesh& mesh) {
    const std::size_t m = mesh.size();
    Stencil st;
    st.cm.assign(m, 0.0);
    st.c0.assign(m, 0.0);
    st.cp.assign(m, 0.0);
    st.mag.assign(m, 0.0);
    const bool radial = mesh.dom.radial();
    const int N = mesh.dom.N;
    for (std::size_t i = 0; i < m; ++i) {
        if (mesh.blowup_bc[i]) continue;
        if (mesh.center_symmetry && i == 0) {
            double h = mesh.x[1] - mesh.x[0];
            st.c0[0] = -2.0 * N / (h * h);
            st.cp[0] = 2.0 * N / (h * h);
        } else {
            double h1 = mesh.x[i] - mesh.x[i - 1];
            double h2 = mesh.x[i + 1] - mesh.x[i];
            st.cm[i] = 2.0 / (h1 * (h1 + h2));
            st.c0[i] = -2.0 / (h1 * h2);
            st.cp[i] = 2.0 / (h2 * (h1 + h2));
            if (radial) {
                double drift = (N - 1) / mesh.x[i];
                st.cm[i] += drift * (-h2 / (h1 * (h1 + h2)));
                st.c0[i] += drift * ((h2 - h1) / (h1 * h2));
                st.cp[i] += drift * (h1 / (h2 * (h1 + h2)));
            }
        }
        st.mag[i] = std::fabs(st.cm[i]) + std::fabs(st.c0[i]) + std::fabs(st.cp[i]);
    }
    return st;
}

inline std::vector<double> field_at_nodes(const BField& b, const Mesh& mesh) {
    std::vector<double> out(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i)
        out[i] = b.value_with_distance(mesh.x[i], mesh.d[i]);
    return out;
}

} // namespace bvpdetail

/* ------------------------------------------------------ truncated solve --
 * Damped Newton iteration for the discrete system
 *     Laplace_h u + a u - b(x) f(u) = 0,   u = M on the blow-up boundary.
 * Acceptance is a mixed criterion: |G_i| <= tol * scale_i + floor_i, where
 * scale_i tracks the local problem magnitude and floor_i is the rounding
 * floor of the second difference (the graded mesh amplifies eps by 1/h^2,
 * so a fixed absolute tolerance would be unreachable at the finest cells).
 */
inline SolutionGrid solve_truncated(const ProblemSpec& p, double M, const Mesh& mesh,
                                    const std::vector<double>* u0 = nullptr,
                                    const SolveOptions& opts = {}) {
    if (!(M >= 0.0)) throw validation_error("solve_truncated: truncation level must be >= 0");
    if (!p.gates.existence_ok)
        throw existence_gate_error(p.gates.message, p.a, p.gates.lambda1);

    const std::size_t m = mesh.size();
    const double cap = bvpdetail::finite_evaluation_cap(p.f.f);
    const double M_eff = std::min(M, 0.98 * cap);

    bvpdetail::Stencil st = bvpdetail::build_stencil(mesh);
    std::vector<double> bval = bvpdetail::field_at_nodes(p.b, mesh);

    SolutionGrid sol;
    sol.mesh = mesh;
    sol.bval = bval;
    sol.M = M_eff;
    sol.M_requested = M;

    std::vector<double> u(m);
    if (u0) {
        if (u0->size() != m)
            throw validation_error("solve_truncated: initial iterate size mismatch");
        u = *u0;
        for (std::size_t i = 0; i < m; ++i)
            u[i] = std::min(std::max(u[i], 0.0), M_eff);
    } else {
        double dmax = *std::max_element(mesh.d.begin(), mesh.d.end());
        for (std::size_t i = 0; i < m; ++i)
            u[i] = M_eff * (1.0 - mesh.d[i] / dmax);
    }
    for (std::size_t i = 0; i < m; ++i)
        if (mesh.blowup_bc[i]) u[i] = M_eff;

    auto fval = [&](double v) { return p.f.f.eval(v); };
    auto fder = [&](double v) { return p.f.f.deriv(v); };

    std::vector<double> G(m), scale(m), floorv(m);
    auto residual_at = [&](const std::vector<double>& w) {
        double umax = 0.0;
        for (double e : w) umax = std::max(umax, std::fabs(e));
        for (std::size_t i = 0; i < m; ++i) {
            if (mesh.blowup_bc[i]) {
                G[i] = w[i] - M_eff;
                scale[i] = 1.0 + M_eff;
                floorv[i] = 0.0;
                continue;
            }
            double lap = st.c0[i] * w[i];
            if (i > 0) lap += st.cm[i] * w[i - 1];
            if (i + 1 < m) lap += st.cp[i] * w[i + 1];
            double fw = fval(w[i]);
            G[i] = lap + p.a * w[i] - bval[i] * fw;
            scale[i] = 1.0 + std::fabs(p.a * w[i]) + std::fabs(bval[i] * fw);
            floorv[i] = 8.0 * std::numeric_limits<double>::epsilon() * st.mag[i] * (1.0 + umax);
        }
    };
    auto merit = [&]() {
        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double q = std::fabs(G[i]) / (opts.newton_tol * scale[i] + floorv[i]);
            if (!(q <= worst)) worst = std::isfinite(q) ? q : std::numeric_limits<double>::infinity();
        }
        return worst; // converged iff <= 1
    };

    std::vector<double> sub(m), diag(m), sup(m), rhs(m), utry(m);
    NewtonStats stats;
    residual_at(u);
    double cur = merit();
    stats.merit_history.push_back(cur);

    for (int it = 0; it < opts.newton_max && cur > 1.0; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            if (mesh.blowup_bc[i]) {
                sub[i] = sup[i] = 0.0;
                diag[i] = 1.0;
                rhs[i] = -G[i];
                continue;
            }
            sub[i] = i > 0 ? st.cm[i] : 0.0;
            sup[i] = i + 1 < m ? st.cp[i] : 0.0;
            diag[i] = st.c0[i] + p.a - bval[i] * fder(u[i]);
            rhs[i] = -G[i];
        }
        std::vector<double> step =
            bvpdetail::solve_tridiagonal(sub, diag, sup, rhs);

        /* frozen-weight Armijo backtracking with projection onto u >= 0 */
        std::vector<double> wt(m);
        for (std::size_t i = 0; i < m; ++i) wt[i] = opts.newton_tol * scale[i] + floorv[i];
        auto weighted = [&]() {
            double worst = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double q = std::fabs(G[i]) / wt[i];
                if (!(q <= worst))
                    worst = std::isfinite(q) ? q : std::numeric_limits<double>::infinity();
            }
            return worst;
        };
        double base = weighted();
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            for (std::size_t i = 0; i < m; ++i) {
                double v = u[i] + t * step[i];
                if (!mesh.blowup_bc[i] && v < 0.0) {
                    v = 0.0;
                    stats.projected = true;
                }
                utry[i] = v;
            }
            residual_at(utry);
            double trial = weighted();
            if (trial <= (1.0 - 1e-4 * t) * base || trial <= 1.0) {
                u = utry;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            std::string hist;
            for (double h : stats.merit_history) {
                char buf[32];
                std::snprintf(buf, sizeof buf, " %.3e", h);
                hist += buf;
            }
            throw numerical_error(
                "solve_truncated: Newton line search stalled at M = " +
                std::to_string(M_eff) + "; scaled residual history:" + hist);
        }
        residual_at(u);
        cur = merit();
        stats.merit_history.push_back(cur);
        stats.iterations = it + 1;
    }
    if (cur > 1.0) {
        std::string hist;
        for (double h : stats.merit_history) {
            char buf[32];
            std::snprintf(buf, sizeof buf, " %.3e", h);
            hist += buf;
        }
        throw numerical_error("solve_truncated: no convergence in " +
                              std::to_string(opts.newton_max) +
                              " Newton iterations; scaled residual history:" + hist);
    }

    residual_at(u);
    /* the acceptance merit is <= 1, so this is <= newton_tol up to the
     * rounding-floor allowance */
    stats.final_residual = cur * opts.newton_tol;
    sol.newton = stats;
    sol.u = u;
    sol.residual = G;
    for (std::size_t i = 0; i < m; ++i)
        if (mesh.blowup_bc[i]) sol.residual[i] = 0.0;
    return sol;
}

/* ------------------------------------------------- initial-iterate seeds -- */

namespace bvpdetail {

/* Coarse tabulation of the boundary-rate prediction, linearly interpolated
 * in log d; accuracy is irrelevant (it only seeds Newton), so evaluation
 * failures fall back to the nearest tabulated neighbour. */
struct RateSeed {
    std::vector<double> logd, val;
    bool usable = false;

    double operator()(double d) const {
        if (!usable || val.empty()) return 0.0;
        double ld = std::log(std::max(d, 1e-300));
        if (ld <= logd.front()) return val.front();
        if (ld >= logd.back()) return val.back();
        auto it = std::upper_bound(logd.begin(), logd.end(), ld);
        std::size_t j = static_cast<std::size_t>(it - logd.begin());
        double w = (ld - logd[j - 1]) / (logd[j] - logd[j - 1]);
        return (1.0 - w) * val[j - 1] + w * val[j];
    }
};

inline RateSeed make_rate_seed(const RatePrediction* pred, const Mesh& mesh) {
    RateSeed seed;
    if (!pred || !pred->eval) return seed;
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (mesh.d[i] > 0.0) dmin = std::min(dmin, mesh.d[i]);
        dmax = std::max(dmax, mesh.d[i]);
    }
    double hi = dmax;
    if (pred->profile) hi = std::min(hi, 0.85 * pred->profile->beta());
    if (!(hi > dmin)) return seed;
    const int npts = 96;
    double last_good = 0.0;
    for (int k = 0; k < npts; ++k) {
        double d = dmin * std::pow(hi / dmin, static_cast<double>(k) / (npts - 1));
        double v;
        try {
            v = pred->eval(d);
            if (!std::isfinite(v)) v = last_good;
        } catch (const std::exception&) {
            v = last_good;
        }
        last_good = v;
        seed.logd.push_back(std::log(d));
        seed.val.push_back(v);
    }
    seed.usable = true;
    return seed;
}

inline std::vector<double> build_init(const Mesh& mesh, double M, InitStrategy strategy,
                                      const RateSeed& seed) {
    const std::size_t m = mesh.size();
    std::vector<double> u0(m, 0.0);
    double dmax = *std::max_element(mesh.d.begin(), mesh.d.end());
    for (std::size_t i = 0; i < m; ++i) {
        if (mesh.blowup_bc[i]) {
            u0[i] = M;
            continue;
        }
        switch (strategy) {
            case InitStrategy::constant_level: u0[i] = M; break;
            case InitStrategy::ramp: u0[i] = M * (1.0 - mesh.d[i] / dmax); break;
            case InitStrategy::rate_clip:
                u0[i] = seed.usable ? std::min(M, std::max(0.0, seed(mesh.d[i])))
                                    : M * (1.0 - mesh.d[i] / dmax);
                break;
            case InitStrategy::over_relaxed:
                u0[i] = seed.usable ? std::min(M, 1.5 * std::max(0.0, seed(mesh.d[i])))
                                    : std::min(M, 1.5 * M * (1.0 - mesh.d[i] / dmax));
                break;
        }
    }
    return u0;
}

inline const RatePrediction* problem_prediction(const ProblemSpec& p,
                                                std::shared_ptr<RatePrediction>& store) {
    if (store) return store.get();
    try {
        if (p.f.has_decomposition)
            store = std::make_shared<RatePrediction>(
                rate_predict(RateBranch::nonregular, p.f, p.weight));
        else if (p.f.regular_branch)
            store = std::make_shared<RatePrediction>(
                rate_predict(RateBranch::regular, p.f, p.weight));
    } catch (const std::exception&) {
        store.reset();
    }
    return store.get();
}

} // namespace bvpdetail

/* ------------------------------------------------------- M-continuation -- */

struct ContinuationStep {
    double M_requested = 0.0;
    double M_effective = 0.0;
    int newton_iterations = 0;
    double final_residual = 0.0;
    double interior_change = std::numeric_limits<double>::infinity();
    bool monotone_ok = true;
    double monotone_margin = 0.0; // min over nodes of u_new - u_prev
};

struct LargeSolveReport {
    SolutionGrid sol;
    std::vector<ContinuationStep> steps;
    bool converged = false;
    bool monotone_ok = true;
    bool schedule_capped = false; // f-overflow clamp ended the schedule
    std::string diagnostic;
};

/* Monotone continuation in the truncation level: M = M0 * 2^k until the
 * solution stops changing on the fixed interior subgrid {d >= d_min}.
 * Truncation levels are clamped where f overflows; if the clamp freezes the
 * schedule before interior convergence, that is reported, not hidden. */
inline LargeSolveReport solve_large(const ProblemSpec& p, const SolveOptions& opts = {}) {
    Mesh mesh = make_mesh(p.dom, opts.n, opts.q);
    std::shared_ptr<RatePrediction> pred_store;
    const RatePrediction* pred = bvpdetail::problem_prediction(p, pred_store);
    bvpdetail::RateSeed seed = bvpdetail::make_rate_seed(pred, mesh);

    LargeSolveReport rep;
    std::vector<double> u_prev;
    double prev_M_eff = -1.0;

    for (int k = 0; k <= opts.k_max; ++k) {
        double M_req = opts.M0 * std::pow(2.0, k);
        SolutionGrid sol;
        if (u_prev.empty()) {
            std::vector<double> u0 = bvpdetail::build_init(mesh, M_req, opts.start, seed);
            sol = solve_truncated(p, M_req, mesh, &u0, opts);
        } else {
            sol = solve_truncated(p, M_req, mesh, &u_prev, opts);
        }
        if (sol.M <= prev_M_eff) {
            /* the overflow clamp froze the schedule: no further level can
             * raise the boundary data */
            rep.schedule_capped = true;
            rep.diagnostic = "truncation schedule capped at M = " + std::to_string(prev_M_eff) +
                             " (nonlinearity overflows above this level)";
            break;
        }

        ContinuationStep step;
        step.M_requested = M_req;
        step.M_effective = sol.M;
        step.newton_iterations = sol.newton.iterations;
        step.final_residual = sol.newton.final_residual;

        if (!u_prev.empty()) {
            double umax = 0.0;
            for (double e : sol.u) umax = std::max(umax, std::fabs(e));
            double margin = std::numeric_limits<double>::infinity();
            double change = 0.0;
            for (std::size_t i = 0; i < mesh.size(); ++i) {
                margin = std::min(margin, sol.u[i] - u_prev[i]);
                if (mesh.d[i] >= opts.d_min)
                    change = std::max(change, std::fabs(sol.u[i] - u_prev[i]));
            }
            step.monotone_margin = margin;
            step.monotone_ok = margin >= -1e-9 * (1.0 + umax);
            step.interior_change = change;
            sol.interior_change = change;
            sol.converged_interior = change < opts.tol_interior;
        }
        rep.monotone_ok = rep.monotone_ok && step.monotone_ok;
        rep.steps.push_back(step);
        rep.sol = std::move(sol);
        u_prev = rep.sol.u;
        prev_M_eff = rep.sol.M;

        if (rep.sol.converged_interior) {
            rep.converged = true;
            rep.diagnostic = "interior converged";
            return rep;
        }
    }
    if (!rep.converged && rep.diagnostic.empty())
        rep.diagnostic = "truncation schedule exhausted (k_max = " +
                         std::to_string(opts.k_max) + ") without interior convergence";
    if (rep.schedule_capped && !rep.steps.empty() &&
        rep.steps.back().interior_change < opts.tol_interior) {
        /* the last attainable level already matched its predecessor */
        rep.converged = true;
        rep.sol.converged_interior = true;
    }
    return rep;
}

/* ------------------------------------------------------ boundary-rate fit -- */

struct RateFitOptions {
    double d_hi = 1e-2;        // coarsest distance in the fit window
    double d_lo = 1e-8;        // finest distance considered
    double decade_step = 0.5;  // sampling step in log10(d)
    double saturation = 0.99;  // u >= saturation * M marks truncation contamination
    double cut_safety = 4.0;   // usable nodes need d > cut_safety * d_cut
    double ratio_threshold = 0.05;
    double slope_threshold = 0.1;
    std::size_t min_usable = 5;
};

struct RateFitReport {
    LimitSeries ratio; // u / pred over decreasing d
    LimitSeries slope; // difference quotient du / dpred over decreasing d
    double d_cut = 0.0;
    std::size_t usable = 0;
};

/* Ratio of the computed solution to a boundary-rate prediction over a
 * decreasing sequence of boundary distances, with nodes contaminated by the
 * truncation level excluded.  The companion difference-quotient series
 * compares increments of u against increments of the prediction, which
 * cancels any additive offset the prediction is only accurate up to. */
inline RateFitReport boundary_rate_fit(const SolutionGrid& sol,
                                       const std::function<double(double)>& pred,
                                       const RateFitOptions& opts = {}) {
    const Mesh& mesh = sol.mesh;
    double d_cut = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (!mesh.blowup_bc[i] && sol.u[i] >= opts.saturation * sol.M)
            d_cut = std::max(d_cut, mesh.d[i]);

    /* usable nodes, one representative nearest each log-spaced target */
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (mesh.blowup_bc[i]) continue;
        if (mesh.d[i] <= opts.cut_safety * d_cut) continue;
        if (mesh.d[i] < opts.d_lo || mesh.d[i] > opts.d_hi) continue;
        usable.push_back(i);
    }
    RateFitReport rep;
    rep.d_cut = d_cut;
    rep.usable = usable.size();
    if (usable.size() < opts.min_usable)
        throw insufficient_resolution_error(
            "boundary_rate_fit: only " + std::to_string(usable.size()) +
            " usable nodes between the saturation cut d = " + std::to_string(d_cut) +
            " and d = " + std::to_string(opts.d_hi));

    std::vector<std::size_t> picks;
    for (double ld = std::log10(opts.d_hi);; ld -= opts.decade_step) {
        double target = std::pow(10.0, ld);
        if (target < opts.d_lo * (1.0 - 1e-12)) break;
        std::size_t best = usable.front();
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i : usable) {
            double g = std::fabs(std::log(mesh.d[i] / target));
            if (g < gap) {
                gap = g;
                best = i;
            }
        }
        if (picks.empty() || picks.back() != best) picks.push_back(best);
    }
    if (picks.size() < 2)
        throw insufficient_resolution_error(
            "boundary_rate_fit: only " + std::to_string(picks.size()) +
            " distinct sample distances in the fit window");

    /* order by decreasing d (toward the boundary) */
    std::sort(picks.begin(), picks.end(),
              [&](std::size_t a, std::size_t b) { return mesh.d[a] > mesh.d[b]; });

    std::vector<double> dv, ratio, pv;
    for (std::size_t i : picks) {
        double pr = pred(mesh.d[i]);
        dv.push_back(mesh.d[i]);
        pv.push_back(pr);
        ratio.push_back(sol.u[i] / pr);
    }
    std::vector<double> ds, slope;
    for (std::size_t k = 0; k + 1 < picks.size(); ++k) {
        double du = sol.u[picks[k + 1]] - sol.u[picks[k]];
        double dp = pv[k + 1] - pv[k];
        ds.push_back(std::sqrt(dv[k] * dv[k + 1]));
        slope.push_back(du / dp);
    }
    int dec_ratio = static_cast<int>(std::min<std::size_t>(3, dv.size() - 1));
    int dec_slope = static_cast<int>(std::min<std::size_t>(3, ds.size() > 1 ? ds.size() - 1 : 1));
    rep.ratio = make_limit_series("boundary_rate_ratio", "rate-fit-ratio", 1.0, dv, ratio,
                                  opts.ratio_threshold, dec_ratio);
    rep.slope = make_limit_series("boundary_rate_slope", "rate-fit-slope", 1.0, ds, slope,
                                  opts.slope_threshold, dec_slope);
    return rep;
}

/* ------------------------------------------------ sub/supersolutions ----- */

struct SubsuperOptions {
    double margin_factor = 0.1; // window floor at t = margin_factor * sigma
    int n_points = 160;
    double slack_rel = 1e-9;    // numerical slack in the sign comparison
    int max_bisect = 40;
    double eps0_degenerate = 0.01;
};

struct SubsuperReport {
    int side = +1;              // +1 supersolution, -1 subsolution
    double sigma = 0.0, eps0 = 0.0;
    double theta_const = 0.0;   // the branch constant used inside the scale map
    double delta_requested = 0.0;
    double delta_certified = 0.0; // largest tested delta with clean signs
    bool sign_ok = false;
    std::vector<double> dvals;    // certified window (decreasing d)
    std::vector<double> residual; // PDE residual of the comparison function
    std::string violation;        // offending range at the requested delta
    std::vector<std::string> warnings;
};

/* Evaluates the comparison functions L(theta^{pm} Phi(d -+ sigma)) and the
 * PDE residual  Laplace u + a u - b f(u)  along the boundary layer; the
 * supersolution side must be <= 0, the subsolution side >= 0.  If the sign
 * fails at the requested delta, the window is bisected until a certified
 * range is found (or none is, which is reported). */
inline SubsuperReport subsuper_residual(const ProblemSpec& p, double sigma, double eps0,
                                        int side, double delta,
                                        const SubsuperOptions& opts = {}) {
    if (side != +1 && side != -1)
        throw validation_error("subsuper_residual: side must be +1 or -1");
    if (!(eps0 > 0.0 && eps0 < 0.5))
        throw validation_error("subsuper_residual: eps0 must lie strictly in (0, 1/2)");
    if (!(sigma > 0.0))
        throw validation_error("subsuper_residual: the shift sigma must be positive "
                               "(sigma = 0 is rejected)");
    if (!(delta > sigma))
        throw validation_error("subsuper_residual: need sigma < delta");
    if (!p.f.has_decomposition)
        throw validation_error("subsuper_residual: nonlinearity '" + p.f.name +
                               "' has no scale decomposition");

    SubsuperReport rep;
    rep.side = side;
    rep.sigma = sigma;
    rep.eps0 = eps0;
    rep.delta_requested = delta;

    const double rho = p.f.rho, th = p.weight.theta;
    rep.theta_const =
        std::pow(rho / (2.0 * (1.0 + th) * (1.0 - side * 2.0 * eps0)), 1.0 / rho);
    if (eps0 < opts.eps0_degenerate)
        rep.warnings.push_back(
            "eps0 -> 0 degenerates the comparison gap: both branch constants collapse "
            "to the rate constant and the sign margins vanish like eps0");

    ProfileContext ctx(p.f, p.weight);
    const double t_cap = 0.95 * ctx.beta();
    const double half_width = p.dom.kind == Domain::Kind::ball
                                  ? p.dom.hi
                                  : 0.5 * (p.dom.hi - p.dom.lo);

    auto window_residuals = [&](double del, std::vector<double>& ds,
                                std::vector<double>& res) -> int {
        /* returns index of first sign violation, or -1 */
        ds.clear();
        res.clear();
        double d_hi = std::min({del, half_width * 0.99, t_cap + side * sigma});
        double d_lo = side == +1 ? sigma * (1.0 + opts.margin_factor)
                                 : sigma * opts.margin_factor;
        if (!(d_hi > d_lo)) return -2; // empty window
        int bad = -1;
        for (int k = 0; k < opts.n_points; ++k) {
            double d =
                d_hi * std::pow(d_lo / d_hi, static_cast<double>(k) / (opts.n_points - 1));
            double t = d - side * sigma;
            if (!(t > 0.0 && t < t_cap)) continue;
            PhiPoint pp = ctx.phi_point(t);
            double xs = rep.theta_const * pp.phi;
            double l0 = p.f.Lprof.L.eval(xs);
            double l1 = p.f.Lprof.Lp.eval(xs);
            double l2 = p.f.Lprof.Lpp.eval(xs);

            /* both boundary components carry the same d; take the worst side */
            std::vector<double> xpos;
            if (p.dom.kind == Domain::Kind::ball) {
                xpos.push_back(p.dom.hi - d);
            } else {
                xpos.push_back(p.dom.lo + d);
                xpos.push_back(p.dom.hi - d);
            }
            double worst = side == +1 ? -std::numeric_limits<double>::infinity()
                                      : std::numeric_limits<double>::infinity();
            for (double xx : xpos) {
                double lap_d = p.dom.laplace_distance(xx);
                double lap_u = rep.theta_const * rep.theta_const * l2 * pp.phi_p * pp.phi_p +
                               rep.theta_const * l1 * pp.phi_pp +
                               rep.theta_const * l1 * pp.phi_p * lap_d;
                double bf = p.b.value_with_distance(xx, d) * p.f.f.eval(l0);
                double r = lap_u + p.a * l0 - bf;
                worst = side == +1 ? std::max(worst, r) : std::min(worst, r);
            }
            ds.push_back(d);
            res.push_back(worst);
            double slack = opts.slack_rel * (std::fabs(worst) + 1.0);
            bool ok = side == +1 ? worst <= slack : worst >= -slack;
            if (!ok && bad < 0) bad = static_cast<int>(ds.size()) - 1;
        }
        if (ds.empty()) return -2;
        return bad;
    };

    std::vector<double> ds, res;
    int bad = window_residuals(delta, ds, res);
    if (bad == -1) {
        rep.sign_ok = true;
        rep.delta_certified = delta;
        rep.dvals = ds;
        rep.residual = res;
        return rep;
    }
    if (bad >= 0) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "sign violation at d = %.6e (residual %.6e); delta too large", ds[bad],
                      res[bad]);
        rep.violation = buf;
    } else {
        rep.violation = "requested window is empty";
    }
    double del = delta;
    for (int k = 0; k < opts.max_bisect; ++k) {
        del *= 0.5;
        if (!(del > sigma)) break;
        int b = window_residuals(del, ds, res);
        if (b == -1) {
            rep.sign_ok = true;
            rep.delta_certified = del;
            rep.dvals = ds;
            rep.residual = res;
            return rep;
        }
    }
    rep.sign_ok = false;
    rep.delta_certified = 0.0;
    return rep;
}

/* Sandwich slack: how far the computed solution escapes the band between
 * the two comparison functions on a certified window.  The proof corrects
 * with an auxiliary bounded function; numerically we measure the constant
 * that plays its role. */
struct SandwichReport {
    double wbar = 0.0;       // max(0, excess above the super / below the sub side)
    double u_scale = 0.0;    // min of u over the window, for relative context
    std::size_t nodes = 0;
    bool bounded = false;
};

inline SandwichReport sandwich_check(const ProblemSpec& p, const SolutionGrid& sol,
                                     double sigma, double eps0, double delta) {
    if (!p.f.has_decomposition)
        throw validation_error("sandwich_check: nonlinearity '" + p.f.name +
                               "' has no scale decomposition");
    if (!(eps0 > 0.0 && eps0 < 0.5))
        throw validation_error("sandwich_check: eps0 must lie strictly in (0, 1/2)");
    const double rho = p.f.rho, th = p.weight.theta;
    double th_sup = std::pow(rho / (2.0 * (1.0 + th) * (1.0 - 2.0 * eps0)), 1.0 / rho);
    double th_sub = std::pow(rho / (2.0 * (1.0 + th) * (1.0 + 2.0 * eps0)), 1.0 / rho);
    ProfileContext ctx(p.f, p.weight);
    const double t_cap = 0.95 * ctx.beta();

    SandwichReport rep;
    rep.u_scale = std::numeric_limits<double>::infinity();
    double excess = 0.0;
    for (std::size_t i = 0; i < sol.mesh.size(); ++i) {
        double d = sol.mesh.d[i];
        if (sol.mesh.blowup_bc[i]) continue;
        if (!(d > sigma * 1.1 && d < delta)) continue;
        double t_sup = d - sigma, t_sub = d + sigma;
        if (!(t_sup > 0.0 && t_sub < t_cap)) continue;
        double upper = p.f.Lprof.L.eval(th_sup * ctx.phi(t_sup));
        double lower = p.f.Lprof.L.eval(th_sub * ctx.phi(t_sub));
        excess = std::max({excess, sol.u[i] - upper, lower - sol.u[i]});
        rep.u_scale = std::min(rep.u_scale, sol.u[i]);
        ++rep.nodes;
    }
    if (rep.nodes == 0)
        throw insufficient_resolution_error(
            "sandwich_check: no mesh nodes inside the comparison window");
    rep.wbar = std::max(0.0, excess);
    rep.bounded = std::isfinite(rep.wbar);
    return rep;
}

/* -------------------------------------------------------- uniqueness ----- */

struct UniquenessReport {
    double discrepancy = 0.0; // max over {d >= d_min} across start strategies
    bool all_converged = false;
    std::vector<LargeSolveReport> runs;
};

/* Reruns the continuation from independent initial iterates; agreement of
 * the final interior solutions is numerical evidence (not proof) that the
 * large solution the solver finds is unique. */
inline UniquenessReport uniqueness_probe(const ProblemSpec& p, const SolveOptions& opts = {}) {
    const InitStrategy starts[3] = {InitStrategy::rate_clip, InitStrategy::constant_level,
                                    InitStrategy::over_relaxed};
    UniquenessReport rep;
    rep.all_converged = true;
    for (InitStrategy s : starts) {
        SolveOptions o = opts;
        o.start = s;
        rep.runs.push_back(solve_large(p, o));
        rep.all_converged = rep.all_converged && rep.runs.back().converged;
    }
    for (std::size_t aa = 0; aa < rep.runs.size(); ++aa)
        for (std::size_t bb = aa + 1; bb < rep.runs.size(); ++bb) {
            const SolutionGrid& A = rep.runs[aa].sol;
            const SolutionGrid& B = rep.runs[bb].sol;
            for (std::size_t i = 0; i < A.mesh.size(); ++i)
                if (A.mesh.d[i] >= opts.d_min)
                    rep.discrepancy =
                        std::max(rep.discrepancy, std::fabs(A.u[i] - B.u[i]));
        }
    return rep;
}

} // namespace blowup
