#pragma once

/* Scenario configuration: a strict JSON schema covering the problem data,
 * solver knobs, verification toggles, and output policy.  Strict means every
 * recognised key is type-checked and every unrecognised key is rejected, both
 * with the failing JSON path in the message (e.g. "$.solver.newton.tol"), so
 * a typo never silently falls back to a default.  The canonical dump of the
 * parsed document (sorted keys, minimal whitespace) is what gets hashed into
 * every artifact. */

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blowup/bvp.hpp"
#include "blowup/errors.hpp"
#include "blowup/funcatalog.hpp"
#include "blowup/geometry.hpp"
#include "blowup/report.hpp"

namespace blowup {

namespace cfgdetail {

using nlohmann::json;

/* A view of one JSON node plus the path that leads to it, for messages. */
struct Cursor {
    const json* node;
    std::string path;

    const json& ref() const { return *node; }

    Cursor child(const std::string& key) const {
        return Cursor{&node->at(key), path + "." + key};
    }
    Cursor element(std::size_t i) const {
        return Cursor{&(*node)[i], path + "[" + std::to_string(i) + "]"};
    }
    bool has(const std::string& key) const {
        return node->is_object() && node->contains(key);
    }

    void expect_object() const {
        if (!node->is_object())
            throw validation_error("config: expected an object at " + path);
    }
    void expect_array() const {
        if (!node->is_array())
            throw validation_error("config: expected an array at " + path);
    }

    /* Rejects keys outside the allowed set -- the strict-schema core. */
    void allow_only(std::initializer_list<const char*> keys) const {
        expect_object();
        for (auto it = node->begin(); it != node->end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known)
                throw validation_error("config: unknown key at " + path + "." + it.key());
        }
    }

    double number(const std::string& key) const {
        Cursor c = child(key);
        if (!c.node->is_number())
            throw validation_error("config: expected a number at " + c.path);
        return c.node->get<double>();
    }
    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    int integer(const std::string& key) const {
        Cursor c = child(key);
        if (!c.node->is_number_integer())
            throw validation_error("config: expected an integer at " + c.path);
        return c.node->get<int>();
    }
    int integer_or(const std::string& key, int fallback) const {
        return has(key) ? integer(key) : fallback;
    }
    bool boolean_or(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        Cursor c = child(key);
        if (!c.node->is_boolean())
            throw validation_error("config: expected a boolean at " + c.path);
        return c.node->get<bool>();
    }
    std::string text(const std::string& key) const {
        Cursor c = child(key);
        if (!c.node->is_string())
            throw validation_error("config: expected a string at " + c.path);
        return c.node->get<std::string>();
    }
    std::string text_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? text(key) : fallback;
    }
    std::vector<double> numbers(const std::string& key) const {
        Cursor c = child(key);
        c.expect_array();
        std::vector<double> out;
        for (std::size_t i = 0; i < c.node->size(); ++i) {
            Cursor e = c.element(i);
            if (!e.node->is_number())
                throw validation_error("config: expected a number at " + e.path);
            out.push_back(e.node->get<double>());
        }
        return out;
    }

    void require_positive(const std::string& key, double v) const {
        if (!(v > 0.0))
            throw validation_error("config: value at " + path + "." + key +
                                   " must be positive");
    }
};

} // namespace cfgdetail

/* ------------------------------------------------------- parsed schema -- */

struct FunctionConfig {
    std::string name;
    std::vector<double> params;
};

struct WeightConfig {
    std::string name = "power";
    double theta = 0.0;
    std::vector<double> params;
};

struct DomainConfig {
    std::string kind = "interval";
    int N = 1;
    double bounds[2] = {0.0, 1.0};
};

struct TGridConfig {
    double from = 1e-2;
    double to = 1e-8;
    int points = 13;
};

struct LemmaProConfig {
    bool enabled = false;
    TGridConfig t_grid;
    double threshold = 1e-2;
};

struct RateFitToggle {
    bool enabled = false;
    bool use_slope = false;       /* fit increments instead of pointwise ratios */
    RateFitOptions options;       /* window + truncation-cut policy */
};

struct SubsuperConfig {
    bool enabled = false;
    double epsilon0 = 0.25;
    std::vector<double> sigma_list = {1e-4};
    double delta = 0.05;
};

struct VerifyConfig {
    LemmaProConfig lemma_pro;
    RateFitToggle rate_fit;
    SubsuperConfig subsuper;
    bool corollary = false;       /* fit against the iterated-log form instead */
};

struct OutputConfig {
    std::string dir = "out";
    std::vector<std::string> formats = {"csv", "json"};
};

struct ScenarioConfig {
    /* problem */
    double a = 0.0;
    FunctionConfig f;
    WeightConfig weight;
    DomainConfig domain;
    bool has_omega0 = false;
    double omega0_bounds[2] = {0.0, 0.0};
    double eta = 0.0;

    SolveOptions solver;
    VerifyConfig verify;
    OutputConfig output;

    std::string canonical;        /* sorted-key dump of the parsed document */

    std::string hash() const { return fnv1a64_hex(canonical); }

    Domain make_domain() const {
        if (domain.kind == "interval") return Domain::interval(domain.bounds[0], domain.bounds[1]);
        if (domain.kind == "ball") return Domain::ball(domain.N, domain.bounds[1]);
        return Domain::annulus(domain.N, domain.bounds[0], domain.bounds[1]);
    }
    Omega0 make_omega0() const {
        return has_omega0 ? Omega0::range(omega0_bounds[0], omega0_bounds[1])
                          : Omega0::none();
    }
    /* Builds the full problem; runs the existence gate (which may throw). */
    ProblemSpec make_problem() const {
        return blowup::make_problem(a, catalog_f(f.name, f.params),
                                    catalog_weight(weight.name, weight.theta, weight.params),
                                    make_domain(), make_omega0(), eta);
    }
};

/* ------------------------------------------------------------- parsing -- */

namespace cfgdetail {

inline FunctionConfig parse_function(const Cursor& c) {
    c.allow_only({"name", "params"});
    FunctionConfig f;
    f.name = c.text("name");
    if (c.has("params")) f.params = c.numbers("params");
    return f;
}

inline WeightConfig parse_weight(const Cursor& c) {
    c.allow_only({"name", "theta", "params"});
    WeightConfig w;
    w.name = c.text("name");
    w.theta = c.number_or("theta", 0.0);
    if (!(w.theta >= 0.0))
        throw validation_error("config: value at " + c.path + ".theta must be >= 0");
    if (c.has("params")) w.params = c.numbers("params");
    return w;
}

inline DomainConfig parse_domain(const Cursor& c) {
    c.allow_only({"kind", "N", "bounds"});
    DomainConfig d;
    d.kind = c.text_or("kind", "interval");
    if (d.kind != "interval" && d.kind != "ball" && d.kind != "annulus")
        throw validation_error("config: value at " + c.path +
                               ".kind must be one of interval|ball|annulus");
    d.N = c.integer_or("N", d.kind == "interval" ? 1 : 2);
    if (d.kind == "interval" && d.N != 1)
        throw validation_error("config: value at " + c.path + ".N must be 1 for an interval");
    if (d.kind != "interval" && d.N < 2)
        throw validation_error("config: value at " + c.path + ".N must be >= 2 for " + d.kind);
    if (c.has("bounds")) {
        std::vector<double> b = c.numbers("bounds");
        if (b.size() != 2 || !(b[0] < b[1]))
            throw validation_error("config: value at " + c.path +
                                   ".bounds must be [lo, hi] with lo < hi");
        d.bounds[0] = b[0];
        d.bounds[1] = b[1];
    } else if (d.kind != "interval") {
        d.bounds[0] = d.kind == "ball" ? 0.0 : 0.5;
        d.bounds[1] = 1.0;
    }
    if (d.kind == "ball" && d.bounds[0] != 0.0)
        throw validation_error("config: value at " + c.path +
                               ".bounds must start at 0 for a ball (got nonzero inner radius;"
                               " use kind = annulus)");
    return d;
}

inline InitStrategy parse_init(const Cursor& c, const std::string& key) {
    std::string s = c.text_or(key, "rate_clip");
    if (s == "rate_clip") return InitStrategy::rate_clip;
    if (s == "constant_level") return InitStrategy::constant_level;
    if (s == "over_relaxed") return InitStrategy::over_relaxed;
    if (s == "ramp") return InitStrategy::ramp;
    throw validation_error("config: value at " + c.path + "." + key +
                           " must be one of rate_clip|constant_level|over_relaxed|ramp");
}

inline SolveOptions parse_solver(const Cursor& c) {
    c.allow_only({"mesh", "M0", "k_max", "tol_interior", "d_min", "newton", "init"});
    SolveOptions o;
    if (c.has("mesh")) {
        Cursor m = c.child("mesh");
        m.allow_only({"n", "grading_q"});
        o.n = m.integer_or("n", o.n);
        if (o.n < 16)
            throw validation_error("config: value at " + m.path + ".n must be >= 16");
        o.q = m.number_or("grading_q", o.q);
        if (!(o.q >= 1.0))
            throw validation_error("config: value at " + m.path + ".grading_q must be >= 1");
    }
    o.M0 = c.number_or("M0", o.M0);
    c.require_positive("M0", o.M0);
    o.k_max = c.integer_or("k_max", o.k_max);
    if (o.k_max < 0 || o.k_max > 60)
        throw validation_error("config: value at " + c.path + ".k_max must lie in [0, 60]");
    o.tol_interior = c.number_or("tol_interior", o.tol_interior);
    c.require_positive("tol_interior", o.tol_interior);
    o.d_min = c.number_or("d_min", o.d_min);
    c.require_positive("d_min", o.d_min);
    if (c.has("newton")) {
        Cursor n = c.child("newton");
        n.allow_only({"tol", "max_iter"});
        o.newton_tol = n.number_or("tol", o.newton_tol);
        n.require_positive("tol", o.newton_tol);
        o.newton_max = n.integer_or("max_iter", o.newton_max);
        if (o.newton_max < 1)
            throw validation_error("config: value at " + n.path + ".max_iter must be >= 1");
    }
    o.start = parse_init(c, "init");
    return o;
}

inline VerifyConfig parse_verify(const Cursor& c) {
    c.allow_only({"lemma_pro", "rate_fit", "subsuper", "corollary"});
    VerifyConfig v;
    if (c.has("lemma_pro")) {
        Cursor l = c.child("lemma_pro");
        l.allow_only({"enabled", "t_grid", "threshold"});
        v.lemma_pro.enabled = l.boolean_or("enabled", true);
        v.lemma_pro.threshold = l.number_or("threshold", v.lemma_pro.threshold);
        l.require_positive("threshold", v.lemma_pro.threshold);
        if (l.has("t_grid")) {
            Cursor g = l.child("t_grid");
            g.allow_only({"from", "to", "points"});
            v.lemma_pro.t_grid.from = g.number_or("from", v.lemma_pro.t_grid.from);
            v.lemma_pro.t_grid.to = g.number_or("to", v.lemma_pro.t_grid.to);
            v.lemma_pro.t_grid.points = g.integer_or("points", v.lemma_pro.t_grid.points);
            if (!(v.lemma_pro.t_grid.to < v.lemma_pro.t_grid.from) ||
                !(v.lemma_pro.t_grid.to > 0.0))
                throw validation_error("config: t_grid at " + g.path +
                                       " needs 0 < to < from");
            if (v.lemma_pro.t_grid.points < 4)
                throw validation_error("config: value at " + g.path +
                                       ".points must be >= 4");
        }
    }
    if (c.has("rate_fit")) {
        Cursor r = c.child("rate_fit");
        r.allow_only({"enabled", "use_slope", "d_hi", "d_lo", "decade_step", "saturation",
                      "cut_safety", "ratio_threshold", "slope_threshold"});
        v.rate_fit.enabled = r.boolean_or("enabled", true);
        v.rate_fit.use_slope = r.boolean_or("use_slope", false);
        RateFitOptions& o = v.rate_fit.options;
        o.d_hi = r.number_or("d_hi", o.d_hi);
        o.d_lo = r.number_or("d_lo", o.d_lo);
        o.decade_step = r.number_or("decade_step", o.decade_step);
        o.saturation = r.number_or("saturation", o.saturation);
        o.cut_safety = r.number_or("cut_safety", o.cut_safety);
        o.ratio_threshold = r.number_or("ratio_threshold", o.ratio_threshold);
        o.slope_threshold = r.number_or("slope_threshold", o.slope_threshold);
        for (const char* k : {"d_hi", "d_lo", "decade_step", "saturation", "cut_safety",
                              "ratio_threshold", "slope_threshold"})
            r.require_positive(k, r.number_or(k, 1.0));
        if (!(o.d_lo < o.d_hi))
            throw validation_error("config: rate_fit at " + r.path + " needs d_lo < d_hi");
    }
    if (c.has("subsuper")) {
        Cursor s = c.child("subsuper");
        s.allow_only({"enabled", "epsilon0", "sigma_list", "delta"});
        v.subsuper.enabled = s.boolean_or("enabled", true);
        v.subsuper.epsilon0 = s.number_or("epsilon0", v.subsuper.epsilon0);
        if (!(v.subsuper.epsilon0 > 0.0 && v.subsuper.epsilon0 < 0.5))
            throw validation_error("config: value at " + s.path +
                                   ".epsilon0 must lie strictly in (0, 0.5)");
        if (s.has("sigma_list")) {
            v.subsuper.sigma_list = s.numbers("sigma_list");
            if (v.subsuper.sigma_list.empty())
                throw validation_error("config: value at " + s.path +
                                       ".sigma_list must be non-empty");
            for (double sg : v.subsuper.sigma_list)
                if (!(sg > 0.0))
                    throw validation_error("config: entries of " + s.path +
                                           ".sigma_list must be positive");
        }
        v.subsuper.delta = s.number_or("delta", v.subsuper.delta);
        s.require_positive("delta", v.subsuper.delta);
    }
    v.corollary = c.boolean_or("corollary", false);
    return v;
}

inline OutputConfig parse_output(const Cursor& c) {
    c.allow_only({"dir", "formats"});
    OutputConfig o;
    o.dir = c.text_or("dir", o.dir);
    if (c.has("formats")) {
        Cursor f = c.child("formats");
        f.expect_array();
        o.formats.clear();
        for (std::size_t i = 0; i < f.node->size(); ++i) {
            Cursor e = f.element(i);
            if (!e.node->is_string())
                throw validation_error("config: expected a string at " + e.path);
            std::string v = e.node->get<std::string>();
            if (v != "csv" && v != "json")
                throw validation_error("config: value at " + e.path +
                                       " must be csv or json");
            o.formats.push_back(v);
        }
    }
    return o;
}

} // namespace cfgdetail

inline ScenarioConfig parse_scenario(const nlohmann::json& doc) {
    using cfgdetail::Cursor;
    Cursor root{&doc, "$"};
    root.allow_only({"problem", "solver", "verify", "output"});
    if (!root.has("problem"))
        throw validation_error("config: missing required object at $.problem");

    ScenarioConfig cfg;
    Cursor p = root.child("problem");
    p.allow_only({"a", "f", "weight", "domain", "omega0", "eta"});
    cfg.a = p.number_or("a", 0.0);
    if (!p.has("f"))
        throw validation_error("config: missing required object at $.problem.f");
    cfg.f = cfgdetail::parse_function(p.child("f"));
    if (p.has("weight")) cfg.weight = cfgdetail::parse_weight(p.child("weight"));
    if (p.has("domain")) cfg.domain = cfgdetail::parse_domain(p.child("domain"));
    if (p.has("omega0")) {
        Cursor om = p.child("omega0");
        om.allow_only({"bounds"});
        std::vector<double> b = om.numbers("bounds");
        if (b.size() != 2 || !(b[0] < b[1]))
            throw validation_error("config: value at " + om.path +
                                   ".bounds must be [lo, hi] with lo < hi");
        cfg.has_omega0 = true;
        cfg.omega0_bounds[0] = b[0];
        cfg.omega0_bounds[1] = b[1];
    }
    cfg.eta = p.number_or("eta", 0.0);
    if (!(std::fabs(cfg.eta) < 1.0))
        throw validation_error("config: value at " + p.path + ".eta must satisfy |eta| < 1");

    if (root.has("solver")) cfg.solver = cfgdetail::parse_solver(root.child("solver"));
    if (root.has("verify")) cfg.verify = cfgdetail::parse_verify(root.child("verify"));
    if (root.has("output")) cfg.output = cfgdetail::parse_output(root.child("output"));

    cfg.canonical = doc.dump();
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw validation_error("config: cannot read '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(doc);
}

} // namespace blowup
