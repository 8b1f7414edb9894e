/* blowup_lab: command-line front end.
 *
 * Subcommands:
 *   rv       regular-variation measurements on named scalar functions
 *   profile  blow-up profile tables (implicit-integral or classical branch)
 *   solve    boundary blow-up solve driven by a JSON scenario config
 *   verify   the acceptance-criteria suite
 *
 * Exit codes: 0 success, 1 completed-but-failing verdicts, 2 usage/config
 * errors, 3 domain/numerical errors, 4 existence-gate refusal. */

#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blowup/config.hpp"
#include "blowup/profile.hpp"
#include "blowup/report.hpp"
#include "blowup/rvcalc.hpp"
#include "blowup/verification.hpp"

namespace {

using namespace blowup;

/* ------------------------------------------------------- small parsers -- */

struct FnSpec {
    std::string name;
    std::vector<double> params;
};

std::vector<double> parse_params(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw validation_error("cannot parse parameter '" + tok + "' in " + what);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

/* "name" or "name:p1,p2" */
FnSpec parse_fn(const std::string& s) {
    FnSpec f;
    std::size_t colon = s.find(':');
    f.name = s.substr(0, colon);
    if (f.name.empty()) throw validation_error("empty function name in '" + s + "'");
    if (colon != std::string::npos)
        f.params = parse_params(s.substr(colon + 1), "'" + s + "'");
    return f;
}

/* "name:theta" or "name:theta:p1,p2" */
WeightSpec parse_weight(const std::string& s) {
    std::size_t c1 = s.find(':');
    if (c1 == std::string::npos)
        throw validation_error("weight spec '" + s + "' needs the form name:theta[:params]");
    std::string name = s.substr(0, c1);
    std::size_t c2 = s.find(':', c1 + 1);
    std::string theta_tok =
        s.substr(c1 + 1, c2 == std::string::npos ? c2 : c2 - c1 - 1);
    std::vector<double> th = parse_params(theta_tok, "'" + s + "'");
    if (th.size() != 1)
        throw validation_error("weight spec '" + s + "' needs a single index after the name");
    std::vector<double> params;
    if (c2 != std::string::npos) params = parse_params(s.substr(c2 + 1), "'" + s + "'");
    return catalog_weight(name, th[0], params);
}

/* "t", "hi:lo" (25 points), or "hi:lo:n" -- a decreasing geometric grid */
std::vector<double> parse_tgrid(const std::string& s) {
    std::vector<double> parts = parse_params(
        [&s] {
            std::string r = s;
            for (auto& ch : r)
                if (ch == ':') ch = ',';
            return r;
        }(),
        "'" + s + "'");
    if (parts.size() == 1) return {parts[0]};
    int n = parts.size() >= 3 ? static_cast<int>(parts[2]) : 25;
    if (n < 2) throw validation_error("t-grid '" + s + "' needs at least 2 points");
    double hi = parts[0], lo = parts[1];
    if (!(hi > lo) || !(lo > 0.0))
        throw validation_error("t-grid '" + s + "' needs hi > lo > 0");
    return geometric_grid(hi, lo, n);
}

/* increasing geometric u-grid for the regular-variation measurements */
std::vector<double> increasing_grid(double lo, double hi, int n) {
    std::vector<double> g = geometric_grid(hi, lo, n);
    return {g.rbegin(), g.rend()};
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::fputs(content.c_str(), stdout);
    else {
        write_text_file(path, content);
        std::printf("wrote %s (%zu bytes)\n", path.c_str(), content.size());
    }
}

/* -------------------------------------------------------------- cmd rv -- */

struct RvArgs {
    std::string fn;
    double xi = 2.0;
    double from = 1e2, to = 1e8;
    int points = 13;
    double rho = 0.0, j = 0.0, u = 1e8;
    double start = 1.0;
    std::string out;
};

int cmd_rv_index(const RvArgs& a) {
    ScalarFunction R = named_scalar_function(parse_fn(a.fn).name, parse_fn(a.fn).params);
    IndexEstimate est =
        rv_index_estimate(R, a.xi, increasing_grid(a.from, a.to, a.points));
    std::string table = "u,index,residual\n";
    for (std::size_t i = 0; i < est.u.size(); ++i)
        table += csv_row({est.u[i], est.index[i], est.residual[i]});
    emit(a.out, table);
    std::printf("index = %.9f (oscillation band [%.9f, %.9f]%s)\n", est.value, est.band_lo,
                est.band_hi, est.truncated_overflow ? ", grid truncated at overflow" : "");
    return 0;
}

int cmd_rv_sv(const RvArgs& a) {
    FnSpec f = parse_fn(a.fn);
    ScalarFunction L = named_scalar_function(f.name, f.params);
    SvCheck chk = normalised_sv_check(L, increasing_grid(a.from, a.to, a.points));
    std::string table = "u,u_Lprime_over_L\n";
    for (std::size_t i = 0; i < chk.u.size(); ++i)
        table += csv_row({chk.u[i], chk.residual[i]});
    emit(a.out, table);
    std::printf("normalised slowly varying: %s (final %.3e, decreasing: %s)\n",
                chk.normalised_slowly_varying ? "yes" : "no",
                chk.verdict.final_residual, chk.verdict.decreasing ? "yes" : "no");
    return 0;
}

int cmd_rv_karamata(const RvArgs& a) {
    FnSpec f = parse_fn(a.fn);
    ScalarFunction R = named_scalar_function(f.name, f.params);
    KaramataResult res = karamata_residual(R, a.rho, a.j, a.u);
    std::printf("u = %g: ratio = %.9f, expected limit = %.9f, residual = %.3e, "
                "tail integral = %.6e\n",
                res.u, res.ratio, res.expected, res.residual, res.tail);
    if (!res.warning.empty()) std::printf("warning: %s\n", res.warning.c_str());
    return 0;
}

int cmd_rv_ko(const RvArgs& a) {
    FnSpec f = parse_fn(a.fn);
    KOResult ko;
    try {
        ko = keller_osserman(catalog_f(f.name, f.params), a.start);
    } catch (const validation_error&) {
        /* not a catalogued nonlinearity: integrate the named function's
         * antiderivative by quadrature */
        ScalarFunction fn = named_scalar_function(f.name, f.params);
        ScalarFunction F = antiderivative_by_quadrature(fn, "F[" + f.name + "]");
        ko = keller_osserman_integral([F](double t) { return F.eval(t); }, a.start);
    }
    if (ko.verdict == KOVerdict::converges)
        std::printf("converges value=%.10g\n", ko.value);
    else if (ko.verdict == KOVerdict::diverges)
        std::printf("diverges\n");
    else
        std::printf("inconclusive\n");
    return 0;
}

/* --------------------------------------------------------- cmd profile -- */

struct ProfileArgs {
    std::string fn;
    std::string weight = "power:0";
    std::string tspec = "1e-2:1e-8";
    bool classical = false;
    bool verify = false;
    std::string out;
};

int cmd_profile(const ProfileArgs& a) {
    FnSpec fs = parse_fn(a.fn);
    NonlinearitySpec n = catalog_f(fs.name, fs.params);
    WeightSpec w = parse_weight(a.weight);
    std::vector<double> grid = parse_tgrid(a.tspec);

    if (a.classical) {
        RatePrediction pr = rate_predict(RateBranch::regular, n, w);
        std::string table = "t,h,rate\n";
        for (double t : grid) {
            double hv = pr.classical->h(t);
            table += csv_row({t, hv, pr.constant * hv});
        }
        emit(a.out, table);
        std::printf("classical branch constant = %.12f, beta = %.6g\n", pr.constant,
                    pr.classical->beta());
        return 0;
    }

    if (!n.has_decomposition)
        throw precondition_error("regular branch: use `profile --h` for '" + n.name + "'");

    ProfileContext ctx(n, w);
    if (grid.size() == 1) {
        double t = grid[0];
        PhiPoint pt = ctx.phi_point(t);
        std::printf("t = %g  phi = %.6e  phi' = %.6e  phi'' = %.6e  rate = %.6e  "
                    "roundtrip residual = %.3e\n",
                    pt.t, pt.phi, pt.phi_p, pt.phi_pp, pt.rate, pt.roundtrip);
        return 0;
    }

    ProfileTable tab = ctx.table(grid);
    emit(a.out, tab.to_csv());
    std::printf("beta = %.6g, max roundtrip residual = %.3e\n", tab.beta,
                tab.max_roundtrip);

    if (a.verify) {
        LemmaProReport rep = lemma_pro_verify(n, w, grid);
        for (const auto& s : rep.limits)
            std::printf("%-22s limit %+.6f final residual %.3e decreasing=%s %s\n",
                        s.name.c_str(), s.limit, s.verdict.final_residual,
                        s.verdict.decreasing ? "yes" : "no",
                        s.verdict.pass ? "pass" : "FAIL");
        std::printf("profile limits: %s\n", rep.all_pass ? "all pass" : "not all pass");
        return rep.all_pass ? 0 : 1;
    }
    return 0;
}

/* ----------------------------------------------------------- cmd solve -- */

void append_rate_checks(VerificationReport& rep, const ScenarioConfig& cfg,
                        const ProblemSpec& p, const SolutionGrid& sol) {
    CheckRecord rec;
    rec.name = "boundary_rate_fit";
    rec.anchor = "rate-fit";
    std::shared_ptr<RatePrediction> store;
    const RatePrediction* pred = bvpdetail::problem_prediction(p, store);
    if (!pred) {
        rec.verdict = Verdict::inconclusive;
        rec.details = "no boundary-rate prediction available for '" + p.f.name + "'";
        rep.checks.push_back(rec);
        return;
    }
    std::function<double(double)> fn;
    if (cfg.verify.corollary && p.f.has_decomposition && p.f.m >= 1) {
        double c = pred->corollary_constant;
        int m = p.f.m;
        fn = [c, m](double d) { return c * iterated_log_value(1.0 / d, m); };
        rec.name = "boundary_rate_fit_iterated_log";
    } else {
        fn = pred->eval;
    }
    RateFitReport fit = boundary_rate_fit(sol, fn, cfg.verify.rate_fit.options);
    const LimitSeries& s = cfg.verify.corollary || cfg.verify.rate_fit.use_slope
                               ? fit.slope
                               : fit.ratio;
    rec.verdict = s.verdict.pass ? Verdict::pass : Verdict::fail;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "final residual %.3e (threshold %.2g), %zu usable nodes, d_cut %.3g",
                  s.verdict.final_residual,
                  &s == &fit.slope ? cfg.verify.rate_fit.options.slope_threshold
                                   : cfg.verify.rate_fit.options.ratio_threshold,
                  fit.usable, fit.d_cut);
    rec.details = buf;
    rec.series.push_back(s);
    rep.checks.push_back(rec);
}

void append_subsuper_checks(VerificationReport& rep, const ScenarioConfig& cfg,
                            const ProblemSpec& p, const SolutionGrid& sol) {
    const SubsuperConfig& sc = cfg.verify.subsuper;
    for (double sigma : sc.sigma_list) {
        CheckRecord rec;
        char label[96];
        std::snprintf(label, sizeof label, "ordered_barriers_sigma_%g", sigma);
        rec.name = label;
        rec.anchor = "ordered-barrier-signs";
        SubsuperReport sup = subsuper_residual(p, sigma, sc.epsilon0, +1, sc.delta);
        SubsuperReport sub = subsuper_residual(p, sigma, sc.epsilon0, -1, sc.delta);
        SandwichReport sand = sandwich_check(p, sol, sigma, sc.epsilon0,
                                             std::min(sup.delta_certified,
                                                      sub.delta_certified));
        bool ok = sup.sign_ok && sub.sign_ok && sand.bounded;
        rec.verdict = ok ? Verdict::pass : Verdict::fail;
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "super delta %.3g, sub delta %.3g, sandwich slack %.3e over %zu "
                      "nodes (solution scale %.3g)",
                      sup.delta_certified, sub.delta_certified, sand.wbar, sand.nodes,
                      sand.u_scale);
        rec.details = buf;
        if (!sup.violation.empty()) rec.details += "; super: " + sup.violation;
        if (!sub.violation.empty()) rec.details += "; sub: " + sub.violation;
        for (const auto& wmsg : sup.warnings) rec.details += "; " + wmsg;
        rep.checks.push_back(rec);
    }
}

void append_lemma_checks(VerificationReport& rep, const ScenarioConfig& cfg,
                         const ProblemSpec& p) {
    CheckRecord rec;
    rec.name = "profile_limits";
    rec.anchor = "profile-lemma-limits";
    if (!p.f.has_decomposition) {
        rec.verdict = Verdict::inconclusive;
        rec.details = "'" + p.f.name + "' is on the regular branch; no profile limits";
        rep.checks.push_back(rec);
        return;
    }
    const TGridConfig& g = cfg.verify.lemma_pro.t_grid;
    LemmaProReport lr = lemma_pro_verify(p.f, p.weight,
                                         geometric_grid(g.from, g.to, g.points),
                                         cfg.verify.lemma_pro.threshold);
    rec.verdict = lr.all_pass ? Verdict::pass : Verdict::fail;
    int fails = 0;
    for (const auto& s : lr.limits) {
        rec.series.push_back(s);
        fails += s.verdict.pass ? 0 : 1;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu limits, %d failing, threshold %.2g",
                  lr.limits.size(), fails, cfg.verify.lemma_pro.threshold);
    rec.details = buf;
    rep.checks.push_back(rec);
}

int cmd_solve(const std::string& config_path) {
    ScenarioConfig cfg = load_scenario(config_path);
    ProblemSpec p = cfg.make_problem();
    LargeSolveReport rep = solve_large(p, cfg.solver);

    VerificationReport checks;
    checks.config_hash = cfg.hash();
    if (cfg.verify.rate_fit.enabled || cfg.verify.corollary)
        append_rate_checks(checks, cfg, p, rep.sol);
    if (cfg.verify.subsuper.enabled) append_subsuper_checks(checks, cfg, p, rep.sol);
    if (cfg.verify.lemma_pro.enabled) append_lemma_checks(checks, cfg, p);

    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : rep.steps)
        steps.push_back({{"M_requested", s.M_requested},
                         {"M_effective", s.M_effective},
                         {"newton_iterations", s.newton_iterations},
                         {"final_residual", s.final_residual},
                         {"interior_change", s.interior_change},
                         {"monotone_ok", s.monotone_ok},
                         {"monotone_margin", s.monotone_margin}});
    nlohmann::json doc = {{"config_hash", cfg.hash()},
                          {"converged", rep.converged},
                          {"monotone_ok", rep.monotone_ok},
                          {"schedule_capped", rep.schedule_capped},
                          {"diagnostic", rep.diagnostic},
                          {"M_final", rep.sol.M},
                          {"interior_change", rep.sol.interior_change},
                          {"steps", steps},
                          {"verification", checks.to_json()}};

    namespace fs = std::filesystem;
    fs::create_directories(cfg.output.dir);
    for (const std::string& fmt : cfg.output.formats) {
        if (fmt == "csv") {
            std::string path = cfg.output.dir + "/solution.csv";
            write_text_file(path, "# config " + cfg.hash() + "\n" + rep.sol.to_csv());
            std::printf("wrote %s\n", path.c_str());
        } else {
            std::string path = cfg.output.dir + "/convergence.json";
            write_text_file(path, doc.dump(2) + "\n");
            std::printf("wrote %s\n", path.c_str());
        }
    }

    std::printf("%s at M = %g after %zu levels (interior change %.3e)\n",
                rep.converged ? "converged" : "NOT converged", rep.sol.M,
                rep.steps.size(), rep.sol.interior_change);
    if (!rep.diagnostic.empty()) std::printf("note: %s\n", rep.diagnostic.c_str());
    std::fputs(checks.human_summary().c_str(), stdout);

    if (!rep.converged) return 3;
    return checks.count(Verdict::fail) == 0 ? 0 : 1;
}

/* ---------------------------------------------------------- cmd verify -- */

int cmd_verify(const std::string& suite_path, const std::string& out_path, bool list) {
    if (list) {
        for (const auto& c : acceptance_criteria())
            std::printf("%2d  %-38s %s\n", c.id, c.name, c.anchor);
        return 0;
    }

    std::vector<int> ids = all_criterion_ids();
    CriterionOptions opt;
    std::string hash_src = "default-suite";
    if (!suite_path.empty()) {
        std::ifstream is(suite_path);
        if (!is) throw validation_error("suite: cannot read '" + suite_path + "'");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(is);
        } catch (const nlohmann::json::parse_error& e) {
            throw validation_error("suite: '" + suite_path + "' is not valid JSON: " +
                                   e.what());
        }
        if (!doc.is_object()) throw validation_error("suite: expected an object at $");
        for (auto it = doc.begin(); it != doc.end(); ++it)
            if (it.key() != "criteria" && it.key() != "wrong_constant_for")
                throw validation_error("suite: unknown key at $." + it.key());
        if (doc.contains("criteria")) {
            if (!doc["criteria"].is_array())
                throw validation_error("suite: expected an array at $.criteria");
            ids.clear();
            for (const auto& v : doc["criteria"]) {
                if (!v.is_number_integer())
                    throw validation_error("suite: expected integers in $.criteria");
                ids.push_back(v.get<int>());
            }
        }
        if (doc.contains("wrong_constant_for")) {
            if (!doc["wrong_constant_for"].is_number_integer())
                throw validation_error("suite: expected an integer at $.wrong_constant_for");
            opt.wrong_constant_for = doc["wrong_constant_for"].get<int>();
        }
        hash_src = doc.dump();
    }
    for (int id : ids) {
        bool known = false;
        for (const auto& c : acceptance_criteria()) known = known || c.id == id;
        if (!known) throw validation_error("suite: unknown criterion id " + std::to_string(id));
    }

    VerificationReport rep = run_suite(ids, opt);
    rep.config_hash = fnv1a64_hex(hash_src);
    std::fputs(rep.human_summary().c_str(), stdout);
    if (!out_path.empty()) {
        write_text_file(out_path, rep.to_json().dump(2) + "\n");
        std::printf("wrote %s\n", out_path.c_str());
    }
    return rep.count(Verdict::fail) == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary blow-up laboratory: regular variation, blow-up profiles, "
                 "degenerate-weight large solutions"};
    app.require_subcommand(1);

    RvArgs rv_args;
    CLI::App* rv = app.add_subcommand("rv", "regular-variation measurements");
    rv->require_subcommand(1);
    auto add_common = [&rv_args](CLI::App* sub, bool with_grid) {
        sub->add_option("--fn", rv_args.fn, "function as name[:p1,p2,...]")->required();
        if (with_grid) {
            sub->add_option("--from", rv_args.from, "grid start (default 1e2)");
            sub->add_option("--to", rv_args.to, "grid end (default 1e8)");
            sub->add_option("--points", rv_args.points, "grid size (default 13)");
            sub->add_option("--out", rv_args.out, "write table to this CSV file");
        }
    };
    CLI::App* rvi = rv->add_subcommand("index", "measured regular-variation index");
    add_common(rvi, true);
    rvi->add_option("--xi", rv_args.xi, "scale factor (default 2)");
    CLI::App* rvs = rv->add_subcommand("sv", "normalised slow-variation check");
    add_common(rvs, true);
    CLI::App* rvk = rv->add_subcommand("karamata", "tail-integral ratio vs its limit");
    add_common(rvk, false);
    rvk->add_option("--rho", rv_args.rho, "regular-variation index of the function")
        ->required();
    rvk->add_option("--j", rv_args.j, "tail exponent")->required();
    rvk->add_option("--u", rv_args.u, "evaluation point (default 1e8)");
    CLI::App* rvo = rv->add_subcommand("ko", "finite-blow-up integral verdict");
    add_common(rvo, false);
    rvo->add_option("--start", rv_args.start, "lower integration bound (default 1)");

    ProfileArgs pr_args;
    CLI::App* prof = app.add_subcommand("profile", "blow-up profile tables");
    prof->set_help_flag("--help", "print help"); /* frees -h for the branch flag */
    prof->add_option("--f", pr_args.fn, "nonlinearity as name[:params]")->required();
    prof->add_option("--weight", pr_args.weight, "weight as name:theta[:params]");
    prof->add_option("--t", pr_args.tspec, "t value or grid hi:lo[:points]");
    prof->add_flag("--h", pr_args.classical, "use the classical (regular) branch");
    prof->add_flag("--verify", pr_args.verify, "verify the six profile limits");
    prof->add_option("--out", pr_args.out, "write the CSV to this file");

    std::string config_path;
    CLI::App* solve = app.add_subcommand("solve", "solve a JSON scenario");
    solve->add_option("config", config_path, "scenario configuration file")->required();

    std::string suite_path, verify_out;
    bool list_criteria = false;
    CLI::App* verify = app.add_subcommand("verify", "run the acceptance criteria");
    verify->add_option("--suite", suite_path, "JSON suite file (default: all criteria)");
    verify->add_option("--out", verify_out, "write the JSON report to this file");
    verify->add_flag("--list", list_criteria, "list the criteria and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (rvi->parsed()) return cmd_rv_index(rv_args);
        if (rvs->parsed()) return cmd_rv_sv(rv_args);
        if (rvk->parsed()) return cmd_rv_karamata(rv_args);
        if (rvo->parsed()) return cmd_rv_ko(rv_args);
        if (prof->parsed()) return cmd_profile(pr_args);
        if (solve->parsed()) return cmd_solve(config_path);
        if (verify->parsed()) return cmd_verify(suite_path, verify_out, list_criteria);
    } catch (const existence_gate_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
