// Batch experiment runner for the rough-path toolkit: builds drivers, runs
// integrals, solves path-dependent equations, emits convergence tables and
// regularity reports.  Everything is deterministic given the configuration;
// randomness flows only through explicit seeds.
//
// Exit codes: 0 ok, 1 usage/IO error, 2 numerical guard or non-convergence.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roughpath/roughpath.hpp"

namespace rp = roughpath;
using rp::json;

namespace {

struct ExperimentConfig {
    std::string driver;      // driver spec (file or brownian:... / line:...)
    std::string path_file;   // plain path input for pvar
    std::string functional;  // integrand id
    std::string sigma;       // diffusion id
    std::string drift = "zero";
    std::string xi = "const:1";
    std::string study;
    std::string out;
    double p = 2.1;
    double tol = 1e-8;
    std::size_t max_iter = 50;
    std::size_t seeds = 10;
    std::size_t grid = 256;
    std::optional<std::pair<double, double>> interval;
    rp::oracle::OracleConfig oracle;

    json to_json() const {
        json j;
        j["driver"] = driver;
        j["path"] = path_file;
        j["functional"] = functional;
        j["sigma"] = sigma;
        j["b"] = drift;
        j["xi"] = xi;
        j["study"] = study;
        j["out"] = out;
        j["p"] = p;
        j["tol"] = tol;
        j["max_iter"] = max_iter;
        j["seeds"] = seeds;
        j["n"] = grid;
        if (interval) j["interval"] = {interval->first, interval->second};
        j["oracle"] = {{"refinement_factor", oracle.refinement_factor},
                       {"enumeration_cap", oracle.enumeration_cap},
                       {"fd_step", oracle.fd_step}};
        return j;
    }

    std::string hash() const { return rp::hex64(rp::fnv1a64(to_json().dump())); }
};

void load_config_file(ExperimentConfig& cfg, const std::string& file) {
    json j = json::parse(rp::read_file(file));
    if (j.contains("driver")) cfg.driver = j["driver"].get<std::string>();
    if (j.contains("path")) cfg.path_file = j["path"].get<std::string>();
    if (j.contains("functional")) cfg.functional = j["functional"].get<std::string>();
    if (j.contains("sigma")) cfg.sigma = j["sigma"].get<std::string>();
    if (j.contains("b")) cfg.drift = j["b"].get<std::string>();
    if (j.contains("xi")) cfg.xi = j["xi"].get<std::string>();
    if (j.contains("study")) cfg.study = j["study"].get<std::string>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("p")) cfg.p = j["p"].get<double>();
    if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
    if (j.contains("max_iter")) cfg.max_iter = j["max_iter"].get<std::size_t>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::size_t>();
    if (j.contains("n")) cfg.grid = j["n"].get<std::size_t>();
    if (j.contains("interval")) {
        auto v = j["interval"].get<std::vector<double>>();
        if (v.size() != 2) throw rp::ParseError("config: interval must be [t, s]");
        cfg.interval = {v[0], v[1]};
    }
    if (j.contains("oracle")) {
        auto& o = j["oracle"];
        if (o.contains("refinement_factor"))
            cfg.oracle.refinement_factor = o["refinement_factor"].get<std::size_t>();
        if (o.contains("enumeration_cap"))
            cfg.oracle.enumeration_cap = o["enumeration_cap"].get<std::size_t>();
        if (o.contains("fd_step")) cfg.oracle.fd_step = o["fd_step"].get<double>();
    }
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty()) {
        std::cout << content;
    } else {
        rp::write_file(out, content);
    }
}

rp::DiscretePath load_path(const std::string& file) {
    std::string text = rp::read_file(file);
    if (file.size() > 5 && file.substr(file.size() - 5) == ".json")
        return rp::path_from_json(json::parse(text));
    return rp::path_from_csv(text);
}

// ---------------------------------------------------------------------------
// pvar
// ---------------------------------------------------------------------------

int cmd_pvar(const ExperimentConfig& cfg) {
    if (cfg.path_file.empty()) throw rp::ParseError("pvar: --path is required");
    rp::DiscretePath path = load_path(cfg.path_file);
    double t = cfg.interval ? cfg.interval->first : path.start_time();
    double s = cfg.interval ? cfg.interval->second : path.horizon();
    std::size_t i0 = path.index_at(t), i1 = path.index_at(s);

    // exact costs O(n^2); past this size the CLI reports the greedy lower
    // bound and says so
    const std::size_t exact_limit = 4096;
    bool approximate = (i1 - i0) > exact_limit;
    double exact = approximate ? rp::p_variation_greedy(path, cfg.p, t, s)
                               : rp::p_variation_exact(path, cfg.p, t, s);
    double greedy = rp::p_variation_greedy(path, cfg.p, t, s);

    std::ostringstream out;
    out << "# config " << cfg.hash() << "\n";
    out << "p,t,s,exact,greedy,bruteforce,approximate\n";
    out << rp::format_double(cfg.p) << "," << rp::format_double(t) << ","
        << rp::format_double(s) << "," << rp::format_double(exact) << ","
        << rp::format_double(greedy) << ",";
    if (i1 - i0 + 1 <= cfg.oracle.enumeration_cap)
        out << rp::format_double(
            rp::oracle::pvar_bruteforce(path, cfg.p, i0, i1, cfg.oracle.enumeration_cap));
    out << "," << (approximate ? 1 : 0) << "\n";
    emit(cfg.out, out.str());
    return 0;
}

// ---------------------------------------------------------------------------
// integrate
// ---------------------------------------------------------------------------

int cmd_integrate(const ExperimentConfig& cfg) {
    std::string spec = cfg.driver.empty() ? cfg.path_file : cfg.driver;
    if (spec.empty()) throw rp::ParseError("integrate: --driver or --path is required");
    if (cfg.functional.empty()) throw rp::ParseError("integrate: --functional is required");
    auto driver = rp::make_driver(spec, cfg.p);
    std::size_t d = driver->dimension();
    auto f = rp::make_functional(cfg.functional, d, d);  // scalar-per-axis integrand
    std::size_t i0 = cfg.interval ? driver->base().index_at(cfg.interval->first) : 0;
    std::size_t i1 = cfg.interval ? driver->base().index_at(cfg.interval->second)
                                  : driver->size() - 1;

    rp::FunctionalIntegralInfo info;
    rp::IntegralResult res = rp::integrate_functional(f, driver, i0, i1, &info);
    rp::SewingDiagnostics diag = rp::sewing_diagnostics(res.as_controlled,
                                                        res.as_controlled.reference, 0,
                                                        res.as_controlled.size() - 1);

    std::string prefix = cfg.out.empty() ? std::string("integral") : cfg.out;
    std::ostringstream values;
    values << "# config " << cfg.hash() << "\n";
    values << "t";
    for (std::size_t c = 1; c <= res.value.dimension(); ++c) values << ",Z_" << c;
    values << "\n";
    for (std::size_t i = 0; i < res.value.size(); ++i) {
        values << rp::format_double(res.value.time(i));
        for (double v : res.value.value(i)) values << "," << rp::format_double(v);
        values << "\n";
    }
    rp::write_file(prefix + ".csv", values.str());

    std::ostringstream defects;
    defects << "# config " << cfg.hash() << "\n";
    defects << "t,s,defect,rho\n";
    for (const auto& row : diag.rows)
        defects << rp::format_double(row.t) << "," << rp::format_double(row.s) << ","
                << rp::format_double(row.defect) << "," << rp::format_double(row.rho) << "\n";
    rp::write_file(prefix + "_defects.csv", defects.str());

    json summary;
    summary["config_hash"] = cfg.hash();
    summary["final_value"] =
        std::vector<double>(res.value.value(res.value.size() - 1).begin(),
                            res.value.value(res.value.size() - 1).end());
    if (diag.has_slope) summary["defect_slope"] = diag.slope;
    summary["estimate_terms"] = {{"x_pvar", info.x_pvar},
                                 {"remainder_qvar", info.remainder_qvar},
                                 {"grad_pvar", info.grad_pvar},
                                 {"xx_halfp_var", info.xx_halfp_var},
                                 {"first", info.estimate_first},
                                 {"second", info.estimate_second}};
    rp::write_file(prefix + ".json", summary.dump(2) + "\n");
    std::cout << "integral value written to " << prefix << ".csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

int cmd_solve(const ExperimentConfig& cfg) {
    if (cfg.driver.empty()) throw rp::ParseError("solve: --driver is required");
    if (cfg.sigma.empty()) throw rp::ParseError("solve: --sigma is required");
    auto driver = rp::make_driver(cfg.driver, cfg.p);
    rp::DiscretePath xi = rp::make_initial(cfg.xi, *driver, 1);
    std::size_t k = xi.dimension(), d = driver->dimension();
    rp::RdeProblem pb(rp::make_functional(cfg.drift, k, k),
                      rp::make_functional(cfg.sigma, k, k * d), driver, xi, cfg.p);
    rp::RdeSolution sol = rp::solve(pb, cfg.tol, cfg.max_iter);

    std::string prefix = cfg.out.empty() ? std::string("solution") : cfg.out;
    std::ostringstream csv;
    csv << "# config " << cfg.hash() << "\n";
    csv << "t";
    for (std::size_t c = 1; c <= k; ++c) csv << ",Y_" << c;
    for (std::size_t c = 1; c <= k * d; ++c) csv << ",Yprime_" << c;
    csv << "\n";
    for (std::size_t i = 0; i < sol.solution.size(); ++i) {
        csv << rp::format_double(sol.solution.y.time(i));
        for (double v : sol.solution.y.value(i)) csv << "," << rp::format_double(v);
        for (double v : sol.solution.y_prime.value(i)) csv << "," << rp::format_double(v);
        csv << "\n";
    }
    rp::write_file(prefix + ".csv", csv.str());

    json windows = json::array();
    for (const auto& w : sol.windows)
        windows.push_back({{"t_start", w.t_start},
                           {"t_end", w.t_end},
                           {"delta", w.delta},
                           {"rho", w.rho},
                           {"iterations", w.iterations},
                           {"final_distance", w.final_distance},
                           {"echo", w.echo},
                           {"echo_ok", w.echo_ok},
                           {"backoffs", w.backoffs}});
    json jd;
    jd["config_hash"] = cfg.hash();
    jd["residual"] = sol.residual;
    jd["windows"] = windows;
    rp::write_file(prefix + "_windows.json", jd.dump(2) + "\n");
    rp::write_file(prefix + "_diagnostics.csv",
                   "# config " + cfg.hash() + "\n" +
                       rp::controlled_diagnostics_csv(sol.solution));
    std::cout << "residual " << rp::format_double(sol.residual) << ", "
              << sol.windows.size() << " windows, solution in " << prefix << ".csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// convergence studies
// ---------------------------------------------------------------------------

int cmd_convergence(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "# config " << cfg.hash() << "\n";
    out << "n,error,slope\n";
    auto row = [&](double n, double err, std::optional<double> slope) {
        out << rp::format_double(n) << "," << rp::format_double(err) << ",";
        if (slope) out << rp::format_double(*slope);
        else out << "n/a";
        out << "\n";
    };

    if (cfg.study == "exp-ode") {
        double prev_err = 0.0;
        bool first = true;
        for (std::size_t n : {32u, 64u, 128u, 256u, 512u}) {
            auto driver = rp::make_driver("line:" + std::to_string(n), cfg.p);
            rp::RdeProblem pb(rp::make_functional("zero", 1, 1),
                              rp::make_functional("endpoint", 1, 1), driver,
                              rp::DiscretePath({0.0}, {1.0}, 1), cfg.p);
            auto sol = rp::solve(pb, std::min(cfg.tol, 1e-10), cfg.max_iter);
            double err = std::abs(sol.solution.y.value(n)[0] - std::exp(1.0));
            row(static_cast<double>(n), err,
                first ? std::nullopt : std::optional<double>(std::log2(prev_err / err)));
            prev_err = err;
            first = false;
        }
    } else if (cfg.study == "chen-defect") {
        for (std::size_t n : {64u, 256u, 1024u}) {
            double worst = 0.0;
            for (std::uint64_t s = 1; s <= cfg.seeds; ++s)
                worst = std::max(worst,
                                 rp::chen_defect(rp::brownian_lift(s, n, 1.0, 2, cfg.p)));
            row(static_cast<double>(n), worst, std::nullopt);
        }
    } else if (cfg.study == "remainder-scaling") {
        auto f = rp::smoothed_running_max(0.25, rp::SmoothingKind::Quintic);
        std::size_t n = cfg.grid;
        std::vector<double> lw, lr;
        for (std::size_t span = std::max<std::size_t>(1, n / 64); span <= n; span *= 2) {
            double sum_r = 0.0, sum_w = 0.0;
            std::size_t count = 0;
            for (std::uint64_t s = 1; s <= cfg.seeds; ++s) {
                auto path = rp::brownian_lift(s, n, 1.0, 1, cfg.p).base();
                for (std::size_t i = 0; i + span <= n; i += span) {
                    sum_r += std::abs(rp::functional_remainder(f, path, i, i + span)[0]);
                    sum_w += (path.time(i + span) - path.time(i)) +
                             rp::p_variation_sum(path, cfg.p, i, i + span);
                    ++count;
                }
            }
            double mr = sum_r / count, mw = sum_w / count;
            std::optional<double> slope;
            if (!lw.empty())
                slope = (std::log(mr) - lr.back()) / (std::log(mw) - lw.back());
            lw.push_back(std::log(mw));
            lr.push_back(std::log(mr));
            row(static_cast<double>(span), mr, slope);
        }
        std::cout << "ls-slope " << rp::format_double(rp::least_squares_slope(lw, lr)) << "\n";
    } else {
        throw rp::ParseError("unknown study '" + cfg.study +
                             "' (expected exp-ode, chen-defect or remainder-scaling)");
    }
    emit(cfg.out, out.str());
    return 0;
}

// ---------------------------------------------------------------------------
// check: oracle battery
// ---------------------------------------------------------------------------

int cmd_check(const ExperimentConfig& cfg) {
    bool ok = true;
    auto report = [&](bool pass, const std::string& name, const std::string& detail) {
        std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
        ok = ok && pass;
    };

    // exact p-variation against exhaustive enumeration
    {
        bool pass = true;
        for (std::uint64_t s = 1; s <= 20; ++s) {
            auto w = rp::brownian_lift(s, 10, 1.0, 1, cfg.p).base();
            if (rp::p_variation_sum(w, cfg.p, 0, 10) !=
                rp::oracle::pvar_sum_bruteforce(w, cfg.p, 0, 10, cfg.oracle.enumeration_cap))
                pass = false;
        }
        report(pass, "pvar-dp-vs-bruteforce", "20 random 10-point sections, exact equality");
    }

    // driver consistency
    auto driver = cfg.driver.empty() ? rp::make_driver("brownian:1:256", cfg.p)
                                     : rp::make_driver(cfg.driver, cfg.p);
    {
        double defect = rp::chen_defect(*driver);
        report(defect <= 1e-12, "chen-defect", "defect " + rp::format_double(defect));
    }

    // quadratic compensation identity through the rough integral
    {
        std::size_t n = driver->size() - 1;
        std::vector<double> y(n + 1), yp(n + 1, 1.0);
        for (std::size_t i = 0; i <= n; ++i) y[i] = driver->base().value(i)[0];
        rp::ControlledPath cp(
            rp::DiscretePath(std::vector<double>(driver->base().times()), std::move(y), 1),
            rp::DiscretePath(std::vector<double>(driver->base().times()), std::move(yp), 1),
            driver, cfg.p);
        bool scalar = driver->dimension() == 1;
        if (scalar) {
            double got = rp::rough_integrate(cp, driver).value.value(n)[0];
            double x0 = driver->base().value(0)[0], xT = driver->base().value(n)[0];
            double err = std::abs(got - 0.5 * (xT * xT - x0 * x0));
            report(err <= 1e-9, "quadratic-compensation", "error " + rp::format_double(err));
        }
    }

    // analytic vs finite-difference derivatives for the shipped families
    {
        auto base = std::make_shared<const rp::DiscretePath>(
            rp::brownian_lift(2, 128, 1.0, 1, cfg.p).base());
        std::vector<rp::StoppedPath> probes{{0.25, base}, {0.5, base}, {0.75, base}};
        for (const std::string id : {"smax:eps=0.25:quintic", "intdep:y2", "endpoint"}) {
            auto f = rp::make_functional(id, 1, 1);
            auto rep = rp::oracle::fd_derivative_check(f, probes, cfg.oracle);
            report(rep.max_vertical_discrepancy <= 1e-6 && rep.stable, "fd-" + id,
                   "vertical discrepancy " + rp::format_double(rep.max_vertical_discrepancy));
        }
    }

    // additive-noise exactness of the one-step oracle
    {
        rp::RdeProblem pb(rp::make_functional("zero", 1, 1),
                          rp::make_functional("const:1.5", 1, 1),
                          rp::make_driver("brownian:4:64", cfg.p),
                          rp::DiscretePath({0.0}, {0.25}, 1), cfg.p);
        auto yy = rp::oracle::euler_level2(pb, 64 * 4);
        double worst = 0.0;
        for (std::size_t i = 0; i < yy.size(); ++i) {
            double expected = 0.25 + 1.5 * (pb.driver->base().value_at(yy.time(i))[0] -
                                            pb.driver->base().value(0)[0]);
            worst = std::max(worst, std::abs(yy.value(i)[0] - expected));
        }
        report(worst <= 1e-12, "euler-additive-exact", "error " + rp::format_double(worst));
    }

    return ok ? 0 : 2;
}

// ---------------------------------------------------------------------------
// report: regularity diagnostics
// ---------------------------------------------------------------------------

int cmd_report(const ExperimentConfig& cfg) {
    if (cfg.functional.empty()) throw rp::ParseError("report: --functional is required");
    auto f = rp::make_functional(cfg.functional, 1, 1);
    std::vector<rp::DiscretePath> probes;
    for (std::uint64_t s = 1; s <= cfg.seeds; ++s)
        probes.push_back(rp::brownian_lift(s, cfg.grid, 1.0, 1, cfg.p).base());
    auto rep = rp::regularity_report(f, probes, cfg.p);
    json j = rp::regularity_report_to_json(rep);
    j["config_hash"] = cfg.hash();
    emit(cfg.out, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rough-path toolkit: p-variation, rough integrals, path-dependent equations"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string config_file;
    app.add_option("--config", config_file, "JSON config file; flags override its entries");
    app.fallthrough();

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--p", cfg.p, "variation exponent");
        sub->add_option("--out", cfg.out, "output file or prefix");
        sub->add_option("--seeds", cfg.seeds, "number of seeds");
        sub->add_option("--n", cfg.grid, "grid size (intervals)");
        sub->add_option("--refinement-factor", cfg.oracle.refinement_factor,
                        "oracle refinement factor");
        sub->add_option("--fd-step", cfg.oracle.fd_step, "finite-difference bump");
    };

    std::vector<double> interval_flag;

    CLI::App* pvar = app.add_subcommand("pvar", "p-variation of a stored path");
    pvar->add_option("--path", cfg.path_file, "path file (CSV or JSON)");
    pvar->add_option("--interval", interval_flag, "grid-aligned interval t,s")->expected(2);
    add_common(pvar);

    CLI::App* integrate = app.add_subcommand("integrate", "rough integral of a functional");
    integrate->add_option("--driver", cfg.driver, "driver spec or file");
    integrate->add_option("--path", cfg.path_file, "path file (smooth-lifted at --p)");
    integrate->add_option("--functional", cfg.functional, "integrand id");
    integrate->add_option("--interval", interval_flag, "grid-aligned interval t,s")->expected(2);
    add_common(integrate);

    CLI::App* solve = app.add_subcommand("solve", "solve a path-dependent equation");
    solve->add_option("--driver", cfg.driver, "driver spec or file");
    solve->add_option("--sigma", cfg.sigma, "diffusion functional id");
    solve->add_option("--b", cfg.drift, "drift functional id");
    solve->add_option("--xi", cfg.xi, "initial segment (const:v or CSV file)");
    solve->add_option("--tol", cfg.tol, "fixed-point tolerance");
    solve->add_option("--max-iter", cfg.max_iter, "iteration cap per window");
    add_common(solve);

    CLI::App* conv = app.add_subcommand("convergence", "refinement studies");
    conv->add_option("--study", cfg.study, "exp-ode | chen-defect | remainder-scaling");
    conv->add_option("--tol", cfg.tol, "solver tolerance for solve-based studies");
    add_common(conv);

    CLI::App* check = app.add_subcommand("check", "oracle cross-checks");
    check->add_option("--driver", cfg.driver, "driver spec or file");
    add_common(check);

    CLI::App* report = app.add_subcommand("report", "regularity report for a functional");
    report->add_option("--functional", cfg.functional, "functional id");
    add_common(report);

    try {
        // config file entries load first; explicit flags then override them
        for (int i = 1; i + 1 < argc; ++i)
            if (std::string_view(argv[i]) == "--config") load_config_file(cfg, argv[i + 1]);
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            int code = app.exit(e);
            return code == 0 ? 0 : 1;
        }
        if (interval_flag.size() == 2) cfg.interval = {interval_flag[0], interval_flag[1]};

        if (pvar->parsed()) return cmd_pvar(cfg);
        if (integrate->parsed()) return cmd_integrate(cfg);
        if (solve->parsed()) return cmd_solve(cfg);
        if (conv->parsed()) return cmd_convergence(cfg);
        if (check->parsed()) return cmd_check(cfg);
        if (report->parsed()) return cmd_report(cfg);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const rp::ExponentError& e) {
        std::cerr << "guard: " << e.what() << "\n";
        return 2;
    } catch (const rp::NonConvergenceError& e) {
        std::cerr << "non-convergence: " << e.what() << "\ndiagnostics: " << e.diagnostics
                  << "\n";
        return 2;
    } catch (const rp::GuardError& e) {
        std::cerr << "guard: " << e.what() << "\n";
        return 2;
    } catch (const rp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
