// Command-line front end: simulate, protocol, sweep, optimize, fit, reproduce.
// Exit codes: 0 pass, 2 tolerance failure, 1 error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "srmem/config.hpp"
#include "srmem/fitting.hpp"
#include "srmem/optimize.hpp"
#include "srmem/reproduce.hpp"
#include "srmem/sweep.hpp"

using namespace srmem;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_error = 1;
constexpr int exit_fail = 2;

struct ConfigArgs {
    std::string file;
    std::vector<std::string> overrides;

    void attach(CLI::App* app)
    {
        app->add_option("-c,--config", file, "key = value configuration file")->check(CLI::ExistingFile);
        app->add_option("-s,--set", overrides, "override, key=value (repeatable)");
    }

    RunConfig load() const
    {
        RunConfig c = file.empty() ? RunConfig{} : load_config(file);
        apply_overrides(c, overrides);
        return c;
    }
};

Window parse_window(const std::string& text)
{
    Window w;
    if (text.empty()) {
        return w;
    }
    const auto colon = text.find(':');
    require(colon != std::string::npos, "window must be lo:hi");
    const std::string lo = text.substr(0, colon);
    const std::string hi = text.substr(colon + 1);
    if (!lo.empty()) {
        w.lo = std::stod(lo);
    }
    if (!hi.empty()) {
        w.hi = std::stod(hi);
    }
    return w;
}

// "lo:hi:n" or "lo:hi:n:log".
std::vector<double> parse_range(const std::string& text)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) {
        parts.push_back(p);
    }
    require(parts.size() == 3 || parts.size() == 4, "range must be lo:hi:n or lo:hi:n:log");
    const double lo = std::stod(parts[0]);
    const double hi = std::stod(parts[1]);
    const int n = std::stoi(parts[2]);
    if (parts.size() == 4) {
        require(parts[3] == "log" || parts[3] == "lin", "range spacing must be log or lin");
        if (parts[3] == "log") {
            return log_range(lo, hi, n);
        }
    }
    return linear_range(lo, hi, n);
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Maxwell-Bloch light storage simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may also follow the subcommand
    std::string out_dir;
    app.add_option("-o,--output-dir", out_dir, "output directory (default $SRMEM_OUTPUT_DIR or ./srmem-out)");
    unsigned workers = 0;
    app.add_option("-j,--workers", workers, "worker threads (default: hardware concurrency)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "propagate the probe through the medium without control");
    ConfigArgs sim_cfg;
    sim_cfg.attach(sim);
    double sim_t_end = std::nan("");
    sim->add_option("--t-end", sim_t_end, "end time in units of 1/gamma (default: 20 / (1 + d/4) after the probe)");
    std::string sim_file = "simulate.txt";
    sim->add_option("--file", sim_file, "output file name inside the output directory");

    // protocol
    auto* prot = app.add_subcommand("protocol", "run one storage protocol and print its JSON report");
    ConfigArgs prot_cfg;
    prot_cfg.attach(prot);
    bool prot_series = false;
    prot->add_flag("--series", prot_series, "include the retrieved pulse");
    double expect_eta = std::nan("");
    double expect_tol = 0.03;
    prot->add_option("--expect-eta", expect_eta, "fail with exit code 2 unless eta matches");
    prot->add_option("--tolerance", expect_tol, "absolute tolerance for --expect-eta");

    // sweep
    auto* sw = app.add_subcommand("sweep", "evaluate a protocol along one parameter axis");
    ConfigArgs sw_cfg;
    sw_cfg.attach(sw);
    std::string sw_axis = "d";
    sw->add_option("--axis", sw_axis, "d, T_P, Omega, B or storage_time (dimensionless)")->required();
    std::vector<double> sw_values;
    std::string sw_range;
    auto* values_opt = sw->add_option("--values", sw_values, "explicit axis values");
    auto* range_opt = sw->add_option("--range", sw_range, "lo:hi:n[:log]");
    values_opt->excludes(range_opt);
    std::string sw_objective = "eta_total";
    sw->add_option("--objective", sw_objective, "eta_total, t_sr or leakage");
    std::string sw_file;
    sw->add_option("--file", sw_file, "CSV name inside the output directory (default sweep_<hash>.csv)");

    // optimize
    auto* opt = app.add_subcommand("optimize", "maximize the objective over one axis");
    ConfigArgs opt_cfg;
    opt_cfg.attach(opt);
    std::string opt_axis;
    double opt_lo = 0.0, opt_hi = 0.0, opt_tol = 1e-3;
    bool opt_log = false, opt_min = false;
    std::string opt_objective = "eta_total";
    opt->add_option("--axis", opt_axis, "axis to optimize")->required();
    opt->add_option("--lo", opt_lo, "bracket start")->required();
    opt->add_option("--hi", opt_hi, "bracket end")->required();
    opt->add_option("--rel-tol", opt_tol, "relative tolerance in x");
    opt->add_flag("--log", opt_log, "search in log scale");
    opt->add_flag("--minimize", opt_min, "minimize instead of maximize");
    opt->add_option("--objective", opt_objective, "eta_total, t_sr or leakage");

    // fit
    auto* fit = app.add_subcommand("fit", "fit a two-column data file");
    std::string fit_model, fit_input, fit_window;
    double fit_exclusion = std::nan("");
    fit->add_option("--model", fit_model, "exp (y = A exp(-t/T)), lorentzian (OD vs detuning) or tsr (T_SR vs d)")
        ->required()
        ->check(CLI::IsMember({"exp", "lorentzian", "tsr"}));
    fit->add_option("input", fit_input, "data file, '-' for stdin")->required();
    fit->add_option("--window", fit_window, "exp model: lo:hi range of t");
    fit->add_option("--exclude", fit_exclusion, "lorentzian model: drop |delta| below this");

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "run a figure recipe and check it against its targets");
    std::string recipe;
    rep->add_option("recipe", recipe, "fig1, fig2c, fig3a, fig3b, fig3c, eq4, bandwidth or all")->required();
    double rep_dt = 1.0, rep_nz = 1.0;
    rep->add_option("--dt-refine", rep_dt, "divide every time step by this factor");
    rep->add_option("--nz-refine", rep_nz, "multiply every spatial grid by this factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_pass : exit_error;
    }

    try {
        if (*sim) {
            const RunConfig c = sim_cfg.load();
            const MediumParams m = make_medium(c);
            const PulseSpec probe = make_probe(c);
            GridSpec g = default_grid(m, probe);
            g.dt /= c.dt_refine;
            g.nz = static_cast<int>(std::lround((g.nz - 1) * c.nz_refine)) + 1;
            if (c.grid_nz > 0) {
                g.nz = c.grid_nz;
            }
            if (!std::isnan(c.grid_dt)) {
                g.dt = c.grid_dt;
            }
            g.t_end = std::isnan(sim_t_end) ? support(probe).second + 20.0 / (1.0 + c.d / 4.0) : sim_t_end;
            const FieldRecord rec = solve(m, probe, std::nullopt, g, Retrieval::none);
            const std::string path = output_directory(out_dir) + "/" + sim_file;
            write_field_record(rec, path);
            std::printf("input %.9g transmitted %.9g polariton %.9g dissipated %.9g ledger residual %.3g\n",
                        rec.ledger.input, rec.ledger.transmitted, rec.ledger.polariton, rec.ledger.dissipated,
                        energy_audit(rec));
            std::printf("nz %d dt %.6g steps %zu\nwrote %s\n", g.nz, g.dt, rec.tau.size(), path.c_str());
            return exit_pass;
        }
        if (*prot) {
            const RunConfig c = prot_cfg.load();
            const ProtocolReport r = run_protocol(c, prot_series);
            std::cout << to_json(r, prot_series) << "\n";
            if (!std::isnan(expect_eta)) {
                const bool ok = within(r.eta_total, expect_eta, expect_tol);
                std::fprintf(stderr, "%s eta %.6f (expected %.6f +- %.6f)\n", ok ? "PASS" : "FAIL", r.eta_total,
                             expect_eta, expect_tol);
                return ok ? exit_pass : exit_fail;
            }
            return exit_pass;
        }
        if (*sw) {
            SweepPlan plan;
            plan.base = sw_cfg.load();
            plan.axis = sw_axis;
            plan.values = sw_range.empty() ? sw_values : parse_range(sw_range);
            plan.objective = objective_from_string(sw_objective);
            const SweepResult res = run_sweep(plan, workers);
            const std::string dir = output_directory(out_dir);
            const std::string stem = sw_file.empty() ? "sweep_" + res.hash : sw_file.substr(0, sw_file.rfind(".csv"));
            write_csv(dir + "/" + stem + ".csv", sweep_table(res));
            std::ofstream(dir + "/" + stem + ".manifest.json") << make_manifest(res).to_json() << "\n";
            int failed = 0;
            for (const auto& row : res.rows) {
                std::printf("%-14.6g %s %.9g%s%s\n", row.value, row.ok ? "ok    " : "failed", row.objective,
                            row.ok ? "" : "  ", row.error.c_str());
                failed += row.ok ? 0 : 1;
            }
            std::printf("wrote %s/%s.csv (%d failed)\n", dir.c_str(), stem.c_str(), failed);
            return failed == static_cast<int>(res.rows.size()) ? exit_error : exit_pass;
        }
        if (*opt) {
            const RunConfig base = opt_cfg.load();
            const Objective obj = objective_from_string(opt_objective);
            ScalarOptions so;
            so.maximize = !opt_min;
            so.log_scale = opt_log;
            so.rel_tol = opt_tol;
            const ScalarOptimum o = optimize_scalar(
                [&](double x) {
                    const ProtocolReport r = run_protocol(with_axis(base, opt_axis, x));
                    switch (obj) {
                    case Objective::eta_total:
                        return r.eta_total;
                    case Objective::t_sr:
                        return r.t_sr_fit;
                    case Objective::leakage:
                        return r.eta_sr_leakage;
                    }
                    return r.eta_total;
                },
                opt_lo, opt_hi, so);
            std::printf("%s* = %.9g\n%s = %.9g\nevaluations %d\n", opt_axis.c_str(), o.x, opt_objective.c_str(), o.f,
                        o.evaluations);
            if (!o.unimodal) {
                std::printf("note: %s\n", o.note.c_str());
            }
            return exit_pass;
        }
        if (*fit) {
            Columns data;
            if (fit_input == "-") {
                data = read_two_columns(std::cin);
            } else {
                data = read_two_columns(fit_input);
            }
            FitResult f;
            if (fit_model == "exp") {
                f = fit_exp_decay(data.x, data.y, parse_window(fit_window));
            } else if (fit_model == "lorentzian") {
                f = fit_lorentzian_od(data.x, data.y,
                                      std::isnan(fit_exclusion) ? std::nullopt : std::optional<double>(fit_exclusion));
            } else {
                f = fit_tsr_vs_d(data.x, data.y);
            }
            std::cout << format_fit(f);
            return f.converged ? exit_pass : exit_fail;
        }
        if (*rep) {
            ReproduceOptions ro;
            ro.workers = workers;
            ro.dt_refine = rep_dt;
            ro.nz_refine = rep_nz;
            std::vector<std::string> names = recipe == "all" ? recipe_names() : std::vector<std::string>{recipe};
            const std::string dir = output_directory(out_dir);
            bool all_pass = true;
            for (const auto& name : names) {
                const ReportBundle b = reproduce(name, ro);
                write_bundle(b, dir);
                std::printf("== %s (%.1f s)\n%s", name.c_str(), b.seconds, b.summary().c_str());
                all_pass = all_pass && b.passed();
            }
            std::printf("wrote %s\n", dir.c_str());
            return all_pass ? exit_pass : exit_fail;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_error;
    }
    return exit_error;
}
