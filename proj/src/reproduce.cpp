#include "srmem/reproduce.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "srmem/fitting.hpp"

namespace srmem {

namespace {

constexpr double pi = std::numbers::pi;

// Rb D2 linewidth used for the physical-unit checks.
constexpr double Gamma_rb = 2.0 * pi * 6.07e6;

double to_ns(double tau, double gamma_rad) { return tau / gamma_rad * 1e9; }

RunConfig refined(RunConfig c, const ReproduceOptions& o)
{
    c.dt_refine *= o.dt_refine;
    c.nz_refine *= o.nz_refine;
    return c;
}

const std::vector<Protocol>& all_protocols()
{
    static const std::vector<Protocol> p{Protocol::sr, Protocol::ats, Protocol::eit};
    return p;
}

RunConfig figure3_config(Protocol p, const ReproduceOptions& o)
{
    RunConfig c;
    c.protocol = p;
    c.direction = Retrieval::backward;
    c.probe_T_P = 0.01;
    return refined(c, o);
}

// Reference operating points of the three protocols at T_P = 0.01.
struct Target {
    double d;
    double eta;
    double d_tol;
    double eta_tol;
    double kappa;
    double slope;
};

Target target_for(Protocol p)
{
    switch (p) {
    case Protocol::sr:
        return {200.0, 0.93, 0.20, 0.03, 2.0, 9.0};
    case Protocol::ats:
        return {1400.0, 0.96, 0.30, 0.05, 14.0, 0.6};
    case Protocol::eit:
        return {6000.0, 0.93, 0.30, 0.05, 60.0, 2.0};
    }
    return {};
}

std::string fmt(double v, const char* f = "%.6g")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- recipes ---------------------------------------------------------------

ReportBundle recipe_fig1(const ReproduceOptions& o)
{
    ReportBundle b;
    const RunConfig sq = refined(fig1_config(ControlShape::square), o);
    const RunConfig ga = refined(fig1_config(ControlShape::gaussian), o);
    b.hash = config_hash(sq);
    const ProtocolReport r = run_protocol(sq, true);
    const ProtocolReport g = run_protocol(ga, false);
    b.verdicts.push_back(check_abs("fig1 eta (square control)", r.eta_total, 0.79, 0.03));
    b.notes.push_back("gaussian control of the same peak and FWHM: eta = " + fmt(g.eta_total));

    Table series;
    series.hash = b.hash;
    series.columns = {"tau", "intensity", "re_e", "im_e"};
    for (std::size_t i = 0; i < r.retrieved_tau.size(); ++i) {
        const cplx e = r.retrieved_pulse[i];
        series.add({r.retrieved_tau[i], std::norm(e), e.real(), e.imag()});
    }
    b.tables["fig1_retrieved"] = std::move(series);

    Table shapes;
    shapes.hash = b.hash;
    shapes.columns = {"control_gaussian", "eta_total", "eta_transmission_loss", "eta_sr_leakage",
                      "eta_decoherence_loss", "residual_polariton", "write_area"};
    for (const auto* rep : {&r, &g}) {
        shapes.add({rep == &g ? 1.0 : 0.0, rep->eta_total, rep->eta_transmission_loss, rep->eta_sr_leakage,
                    rep->eta_decoherence_loss, rep->residual_polariton, rep->params.at("write_area")});
    }
    b.tables["fig1_shapes"] = std::move(shapes);
    return b;
}

ReportBundle recipe_eq4(const ReproduceOptions& o)
{
    ReportBundle b;
    const std::vector<double> depths{1.5, 3.5, 5.0, 9.0, 50.0, 100.0};
    b.hash = hash_text("eq4 " + fmt(o.dt_refine) + " " + fmt(o.nz_refine));
    Table t;
    t.hash = b.hash;
    t.columns = {"d", "t_sr_fit", "t_sr_model", "ratio", "efficiency", "t_sr_fit_ns", "t_sr_model_ns"};
    std::vector<EmissionFit> fits(depths.size());
    parallel_for(depths.size(), o.workers, [&](std::size_t i) {
        const double tp = optimal_probe_duration(depths[i], 2.0);
        fits[i] = emission_fit(depths[i], exponential_probe(tp), o.dt_refine, o.nz_refine);
    });
    const double gamma = Gamma_rb / 2.0;
    for (const auto& f : fits) {
        b.verdicts.push_back(check_rel("eq4 fitted T_SR, d=" + fmt(f.d), f.t_sr, f.t_sr_model, 0.15));
        t.add({f.d, f.t_sr, f.t_sr_model, f.t_sr / f.t_sr_model, f.efficiency, to_ns(f.t_sr, gamma),
               to_ns(f.t_sr_model, gamma)});
    }
    b.verdicts.push_back(
        check_abs("eq4 T_SR(d=9) in ns", optimal_probe_duration(9.0, Gamma_rb) * 1e9, 8.1, 0.05, "measured 8.0 +- 0.1"));
    b.verdicts.push_back(check_abs("eq4 T_SR(d=1.5) in ns", optimal_probe_duration(1.5, Gamma_rb) * 1e9, 19.1, 0.05,
                                   "measured 18.8 +- 0.8"));
    b.tables["eq4"] = std::move(t);
    return b;
}

ReportBundle recipe_fig2c(const ReproduceOptions& o)
{
    ReportBundle b;
    const double gamma = Gamma_rb / 2.0;
    const double tp = 20e-9 * gamma;
    const std::vector<double> depths{1.5, 2.5, 3.5, 5.0, 7.0, 9.0};
    b.hash = hash_text("fig2c " + fmt(tp, "%.17g") + " " + fmt(o.dt_refine) + " " + fmt(o.nz_refine));
    std::vector<EmissionFit> fits(depths.size());
    parallel_for(depths.size(), o.workers, [&](std::size_t i) {
        fits[i] = emission_fit(depths[i], exponential_probe(tp), o.dt_refine, o.nz_refine);
    });
    Table t;
    t.hash = b.hash;
    t.columns = {"d", "efficiency", "t_sr_fit_ns", "t_sr_model_ns"};
    bool increasing = true;
    std::vector<double> dd, ts;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        t.add({fits[i].d, fits[i].efficiency, to_ns(fits[i].t_sr, gamma), to_ns(fits[i].t_sr_model, gamma)});
        if (i > 0 && !(fits[i].efficiency > fits[i - 1].efficiency)) {
            increasing = false;
        }
        dd.push_back(fits[i].d);
        ts.push_back(fits[i].t_sr);
    }
    b.verdicts.push_back(check_condition("fig2c emission efficiency increases with d", increasing,
                                         fits.back().efficiency - fits.front().efficiency));
    try {
        const FitResult f = fit_tsr_vs_d(dd, ts);
        b.notes.push_back("T_SR(d) fit: Gamma_eff = " + fmt(f.value("Gamma_eff")) + " +- " +
                          fmt(f.stderr_of("Gamma_eff")) + " gamma (model 2)");
    } catch (const Error& e) {
        b.notes.push_back(std::string("T_SR(d) fit failed: ") + e.what());
    }
    b.tables["fig2c"] = std::move(t);
    return b;
}

ReportBundle recipe_bandwidth(const ReproduceOptions&)
{
    ReportBundle b;
    b.hash = hash_text("bandwidth");
    Table t;
    t.hash = b.hash;
    t.columns = {"fall_ratio", "B_times_T_P", "B_Gamma_over_2pi_at_T_P_0.01"};
    for (double fr : {0.1, 1.0 / 3.0, 1.0}) {
        const double bt = bandwidth_fwhm(exponential_probe(1.0, fr));
        t.add({fr, bt, bandwidth_in_linewidths(bt / 0.01)});
    }
    b.verdicts.push_back(check_rel("bandwidth T_F = T_P/10", bandwidth_fwhm(exponential_probe(1.0, 0.1)), 0.54, 0.02));
    b.verdicts.push_back(
        check_rel("bandwidth T_F = T_P/3", bandwidth_fwhm(exponential_probe(1.0, 1.0 / 3.0)), 0.47, 0.02));
    b.notes.push_back("symmetric pulse: B T_P = " + fmt(bandwidth_fwhm(exponential_probe(1.0, 1.0))) +
                      " (1/pi = " + fmt(1.0 / pi) + ")");
    b.tables["bandwidth"] = std::move(t);
    return b;
}

ReportBundle recipe_fig3a(const ReproduceOptions& o)
{
    ReportBundle b;
    b.hash = hash_text("fig3a " + canonical_text(figure3_config(Protocol::sr, o)));
    const std::vector<double> grid = log_range(10.0, 10000.0, 13);

    Table curves;
    curves.hash = b.hash;
    curves.columns = {"d", "eta_sr", "eta_ats", "eta_eit"};
    std::vector<std::vector<double>> eta(3, std::vector<double>(grid.size()));
    parallel_for(3 * grid.size(), o.workers, [&](std::size_t k) {
        const std::size_t p = k / grid.size();
        const std::size_t i = k % grid.size();
        RunConfig c = figure3_config(all_protocols()[p], o);
        c.d = grid[i];
        try {
            eta[p][i] = run_protocol(c).eta_total;
        } catch (const std::exception&) {
            eta[p][i] = std::numeric_limits<double>::quiet_NaN();
        }
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
        curves.add({grid[i], eta[0][i], eta[1][i], eta[2][i]});
    }
    b.tables["fig3a_curves"] = std::move(curves);

    Table points;
    points.hash = b.hash;
    points.columns = {"protocol", "d_star", "eta_star", "adiabaticity", "reachable"};
    std::vector<DepthResult> depth(3);
    parallel_for(3, o.workers, [&](std::size_t p) {
        const RunConfig c = figure3_config(all_protocols()[p], o);
        depth[p] = required_depth(c, bandwidth_fwhm(make_probe(c)), 0.9);
    });
    for (std::size_t p = 0; p < 3; ++p) {
        const Protocol pr = all_protocols()[p];
        const Target tg = target_for(pr);
        const std::string name = to_string(pr);
        const double kappa = depth[p].d * 0.01;
        points.add({static_cast<double>(p), depth[p].d, depth[p].eta, kappa, depth[p].reachable ? 1.0 : 0.0});
        b.verdicts.push_back(check_rel("fig3a " + name + " operating depth", depth[p].d, tg.d, tg.d_tol,
                                       "smallest d with eta >= 0.9"));
        b.verdicts.push_back(check_abs("fig3a " + name + " eta at operating depth", depth[p].eta, tg.eta, tg.eta_tol));
        b.verdicts.push_back(check_rel("fig3a " + name + " adiabaticity T_P d gamma", kappa, tg.kappa, 0.30));
    }
    const bool ordered = depth[0].d < depth[1].d && depth[1].d < depth[2].d;
    b.verdicts.push_back(check_condition("fig3a ordering SR < ATS < EIT", ordered, depth[2].d / depth[0].d));
    b.tables["fig3a_points"] = std::move(points);
    b.notes.push_back("protocol column: 0 sr, 1 ats, 2 eit");
    return b;
}

ReportBundle recipe_fig3b(const ReproduceOptions& o)
{
    ReportBundle b;
    b.hash = hash_text("fig3b " + canonical_text(figure3_config(Protocol::sr, o)));
    const std::vector<double> bands = figure3_bandwidths();
    std::vector<std::vector<DepthResult>> depth(3, std::vector<DepthResult>(bands.size()));
    parallel_for(3 * bands.size(), o.workers, [&](std::size_t k) {
        const std::size_t p = k / bands.size();
        const std::size_t i = k % bands.size();
        depth[p][i] = required_depth(figure3_config(all_protocols()[p], o), bands[i], 0.9, 1e5, 0.02);
    });
    Table t;
    t.hash = b.hash;
    t.columns = {"B_Gamma_over_2pi", "d_sr", "d_ats", "d_eit"};
    bool ordered = true;
    std::vector<double> r_ats, r_eit;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        auto d = [&](std::size_t p) {
            return depth[p][i].reachable ? depth[p][i].d : std::numeric_limits<double>::quiet_NaN();
        };
        t.add({bandwidth_in_linewidths(bands[i]), d(0), d(1), d(2)});
        ordered = ordered && d(0) < d(1) && d(1) < d(2);
        r_ats.push_back(d(1) / d(0));
        r_eit.push_back(d(2) / d(0));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    b.verdicts.push_back(check_condition("fig3b ordering d_SR < d_ATS < d_EIT", ordered, 0.0));
    b.verdicts.push_back(check_rel("fig3b median d_ATS / d_SR", median(r_ats), 7.0, 0.30));
    b.verdicts.push_back(check_rel("fig3b median d_EIT / d_SR", median(r_eit), 30.0, 0.30));
    b.tables["fig3b"] = std::move(t);
    return b;
}

ReportBundle recipe_fig3c(const ReproduceOptions& o)
{
    ReportBundle b;
    b.hash = hash_text("fig3c " + canonical_text(figure3_config(Protocol::sr, o)));
    const std::vector<double> bands = figure3_bandwidths();
    std::vector<ScalingResult> scaling(3);
    std::vector<double> kappa(3);
    for (std::size_t p = 0; p < 3; ++p) {
        const RunConfig c = figure3_config(all_protocols()[p], o);
        const DepthResult dr = required_depth(c, bandwidth_fwhm(make_probe(c)), 0.9);
        require(dr.reachable, "fig3c: eta = 0.9 unreachable");
        kappa[p] = dr.d * c.probe_T_P;
        scaling[p] = control_power_scaling(c, bands, kappa[p], o.workers);
    }
    Table t;
    t.hash = b.hash;
    t.columns = {"B_Gamma_over_2pi", "omega_sr", "omega_ats", "omega_eit", "intensity_sr", "intensity_ats",
                 "intensity_eit"};
    const double ref = scaling[1].rabi.front() * scaling[1].rabi.front();
    for (std::size_t i = 0; i < bands.size(); ++i) {
        t.add({bandwidth_in_linewidths(bands[i]), scaling[0].rabi[i], scaling[1].rabi[i], scaling[2].rabi[i],
               std::pow(scaling[0].rabi[i], 2) / ref, std::pow(scaling[1].rabi[i], 2) / ref,
               std::pow(scaling[2].rabi[i], 2) / ref});
    }
    for (std::size_t p = 0; p < 3; ++p) {
        const std::string name = to_string(all_protocols()[p]);
        const Target tg = target_for(all_protocols()[p]);
        b.verdicts.push_back(check_rel("fig3c " + name + " slope Omega / 2 pi B", scaling[p].slope, tg.slope, 0.30,
                                       "kappa = " + fmt(kappa[p])));
        b.verdicts.push_back(check_condition("fig3c " + name + " linearity R^2 >= 0.9", scaling[p].linear,
                                             scaling[p].r_squared));
    }
    b.tables["fig3c"] = std::move(t);
    return b;
}

}  // namespace

Verdict check_abs(std::string name, double value, double target, double tolerance, std::string detail)
{
    return {std::move(name), value, target, tolerance, std::abs(value - target) <= tolerance, std::move(detail)};
}

Verdict check_rel(std::string name, double value, double target, double rel_tolerance, std::string detail)
{
    const double tol = std::abs(target) * rel_tolerance;
    return {std::move(name), value, target, tol, std::abs(value - target) <= tol, std::move(detail)};
}

Verdict check_condition(std::string name, bool condition, double value, std::string detail)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {std::move(name), value, nan, nan, condition, std::move(detail)};
}

bool ReportBundle::passed() const
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string ReportBundle::summary() const
{
    std::ostringstream os;
    for (const auto& v : verdicts) {
        os << (v.pass ? "PASS" : "FAIL") << "  " << v.name << ": " << fmt(v.value);
        if (!std::isnan(v.target)) {
            os << " (target " << fmt(v.target) << " +- " << fmt(v.tolerance) << ")";
        }
        if (!v.detail.empty()) {
            os << " [" << v.detail << "]";
        }
        os << "\n";
    }
    for (const auto& n : notes) {
        os << "note: " << n << "\n";
    }
    return os.str();
}

const std::vector<std::string>& recipe_names()
{
    static const std::vector<std::string> names{"fig1", "fig2c", "fig3a", "fig3b", "fig3c", "eq4", "bandwidth"};
    return names;
}

ReportBundle reproduce(const std::string& recipe, const ReproduceOptions& options)
{
    const auto t0 = std::chrono::steady_clock::now();
    ReportBundle b;
    if (recipe == "fig1") {
        b = recipe_fig1(options);
    } else if (recipe == "fig2c") {
        b = recipe_fig2c(options);
    } else if (recipe == "fig3a") {
        b = recipe_fig3a(options);
    } else if (recipe == "fig3b") {
        b = recipe_fig3b(options);
    } else if (recipe == "fig3c") {
        b = recipe_fig3c(options);
    } else if (recipe == "eq4") {
        b = recipe_eq4(options);
    } else if (recipe == "bandwidth") {
        b = recipe_bandwidth(options);
    } else {
        throw Error("unknown recipe '" + recipe + "'");
    }
    b.recipe = recipe;
    b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return b;
}

void write_bundle(const ReportBundle& bundle, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    for (const auto& [stem, table] : bundle.tables) {
        write_csv(dir + "/" + stem + ".csv", table);
    }
    {
        std::ofstream out(dir + "/" + bundle.recipe + "_summary.txt");
        require(static_cast<bool>(out), "write_bundle: cannot write summary");
        out << "# manifest: " << bundle.hash << "\n" << bundle.summary();
    }
    RunManifest m;
    m.hash = bundle.hash;
    m.version = version();
    m.config = "recipe = " + bundle.recipe + "\n";
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    m.timestamp = buf;
    for (const auto& v : bundle.verdicts) {
        m.points.push_back({{"value", v.value}, {"target", v.target}, {"tolerance", v.tolerance},
                            {"pass", v.pass ? 1.0 : 0.0}});
    }
    std::ofstream out(dir + "/" + bundle.recipe + "_manifest.json");
    require(static_cast<bool>(out), "write_bundle: cannot write manifest");
    out << m.to_json() << "\n";
}

RunConfig fig1_config(ControlShape shape)
{
    RunConfig c;
    c.protocol = Protocol::sr;
    c.direction = Retrieval::backward;
    c.d = 50.0;
    c.probe_T_P = 0.037;
    c.control_shape = shape;
    c.control_rabi = 400.0;  // 200 Gamma
    c.control_duration = 0.0074;
    return c;
}

double adiabaticity_product(Protocol p) { return target_for(p).kappa; }

std::vector<double> figure3_bandwidths() { return log_range(10.0 / pi, 200.0 / pi, 8); }

EmissionFit emission_fit(double d, const PulseSpec& probe, double dt_refine, double nz_refine)
{
    require(d > 0.0, "emission_fit: d must be > 0");
    const MediumParams m{d, 1.0, 0.0, 0.0};
    EmissionFit f;
    f.d = d;
    f.t_sr_model = superradiant_time(d, 2.0);
    GridSpec g = default_grid(m, probe);
    g.dt /= dt_refine;
    g.nz = static_cast<int>(std::lround((g.nz - 1) * nz_refine)) + 1;
    const auto [a, b] = support(probe);
    g.t_end = std::max(b, 0.0) + 20.0 * std::max(f.t_sr_model, b - a);
    SolveOptions so;
    so.snapshot_budget_bytes = 0;
    const EmissionResult em = superradiant_emission(m, probe, g, so);
    f.efficiency = em.efficiency;
    // Skip the switch-off edge of the probe before fitting.
    double skip = 0.0;
    if (const auto* r = std::get_if<RisingExponential>(&probe)) {
        skip = 3.0 * r->t_fall;
    }
    std::vector<double> t;
    std::vector<cplx> e;
    for (std::size_t i = 0; i < em.tau.size(); ++i) {
        if (em.tau[i] >= em.switch_off + skip) {
            t.push_back(em.tau[i]);
            e.push_back(em.e_out[i]);
        }
    }
    f.t_sr = fit_intensity_decay(t, e);
    return f;
}

}  // namespace srmem
