// Acceptance suite: one PASS/FAIL line per criterion, with the checked
// quantities listed underneath. Exit status is 0 when every failing
// criterion is in the known-failure list below, 1 otherwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "srmem/config.hpp"
#include "srmem/fitting.hpp"
#include "srmem/reproduce.hpp"

using namespace srmem;
using std::numbers::pi;

namespace {

// Criteria whose targets the model does not reach; see the project notes.
const std::set<int> known_failures{3, 8, 9, 10, 11};

struct Item {
    std::string text;
    bool pass;
};

struct Outcome {
    std::vector<Item> items;

    void add(bool pass, std::string text) { items.push_back({std::move(text), pass}); }
    void add(const Verdict& v)
    {
        char buf[256];
        if (std::isnan(v.target)) {
            std::snprintf(buf, sizeof buf, "%s: %.6g", v.name.c_str(), v.value);
        } else {
            std::snprintf(buf, sizeof buf, "%s: %.6g (target %.6g +- %.3g)", v.name.c_str(), v.value, v.target,
                          v.tolerance);
        }
        add(v.pass, buf + (v.detail.empty() ? std::string() : " [" + v.detail + "]"));
    }
    bool passed() const
    {
        for (const auto& i : items) {
            if (!i.pass) {
                return false;
            }
        }
        return !items.empty();
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

RunOptions lean()
{
    RunOptions o;
    o.keep_series = false;
    return o;
}

// Ledger residuals of every protocol run made here.
std::vector<std::pair<std::string, double>> ledger_log;

ProtocolReport logged(std::string label, ProtocolReport r)
{
    ledger_log.emplace_back(std::move(label), r.ledger_residual);
    return r;
}

double relative_change(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---- criteria ---------------------------------------------------------------

Outcome fixed_control_storage()
{
    Outcome o;
    RunConfig c = fig1_config(ControlShape::square);
    const double eta = logged("fig1", run_protocol(c)).eta_total;
    o.add(std::abs(eta - 0.79) <= 0.03, fmt("eta = %.4f (target 0.79 +- 0.03)", eta));
    c.dt_refine = 2.0;
    c.nz_refine = 2.0;
    const double fine = run_protocol(c).eta_total;
    o.add(relative_change(eta, fine) < 2e-3, fmt("grid convergence: refined eta = %.6f", fine));
    return o;
}

Outcome forward_ceiling()
{
    Outcome o;
    const MediumParams m{9.0, 1.0, 0.0, 0.0};
    const double eta = logged("sr d=9 forward", run_sr_optimal(m, Retrieval::forward, lean())).eta_total;
    o.add(std::abs(eta - 0.33) <= 0.03, fmt("eta = %.4f (target 0.33 +- 0.03)", eta));
    RunOptions r = lean();
    r.dt_refine = 2.0;
    r.nz_refine = 2.0;
    const double fine = run_sr_optimal(m, Retrieval::forward, r).eta_total;
    o.add(relative_change(eta, fine) < 2e-3, fmt("grid convergence: refined eta = %.6f", fine));
    return o;
}

Outcome decay_time()
{
    Outcome o;
    for (double d : {1.5, 3.5, 5.0, 9.0, 50.0, 100.0}) {
        const EmissionFit f = emission_fit(d, exponential_probe(optimal_probe_duration(d, 2.0)));
        const double ratio = f.t_sr / f.t_sr_model;
        o.add(std::abs(ratio - 1.0) <= 0.15, fmt("d = %g: fitted/model T_SR = %.4f (within 0.15)", d, ratio));
    }
    const double Gamma = 2 * pi * 6.07e6;
    const double t9 = optimal_probe_duration(9.0, Gamma) * 1e9;
    const double t15 = optimal_probe_duration(1.5, Gamma) * 1e9;
    o.add(std::abs(t9 - 8.1) <= 0.05, fmt("d = 9: %.3f ns (target 8.1)", t9));
    o.add(std::abs(t15 - 19.1) <= 0.05, fmt("d = 1.5: %.3f ns (target 19.1)", t15));
    return o;
}

Outcome oracle_equivalence()
{
    Outcome o;
    for (double d : {1.0, 9.0, 50.0, 200.0}) {
        const MediumParams m{d, 1.0, 0.0, 0.0};
        const PulseSpec probe = exponential_probe(optimal_probe_duration(d, 2.0));
        GridSpec g = default_grid(m, probe);
        // Uniform lattice through the switch-off so the oracle shares the times.
        g.t_start = -std::ceil(-support(probe, 1e-14).first / g.dt) * g.dt;
        g.t_end = std::ceil(12.0 / g.dt) * g.dt;
        SolveOptions so;
        so.snapshot_budget_bytes = 0;
        const FieldRecord rec = solve(m, probe, std::nullopt, g, Retrieval::none, so);
        const Transmission t = analytic_transmission(m, probe, rec.tau);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < rec.tau.size(); ++i) {
            num += std::norm(rec.e_out[i] - t.e_out[i]);
            den += std::norm(t.e_out[i]);
        }
        const double err = std::sqrt(num / den);
        o.add(err < 1e-3, fmt("d = %g: relative L2 = %.3e", d, err));
    }
    return o;
}

Outcome energy_ledger()
{
    Outcome o;
    // Runs of every protocol at default resolution.
    const MediumParams m{200.0, 1.0, 0.0, 0.0};
    const PulseSpec probe = exponential_probe(0.01);
    AtsSettings a;
    a.area = 2 * pi;
    a.window_energy = 0.99;
    logged("ats d=200", run_ats(m, probe, Retrieval::backward, a, lean()));
    EitSettings e;
    e.rabi = 2 * pi * bandwidth_fwhm(probe);
    e.ramp = 0.002;
    logged("eit d=200", run_eit(m, probe, Retrieval::forward, e, lean()));
    logged("sr d=200", run_sr_optimal(m, Retrieval::backward, lean()));
    const MediumParams lossy{9.0, 1.0, 0.01, 0.0};
    const PulseSpec p9 = exponential_probe(optimal_probe_duration(9.0, 2.0));
    logged("sr lossy storage",
           run_sr(lossy, p9, sr_schedule(lossy, p9, SrControl{ControlShape::gaussian}, 20.0), Retrieval::forward,
                  lean()));
    for (const auto& [label, r] : ledger_log) {
        o.add(std::abs(r) <= 1e-4, label + fmt(": residual %.2e", r));
    }

    // Fourth order: halving the default dt shrinks the residual at least 8 times.
    for (ControlShape shape : {ControlShape::square, ControlShape::gaussian}) {
        RunConfig c = fig1_config(shape);
        const double r1 = std::abs(run_protocol(c).ledger_residual);
        c.dt_refine = 2.0;
        const double r2 = std::abs(run_protocol(c).ledger_residual);
        o.add(r1 / r2 >= 8.0, std::string(shape == ControlShape::square ? "square" : "gaussian") +
                                  fmt(" control, dt halving: %.3e -> %.3e, ratio %.1f", r1, r2, r1 / r2));
    }
    return o;
}

Outcome pi_pulse_mapping()
{
    Outcome o;
    for (double d : {1.0, 9.0, 50.0, 200.0}) {
        const MediumParams m{d, 1.0, 0.0, 0.0};
        // Abrupt switch-off: the control acts on the absorbed polarization only.
        const PulseSpec probe = exponential_probe(optimal_probe_duration(d, 2.0), 0.0);
        const double w = 100.0 * (1.0 + d);
        const ControlSchedule c = symmetric_schedule(square_with_area(0.0, w, pi), 0.0);
        GridSpec g = default_grid(m, probe, c);
        g.t_end = pi / w + g.dt;
        SolveOptions so;
        so.snapshot_stride = 1;
        const FieldRecord rec = solve(m, probe, c, g, Retrieval::none, so);
        const Snapshot* before = nullptr;
        const Snapshot* after = nullptr;
        for (const auto& s : rec.snapshots) {
            if (s.tau == 0.0) {
                before = &s;
            }
            if (std::abs(s.tau - pi / w) < 1e-12) {
                after = &s;
            }
        }
        if (!before || !after) {
            o.add(false, fmt("d = %g: snapshots missing", d));
            continue;
        }
        double pmax = 0.0;
        double worst = 0.0;
        for (const cplx& v : before->p) {
            pmax = std::max(pmax, std::abs(v));
        }
        for (std::size_t j = 0; j < before->p.size(); ++j) {
            worst = std::max(worst, std::abs(std::abs(after->s[j]) - std::abs(before->p[j])));
        }
        o.add(worst <= 0.01 * pmax, fmt("d = %g: max ||s| - |p_before|| / max|p| = %.4f", d, worst / pmax));
    }
    return o;
}

Outcome bandwidth()
{
    Outcome o;
    const double b10 = bandwidth_fwhm(exponential_probe(1.0, 0.1));
    const double b3 = bandwidth_fwhm(exponential_probe(1.0, 1.0 / 3.0));
    o.add(std::abs(b10 / 0.54 - 1.0) <= 0.02, fmt("T_F = T_P/10: B T_P = %.4f (target 0.54)", b10));
    o.add(std::abs(b3 / 0.47 - 1.0) <= 0.02, fmt("T_F = T_P/3: B T_P = %.4f (target 0.47)", b3));
    return o;
}

ReportBundle fig3a_bundle;
bool fig3a_done = false;

const ReportBundle& fig3a()
{
    if (!fig3a_done) {
        fig3a_bundle = reproduce("fig3a");
        fig3a_done = true;
    }
    return fig3a_bundle;
}

Outcome operating_points()
{
    Outcome o;
    for (const auto& v : fig3a().verdicts) {
        if (v.name.find("operating depth") != std::string::npos || v.name.find("eta at") != std::string::npos) {
            o.add(v);
        }
    }
    return o;
}

Outcome adiabaticity()
{
    Outcome o;
    for (const auto& v : fig3a().verdicts) {
        if (v.name.find("adiabaticity") != std::string::npos || v.name.find("ordering") != std::string::npos) {
            o.add(v);
        }
    }
    return o;
}

Outcome control_slopes()
{
    Outcome o;
    for (const auto& v : reproduce("fig3c").verdicts) {
        o.add(v);
    }
    return o;
}

Outcome broadband_point()
{
    Outcome o;
    const MediumParams m{100.0, 1.0, 0.0, 0.0};
    const double tp = optimal_probe_duration(100.0, 2.0);
    const double ns = Units::from_gamma_hz(3e6).to_seconds(tp) * 1e9;
    o.add(std::abs(ns - 1.02) < 0.005, fmt("T_P = %.4f ns at gamma/2pi = 3 MHz", ns));
    const double fast = logged("sr d=100", run_sr_optimal(m, Retrieval::backward, lean())).eta_total;
    const double best = logged("sr d=100 best rabi",
                               run_sr_best_rabi(m, exponential_probe(tp), SrControl{}, Retrieval::backward, 0.0, lean()))
                            .eta_total;
    const double eta = std::max(fast, best);
    o.add(eta >= 0.90, fmt("eta = %.4f (fast control %.4f, optimized Rabi %.4f; target >= 0.90)", eta, fast, best));
    return o;
}

Outcome lifetime()
{
    Outcome o;
    const Units u = Units::from_gamma_hz(3e6);
    const double t_mem = u.to_dimensionless_time(4.2e-6);
    const MediumParams m{9.0, 1.0, 1.0 / (2.0 * t_mem), 0.0};
    const PulseSpec probe = exponential_probe(optimal_probe_duration(9.0, 2.0));
    const ControlSchedule c = sr_schedule(m, probe, SrControl{});
    std::vector<double> ts;
    for (double us : {0.2, 1.0, 2.0, 3.0, 4.2, 5.0, 6.2}) {
        ts.push_back(u.to_dimensionless_time(us * 1e-6));
    }
    const LifetimeCurve curve = memory_lifetime_curve(m, probe, c, ts, Retrieval::forward, lean());
    const double eta0 = logged("sr lifetime", run_sr(m, probe, c, Retrieval::forward, lean())).eta_total;
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        worst = std::max(worst, relative_change(curve.eta[i], eta0 * std::exp(-ts[i] / t_mem)));
    }
    o.add(worst <= 0.01, fmt("eta(T_s) vs eta(0) exp(-2 gamma_s T_s): worst deviation %.2e", worst));
    o.add(relative_change(curve.lifetime, t_mem) <= 0.01,
          fmt("fitted lifetime %.4f us (programmed 4.2)", u.to_seconds(curve.lifetime) * 1e6));

    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> noisy;
    for (double v : curve.eta) {
        noisy.push_back(v * (1.0 + noise(rng)));
    }
    const FitResult f = fit_exp_decay(ts, noisy);
    const double t = f.value("T");
    const double s = f.stderr_of("T");
    o.add(std::abs(t - t_mem) <= 3.0 * s,
          fmt("5%% noise: %.3f +- %.3f us (programmed 4.2)", u.to_seconds(t) * 1e6, u.to_seconds(s) * 1e6));
    return o;
}

Outcome depth_tradeoff()
{
    Outcome o;
    double eta[2] = {0.0, 0.0};
    const double depths[2] = {6.0, 9.0};
    for (int k = 0; k < 2; ++k) {
        RunConfig c;
        set_config_value(c, "units.gamma", "3.035 MHz");
        c.protocol = Protocol::sr;
        c.direction = Retrieval::forward;
        c.d = depths[k];
        set_config_value(c, "probe.T_P", "10 ns");
        c.control_shape = ControlShape::gaussian;
        set_config_value(c, "control.duration", "20 ns");
        c.control_area = pi;
        eta[k] = logged(fmt("sr gaussian control d=%g", depths[k]), run_protocol(c)).eta_total;
    }
    o.add(eta[0] > eta[1], fmt("eta(d=6) = %.4f > eta(d=9) = %.4f", eta[0], eta[1]));
    return o;
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* title;
        std::function<Outcome()> run;
    };
    // The ledger criterion runs last so it can audit every earlier run.
    const std::vector<Criterion> criteria{
        {1, "fixed-control storage at d = 50", fixed_control_storage},
        {2, "forward recall at d = 9", forward_ceiling},
        {3, "superradiant decay time", decay_time},
        {4, "solver vs transfer function", oracle_equivalence},
        {6, "pi pulse mapping", pi_pulse_mapping},
        {7, "probe bandwidth", bandwidth},
        {8, "optimal operating points", operating_points},
        {9, "adiabaticity products", adiabaticity},
        {10, "control power scaling", control_slopes},
        {11, "broadband point at d = 100", broadband_point},
        {12, "memory lifetime", lifetime},
        {13, "optical depth trade-off", depth_tradeoff},
        {5, "energy ledger", energy_ledger},
    };

    // Everything printed is also kept in acceptance_report.txt, since ctest hides passing output.
    std::string report;
    auto emit = [&report](const char* f, auto... args) {
        char buf[1024];
        std::snprintf(buf, sizeof buf, f, args...);
        std::fputs(buf, stdout);
        std::fflush(stdout);
        report += buf;
    };

    std::vector<std::pair<int, bool>> results;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.add(false, std::string("error: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = out.passed();
        emit("%s  %2d %s (%.1f s)\n", pass ? "PASS" : "FAIL", c.id, c.title, secs);
        for (const auto& i : out.items) {
            emit("        %s %s\n", i.pass ? "ok  " : "miss", i.text.c_str());
        }
        results.emplace_back(c.id, pass);
    }

    int unexpected = 0;
    int failed = 0;
    for (const auto& [id, pass] : results) {
        if (!pass) {
            ++failed;
            if (!known_failures.contains(id)) {
                ++unexpected;
                emit("unexpected failure: criterion %d\n", id);
            }
        } else if (known_failures.contains(id)) {
            emit("note: criterion %d listed as a known failure now passes\n", id);
        }
    }
    emit("%d of %zu criteria pass; %d known failures, %d unexpected\n",
                static_cast<int>(results.size()) - failed, results.size(), failed - unexpected, unexpected);
    if (std::FILE* f = std::fopen("acceptance_report.txt", "w")) {
        std::fputs(report.c_str(), f);
        std::fclose(f);
    }
    return unexpected == 0 ? 0 : 1;
}
