#include "srmem/protocols.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "srmem/fitting.hpp"
#include "srmem/optimize.hpp"

namespace srmem {

namespace {

constexpr double pi = std::numbers::pi;

GridSpec grid_for(const MediumParams& medium, const PulseSpec& probe, const ControlSchedule& schedule,
                  const RunOptions& options)
{
    GridSpec g = options.grid ? *options.grid : default_grid(medium, probe, schedule);
    require(options.dt_refine > 0.0 && options.nz_refine > 0.0, "RunOptions: refinement factors must be > 0");
    g.dt /= options.dt_refine;
    g.nz = std::max(2, static_cast<int>(std::lround((g.nz - 1) * options.nz_refine)) + 1);
    return g;
}

ProtocolReport run_schedule(Protocol protocol, const MediumParams& medium, const PulseSpec& probe,
                            const ControlSchedule& schedule, Retrieval direction, const RunOptions& options)
{
    require(direction != Retrieval::none, "protocol runs need forward or backward retrieval");
    const GridSpec grid = grid_for(medium, probe, schedule, options);
    SolveOptions so = options.solve;
    so.snapshot_budget_bytes = 0;
    so.snapshot_stride = 0;
    const FieldRecord rec = solve(medium, probe, schedule, grid, direction, so);
    ProtocolReport r = make_report(protocol, medium, probe, schedule, rec, options.keep_series);
    r.params["nz"] = grid.nz;
    r.params["dt"] = grid.dt;
    return r;
}

RunOptions search_options(const RunOptions& options)
{
    RunOptions o = options;
    o.keep_series = false;
    require(options.search_coarsening >= 1.0, "RunOptions: search_coarsening must be >= 1");
    o.dt_refine /= options.search_coarsening;
    o.nz_refine /= std::sqrt(options.search_coarsening);
    return o;
}

}  // namespace

double fit_intensity_decay(std::span<const double> tau, std::span<const cplx> e, double floor)
{
    require(floor > 0.0 && floor < 1.0, "fit_intensity_decay: floor must be in (0, 1)");
    if (tau.size() < 5) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<double> inten(e.size());
    std::transform(e.begin(), e.end(), inten.begin(), [](cplx v) { return std::norm(v); });
    const auto ipk = static_cast<std::size_t>(std::max_element(inten.begin(), inten.end()) - inten.begin());
    const double peak = inten[ipk];
    if (!(peak > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::size_t end = ipk;
    while (end + 1 < inten.size() && inten[end + 1] > floor * peak) {
        ++end;
    }
    if (end - ipk + 1 < 5) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    try {
        const std::span<const double> t(tau.data() + ipk, end - ipk + 1);
        const std::span<const double> y(inten.data() + ipk, end - ipk + 1);
        return fit_exp_decay(t, y).value("T");
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

const char* to_string(Protocol p)
{
    switch (p) {
    case Protocol::sr:
        return "SR";
    case Protocol::ats:
        return "ATS";
    case Protocol::eit:
        return "EIT";
    }
    return "SR";
}

Protocol protocol_from_string(const std::string& s)
{
    std::string u = s;
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (u == "sr") {
        return Protocol::sr;
    }
    if (u == "ats") {
        return Protocol::ats;
    }
    if (u == "eit") {
        return Protocol::eit;
    }
    throw Error("unknown protocol '" + s + "'");
}

std::string to_json(const ProtocolReport& report, bool include_series, int indent)
{
    nlohmann::ordered_json j;
    j["protocol"] = to_string(report.protocol);
    j["direction"] = to_string(report.direction);
    j["eta_total"] = report.eta_total;
    j["losses"] = {
        {"transmission", report.eta_transmission_loss},
        {"sr_leakage", report.eta_sr_leakage},
        {"decoherence", report.eta_decoherence_loss},
        {"residual_polariton", report.residual_polariton},
        {"ledger_residual", report.ledger_residual},
    };
    j["t_sr_fit"] = std::isfinite(report.t_sr_fit) ? nlohmann::ordered_json(report.t_sr_fit) : nullptr;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.params) {
        params[k] = v;
    }
    j["params"] = params;
    j["warnings"] = report.warnings;
    if (include_series) {
        std::vector<double> re, im;
        for (const cplx& v : report.retrieved_pulse) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        j["series"] = {{"tau", report.retrieved_tau}, {"re_e_out", re}, {"im_e_out", im}};
    }
    return j.dump(indent);
}

double absorption_end(const PulseSpec& probe)
{
    if (const auto* r = std::get_if<RisingExponential>(&probe)) {
        return r->t_off;
    }
    if (const auto* g = std::get_if<Gaussian>(&probe)) {
        return g->t_center + g->fwhm;
    }
    if (const auto* s = std::get_if<Square>(&probe)) {
        return s->t_off;
    }
    return std::get<Samples>(probe).t.back();
}

double probe_duration(const PulseSpec& probe)
{
    if (const auto* r = std::get_if<RisingExponential>(&probe)) {
        return r->t_rise;
    }
    return intensity_fwhm(probe);
}

PulseSpec exponential_probe(double t_rise, double fall_ratio)
{
    require(t_rise > 0.0 && fall_ratio >= 0.0, "exponential_probe: need t_rise > 0 and fall_ratio >= 0");
    return RisingExponential{t_rise, fall_ratio * t_rise, 0.0, 1.0};
}

ProtocolReport make_report(Protocol protocol, const MediumParams& medium, const PulseSpec& probe,
                           const ControlSchedule& schedule, const FieldRecord& rec, bool keep_series)
{
    require(rec.phases.size() == 2, "make_report: record has no retrieval phase");
    const double input = rec.ledger.input;
    require(input > 0.0, "make_report: zero input energy");
    ProtocolReport r;
    r.protocol = protocol;
    r.direction = rec.retrieval;

    const double split = std::max(rec.write_onset, absorption_end(probe));
    const double before = rec.transmitted_between(rec.tau.front(), std::min(split, rec.write_end));
    r.eta_total = rec.phases[1].transmitted / input;
    r.eta_transmission_loss = before / input;
    r.eta_sr_leakage = (rec.phases[0].transmitted - before + rec.ledger.discarded) / input;
    r.eta_decoherence_loss = rec.ledger.dissipated / input;
    r.residual_polariton = rec.ledger.polariton / input;
    r.ledger_residual = energy_audit(rec);

    const Phase& ph = rec.phases[1];
    std::vector<double> tau;
    std::vector<cplx> e;
    for (std::size_t i = ph.first; i <= ph.last; ++i) {
        tau.push_back(rec.tau[i] - rec.read_start);
        e.push_back(rec.e_out[i]);
    }
    r.t_sr_fit = fit_intensity_decay(tau, e);
    if (keep_series) {
        r.retrieved_tau = std::move(tau);
        r.retrieved_pulse = std::move(e);
    }

    r.params["d"] = medium.d;
    r.params["spin_decay"] = medium.spin_decay();
    r.params["T_P"] = probe_duration(probe);
    if (const auto* re = std::get_if<RisingExponential>(&probe)) {
        r.params["T_F"] = re->t_fall;
    }
    r.params["write_area"] = schedule.write_area();
    r.params["read_area"] = schedule.read_area();
    r.params["peak_rabi"] = schedule.peak_rabi();
    r.params["storage_time"] = schedule.storage_time;
    r.params["write_onset"] = rec.write_onset;
    r.params["write_end"] = rec.write_end;
    r.params["storage_factor"] = rec.spin_stored > 0.0 ? (rec.spin_stored - rec.storage_decay) / rec.spin_stored : 1.0;
    return r;
}

// ---- SR -------------------------------------------------------------------

ControlSchedule sr_schedule(const MediumParams& medium, const PulseSpec& probe, const SrControl& control,
                            double storage_time)
{
    medium.validate();
    require(control.area >= 0.0 && std::isfinite(control.area), "sr_schedule: area must be >= 0");
    double rabi = control.rabi;
    if (std::isnan(rabi)) {
        rabi = fast_control_requirement(medium.d, 1.0, control.shape).rabi;
    }
    require(rabi > 0.0 && std::isfinite(rabi), "sr_schedule: Rabi frequency must be > 0");
    const double onset = absorption_end(probe) + control.write_delay;
    PulseSpec write;
    if (control.area == 0.0) {
        write = Square{onset, onset, 0.0};
    } else if (control.shape == ControlShape::square) {
        write = square_with_area(onset, rabi, control.area);
    } else {
        // Gaussian centred one amplitude FWHM after the onset.
        const double fwhm = control.area / (rabi * gaussian_area_factor());
        write = Gaussian{fwhm, onset + fwhm, rabi};
    }
    ControlSchedule c;
    c.write = write;
    c.read = shifted(write, -std::min(support(write).first, onset));
    c.storage_time = storage_time;
    c.rabi_scale = 1.0;
    return c;
}

ProtocolReport run_sr(const MediumParams& medium, const PulseSpec& probe, const ControlSchedule& schedule,
                      Retrieval direction, const RunOptions& options)
{
    std::vector<std::string> warnings;
    const double area = schedule.write_area();
    if (std::abs(area - pi) > 0.5 * pi) {
        std::ostringstream os;
        os << "write area " << area << " deviates from pi by more than 50%";
        warnings.push_back(os.str());
    }
    const double tp = probe_duration(probe);
    if (tp >= 1.0) {
        warnings.push_back("probe is not broadband: T_P >= 1/gamma");
    }
    const double t_sr = superradiant_time(medium.d, 2.0);
    const auto [w0, w1] = schedule.write_window();
    const double t_c = std::holds_alternative<Gaussian>(schedule.write) ? std::get<Gaussian>(schedule.write).fwhm
                                                                        : w1 - w0;
    if (t_c > t_sr) {
        warnings.push_back("control is slower than the superradiant decay time");
    }
    ProtocolReport r = run_schedule(Protocol::sr, medium, probe, schedule, direction, options);
    r.warnings.insert(r.warnings.end(), warnings.begin(), warnings.end());
    r.params["T_SR"] = t_sr;
    return r;
}

ProtocolReport run_sr_best_rabi(const MediumParams& medium, const PulseSpec& probe, const SrControl& control,
                                Retrieval direction, double storage_time, const RunOptions& options)
{
    const RunOptions search = search_options(options);
    int evaluations = 0;
    auto eval = [&](double rabi, const RunOptions& o) {
        ++evaluations;
        SrControl c = control;
        c.rabi = rabi;
        return run_sr(medium, probe, sr_schedule(medium, probe, c, storage_time), direction, o);
    };
    const double w0 = 2.0 * pi * bandwidth_fwhm(probe);
    ScalarOptions so;
    so.log_scale = true;
    so.rel_tol = 2e-3;
    so.scan_points = 17;
    const ScalarOptimum o =
        optimize_scalar([&](double rabi) { return eval(rabi, search).eta_total; }, w0, 20.0 * w0, so);
    ProtocolReport r = eval(o.x, options);
    if (!o.unimodal) {
        r.warnings.push_back("Rabi search: " + o.note);
    }
    r.params["rabi"] = o.x;
    r.params["optimizer_evaluations"] = evaluations;
    return r;
}

ProtocolReport run_sr_optimal(const MediumParams& medium, Retrieval direction, const RunOptions& options)
{
    const PulseSpec probe = exponential_probe(optimal_probe_duration(medium.d, 2.0));
    const ControlSchedule sched = sr_schedule(medium, probe, SrControl{});
    return run_sr(medium, probe, sched, direction, options);
}

// ---- ATS ------------------------------------------------------------------

std::pair<double, double> energy_window(const PulseSpec& probe, double fraction)
{
    require(fraction > 0.0 && fraction < 1.0, "energy_window: fraction must be in (0, 1)");
    const auto [a, b] = support(probe, 1e-12);
    const std::size_t n = 20001;
    std::vector<double> t(n), cum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    std::vector<double> inten(n);
    for (std::size_t i = 0; i < n; ++i) {
        inten[i] = std::norm(amplitude(probe, t[i]));
    }
    for (std::size_t i = 1; i < n; ++i) {
        cum[i] = cum[i - 1] + 0.5 * (inten[i] + inten[i - 1]) * (t[i] - t[i - 1]);
    }
    const double target = fraction * cum.back();
    std::pair<double, double> best{a, b};
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (j < n && cum[j] - cum[i] < target) {
            ++j;
        }
        if (j == n) {
            break;
        }
        if (t[j] - t[i] < best.second - best.first) {
            best = {t[i], t[j]};
        }
    }
    return best;
}

ControlSchedule ats_schedule(const PulseSpec& probe, double rabi, std::pair<double, double> window,
                             double storage_time)
{
    validate(probe);
    require(rabi >= 0.0 && std::isfinite(rabi), "ats_schedule: Rabi frequency must be >= 0");
    require(window.second > window.first, "ats_schedule: empty control window");
    ControlSchedule c;
    c.write = Square{window.first, window.second, rabi};
    c.read = Square{0.0, window.second - window.first, rabi};
    c.storage_time = storage_time;
    c.rabi_scale = 1.0;
    return c;
}

ProtocolReport run_ats(const MediumParams& medium, const PulseSpec& probe, Retrieval direction,
                       const AtsSettings& settings, const RunOptions& options)
{
    const RunOptions search = search_options(options);
    std::vector<std::string> notes;
    int evaluations = 0;
    auto eval = [&](double fraction, double area, const RunOptions& o) {
        ++evaluations;
        const auto window = energy_window(probe, fraction);
        const double rabi = area / (window.second - window.first);
        return run_schedule(Protocol::ats, medium, probe, ats_schedule(probe, rabi, window, settings.storage_time),
                            direction, o);
    };
    auto best_area = [&](double fraction, double* eta) {
        if (!std::isnan(settings.area)) {
            *eta = eval(fraction, settings.area, search).eta_total;
            return settings.area;
        }
        ScalarOptions so;
        so.log_scale = true;
        so.rel_tol = 2e-3;
        so.scan_points = 13;
        const ScalarOptimum o = optimize_scalar(
            [&](double area) { return eval(fraction, area, search).eta_total; }, 0.5 * pi, 8.0 * pi, so);
        if (!o.unimodal) {
            notes.push_back("area search: " + o.note);
        }
        *eta = o.f;
        return o.x;
    };

    double fraction = settings.window_energy;
    double area = settings.area;
    if (std::isnan(fraction)) {
        ScalarOptions so;
        so.log_scale = true;
        so.rel_tol = 5e-2;
        so.scan_points = 7;
        const ScalarOptimum o = optimize_scalar(
            [&](double tail) {
                double eta = 0.0;
                best_area(1.0 - tail, &eta);
                return eta;
            },
            1e-3, 1e-1, so);
        fraction = 1.0 - o.x;
        if (!o.unimodal) {
            notes.push_back("window search: " + o.note);
        }
    }
    require(fraction > 0.0 && fraction < 1.0, "run_ats: window_energy must be in (0, 1)");
    if (std::isnan(area)) {
        double eta = 0.0;
        area = best_area(fraction, &eta);
    }
    ProtocolReport r = eval(fraction, area, options);
    r.warnings.insert(r.warnings.end(), notes.begin(), notes.end());
    if (2.0 * pi * bandwidth_fwhm(probe) <= 2.0) {
        r.warnings.push_back("probe is not broadband: 2 pi B <= Gamma");
    }
    const auto window = energy_window(probe, fraction);
    r.params["window"] = window.second - window.first;
    r.params["window_energy"] = fraction;
    r.params["rabi"] = area / (window.second - window.first);
    r.params["optimizer_evaluations"] = evaluations;
    return r;
}

// ---- EIT ------------------------------------------------------------------

ControlSchedule eit_schedule(const PulseSpec& probe, double rabi, double ramp, double storage_time)
{
    validate(probe);
    require(rabi >= 0.0 && std::isfinite(rabi), "eit_schedule: Rabi frequency must be >= 0");
    require(ramp > 0.0 && std::isfinite(ramp), "eit_schedule: ramp must be > 0");
    const double start = support(probe, 1e-7).first;
    const double off = absorption_end(probe);
    require(off > start, "eit_schedule: probe has no extent");
    const int nr = 64;
    Samples w;
    w.t.push_back(start);
    w.amp.push_back(rabi);
    for (int i = 0; i <= nr; ++i) {
        const double x = static_cast<double>(i) / nr;
        w.t.push_back(off + ramp * x);
        w.amp.push_back(rabi * 0.5 * (1.0 + std::cos(pi * x)));
    }
    // Read: ramp on over `ramp`, hold for as long as the write held.
    const double hold = off - start;
    Samples rd;
    for (int i = 0; i <= nr; ++i) {
        const double x = static_cast<double>(i) / nr;
        rd.t.push_back(ramp * x);
        rd.amp.push_back(rabi * 0.5 * (1.0 - std::cos(pi * x)));
    }
    rd.t.push_back(ramp + hold);
    rd.amp.push_back(rabi);
    ControlSchedule c;
    c.write = w;
    c.read = rd;
    c.storage_time = storage_time;
    c.rabi_scale = 1.0;
    return c;
}

ProtocolReport run_eit(const MediumParams& medium, const PulseSpec& probe, Retrieval direction,
                       const EitSettings& settings, const RunOptions& options)
{
    const double ramp_max = std::min(probe_duration(probe), 5.0);
    const RunOptions search = search_options(options);
    std::vector<std::string> notes;
    int evaluations = 0;

    auto eval = [&](double rabi, double ramp, const RunOptions& o) {
        ++evaluations;
        return run_schedule(Protocol::eit, medium, probe, eit_schedule(probe, rabi, ramp, settings.storage_time),
                            direction, o);
    };
    auto best_ramp = [&](double rabi, double* eta) {
        if (!std::isnan(settings.ramp)) {
            *eta = eval(rabi, settings.ramp, search).eta_total;
            return settings.ramp;
        }
        ScalarOptions so;
        so.rel_tol = 2e-2;
        so.log_scale = true;
        so.scan_points = 9;
        const ScalarOptimum o = optimize_scalar([&](double ramp) { return eval(rabi, ramp, search).eta_total; },
                                                ramp_max / 50.0, ramp_max, so);
        *eta = o.f;
        return o.x;
    };

    double rabi = settings.rabi;
    double ramp = settings.ramp;
    if (std::isnan(rabi)) {
        const double w0 = 2.0 * pi * bandwidth_fwhm(probe);
        ScalarOptions so;
        so.rel_tol = 5e-3;
        so.log_scale = true;
        so.scan_points = 13;
        const ScalarOptimum o = optimize_scalar(
            [&](double w) {
                double eta = 0.0;
                best_ramp(w, &eta);
                return eta;
            },
            w0 / 4.0, 4.0 * w0, so);
        rabi = o.x;
        if (!o.unimodal) {
            notes.push_back("Rabi search: " + o.note);
        }
    }
    if (std::isnan(ramp)) {
        double eta = 0.0;
        ramp = best_ramp(rabi, &eta);
    }
    ProtocolReport r = eval(rabi, ramp, options);
    r.warnings.insert(r.warnings.end(), notes.begin(), notes.end());
    r.params["rabi"] = rabi;
    r.params["ramp"] = ramp;
    r.params["optimizer_evaluations"] = evaluations;
    return r;
}

// ---- analysis -------------------------------------------------------------

LifetimeCurve memory_lifetime_curve(const MediumParams& medium, const PulseSpec& probe,
                                    const ControlSchedule& schedule, std::span<const double> storage_times,
                                    Retrieval direction, const RunOptions& options)
{
    require(storage_times.size() >= 5, "memory_lifetime_curve: need at least 5 storage times");
    LifetimeCurve c;
    const double inf = std::numeric_limits<double>::infinity();
    c.model_lifetime = medium.spin_decay() > 0.0 ? 1.0 / (2.0 * medium.spin_decay()) : inf;
    RunOptions quiet = options;
    quiet.keep_series = false;
    for (double ts : storage_times) {
        require(std::isfinite(ts) && ts >= 0.0, "memory_lifetime_curve: storage times must be >= 0");
        if (2.0 * medium.spin_decay() * ts > std::log(1e12)) {
            std::ostringstream os;
            os << "memory_lifetime_curve: storage time " << ts << " is beyond the decay horizon "
               << std::log(1e12) * c.model_lifetime;
            throw Error(os.str());
        }
        ControlSchedule s = schedule;
        s.storage_time = ts;
        c.storage_times.push_back(ts);
        c.eta.push_back(run_schedule(Protocol::sr, medium, probe, s, direction, quiet).eta_total);
    }
    if (medium.spin_decay() == 0.0) {
        // No spin decay: the curve is flat.
        c.eta0 = c.eta.front();
        c.lifetime = inf;
        return c;
    }
    const FitResult fit = fit_exp_decay(c.storage_times, c.eta);
    c.lifetime = fit.value("T");
    c.lifetime_stderr = fit.stderr_of("T");
    c.eta0 = fit.value("amplitude");
    return c;
}

double adiabaticity_parameter(const ProtocolReport& report)
{
    const auto d = report.params.find("d");
    const auto tp = report.params.find("T_P");
    require(d != report.params.end() && tp != report.params.end(), "adiabaticity_parameter: report lacks d or T_P");
    return d->second * tp->second;
}

}  // namespace srmem
