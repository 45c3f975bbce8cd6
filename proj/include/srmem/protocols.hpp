#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srmem/control.hpp"
#include "srmem/model.hpp"
#include "srmem/oracles.hpp"
#include "srmem/pulse.hpp"
#include "srmem/solver.hpp"

namespace srmem {

enum class Protocol { sr, ats, eit };

const char* to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

/// Efficiency and loss accounting of one storage-and-retrieval run. All
/// fractions are relative to the input energy:
///   transmission  output before max(write onset, end of the probe)
///   sr_leakage    remaining first-phase output plus the polarization left
///                 when the write pulse ends
///   decoherence   optical dissipation plus spin decay during storage
///   residual      spin wave still in the medium after retrieval
struct ProtocolReport {
    Protocol protocol = Protocol::sr;
    Retrieval direction = Retrieval::backward;
    double eta_total = 0.0;
    double eta_transmission_loss = 0.0;
    double eta_sr_leakage = 0.0;
    double eta_decoherence_loss = 0.0;
    double residual_polariton = 0.0;
    double ledger_residual = 0.0;
    /// fit_intensity_decay of the retrieved pulse.
    double t_sr_fit = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> retrieved_tau;
    std::vector<cplx> retrieved_pulse;
    std::map<std::string, double> params;
    std::vector<std::string> warnings;

    /// eta_total plus all loss fractions; 1 up to the ledger residual.
    double accounted() const
    {
        return eta_total + eta_transmission_loss + eta_sr_leakage + eta_decoherence_loss + residual_polariton;
    }
};

/// JSON tree with keys protocol, direction, eta_total, losses{}, params{},
/// warnings[] and, when include_series, series{tau, re, im}.
std::string to_json(const ProtocolReport& report, bool include_series = true, int indent = 2);

struct RunOptions {
    /// Defaults to default_grid() for the probe and schedule.
    std::optional<GridSpec> grid;
    SolveOptions solve;
    /// Grid refinement: dt is divided and nz multiplied by these factors.
    double dt_refine = 1.0;
    double nz_refine = 1.0;
    bool keep_series = true;
    /// Optimizer evaluations run with dt multiplied and nz divided by this
    /// factor; the reported point is re-run on the full grid.
    double search_coarsening = 4.0;
};

/// Probe end used for the loss split (switch-off, square end, Gaussian
/// centre + fwhm, last sample).
double absorption_end(const PulseSpec& probe);

/// Rising exponential with fall time t_rise/10, unit peak at t_off = 0.
PulseSpec exponential_probe(double t_rise, double fall_ratio = 0.1);

// ---- SR -------------------------------------------------------------------

struct SrControl {
    ControlShape shape = ControlShape::square;
    /// Peak Rabi frequency in units of gamma; NaN picks fast_control_requirement.
    double rabi = std::numeric_limits<double>::quiet_NaN();
    double area = 3.141592653589793;
    /// Write onset relative to the end of the probe.
    double write_delay = 0.0;
};

/// Write pi pulse right after the probe, identical read pulse.
ControlSchedule sr_schedule(const MediumParams& medium, const PulseSpec& probe, const SrControl& control,
                            double storage_time = 0.0);

ProtocolReport run_sr(const MediumParams& medium, const PulseSpec& probe, const ControlSchedule& schedule,
                      Retrieval direction, const RunOptions& options = {});

/// Maximizes eta over the peak Rabi frequency at fixed control area, log
/// search over [2 pi B, 40 pi B] with B = bandwidth_fwhm(probe).
ProtocolReport run_sr_best_rabi(const MediumParams& medium, const PulseSpec& probe, const SrControl& control,
                                Retrieval direction, double storage_time = 0.0, const RunOptions& options = {});

/// Probe duration from the superradiant time and fast square control.
ProtocolReport run_sr_optimal(const MediumParams& medium, Retrieval direction, const RunOptions& options = {});

// ---- ATS ------------------------------------------------------------------

struct AtsSettings {
    /// Write area; NaN searches [pi/2, 8 pi] in log scale, seeded at 2 pi.
    double area = std::numeric_limits<double>::quiet_NaN();
    /// Control window: the shortest interval holding `window_energy` of the
    /// probe energy. NaN searches 1 - window_energy in [1e-3, 1e-1], with
    /// the area search nested inside.
    double window_energy = std::numeric_limits<double>::quiet_NaN();
    double storage_time = 0.0;
};

/// Shortest interval [a, b] holding `fraction` of the probe energy.
std::pair<double, double> energy_window(const PulseSpec& probe, double fraction);

ControlSchedule ats_schedule(const PulseSpec& probe, double rabi, std::pair<double, double> window,
                             double storage_time = 0.0);

ProtocolReport run_ats(const MediumParams& medium, const PulseSpec& probe, Retrieval direction = Retrieval::backward,
                       const AtsSettings& settings = {}, const RunOptions& options = {});

// ---- EIT ------------------------------------------------------------------

struct EitSettings {
    /// Control Rabi frequency; NaN searches [2 pi B / 4, 8 pi B] in log scale,
    /// with the ramp search nested inside.
    double rabi = std::numeric_limits<double>::quiet_NaN();
    /// Cosine ramp-off duration; NaN searches [r/50, r] in log scale with
    /// r = min(T_P, 5).
    double ramp = std::numeric_limits<double>::quiet_NaN();
    double storage_time = 0.0;
};

/// Constant control from the probe start to the probe end, cosine ramp to
/// zero over `ramp`; the read control mirrors it.
ControlSchedule eit_schedule(const PulseSpec& probe, double rabi, double ramp, double storage_time = 0.0);

ProtocolReport run_eit(const MediumParams& medium, const PulseSpec& probe, Retrieval direction = Retrieval::backward,
                       const EitSettings& settings = {}, const RunOptions& options = {});

// ---- analysis -------------------------------------------------------------

struct LifetimeCurve {
    std::vector<double> storage_times;
    std::vector<double> eta;
    double eta0 = 0.0;
    /// 1/e intensity lifetime fitted to eta(T_s); model value 1/(2 gamma_s).
    /// Both are infinite when gamma_s = 0.
    double lifetime = 0.0;
    double lifetime_stderr = 0.0;
    double model_lifetime = 0.0;
};

/// Storage times are dimensionless (units of 1/gamma).
LifetimeCurve memory_lifetime_curve(const MediumParams& medium, const PulseSpec& probe,
                                    const ControlSchedule& schedule, std::span<const double> storage_times,
                                    Retrieval direction = Retrieval::forward, const RunOptions& options = {});

/// T_P d gamma for the probe and medium recorded in the report.
double adiabaticity_parameter(const ProtocolReport& report);

/// Builds a report from a finished solver run.
ProtocolReport make_report(Protocol protocol, const MediumParams& medium, const PulseSpec& probe,
                           const ControlSchedule& schedule, const FieldRecord& record, bool keep_series);

/// Decay time of |e|^2 from an exponential fit between its peak and the
/// first drop below floor * peak. NaN when fewer than 5 samples qualify or
/// the fit fails.
double fit_intensity_decay(std::span<const double> tau, std::span<const cplx> e, double floor = 1.0 / 2.718281828459045);

/// Probe duration T_P of a rising exponential, or the intensity FWHM otherwise.
double probe_duration(const PulseSpec& probe);

}  // namespace srmem
