#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "srmem/oracles.hpp"
#include "srmem/protocols.hpp"

namespace srmem {

/// Full description of one protocol run. Times and rates are dimensionless
/// (units of 1/gamma and gamma); `gamma_hz` = gamma/2pi only serves SI input
/// and output.
struct RunConfig {
    Protocol protocol = Protocol::sr;
    Retrieval direction = Retrieval::backward;
    double gamma_hz = 3.035e6;

    double d = 0.0;
    double gamma_s = 0.0;

    std::string probe_shape = "exponential";  // exponential | gaussian | square
    /// Probe duration; NaN selects the superradiant time for d.
    double probe_T_P = 0.01;
    double probe_fall_ratio = 0.1;

    ControlShape control_shape = ControlShape::square;
    double control_rabi = std::numeric_limits<double>::quiet_NaN();
    double control_area = 3.141592653589793;
    /// Square length or Gaussian amplitude FWHM. When set, the area follows
    /// from control_rabi, or control_rabi from the area if it is NaN.
    double control_duration = std::numeric_limits<double>::quiet_NaN();
    double control_write_delay = 0.0;
    /// SR only: search the Rabi frequency instead of using control_rabi.
    bool control_optimize = false;

    double ats_area = std::numeric_limits<double>::quiet_NaN();
    double ats_window_energy = std::numeric_limits<double>::quiet_NaN();
    double eit_rabi = std::numeric_limits<double>::quiet_NaN();
    double eit_ramp = std::numeric_limits<double>::quiet_NaN();

    double storage_time = 0.0;

    int grid_nz = 0;  // 0: default rule
    double grid_dt = std::numeric_limits<double>::quiet_NaN();
    double dt_refine = 1.0;
    double nz_refine = 1.0;
    double search_coarsening = 4.0;

    Units units() const { return Units::from_gamma_hz(gamma_hz); }
};

/// Documented keys, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from text. Numbers accept a unit suffix:
///   times   s ms us ns ps, /gamma (default)
///   rates   Hz kHz MHz GHz (cyclic, times 2pi), rad/s, gamma (default), Gamma
///   areas   pi multiples such as "pi", "2pi", "0.5*pi"
///   probe.B Hz kHz MHz GHz, gamma, Gamma/2pi (default)
/// probe.B sets T_P so the probe bandwidth matches. Throws on unknown keys.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Reads "key = value" lines; '#' starts a comment, "[section]" prefixes
/// following keys with "section.".
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Applies "key=value" overrides in order.
void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides);

/// Every key with its dimensionless value, one per line, full precision.
std::string canonical_text(const RunConfig& config);

/// FNV-1a 64 of canonical_text as 16 hex digits.
std::string config_hash(const RunConfig& config);
std::string hash_text(const std::string& text);

PulseSpec make_probe(const RunConfig& config);
MediumParams make_medium(const RunConfig& config);
RunOptions make_run_options(const RunConfig& config);

/// Runs the configured protocol (optimizers included).
ProtocolReport run_protocol(const RunConfig& config, bool keep_series = false);

/// Probe duration giving bandwidth B (units of gamma) for the configured
/// probe shape.
double probe_duration_for_bandwidth(const RunConfig& config, double B_gamma);

}  // namespace srmem
