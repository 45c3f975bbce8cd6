#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "srmem/config.hpp"

namespace srmem {

enum class Objective { eta_total, t_sr, leakage };

const char* to_string(Objective o);
Objective objective_from_string(const std::string& s);

/// Swept parameters: d, T_P, Omega (control Rabi frequency of the protocol),
/// B (bandwidth in units of gamma; sets T_P) and storage_time.
const std::vector<std::string>& sweep_axes();

/// Returns `base` with the axis set to `value` (dimensionless units).
RunConfig with_axis(const RunConfig& base, const std::string& axis, double value);

struct SweepPlan {
    std::string axis = "d";
    std::vector<double> values;
    RunConfig base;
    Objective objective = Objective::eta_total;

    void validate() const;
};

std::vector<double> linear_range(double lo, double hi, int n);
std::vector<double> log_range(double lo, double hi, int n);

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    double objective = 0.0;
    ProtocolReport report;
    std::string error;
};

struct SweepResult {
    SweepPlan plan;
    std::string hash;
    std::vector<SweepRow> rows;  // sorted by axis value
};

/// Evaluates every point on a pool of `workers` threads (0: hardware
/// concurrency). Points that throw are marked failed.
SweepResult run_sweep(const SweepPlan& plan, unsigned workers = 0);

/// Hash over the base configuration, axis, values and objective.
std::string plan_hash(const SweepPlan& plan);

/// Generic table: a manifest line, a header line and rows of cells.
struct Table {
    std::string hash;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<double> values);
};

/// Full precision scientific notation (%.17e).
std::string format_cell(double v);
void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::string& path, const Table& table);

/// Columns: axis value, objective, eta_total, the loss fractions, residual,
/// ledger residual, t_sr_fit, d, T_P, rabi, status, error.
Table sweep_table(const SweepResult& result);

/// Provenance record for one emitted table.
struct RunManifest {
    std::string hash;
    std::string version;
    std::string timestamp;
    std::string config;  // canonical text
    std::map<std::string, double> grid;
    std::vector<std::map<std::string, double>> points;

    std::string to_json() const;
};

RunManifest make_manifest(const SweepResult& result);

/// Output directory: the explicit argument, else $SRMEM_OUTPUT_DIR, else
/// "./srmem-out". Created if missing.
std::string output_directory(const std::string& explicit_dir = {});

const char* version();

// ---- derived curves ---------------------------------------------------------

struct DepthResult {
    bool reachable = false;
    double d = 0.0;
    double eta = 0.0;
    int evaluations = 0;
    std::vector<std::pair<double, double>> history;  // (d, eta)
};

/// Smallest d with optimized eta >= eta_target for a probe of bandwidth
/// B_gamma (units of gamma). Doubling from d = 1 to bracket, then bisection
/// in log d to `rel_tol`. Unreachable when eta(d_max) < eta_target.
/// eta_target = 0 gives d = 0.
DepthResult required_depth(const RunConfig& base, double B_gamma, double eta_target = 0.9, double d_max = 1e5,
                           double rel_tol = 0.01);

struct ScalingResult {
    std::vector<double> bandwidth;  // B in units of gamma
    std::vector<double> depth;
    std::vector<double> rabi;       // optimal Omega in units of gamma
    std::vector<double> eta;
    double slope = 0.0;             // Omega / 2 pi B, line through the origin
    double ols_slope = 0.0;         // ordinary least squares line
    double intercept = 0.0;
    double r_squared = 0.0;         // of the least squares line
    bool linear = false;            // r_squared >= 0.9
};

/// Optimal control Rabi frequency versus 2 pi B, each point at
/// d = kappa / T_P(B). Needs at least 4 bandwidths.
ScalingResult control_power_scaling(const RunConfig& base, const std::vector<double>& B_gamma, double kappa,
                                    unsigned workers = 0);

/// Least-squares line y = a + b x with R^2.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Optimal Rabi frequency recorded by the protocol runner.
double optimal_rabi(const ProtocolReport& report);

/// Runs f(i) for i < n on `workers` threads.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f);

}  // namespace srmem
