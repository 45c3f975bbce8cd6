#pragma once

#include <map>
#include <string>
#include <vector>

#include "srmem/sweep.hpp"

namespace srmem {

/// One checked quantity. pass = |value - target| <= tolerance, or the
/// stated condition for ordering checks (target and tolerance NaN).
struct Verdict {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

Verdict check_abs(std::string name, double value, double target, double tolerance, std::string detail = {});
Verdict check_rel(std::string name, double value, double target, double rel_tolerance, std::string detail = {});
Verdict check_condition(std::string name, bool condition, double value, std::string detail = {});

struct ReportBundle {
    std::string recipe;
    std::string hash;
    std::vector<Verdict> verdicts;
    std::map<std::string, Table> tables;  // file stem -> table
    std::vector<std::string> notes;
    double seconds = 0.0;

    bool passed() const;
    /// One "PASS|FAIL name value target tol" line per verdict.
    std::string summary() const;
};

struct ReproduceOptions {
    unsigned workers = 0;
    /// Grid refinement factors applied to every run of the recipe.
    double dt_refine = 1.0;
    double nz_refine = 1.0;
};

/// fig1, fig2c, fig3a, fig3b, fig3c, eq4, bandwidth.
const std::vector<std::string>& recipe_names();

ReportBundle reproduce(const std::string& recipe, const ReproduceOptions& options = {});

/// Writes <stem>.csv per table, summary.txt and manifest.json into dir.
void write_bundle(const ReportBundle& bundle, const std::string& dir);

// Building blocks shared by the recipes and the acceptance suite.

/// fig1 recipe configuration: d = 50, T_P = 0.037, square control 200 Gamma for
/// 0.0074, backward recall.
RunConfig fig1_config(ControlShape shape = ControlShape::square);

/// Reference adiabaticity products T_P d gamma of the three protocols.
double adiabaticity_product(Protocol p);

/// Bandwidths of the fig3b/fig3c grid: 8 log-spaced points over
/// [10, 200] Gamma/2pi, returned in units of gamma.
std::vector<double> figure3_bandwidths();

struct EmissionFit {
    double d = 0.0;
    double efficiency = 0.0;  // energy emitted after switch-off / input
    double t_sr = 0.0;        // fitted intensity decay time
    double t_sr_model = 0.0;  // (1/Gamma)/(1 + d/4)
};

/// Forward emission after the probe switch-off, no control. The fit skips
/// the first 3 fall times after the switch-off.
EmissionFit emission_fit(double d, const PulseSpec& probe, double dt_refine = 1.0, double nz_refine = 1.0);

}  // namespace srmem
