#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace srmem {

struct ScalarOptions {
    bool maximize = true;
    /// Golden-section stops when the bracket is below rel_tol * |x|.
    double rel_tol = 1e-3;
    /// Search in log(x); the bracket must then be positive.
    bool log_scale = false;
    /// Points of the fallback scan over the bracket.
    int scan_points = 21;
    int max_evaluations = 200;
};

struct ScalarOptimum {
    double x = 0.0;
    double f = 0.0;
    int evaluations = 0;
    /// False when the 3-point probe found the bracket not unimodal; the
    /// result then comes from a dense scan refined around its best point.
    bool unimodal = true;
    std::string note;
    std::vector<std::pair<double, double>> history;
};

/// Golden-section search of f over [lo, hi] after a 3-point unimodality
/// probe (the middle point must beat both ends).
ScalarOptimum optimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                              const ScalarOptions& options = {});

}  // namespace srmem
