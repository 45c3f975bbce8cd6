#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srmem/model.hpp"

namespace srmem {

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> params;
    std::vector<double> stderrs;
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;

    double value(const std::string& name) const;
    double stderr_of(const std::string& name) const;
};

/// Residual model for damped Gauss-Newton: fills r (size m) and, when J is
/// non-null, the row-major m x n Jacobian of r.
using ResidualFn = std::function<void(std::span<const double> x, std::span<double> r, std::span<double> J)>;

struct LeastSquaresOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-12;
};

/// Levenberg-damped Gauss-Newton on sum r^2. Standard errors come from the
/// linearized covariance s^2 (J^T J)^-1 with s^2 = RSS / (m - n).
FitResult least_squares(const ResidualFn& fn, std::size_t m, std::vector<double> x0, std::vector<std::string> names,
                        const LeastSquaresOptions& options = {});

/// Residuals and Jacobians of the fit models on fixed data.
///   exp_decay   x = (T, amplitude):  amplitude exp(-t/T) - y
///   lorentzian  x = (d_res, Gamma):  d_res / (1 + 4 (delta/Gamma)^2) - od
///   tsr         x = (Gamma_eff):     (1/Gamma_eff) / (1 + d/4) - t_sr
ResidualFn exp_decay_residuals(std::vector<double> t, std::vector<double> y);
ResidualFn lorentzian_residuals(std::vector<double> delta, std::vector<double> od);
ResidualFn tsr_residuals(std::vector<double> d, std::vector<double> t_sr);

struct Window {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool contains(double t) const { return t >= lo && t <= hi; }
};

/// y = amplitude * exp(-t / T) on the points inside the window. Parameters
/// "T" and "amplitude". Seeded by log-linear regression.
FitResult fit_exp_decay(std::span<const double> t, std::span<const double> y, Window window = {});

/// d(delta) = d_res / (1 + 4 (delta/Gamma)^2). Points with |delta| < exclusion
/// are left out. Parameters "d_res" and "Gamma".
FitResult fit_lorentzian_od(std::span<const double> delta, std::span<const double> od,
                            std::optional<double> exclusion = std::nullopt);

/// T_SR = (1/Gamma_eff) / (1 + d/4). Parameter "Gamma_eff".
FitResult fit_tsr_vs_d(std::span<const double> d, std::span<const double> t_sr);

struct Columns {
    std::vector<double> x;
    std::vector<double> y;
};

/// Two numeric columns separated by whitespace or commas; '#' starts a comment.
Columns read_two_columns(std::istream& in);
Columns read_two_columns(const std::string& path);

/// name = value +- stderr lines plus convergence info.
std::string format_fit(const FitResult& fit);

}  // namespace srmem
