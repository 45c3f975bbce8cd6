#pragma once

#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "srmem/model.hpp"
#include "srmem/pulse.hpp"

namespace srmem {

/// Medium transfer function with the control off, for field components
/// exp(+i delta tau):  H(delta) = exp(-(d/2) / (1 + i delta)).
struct LinearResponse {
    double d = 0.0;

    cplx operator()(double delta) const;
    std::vector<cplx> evaluate(std::span<const double> delta) const;
};

/// Output field at zeta = 1 for the control-off medium, sampled on a uniform
/// time grid t0 + i*dt, i < n. The input is sampled on the same grid, zero
/// padded, filtered with H and transformed back.
struct Transmission {
    std::vector<double> tau;
    std::vector<cplx> e_in;
    std::vector<cplx> e_out;
    /// Output energy falling after the last sample, relative to the input.
    double tail_fraction = 0.0;
};

/// Throws when more than 1e-6 of the input energy is emitted after the grid.
Transmission analytic_transmission(const MediumParams& medium, const PulseSpec& probe, double t0, double dt,
                                   std::size_t n);

/// Same on explicit times, which must be uniformly spaced.
Transmission analytic_transmission(const MediumParams& medium, const PulseSpec& probe,
                                   std::span<const double> times);

/// Probe duration matched to the collective decay: (1/Gamma) / (1 + d/4).
/// Gamma in any rate unit; the result is in the reciprocal unit.
double optimal_probe_duration(double d, double Gamma);

/// Superradiant decay time, same expression.
inline double superradiant_time(double d, double Gamma) { return optimal_probe_duration(d, Gamma); }

/// Full width at half maximum of |I(omega)|, the magnitude spectrum of the
/// intensity envelope, divided by 2 pi. Result in cycles per unit of the
/// pulse time axis (with tau = gamma t: units of gamma).
double bandwidth_fwhm(const PulseSpec& probe);

/// B from bandwidth_fwhm expressed in units of Gamma/2pi (Gamma = 2 gamma).
inline double bandwidth_in_linewidths(double B_gamma) { return B_gamma * std::numbers::pi; }

/// Fast-writing solution for a square control switched on at tau = 0 with
/// no field in the medium. A = 1 + d is the collective damping scale.
///   p(tau) = exp(-A tau/2) cos(W tau/2) p0
///   s(tau) = i W / (A^2 + W^2) [A + exp(-A tau/2)(W sin(W tau/2) - A cos(W tau/2))] p0
struct WritingSolution {
    double damping = 0.0;
    std::vector<double> tau;
    std::vector<cplx> p_ratio;  // p(tau) / p0
    std::vector<cplx> s_ratio;  // s(tau) / p0
    cplx transfer{};            // s(T_C) / p0
    std::vector<cplx> s_final;  // transfer * p0 profile
    std::vector<cplx> p_final;
};

/// Throws unless W > 1 + d (the fast regime).
WritingSolution writing_stage_solution(const MediumParams& medium, double rabi, double duration,
                                       std::span<const cplx> p0, std::span<const double> times = {});

enum class ControlShape { square, gaussian };

ControlShape control_shape_from_string(const std::string& s);

struct ControlRequirement {
    double rabi = 0.0;      // peak Rabi frequency, same unit as gamma
    double duration = 0.0;  // square length or Gaussian amplitude FWHM, reciprocal unit
};

/// Square: pi pulse lasting a tenth of the superradiant time, so
/// W = 10 pi Gamma (1 + d/4). Gaussian: W = 24 gamma (1 + d/4) with
/// duration set by area pi.
ControlRequirement fast_control_requirement(double d, double gamma, ControlShape shape);

}  // namespace srmem
