#pragma once

#include <complex>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "srmem/model.hpp"

namespace srmem {

using cplx = std::complex<double>;

/// Probe with intensity exp((t - t_off)/t_rise) up to t_off and
/// exp(-(t - t_off)/t_fall) afterwards. t_rise and t_fall are 1/e intensity
/// times, so the field rises with 1/e time 2*t_rise. t_fall == 0 gives an
/// abrupt switch-off. peak is the field amplitude at t_off.
struct RisingExponential {
    double t_rise = 1.0;
    double t_fall = 0.1;
    double t_off = 0.0;
    double peak = 1.0;
};

/// Gaussian envelope; fwhm refers to the amplitude envelope itself, which
/// is the convention used for control Rabi frequencies.
struct Gaussian {
    double fwhm = 1.0;
    double t_center = 0.0;
    double peak = 1.0;
};

struct Square {
    double t_on = 0.0;
    double t_off = 1.0;
    double amplitude = 1.0;
};

/// Piecewise-linear samples, zero outside [t.front(), t.back()].
struct Samples {
    std::vector<double> t;
    std::vector<cplx> amp;
};

using PulseSpec = std::variant<RisingExponential, Gaussian, Square, Samples>;

/// Throws srmem::Error on negative durations or malformed samples.
void validate(const PulseSpec& spec);

/// Field amplitude at dimensionless time t. At a discontinuity (square
/// edges) side > 0 selects the right limit and side < 0 the left limit;
/// side == 0 treats the window as closed.
cplx amplitude(const PulseSpec& spec, double t, int side = 0);

/// Times where the envelope or its derivative jumps.
std::vector<double> breakpoints(const PulseSpec& spec);

/// Amplitude samples on strictly increasing times. With normalize_energy the
/// result is scaled so that its trapezoidal energy on `times` equals 1.
std::vector<cplx> sample_pulse(const PulseSpec& spec, std::span<const double> times,
                               bool normalize_energy = false);

/// Exact integral of |amplitude|^2 over all time.
double pulse_energy(const PulseSpec& spec);

/// Copy of spec with its amplitude scaled so that pulse_energy() == 1.
PulseSpec normalized(const PulseSpec& spec);

/// Copy of spec with every amplitude multiplied by factor.
PulseSpec scaled(const PulseSpec& spec, double factor);

/// Copy of spec shifted in time by dt.
PulseSpec shifted(const PulseSpec& spec, double dt);

/// Largest |amplitude|.
double peak_amplitude(const PulseSpec& spec);

/// Integral of rabi_scale * |amplitude(t)| dt.
double pulse_area(const PulseSpec& spec, double rabi_scale = 1.0);

/// Interval outside of which the intensity stays below rel_tol * peak intensity.
std::pair<double, double> support(const PulseSpec& spec, double rel_tol = 1e-12);

/// Full width at half maximum of the intensity |amplitude|^2.
double intensity_fwhm(const PulseSpec& spec);

/// Ratio of the Gaussian area to peak*fwhm, sqrt(pi / ln 16).
double gaussian_area_factor();

const char* shape_name(const PulseSpec& spec);

}  // namespace srmem
