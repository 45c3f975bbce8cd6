#include "srmem/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace srmem {

namespace {

constexpr double ln2 = std::numbers::ln2;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

cplx sample_linear(const Samples& s, double t)
{
    if (s.t.empty() || t < s.t.front() || t > s.t.back()) {
        return {0.0, 0.0};
    }
    auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
    if (it == s.t.end()) {
        return s.amp.back();
    }
    const auto i = static_cast<std::size_t>(it - s.t.begin());
    const double t0 = s.t[i - 1];
    const double t1 = s.t[i];
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * s.amp[i - 1] + w * s.amp[i];
}

}  // namespace

double gaussian_area_factor() { return std::sqrt(std::numbers::pi / std::log(16.0)); }

void validate(const PulseSpec& spec)
{
    std::visit(overloaded{
                   [](const RisingExponential& p) {
                       require(std::isfinite(p.t_rise) && p.t_rise > 0.0,
                               "RisingExponential: rise time must be > 0");
                       require(std::isfinite(p.t_fall) && p.t_fall >= 0.0,
                               "RisingExponential: fall time must be >= 0");
                       require(std::isfinite(p.t_off) && std::isfinite(p.peak),
                               "RisingExponential: non-finite parameter");
                   },
                   [](const Gaussian& p) {
                       require(std::isfinite(p.fwhm) && p.fwhm > 0.0, "Gaussian: fwhm must be > 0");
                       require(std::isfinite(p.t_center) && std::isfinite(p.peak),
                               "Gaussian: non-finite parameter");
                   },
                   [](const Square& p) {
                       require(std::isfinite(p.t_on) && std::isfinite(p.t_off) && p.t_off >= p.t_on,
                               "Square: negative duration");
                       require(std::isfinite(p.amplitude), "Square: non-finite amplitude");
                   },
                   [](const Samples& p) {
                       require(p.t.size() == p.amp.size(), "Samples: t and amp differ in length");
                       require(p.t.size() >= 2, "Samples: need at least two points");
                       for (std::size_t i = 1; i < p.t.size(); ++i) {
                           require(p.t[i] > p.t[i - 1], "Samples: times must be strictly increasing");
                       }
                       for (const auto& a : p.amp) {
                           require(std::isfinite(a.real()) && std::isfinite(a.imag()),
                                   "Samples: non-finite amplitude");
                       }
                   },
               },
               spec);
}

cplx amplitude(const PulseSpec& spec, double t, int side)
{
    return std::visit(overloaded{
                          [t, side](const RisingExponential& p) -> cplx {
                              const double x = t - p.t_off;
                              if (x < 0.0 || (x == 0.0 && (side <= 0 || p.t_fall > 0.0))) {
                                  return p.peak * std::exp(x / (2.0 * p.t_rise));
                              }
                              if (p.t_fall <= 0.0) {
                                  return 0.0;
                              }
                              return p.peak * std::exp(-x / (2.0 * p.t_fall));
                          },
                          [t](const Gaussian& p) -> cplx {
                              const double x = (t - p.t_center) / p.fwhm;
                              return p.peak * std::exp(-4.0 * ln2 * x * x);
                          },
                          [t, side](const Square& p) -> cplx {
                              if (t < p.t_on || t > p.t_off) {
                                  return 0.0;
                              }
                              if ((side > 0 && t == p.t_off) || (side < 0 && t == p.t_on)) {
                                  return 0.0;
                              }
                              return p.amplitude;
                          },
                          [t](const Samples& p) -> cplx { return sample_linear(p, t); },
                      },
                      spec);
}

std::vector<cplx> sample_pulse(const PulseSpec& spec, std::span<const double> times, bool normalize_energy)
{
    validate(spec);
    for (std::size_t i = 1; i < times.size(); ++i) {
        require(times[i] > times[i - 1], "sample_pulse: times must be strictly increasing");
    }
    std::vector<cplx> out(times.size());
    std::transform(times.begin(), times.end(), out.begin(), [&](double t) { return amplitude(spec, t); });
    if (normalize_energy && times.size() >= 2) {
        double energy = 0.0;
        for (std::size_t i = 1; i < times.size(); ++i) {
            energy += 0.5 * (std::norm(out[i - 1]) + std::norm(out[i])) * (times[i] - times[i - 1]);
        }
        require(energy > 0.0, "sample_pulse: zero energy, cannot normalize");
        const double scale = 1.0 / std::sqrt(energy);
        for (auto& a : out) {
            a *= scale;
        }
    }
    return out;
}

std::vector<double> breakpoints(const PulseSpec& spec)
{
    return std::visit(overloaded{
                          [](const RisingExponential& p) { return std::vector<double>{p.t_off}; },
                          [](const Gaussian&) { return std::vector<double>{}; },
                          [](const Square& p) { return std::vector<double>{p.t_on, p.t_off}; },
                          [](const Samples& p) { return std::vector<double>{p.t.front(), p.t.back()}; },
                      },
                      spec);
}

double pulse_energy(const PulseSpec& spec)
{
    validate(spec);
    return std::visit(overloaded{
                          [](const RisingExponential& p) { return p.peak * p.peak * (p.t_rise + p.t_fall); },
                          [](const Gaussian& p) {
                              return p.peak * p.peak * p.fwhm * std::sqrt(std::numbers::pi / (8.0 * ln2));
                          },
                          [](const Square& p) { return p.amplitude * p.amplitude * (p.t_off - p.t_on); },
                          [](const Samples& p) {
                              double e = 0.0;
                              for (std::size_t i = 1; i < p.t.size(); ++i) {
                                  const cplx a = p.amp[i - 1];
                                  const cplx b = p.amp[i];
                                  e += (std::norm(a) + std::real(a * std::conj(b)) + std::norm(b)) / 3.0 *
                                       (p.t[i] - p.t[i - 1]);
                              }
                              return e;
                          },
                      },
                      spec);
}

PulseSpec scaled(const PulseSpec& spec, double factor)
{
    PulseSpec out = spec;
    std::visit(overloaded{
                   [factor](RisingExponential& p) { p.peak *= factor; },
                   [factor](Gaussian& p) { p.peak *= factor; },
                   [factor](Square& p) { p.amplitude *= factor; },
                   [factor](Samples& p) {
                       for (auto& a : p.amp) {
                           a *= factor;
                       }
                   },
               },
               out);
    return out;
}

PulseSpec shifted(const PulseSpec& spec, double dt)
{
    PulseSpec out = spec;
    std::visit(overloaded{
                   [dt](RisingExponential& p) { p.t_off += dt; },
                   [dt](Gaussian& p) { p.t_center += dt; },
                   [dt](Square& p) {
                       p.t_on += dt;
                       p.t_off += dt;
                   },
                   [dt](Samples& p) {
                       for (auto& t : p.t) {
                           t += dt;
                       }
                   },
               },
               out);
    return out;
}

PulseSpec normalized(const PulseSpec& spec)
{
    const double e = pulse_energy(spec);
    require(e > 0.0, "normalized: pulse has zero energy");
    return scaled(spec, 1.0 / std::sqrt(e));
}

double peak_amplitude(const PulseSpec& spec)
{
    return std::visit(overloaded{
                          [](const RisingExponential& p) { return std::abs(p.peak); },
                          [](const Gaussian& p) { return std::abs(p.peak); },
                          [](const Square& p) { return std::abs(p.amplitude); },
                          [](const Samples& p) {
                              double m = 0.0;
                              for (const auto& a : p.amp) {
                                  m = std::max(m, std::abs(a));
                              }
                              return m;
                          },
                      },
                      spec);
}

double pulse_area(const PulseSpec& spec, double rabi_scale)
{
    validate(spec);
    require(std::isfinite(rabi_scale), "pulse_area: rabi_scale must be finite");
    const double area = std::visit(
        overloaded{
            [](const RisingExponential& p) { return std::abs(p.peak) * 2.0 * (p.t_rise + p.t_fall); },
            [](const Gaussian& p) { return std::abs(p.peak) * p.fwhm * gaussian_area_factor(); },
            [](const Square& p) { return std::abs(p.amplitude) * (p.t_off - p.t_on); },
            [](const Samples& p) {
                double a = 0.0;
                for (std::size_t i = 1; i < p.t.size(); ++i) {
                    a += 0.5 * (std::abs(p.amp[i - 1]) + std::abs(p.amp[i])) * (p.t[i] - p.t[i - 1]);
                }
                return a;
            },
        },
        spec);
    return std::abs(rabi_scale) * area;
}

std::pair<double, double> support(const PulseSpec& spec, double rel_tol)
{
    require(rel_tol > 0.0 && rel_tol < 1.0, "support: rel_tol must lie in (0, 1)");
    const double log_tol = std::log(rel_tol);
    return std::visit(overloaded{
                          [log_tol](const RisingExponential& p) {
                              return std::pair{p.t_off + p.t_rise * log_tol, p.t_off - p.t_fall * log_tol};
                          },
                          [log_tol](const Gaussian& p) {
                              const double half = p.fwhm * std::sqrt(-log_tol / (4.0 * ln2)) / std::sqrt(2.0);
                              return std::pair{p.t_center - half, p.t_center + half};
                          },
                          [](const Square& p) { return std::pair{p.t_on, p.t_off}; },
                          [](const Samples& p) { return std::pair{p.t.front(), p.t.back()}; },
                      },
                      spec);
}

double intensity_fwhm(const PulseSpec& spec)
{
    validate(spec);
    return std::visit(overloaded{
                          [](const RisingExponential& p) { return (p.t_rise + p.t_fall) * ln2; },
                          [](const Gaussian& p) { return p.fwhm / std::sqrt(2.0); },
                          [](const Square& p) { return p.t_off - p.t_on; },
                          [](const Samples& p) {
                              double peak = 0.0;
                              for (const auto& a : p.amp) {
                                  peak = std::max(peak, std::norm(a));
                              }
                              const double half = 0.5 * peak;
                              double first = p.t.back();
                              double last = p.t.front();
                              for (std::size_t i = 0; i < p.t.size(); ++i) {
                                  if (std::norm(p.amp[i]) >= half) {
                                      first = std::min(first, p.t[i]);
                                      last = std::max(last, p.t[i]);
                                  }
                              }
                              return std::max(0.0, last - first);
                          },
                      },
                      spec);
}

const char* shape_name(const PulseSpec& spec)
{
    return std::visit(overloaded{
                          [](const RisingExponential&) { return "rising_exponential"; },
                          [](const Gaussian&) { return "gaussian"; },
                          [](const Square&) { return "square"; },
                          [](const Samples&) { return "samples"; },
                      },
                      spec);
}

}  // namespace srmem
