#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace srmem {

/// Raised for invalid parameters and violated preconditions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw Error(message);
    }
}

/// Converts between SI quantities and the dimensionless frame tau = gamma*t,
/// where gamma is the optical decoherence rate (Gamma / 2) in rad/s.
class Units {
public:
    explicit Units(double gamma) : m_gamma(gamma)
    {
        require(gamma > 0.0 && std::isfinite(gamma), "Units: gamma must be positive");
    }

    static Units from_linewidth(double Gamma) { return Units(Gamma / 2.0); }
    /// gamma given as gamma/2pi in Hz.
    static Units from_gamma_hz(double gamma_over_2pi) { return Units(2.0 * std::numbers::pi * gamma_over_2pi); }

    double gamma() const { return m_gamma; }
    double Gamma() const { return 2.0 * m_gamma; }

    double to_dimensionless_time(double seconds) const { return seconds * m_gamma; }
    double to_seconds(double tau) const { return tau / m_gamma; }

    /// Rates and Rabi frequencies (rad/s) to units of gamma.
    double to_dimensionless_rate(double rad_per_s) const { return rad_per_s / m_gamma; }
    double to_rad_per_s(double rate) const { return rate * m_gamma; }

private:
    double m_gamma;
};

/// Ensemble description: optical depth, optical decoherence and spin-wave
/// decoherence. Rates are in rad/s; length in metres and only used for
/// physical coupling constants.
struct MediumParams {
    double d = 0.0;
    double gamma = 1.0;
    double gamma_s = 0.0;
    double length = 0.0;

    void validate() const
    {
        require(std::isfinite(d) && d >= 0.0, "MediumParams: d must be >= 0");
        require(std::isfinite(gamma) && gamma > 0.0, "MediumParams: gamma must be > 0");
        require(std::isfinite(gamma_s) && gamma_s >= 0.0, "MediumParams: gamma_s must be >= 0");
        require(std::isfinite(length) && length >= 0.0, "MediumParams: length must be >= 0");
    }

    /// gamma_s / gamma, the spin decay rate in the dimensionless frame.
    double spin_decay() const { return gamma_s / gamma; }

    /// sqrt(d/2): field/polarization coupling in the dimensionless equations.
    double coupling() const { return std::sqrt(d / 2.0); }

    /// g*sqrt(N) = sqrt(c d gamma / 2L) in rad/s.
    double collective_coupling() const
    {
        require(length > 0.0, "MediumParams: length required for physical coupling");
        constexpr double c = 299792458.0;
        return std::sqrt(c * d * gamma / (2.0 * length));
    }

    Units units() const { return Units(gamma); }
};

/// Space/time discretization. zeta in [0, 1] carries nz nodes (nz - 1 cells);
/// dt and t_end are dimensionless. A NaN t_start lets the solver start where
/// the probe intensity reaches 1e-7 of its peak.
struct GridSpec {
    int nz = 200;
    double dt = 1e-3;
    double t_end = 1.0;
    double t_start = std::numeric_limits<double>::quiet_NaN();

    void validate() const
    {
        require(nz >= 2, "GridSpec: nz must be >= 2");
        require(std::isfinite(dt) && dt > 0.0, "GridSpec: dt must be > 0");
        require(std::isfinite(t_end) && t_end > 0.0, "GridSpec: t_end must be > 0");
    }
};

}  // namespace srmem
