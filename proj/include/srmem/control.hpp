#pragma once

#include <utility>

#include "srmem/pulse.hpp"

namespace srmem {

/// Write and read control envelopes. The write pulse lives on the absolute
/// clock of the probe; the read pulse is expressed on a local clock whose
/// origin sits storage_time after the end of the write pulse. Envelopes are
/// multiplied by rabi_scale (units of gamma) before use.
struct ControlSchedule {
    PulseSpec write = Square{};
    PulseSpec read = Square{};
    double storage_time = 0.0;
    double rabi_scale = 1.0;

    void validate() const;

    /// Envelope support with a 1e-12 relative intensity cut.
    std::pair<double, double> write_window() const;
    std::pair<double, double> read_window() const;

    double write_area() const { return pulse_area(write, rabi_scale); }
    double read_area() const { return pulse_area(read, rabi_scale); }

    /// Largest Rabi frequency over both pulses.
    double peak_rabi() const;
};

/// Square pulse on [t_on, t_on + duration] with unit amplitude.
PulseSpec square_window(double t_on, double duration);

/// Square pulse of the given Rabi frequency whose area is `area`.
PulseSpec square_with_area(double t_on, double rabi, double area);

/// Gaussian whose area is `area` for the given peak Rabi frequency; the
/// envelope starts (1e-12 intensity cut) at t_on.
PulseSpec gaussian_with_area(double t_on, double peak_rabi, double area);

/// Write/read schedule built from the same envelope for both stages, read
/// starting at local time 0.
ControlSchedule symmetric_schedule(const PulseSpec& write, double storage_time);

}  // namespace srmem
