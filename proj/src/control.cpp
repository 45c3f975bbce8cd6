#include "srmem/control.hpp"

#include <algorithm>
#include <cmath>

namespace srmem {

void ControlSchedule::validate() const
{
    srmem::validate(write);
    srmem::validate(read);
    require(std::isfinite(storage_time) && storage_time >= 0.0, "ControlSchedule: storage_time must be >= 0");
    require(std::isfinite(rabi_scale), "ControlSchedule: rabi_scale must be finite");
    require(read_window().first >= 0.0, "ControlSchedule: read pulse must start after the storage interval");
}

std::pair<double, double> ControlSchedule::write_window() const { return support(write); }

std::pair<double, double> ControlSchedule::read_window() const { return support(read); }

double ControlSchedule::peak_rabi() const
{
    return std::abs(rabi_scale) * std::max(peak_amplitude(write), peak_amplitude(read));
}

PulseSpec square_window(double t_on, double duration)
{
    require(duration >= 0.0, "square_window: negative duration");
    return Square{t_on, t_on + duration, 1.0};
}

PulseSpec square_with_area(double t_on, double rabi, double area)
{
    require(rabi > 0.0 && area >= 0.0, "square_with_area: rabi must be > 0 and area >= 0");
    return Square{t_on, t_on + area / rabi, rabi};
}

PulseSpec gaussian_with_area(double t_on, double peak_rabi, double area)
{
    require(peak_rabi > 0.0 && area > 0.0, "gaussian_with_area: rabi and area must be > 0");
    const double fwhm = area / (peak_rabi * gaussian_area_factor());
    Gaussian g{fwhm, 0.0, peak_rabi};
    const double start = support(g).first;
    g.t_center = t_on - start;
    return g;
}

ControlSchedule symmetric_schedule(const PulseSpec& write, double storage_time)
{
    ControlSchedule c;
    c.write = write;
    c.read = shifted(write, -support(write).first);
    c.storage_time = storage_time;
    c.rabi_scale = 1.0;
    return c;
}

}  // namespace srmem
