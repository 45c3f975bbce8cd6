#include <cmath>
#include <numbers>

#include "doctest.h"
#include "srmem/control.hpp"

using namespace srmem;
using std::numbers::pi;

TEST_CASE("square control area and window")
{
    const PulseSpec w = square_with_area(1.5, 250.0, pi);
    const auto [a, b] = support(w);
    CHECK(a == doctest::Approx(1.5));
    CHECK(b - a == doctest::Approx(pi / 250.0));
    CHECK(pulse_area(w) == doctest::Approx(pi));

    const PulseSpec unit = square_window(0.0, 0.2);
    CHECK(pulse_area(unit, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("gaussian control calibrated by area, not peak")
{
    for (double area : {pi / 2, pi, 2 * pi}) {
        const PulseSpec g = gaussian_with_area(0.0, 80.0, area);
        CHECK(pulse_area(g) == doctest::Approx(area).epsilon(1e-9));
        CHECK(peak_amplitude(g) == doctest::Approx(80.0));
        const auto* gs = std::get_if<Gaussian>(&g);
        REQUIRE(gs != nullptr);
        // Area = peak * fwhm * sqrt(pi / ln 16).
        CHECK(gs->fwhm == doctest::Approx(area / (80.0 * std::sqrt(pi / std::log(16.0)))));
    }
}

TEST_CASE("schedule rabi scaling")
{
    ControlSchedule c = symmetric_schedule(square_window(0.0, 0.01), 3.0);
    c.rabi_scale = 100.0 * pi;
    CHECK(c.write_area() == doctest::Approx(pi));
    CHECK(c.read_area() == doctest::Approx(pi));
    CHECK(c.peak_rabi() == doctest::Approx(100.0 * pi));
    CHECK(c.storage_time == 3.0);
    CHECK_NOTHROW(c.validate());

    c.storage_time = -1.0;
    CHECK_THROWS_AS(c.validate(), Error);
}
