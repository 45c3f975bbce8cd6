#include <cmath>

#include "doctest.h"
#include "srmem/optimize.hpp"

using namespace srmem;

TEST_CASE("golden section finds a quadratic optimum")
{
    const ScalarOptimum o = optimize_scalar([](double x) { return -(x - 1.7) * (x - 1.7); }, 0.0, 5.0);
    CHECK(o.unimodal);
    CHECK(o.x == doctest::Approx(1.7).epsilon(1e-3));
    CHECK(o.f <= 0.0);
    CHECK(o.evaluations == static_cast<int>(o.history.size()));

    ScalarOptions mn;
    mn.maximize = false;
    mn.log_scale = true;
    mn.rel_tol = 1e-5;
    const ScalarOptimum m = optimize_scalar([](double x) { return std::pow(std::log(x / 42.0), 2); }, 1.0, 1e4, mn);
    CHECK(m.x == doctest::Approx(42.0).epsilon(1e-4));
}

TEST_CASE("non-unimodal bracket falls back to a scan")
{
    // Two peaks; the higher one sits near the upper end.
    auto f = [](double x) { return std::exp(-(x - 1.0) * (x - 1.0) * 20.0) + 2.0 * std::exp(-(x - 9.0) * (x - 9.0)); };
    ScalarOptions o;
    o.scan_points = 41;
    const ScalarOptimum r = optimize_scalar(f, 0.0, 10.0, o);
    CHECK_FALSE(r.unimodal);
    CHECK_FALSE(r.note.empty());
    CHECK(r.x == doctest::Approx(9.0).epsilon(1e-2));
}

TEST_CASE("optimizer input validation")
{
    auto f = [](double x) { return x; };
    CHECK_THROWS(optimize_scalar(f, 2.0, 1.0));
    ScalarOptions o;
    o.log_scale = true;
    CHECK_THROWS(optimize_scalar(f, -1.0, 1.0, o));
}
