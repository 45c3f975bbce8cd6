#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "srmem/fitting.hpp"

using namespace srmem;
using std::numbers::pi;

namespace {

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = a + (b - a) * i / (n - 1);
    }
    return v;
}

// Central differences of r against the analytic Jacobian.
double jacobian_mismatch(const ResidualFn& fn, std::size_t m, std::vector<double> x)
{
    const std::size_t n = x.size();
    std::vector<double> r(m), J(m * n), rp(m), rm(m);
    fn(x, r, J);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
        std::vector<double> xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        fn(xp, rp, {});
        fn(xm, rm, {});
        for (std::size_t i = 0; i < m; ++i) {
            const double fd = (rp[i] - rm[i]) / (2.0 * h);
            const double an = J[i * n + k];
            worst = std::max(worst, std::abs(fd - an) / std::max(1e-8, std::abs(an)));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("exponential decay is recovered exactly")
{
    const auto t = linspace(0.0, 30.0, 60);
    std::vector<double> y;
    for (double v : t) {
        y.push_back(std::exp(-v / 8.0));
    }
    const FitResult f = fit_exp_decay(t, y);
    CHECK(f.converged);
    CHECK(f.value("T") == doctest::Approx(8.0).epsilon(1e-6));
    CHECK(f.value("amplitude") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(f.stderr_of("T") >= 0.0);

    // The window only selects points.
    const FitResult w = fit_exp_decay(t, y, Window{5.0, 20.0});
    CHECK(w.value("T") == doctest::Approx(8.0).epsilon(1e-6));
    CHECK_THROWS_AS(fit_exp_decay(t, y, Window{0.0, 1.0}), Error);
}

TEST_CASE("exponential fit is scale equivariant")
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 0.02);
    const auto t = linspace(0.0, 5.0, 40);
    std::vector<double> y, y3;
    for (double v : t) {
        y.push_back(2.0 * std::exp(-v / 1.3) * (1.0 + noise(rng)));
    }
    for (double v : y) {
        y3.push_back(7.5 * v);
    }
    const FitResult a = fit_exp_decay(t, y);
    const FitResult b = fit_exp_decay(t, y3);
    CHECK(std::abs(b.value("T") - a.value("T")) <= 1e-10 * a.value("T"));
    CHECK(std::abs(b.value("amplitude") - 7.5 * a.value("amplitude")) <= 1e-10 * b.value("amplitude"));
}

TEST_CASE("lorentzian optical depth profile")
{
    const double Gamma = 2 * pi * 6.2;
    const auto delta = linspace(-60.0, 60.0, 41);
    std::vector<double> od;
    for (double x : delta) {
        od.push_back(7.0 / (1.0 + 4.0 * (x / Gamma) * (x / Gamma)));
    }
    const FitResult f = fit_lorentzian_od(delta, od);
    CHECK(f.value("d_res") == doctest::Approx(7.0).epsilon(1e-8));
    CHECK(f.value("Gamma") == doctest::Approx(Gamma).epsilon(1e-8));
    // Half maximum at delta = Gamma / 2.
    CHECK(7.0 / (1.0 + 4.0 * 0.25) == doctest::Approx(3.5));

    // Saturated detection near resonance is clipped and excluded.
    std::vector<double> clipped = od;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        if (std::abs(delta[i]) < 3.0 * 2 * pi) {
            clipped[i] = std::min(clipped[i], 5.6);
        }
    }
    const FitResult g = fit_lorentzian_od(delta, clipped, 3.0 * 2 * pi);
    CHECK(g.value("d_res") == doctest::Approx(7.0).epsilon(1e-6));
    const FitResult bad = fit_lorentzian_od(delta, clipped);
    CHECK(bad.value("d_res") < 6.9);

    // Scaling od scales d_res only.
    std::vector<double> od2;
    for (double v : od) {
        od2.push_back(0.5 * v);
    }
    const FitResult h = fit_lorentzian_od(delta, od2);
    CHECK(h.value("d_res") == doctest::Approx(3.5).epsilon(1e-10));
    CHECK(h.value("Gamma") == doctest::Approx(f.value("Gamma")).epsilon(1e-10));

    CHECK_THROWS_AS(fit_lorentzian_od(delta, std::vector<double>(delta.size(), 1.0)), Error);
}

TEST_CASE("superradiant time versus optical depth")
{
    const double Gamma = 2 * pi * 6.07e6;
    const std::vector<double> d{1.5, 3.5, 5.0, 9.0};
    std::vector<double> t;
    for (double v : d) {
        t.push_back(1e9 / Gamma / (1.0 + v / 4.0));
    }
    const FitResult f = fit_tsr_vs_d(d, t);
    CHECK(f.value("Gamma_eff") * 1e9 == doctest::Approx(Gamma).epsilon(1e-8));
    CHECK(1.0 / f.value("Gamma_eff") / (1.0 + 9.0 / 4.0) == doctest::Approx(8.1).epsilon(0.01));
    CHECK_THROWS_AS(fit_tsr_vs_d(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 0.5}), Error);
}

TEST_CASE("analytic jacobians match finite differences")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    const auto t = linspace(0.0, 4.0, 25);
    const auto delta = linspace(-10.0, 10.0, 25);
    const std::vector<double> d{1.0, 3.0, 9.0, 20.0};
    for (int k = 0; k < 20; ++k) {
        CHECK(jacobian_mismatch(exp_decay_residuals(t, std::vector<double>(25, 1.0)), 25, {u(rng), u(rng)}) < 1e-6);
        CHECK(jacobian_mismatch(lorentzian_residuals(delta, std::vector<double>(25, 1.0)), 25,
                                {5 * u(rng), 3 * u(rng)}) < 1e-6);
        CHECK(jacobian_mismatch(tsr_residuals(d, std::vector<double>(4, 0.1)), 4, {u(rng)}) < 1e-6);
    }
}

TEST_CASE("lifetime recovered under multiplicative noise")
{
    // 4.2 us intensity lifetime sampled out to 6.2 us, 5% noise.
    const auto t = linspace(0.2, 6.2, 12);
    int inside = 0;
    const int seeds = 100;
    for (int seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 0.05);
        std::vector<double> y;
        for (double v : t) {
            y.push_back(0.015 * std::exp(-v / 4.2) * (1.0 + noise(rng)));
        }
        const FitResult f = fit_exp_decay(t, y);
        if (std::abs(f.value("T") - 4.2) <= 3.0 * f.stderr_of("T")) {
            ++inside;
        }
    }
    CHECK(inside >= 95);
}

TEST_CASE("two column input")
{
    std::istringstream in("# header\nt,y\n0, 1.5\n1 2.5  # trailing\n\n2\t3.5\n");
    const Columns c = read_two_columns(in);
    REQUIRE(c.x.size() == 3);
    CHECK(c.x[2] == 2.0);
    CHECK(c.y[1] == 2.5);
    std::istringstream bad("1 2\n3\n");
    CHECK_THROWS_AS(read_two_columns(bad), Error);
}

TEST_CASE("fit report text")
{
    const auto t = linspace(0.0, 3.0, 10);
    std::vector<double> y;
    for (double v : t) {
        y.push_back(std::exp(-v));
    }
    const std::string s = format_fit(fit_exp_decay(t, y));
    CHECK(s.find("T = ") != std::string::npos);
    CHECK(s.find("+-") != std::string::npos);
}
