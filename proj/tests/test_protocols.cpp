#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nlohmann/json.hpp"
#include "srmem/protocols.hpp"

using namespace srmem;
using std::numbers::pi;

namespace {

RunOptions lean()
{
    RunOptions o;
    o.keep_series = false;
    return o;
}

ProtocolReport sr_fast(double d, const PulseSpec& probe, Retrieval dir, double rabi = std::nan(""))
{
    const MediumParams m{d, 1.0, 0.0, 0.0};
    SrControl c;
    c.rabi = rabi;
    return run_sr(m, probe, sr_schedule(m, probe, c), dir, lean());
}

}  // namespace

TEST_CASE("loss fractions account for the input")
{
    const ProtocolReport r = sr_fast(9.0, exponential_probe(optimal_probe_duration(9.0, 2.0)), Retrieval::forward);
    CHECK(r.eta_total > 0.0);
    CHECK(r.eta_total < 1.0);
    for (double v : {r.eta_transmission_loss, r.eta_sr_leakage, r.eta_decoherence_loss, r.residual_polariton}) {
        CHECK(v >= -1e-12);
    }
    CHECK(r.accounted() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(r.ledger_residual) <= 1e-4);
    CHECK(r.params.at("T_SR") == doctest::Approx(superradiant_time(9.0, 2.0)));
}

TEST_CASE("no control, no retrieval")
{
    const MediumParams m{9.0, 1.0, 0.0, 0.0};
    const PulseSpec probe = exponential_probe(0.1);
    ControlSchedule c = sr_schedule(m, probe, SrControl{});
    c.rabi_scale = 0.0;
    const ProtocolReport r = run_sr(m, probe, c, Retrieval::forward, lean());
    CHECK(r.eta_total == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("backward recall beats forward recall")
{
    for (double d : {9.0, 50.0}) {
        CAPTURE(d);
        const PulseSpec probe = exponential_probe(optimal_probe_duration(d, 2.0));
        const double fwd = sr_fast(d, probe, Retrieval::forward).eta_total;
        const double bwd = sr_fast(d, probe, Retrieval::backward).eta_total;
        CHECK(bwd >= fwd);
    }
}

TEST_CASE("leakage falls as the control gets faster")
{
    // Abrupt switch-off, so the probe tail cannot arrive after the write pulse.
    const double d = 9.0;
    const PulseSpec probe = exponential_probe(optimal_probe_duration(d, 2.0), 0.0);
    double previous = 1.0;
    for (double rabi : {20.0, 40.0, 80.0, 160.0, 320.0, 640.0, 1280.0}) {
        CAPTURE(rabi);
        const double leak = sr_fast(d, probe, Retrieval::forward, rabi).eta_sr_leakage;
        CHECK(leak < previous);
        previous = leak;
    }
}

TEST_CASE("rising exponential is the best probe shape")
{
    for (double d : {9.0, 50.0}) {
        CAPTURE(d);
        const PulseSpec expo = normalized(exponential_probe(optimal_probe_duration(d, 2.0)));
        const double fwhm = intensity_fwhm(expo);
        const PulseSpec gauss = normalized(Gaussian{fwhm * std::sqrt(2.0), -fwhm * std::sqrt(2.0), 1.0});
        const PulseSpec square = normalized(Square{-fwhm, 0.0, 1.0});
        CHECK(intensity_fwhm(gauss) == doctest::Approx(fwhm));
        CHECK(intensity_fwhm(square) == doctest::Approx(fwhm));
        const double e = sr_fast(d, expo, Retrieval::backward).eta_total;
        CHECK(e > sr_fast(d, gauss, Retrieval::backward).eta_total);
        CHECK(e > sr_fast(d, square, Retrieval::backward).eta_total);
    }
}

TEST_CASE("memory lifetime follows the spin decay")
{
    const double gs = 0.02;
    const MediumParams m{9.0, 1.0, gs, 0.0};
    const PulseSpec probe = exponential_probe(optimal_probe_duration(9.0, 2.0));
    const ControlSchedule c = sr_schedule(m, probe, SrControl{});
    const std::vector<double> ts{0.0, 10.0, 20.0, 25.0, 40.0, 60.0};
    const LifetimeCurve curve = memory_lifetime_curve(m, probe, c, ts, Retrieval::forward, lean());
    CHECK(curve.model_lifetime == doctest::Approx(25.0));
    CHECK(curve.lifetime == doctest::Approx(25.0).epsilon(0.01));
    for (std::size_t i = 0; i < ts.size(); ++i) {
        CHECK(curve.eta[i] == doctest::Approx(curve.eta[0] * std::exp(-2.0 * gs * ts[i])).epsilon(0.01));
    }
    // At T_s = T_Mem the efficiency has dropped by e.
    CHECK(curve.eta[3] == doctest::Approx(curve.eta[0] / std::exp(1.0)).epsilon(0.01));

    const MediumParams frozen{9.0, 1.0, 0.0, 0.0};
    const LifetimeCurve flat = memory_lifetime_curve(frozen, probe, c, ts, Retrieval::forward, lean());
    for (double v : flat.eta) {
        CHECK(v == doctest::Approx(flat.eta[0]).epsilon(1e-12));
    }
    CHECK(std::isinf(flat.lifetime));

    const MediumParams fast{9.0, 1.0, 1.0, 0.0};
    CHECK_THROWS_AS(memory_lifetime_curve(fast, probe, c, std::vector<double>{0, 1, 2, 3, 100}), Error);
}

TEST_CASE("ATS and EIT schedules with fixed settings")
{
    const MediumParams m{50.0, 1.0, 0.0, 0.0};
    const PulseSpec probe = exponential_probe(0.1);

    AtsSettings a;
    a.area = 2 * pi;
    a.window_energy = 0.99;
    const ProtocolReport ats = run_ats(m, probe, Retrieval::backward, a, lean());
    CHECK(ats.protocol == Protocol::ats);
    CHECK(ats.eta_total > 0.0);
    CHECK(ats.accounted() == doctest::Approx(1.0).epsilon(1e-4));
    const auto win = energy_window(probe, 0.99);
    CHECK(ats.params.at("rabi") == doctest::Approx(2 * pi / (win.second - win.first)));

    EitSettings e;
    e.rabi = 20.0;
    e.ramp = 0.05;
    const ProtocolReport eit = run_eit(m, probe, Retrieval::backward, e, lean());
    CHECK(eit.protocol == Protocol::eit);
    CHECK(eit.eta_total > 0.0);
    CHECK(eit.accounted() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("energy window")
{
    const PulseSpec sq = Square{0.0, 2.0, 1.0};
    const auto [a, b] = energy_window(sq, 0.5);
    CHECK(b - a == doctest::Approx(1.0).epsilon(1e-3));
    // Rising exponential: the shortest window ends near the peak.
    const auto [c, e] = energy_window(RisingExponential{1.0, 0.0, 0.0, 1.0}, 1.0 - std::exp(-3.0));
    CHECK(c == doctest::Approx(-3.0).epsilon(1e-3));
    CHECK(e == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("report serialization")
{
    const ProtocolReport r = sr_fast(9.0, exponential_probe(optimal_probe_duration(9.0, 2.0)), Retrieval::forward);
    const auto j = nlohmann::json::parse(to_json(r, false));
    CHECK(j.at("protocol") == "SR");
    CHECK(j.at("direction") == "forward");
    CHECK(j.at("eta_total").get<double>() == doctest::Approx(r.eta_total));
    CHECK(j.at("losses").contains("sr_leakage"));
    CHECK(j.at("params").contains("d"));
    CHECK_FALSE(j.contains("series"));
    CHECK(adiabaticity_parameter(r) == doctest::Approx(9.0 * optimal_probe_duration(9.0, 2.0)));
    CHECK(protocol_from_string("eit") == Protocol::eit);
    CHECK_THROWS_AS(protocol_from_string("gem"), Error);
}

TEST_CASE("intensity decay fit of a sampled tail")
{
    std::vector<double> t;
    std::vector<cplx> e;
    for (int i = 0; i < 400; ++i) {
        const double x = i * 0.01;
        t.push_back(x);
        // Rise to a peak at 0.5, then intensity decay time 0.3.
        const double env = x < 0.5 ? x / 0.5 : std::exp(-(x - 0.5) / 0.6);
        e.push_back(cplx(0.0, env));
    }
    CHECK(fit_intensity_decay(t, e) == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(std::isnan(fit_intensity_decay(std::vector<double>{0.0, 1.0}, std::vector<cplx>{1.0, 0.5})));
}
