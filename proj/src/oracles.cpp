#include "srmem/oracles.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace srmem {

namespace {

constexpr double pi = std::numbers::pi;
constexpr cplx I{0.0, 1.0};

// Planner calls are not thread safe; execution is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

class FftBuffer {
public:
    explicit FftBuffer(std::size_t n) : m_n(n)
    {
        m_data = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        require(m_data != nullptr, "fft: allocation failed");
        std::lock_guard<std::mutex> lock(planner_mutex());
        const int len = static_cast<int>(n);
        m_forward = fftw_plan_dft_1d(len, m_data, m_data, FFTW_FORWARD, FFTW_ESTIMATE);
        m_backward = fftw_plan_dft_1d(len, m_data, m_data, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftBuffer()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(m_forward);
        fftw_destroy_plan(m_backward);
        fftw_free(m_data);
    }
    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;

    cplx* data() { return reinterpret_cast<cplx*>(m_data); }
    std::size_t size() const { return m_n; }
    void forward() { fftw_execute(m_forward); }
    void backward() { fftw_execute(m_backward); }

private:
    std::size_t m_n;
    fftw_complex* m_data = nullptr;
    fftw_plan m_forward = nullptr;
    fftw_plan m_backward = nullptr;
};

std::size_t next_pow2(double x)
{
    std::size_t n = 1;
    while (static_cast<double>(n) < x) {
        n <<= 1;
    }
    return n;
}

// Spectrum of the intensity envelope, F(w) = int I(t) exp(-i w t) dt, with
// the time origin at the switch-off / centre.
cplx intensity_spectrum(const PulseSpec& probe, double w)
{
    if (const auto* r = std::get_if<RisingExponential>(&probe)) {
        const double i0 = r->peak * r->peak;
        cplx f = i0 * r->t_rise / (1.0 - I * w * r->t_rise);
        if (r->t_fall > 0.0) {
            f += i0 * r->t_fall / (1.0 + I * w * r->t_fall);
        }
        return f;
    }
    if (const auto* g = std::get_if<Gaussian>(&probe)) {
        // |a|^2 is Gaussian with FWHM fwhm/sqrt(2) and sigma^2 = fwhm^2/(16 ln 2).
        const double sigma2 = g->fwhm * g->fwhm / (16.0 * std::log(2.0));
        return g->peak * g->peak * std::sqrt(2.0 * pi * sigma2) * std::exp(-0.5 * sigma2 * w * w);
    }
    if (const auto* s = std::get_if<Square>(&probe)) {
        const double len = s->t_off - s->t_on;
        const double x = 0.5 * w * len;
        const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
        return s->amplitude * s->amplitude * len * sinc;
    }
    const auto& smp = std::get<Samples>(probe);
    // Exact transform of the piecewise-linear intensity between samples.
    cplx f{};
    for (std::size_t k = 1; k < smp.t.size(); ++k) {
        const double a = smp.t[k - 1];
        const double b = smp.t[k];
        const double ia = std::norm(smp.amp[k - 1]);
        const double ib = std::norm(smp.amp[k]);
        const double h = b - a;
        if (h <= 0.0) {
            continue;
        }
        if (std::abs(w * h) < 1e-6) {
            f += 0.5 * h * (ia + ib) * std::exp(-I * w * 0.5 * (a + b));
            continue;
        }
        const cplx ea = std::exp(-I * w * a);
        const cplx eb = std::exp(-I * w * b);
        const double slope = (ib - ia) / h;
        // int (ia + slope (t - a)) e^{-iwt} dt over [a, b]
        f += (ia * ea - ib * eb) / (I * w) + slope * (eb - ea) / (w * w);
    }
    return f;
}

double half_max_crossing(const PulseSpec& probe, double sign, double level, double scale)
{
    // Walk outwards on a fine grid checking that |F| decreases, then bisect.
    const int steps_per_scale = 400;
    const double step = scale / steps_per_scale;
    double prev = std::abs(intensity_spectrum(probe, 0.0));
    double w = 0.0;
    for (int i = 1; i < 1000 * steps_per_scale; ++i) {
        const double wn = sign * step * i;
        const double v = std::abs(intensity_spectrum(probe, wn));
        if (v > prev * (1.0 + 1e-12)) {
            throw Error("bandwidth_fwhm: intensity spectrum is not unimodal");
        }
        if (v <= level) {
            double lo = w;
            double hi = wn;
            for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-14 * std::abs(hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (std::abs(intensity_spectrum(probe, mid)) > level) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev = v;
        w = wn;
    }
    throw Error("bandwidth_fwhm: no half-maximum crossing found");
}

}  // namespace

cplx LinearResponse::operator()(double delta) const { return std::exp(-0.5 * d / (1.0 + I * delta)); }

std::vector<cplx> LinearResponse::evaluate(std::span<const double> delta) const
{
    std::vector<cplx> out(delta.size());
    std::transform(delta.begin(), delta.end(), out.begin(), [this](double x) { return (*this)(x); });
    return out;
}

Transmission analytic_transmission(const MediumParams& medium, const PulseSpec& probe, double t0, double dt,
                                   std::size_t n)
{
    medium.validate();
    validate(probe);
    require(dt > 0.0 && std::isfinite(dt) && n >= 2, "analytic_transmission: need dt > 0 and n >= 2");

    // Zero pad to 8x the record and resolve the detuning axis to 1/50.
    const std::size_t len = next_pow2(std::max(8.0 * static_cast<double>(n), 100.0 * pi / dt));
    FftBuffer buf(len);
    cplx* x = buf.data();
    Transmission out;
    out.tau.resize(n);
    out.e_in.resize(n);
    double e_in_energy = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        x[i] = 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + dt * static_cast<double>(i);
        out.tau[i] = t;
        out.e_in[i] = amplitude(probe, t);
        x[i] = out.e_in[i];
        e_in_energy += std::norm(out.e_in[i]);
    }
    e_in_energy *= dt;
    require(e_in_energy > 0.0, "analytic_transmission: probe has no energy on the grid");

    buf.forward();
    // FFTW_FORWARD uses exp(-i w t); component k multiplies exp(+i w_k t).
    const LinearResponse H{medium.d};
    const double dw = 2.0 * pi / (static_cast<double>(len) * dt);
    for (std::size_t k = 0; k < len; ++k) {
        const double kk = k < len / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(len);
        x[k] *= H(kk * dw) / static_cast<double>(len);
    }
    buf.backward();

    out.e_out.assign(x, x + n);
    double tail = 0.0;
    for (std::size_t i = n; i < len; ++i) {
        tail += std::norm(x[i]);
    }
    out.tail_fraction = tail * dt / e_in_energy;
    if (out.tail_fraction > 1e-6) {
        std::ostringstream os;
        os << "analytic_transmission: time grid too short, " << out.tail_fraction
           << " of the input energy is emitted after the last sample";
        throw Error(os.str());
    }
    return out;
}

Transmission analytic_transmission(const MediumParams& medium, const PulseSpec& probe,
                                   std::span<const double> times)
{
    require(times.size() >= 2, "analytic_transmission: need at least two times");
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double step = times[i] - times[i - 1];
        require(std::abs(step - dt) <= 1e-9 * std::max(1.0, std::abs(dt)) + 1e-12 * std::abs(times[i]),
                "analytic_transmission: times must be uniformly spaced");
    }
    return analytic_transmission(medium, probe, times.front(), dt, times.size());
}

double optimal_probe_duration(double d, double Gamma)
{
    require(std::isfinite(d) && d >= 0.0, "optimal_probe_duration: d must be >= 0");
    require(std::isfinite(Gamma) && Gamma > 0.0, "optimal_probe_duration: Gamma must be > 0");
    return (1.0 / Gamma) / (1.0 + d / 4.0);
}

double bandwidth_fwhm(const PulseSpec& probe)
{
    validate(probe);
    const double f0 = std::abs(intensity_spectrum(probe, 0.0));
    require(f0 > 0.0, "bandwidth_fwhm: pulse has no energy");
    const double width = std::max(intensity_fwhm(probe), 1e-300);
    const double scale = 1.0 / width;
    const double hi = half_max_crossing(probe, +1.0, 0.5 * f0, scale);
    const double lo = half_max_crossing(probe, -1.0, 0.5 * f0, scale);
    return (hi - lo) / (2.0 * pi);
}

WritingSolution writing_stage_solution(const MediumParams& medium, double rabi, double duration,
                                       std::span<const cplx> p0, std::span<const double> times)
{
    medium.validate();
    const double a = 1.0 + medium.d;
    if (!(rabi > a)) {
        std::ostringstream os;
        os << "writing_stage_solution: control Rabi frequency " << rabi << " gamma is outside the fast regime "
           << "(requires W >> gamma(1 + d) = " << a << " gamma)";
        throw Error(os.str());
    }
    require(duration > 0.0 && std::isfinite(duration), "writing_stage_solution: duration must be > 0");

    auto p_of = [&](double t) { return cplx{std::exp(-0.5 * a * t) * std::cos(0.5 * rabi * t), 0.0}; };
    auto s_of = [&](double t) {
        const double decay = std::exp(-0.5 * a * t);
        const double c = std::cos(0.5 * rabi * t);
        const double s = std::sin(0.5 * rabi * t);
        return I * rabi / (a * a + rabi * rabi) * (a + decay * (rabi * s - a * c));
    };

    WritingSolution sol;
    sol.damping = a;
    sol.tau.assign(times.begin(), times.end());
    for (double t : times) {
        sol.p_ratio.push_back(p_of(t));
        sol.s_ratio.push_back(s_of(t));
    }
    sol.transfer = s_of(duration);
    const cplx p_end = p_of(duration);
    for (const cplx& v : p0) {
        sol.s_final.push_back(sol.transfer * v);
        sol.p_final.push_back(p_end * v);
    }
    return sol;
}

ControlShape control_shape_from_string(const std::string& s)
{
    if (s == "square") {
        return ControlShape::square;
    }
    if (s == "gaussian") {
        return ControlShape::gaussian;
    }
    throw Error("unknown control shape '" + s + "'");
}

ControlRequirement fast_control_requirement(double d, double gamma, ControlShape shape)
{
    require(std::isfinite(d) && d >= 0.0, "fast_control_requirement: d must be >= 0");
    require(std::isfinite(gamma) && gamma > 0.0, "fast_control_requirement: gamma must be > 0");
    ControlRequirement r;
    if (shape == ControlShape::square) {
        const double t_sr = optimal_probe_duration(d, 2.0 * gamma);
        r.duration = t_sr / 10.0;
        r.rabi = pi / r.duration;
    } else {
        r.rabi = 24.0 * gamma * (1.0 + d / 4.0);
        r.duration = pi / (r.rabi * gaussian_area_factor());
    }
    return r;
}

}  // namespace srmem
