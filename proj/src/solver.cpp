#include "srmem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace srmem {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double probe_start_tolerance = 1e-7;

std::vector<double> segment_times(double t0, double t1, double dt, std::vector<double> breaks)
{
    breaks.push_back(t0);
    breaks.push_back(t1);
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> knots;
    for (double b : breaks) {
        if (b < t0 || b > t1) {
            continue;
        }
        if (!knots.empty() && b - knots.back() < 1e-9 * dt) {
            continue;
        }
        knots.push_back(b);
    }
    std::vector<double> times{knots.front()};
    for (std::size_t k = 1; k < knots.size(); ++k) {
        const double len = knots[k] - knots[k - 1];
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / dt - 1e-9)));
        for (std::size_t i = 1; i < n; ++i) {
            times.push_back(knots[k - 1] + len * static_cast<double>(i) / static_cast<double>(n));
        }
        times.push_back(knots[k]);
    }
    return times;
}

std::vector<double> pulse_breaks(const PulseSpec& p)
{
    auto b = breakpoints(p);
    return b;
}

// Exclusive prefix sum c[j] = x[0] + ... + x[j-1]; returns the total. Four
// interleaved blocks keep the dependency chains independent.
double exclusive_prefix(const double* x, double* c, std::size_t n)
{
    const std::size_t m = n / 4;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    const double* x0 = x;
    const double* x1 = x + m;
    const double* x2 = x + 2 * m;
    const double* x3 = x + 3 * m;
    double* c0 = c;
    double* c1 = c + m;
    double* c2 = c + 2 * m;
    double* c3 = c + 3 * m;
    for (std::size_t i = 0; i < m; ++i) {
        c0[i] = a0;
        a0 += x0[i];
        c1[i] = a1;
        a1 += x1[i];
        c2[i] = a2;
        a2 += x2[i];
        c3[i] = a3;
        a3 += x3[i];
    }
    for (std::size_t i = 4 * m; i < n; ++i) {
        c[i] = a3;
        a3 += x[i];
    }
    const double o1 = a0;
    const double o2 = o1 + a1;
    const double o3 = o2 + a2;
    for (std::size_t i = 0; i < m; ++i) {
        c1[i] += o1;
        c2[i] += o2;
    }
    for (std::size_t i = 3 * m; i < n; ++i) {
        c[i] += o3;
    }
    return o3 + a3;
}

}  // namespace

const char* to_string(Retrieval r)
{
    switch (r) {
    case Retrieval::none:
        return "none";
    case Retrieval::forward:
        return "forward";
    case Retrieval::backward:
        return "backward";
    }
    return "none";
}

Retrieval retrieval_from_string(const std::string& s)
{
    if (s == "none") {
        return Retrieval::none;
    }
    if (s == "forward") {
        return Retrieval::forward;
    }
    if (s == "backward") {
        return Retrieval::backward;
    }
    throw Error("unknown retrieval direction '" + s + "'");
}

double FieldRecord::transmitted_between(double t0, double t1) const
{
    if (tau.empty() || t1 <= t0) {
        return 0.0;
    }
    auto at = [this](double t) {
        if (t <= tau.front()) {
            return transmitted_cumulative.front();
        }
        if (t >= tau.back()) {
            return transmitted_cumulative.back();
        }
        auto it = std::upper_bound(tau.begin(), tau.end(), t);
        const auto i = static_cast<std::size_t>(it - tau.begin());
        const double span = tau[i] - tau[i - 1];
        if (span <= 0.0) {
            return transmitted_cumulative[i];
        }
        const double w = (t - tau[i - 1]) / span;
        return (1.0 - w) * transmitted_cumulative[i - 1] + w * transmitted_cumulative[i];
    };
    return at(t1) - at(t0);
}

void Integrator::Buffers::resize(std::size_t n)
{
    pr.assign(n, 0.0);
    pi.assign(n, 0.0);
    sr.assign(n, 0.0);
    si.assign(n, 0.0);
}

Integrator::Integrator(const MediumParams& medium, int nz)
    : m_n(static_cast<std::size_t>(std::max(nz, 2) - 1)),
      m_h(1.0 / static_cast<double>(std::max(nz, 2) - 1)),
      m_k(medium.coupling()),
      m_gs(medium.spin_decay())
{
    medium.validate();
    require(nz >= 2, "Integrator: nz must be >= 2");
    for (Buffers* b : {&m_y, &m_x, &m_acc, &m_next}) {
        b->resize(m_n);
    }
    m_cr.assign(m_n, 0.0);
    m_ci.assign(m_n, 0.0);
}

std::vector<cplx> Integrator::p() const
{
    std::vector<cplx> out(m_n);
    for (std::size_t j = 0; j < m_n; ++j) {
        out[j] = {m_y.pr[j], m_y.pi[j]};
    }
    return out;
}

std::vector<cplx> Integrator::s() const
{
    std::vector<cplx> out(m_n);
    for (std::size_t j = 0; j < m_n; ++j) {
        out[j] = {m_y.sr[j], m_y.si[j]};
    }
    return out;
}

void Integrator::set_state(std::span<const cplx> p, std::span<const cplx> s)
{
    require(p.size() == m_n && s.size() == m_n, "Integrator::set_state: size mismatch");
    for (std::size_t j = 0; j < m_n; ++j) {
        m_y.pr[j] = p[j].real();
        m_y.pi[j] = p[j].imag();
        m_y.sr[j] = s[j].real();
        m_y.si[j] = s[j].imag();
    }
}

std::vector<cplx> Integrator::field(cplx e0) const
{
    std::vector<cplx> e(m_n + 1);
    e[0] = e0;
    const cplx ikh = I * m_k * m_h;
    for (std::size_t j = 0; j < m_n; ++j) {
        e[j + 1] = e[j] + ikh * cplx{m_y.pr[j], m_y.pi[j]};
    }
    return e;
}

void Integrator::clear_polarization()
{
    std::fill(m_y.pr.begin(), m_y.pr.end(), 0.0);
    std::fill(m_y.pi.begin(), m_y.pi.end(), 0.0);
}

void Integrator::scale_spin(double factor)
{
    for (std::size_t j = 0; j < m_n; ++j) {
        m_y.sr[j] *= factor;
        m_y.si[j] *= factor;
    }
}

void Integrator::reverse_spin()
{
    std::reverse(m_y.sr.begin(), m_y.sr.end());
    std::reverse(m_y.si.begin(), m_y.si.end());
}

double Integrator::polarization_energy() const
{
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = 0; j < m_n; ++j) {
        acc += m_y.pr[j] * m_y.pr[j] + m_y.pi[j] * m_y.pi[j];
    }
    return m_h * acc;
}

double Integrator::spin_energy() const
{
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = 0; j < m_n; ++j) {
        acc += m_y.sr[j] * m_y.sr[j] + m_y.si[j] * m_y.si[j];
    }
    return m_h * acc;
}

template <bool InitAcc, bool WriteNext>
Integrator::Flux Integrator::stage(const Buffers& x, cplx e0, cplx w, double h, double wa, double wn)
{
    const std::size_t n = m_n;
    const double tot_r = exclusive_prefix(x.pr.data(), m_cr.data(), n);
    const double tot_i = exclusive_prefix(x.pi.data(), m_ci.data(), n);
    const double k = m_k;
    const double kappa = m_k * m_h;
    const double e0r = e0.real();
    const double e0i = e0.imag();
    const double hwr = 0.5 * w.real();
    const double hwi = 0.5 * w.imag();
    const double gs = m_gs;
    const double ha = wa * h;
    const double hn = wn * h;

    const double* __restrict xpr = x.pr.data();
    const double* __restrict xpi = x.pi.data();
    const double* __restrict xsr = x.sr.data();
    const double* __restrict xsi = x.si.data();
    const double* __restrict cr = m_cr.data();
    const double* __restrict ci = m_ci.data();
    const double* __restrict ypr = m_y.pr.data();
    const double* __restrict ypi = m_y.pi.data();
    const double* __restrict ysr = m_y.sr.data();
    const double* __restrict ysi = m_y.si.data();
    double* __restrict apr = m_acc.pr.data();
    double* __restrict api = m_acc.pi.data();
    double* __restrict asr = m_acc.sr.data();
    double* __restrict asi = m_acc.si.data();
    double* __restrict npr = m_next.pr.data();
    double* __restrict npi = m_next.pi.data();
    double* __restrict nsr = m_next.sr.data();
    double* __restrict nsi = m_next.si.data();

    double pp = 0.0;
    double ss = 0.0;
#pragma omp simd reduction(+ : pp, ss)
    for (std::size_t j = 0; j < n; ++j) {
        const double pr = xpr[j];
        const double pi = xpi[j];
        const double sr = xsr[j];
        const double si = xsi[j];
        // mean node field of cell j
        const double er = e0r - kappa * (ci[j] + 0.5 * pi);
        const double ei = e0i + kappa * (cr[j] + 0.5 * pr);
        const double fpr = -pr - k * ei - (hwr * si + hwi * sr);
        const double fpi = -pi + k * er + (hwr * sr - hwi * si);
        const double fsr = -gs * sr - (hwr * pi - hwi * pr);
        const double fsi = -gs * si + (hwr * pr + hwi * pi);
        pp += pr * pr + pi * pi;
        ss += sr * sr + si * si;
        if constexpr (InitAcc) {
            apr[j] = ypr[j] + ha * fpr;
            api[j] = ypi[j] + ha * fpi;
            asr[j] = ysr[j] + ha * fsr;
            asi[j] = ysi[j] + ha * fsi;
        } else {
            apr[j] += ha * fpr;
            api[j] += ha * fpi;
            asr[j] += ha * fsr;
            asi[j] += ha * fsi;
        }
        if constexpr (WriteNext) {
            npr[j] = ypr[j] + hn * fpr;
            npi[j] = ypi[j] + hn * fpi;
            nsr[j] = ysr[j] + hn * fsr;
            nsi[j] = ysi[j] + hn * fsi;
        }
    }
    const double out_r = e0r - kappa * tot_i;
    const double out_i = e0i + kappa * tot_r;
    return {e0r * e0r + e0i * e0i, out_r * out_r + out_i * out_i, 2.0 * m_h * (pp + gs * ss)};
}

cplx Integrator::step(double t, double h, const Drive& drive)
{
    const double tm = t + 0.5 * h;
    const double te = t + h;
    auto in = [&](double tt, int side) { return drive.input ? drive.input(tt, side) : cplx{}; };
    auto ctl = [&](double tt, int side) { return drive.control ? drive.control(tt, side) : cplx{}; };

    const cplx wm = ctl(tm, 0);
    const cplx em = in(tm, 0);
    const Flux f1 = stage<true, true>(m_y, in(t, +1), ctl(t, +1), h, 1.0 / 6.0, 0.5);
    std::swap(m_x, m_next);
    const Flux f2 = stage<false, true>(m_x, em, wm, h, 1.0 / 3.0, 0.5);
    std::swap(m_x, m_next);
    const Flux f3 = stage<false, true>(m_x, em, wm, h, 1.0 / 3.0, 1.0);
    std::swap(m_x, m_next);
    const cplx e_end = in(te, -1);
    const Flux f4 = stage<false, false>(m_x, e_end, ctl(te, -1), h, 1.0 / 6.0, 0.0);
    std::swap(m_y, m_acc);

    m_in += h * (f1.in + 2.0 * f2.in + 2.0 * f3.in + f4.in) / 6.0;
    m_out += h * (f1.out + 2.0 * f2.out + 2.0 * f3.out + f4.out) / 6.0;
    m_diss += h * (f1.diss + 2.0 * f2.diss + 2.0 * f3.diss + f4.diss) / 6.0;

    double sr = 0.0;
    double si = 0.0;
#pragma omp simd reduction(+ : sr, si)
    for (std::size_t j = 0; j < m_n; ++j) {
        sr += m_y.pr[j];
        si += m_y.pi[j];
    }
    return e_end + I * m_k * m_h * cplx{sr, si};
}

GridSpec default_grid(const MediumParams& medium, const PulseSpec& probe,
                      const std::optional<ControlSchedule>& controls)
{
    medium.validate();
    validate(probe);
    double scale = 1.0;
    if (const auto* r = std::get_if<RisingExponential>(&probe)) {
        scale = std::min(scale, r->t_fall > 0.0 ? r->t_fall : r->t_rise);
        scale = std::min(scale, r->t_rise);
    } else {
        scale = std::min(scale, intensity_fwhm(probe));
    }
    if (controls) {
        for (const PulseSpec* c : {&controls->write, &controls->read}) {
            if (const auto* sq = std::get_if<Square>(c)) {
                scale = std::min(scale, sq->t_off - sq->t_on);
            } else if (const auto* g = std::get_if<Gaussian>(c)) {
                scale = std::min(scale, g->fwhm);
            }
        }
        const double w = controls->peak_rabi();
        if (w > 0.0) {
            scale = std::min(scale, 1.0 / w);
        }
    }
    // The collective decay d/2 sets the stiffness of the field-polarization loop.
    scale = std::min(scale, 20.0 / (1.0 + medium.d));
    GridSpec g;
    g.dt = scale / 20.0;
    g.nz = std::max(200, static_cast<int>(std::ceil(0.1 * medium.d)) + 1);
    const auto [t0, t1] = support(probe, probe_start_tolerance);
    (void)t0;
    g.t_end = t1 + 10.0;
    return g;
}

FieldRecord solve(const MediumParams& medium, const PulseSpec& probe,
                  const std::optional<ControlSchedule>& controls, const GridSpec& grid, Retrieval retrieval,
                  const SolveOptions& options)
{
    medium.validate();
    validate(probe);
    grid.validate();
    if (controls) {
        controls->validate();
    }
    require(retrieval == Retrieval::none || controls.has_value(), "solve: retrieval requires a control schedule");

    Integrator integ(medium, grid.nz);
    FieldRecord rec;
    rec.retrieval = retrieval;
    const auto nz = static_cast<std::size_t>(grid.nz);
    rec.zeta.resize(nz);
    rec.zeta_cells.resize(nz - 1);
    for (std::size_t j = 0; j < nz; ++j) {
        rec.zeta[j] = static_cast<double>(j) / static_cast<double>(nz - 1);
    }
    for (std::size_t j = 0; j + 1 < nz; ++j) {
        rec.zeta_cells[j] = (static_cast<double>(j) + 0.5) / static_cast<double>(nz - 1);
    }

    const double t_start = std::isnan(grid.t_start) ? support(probe, probe_start_tolerance).first : grid.t_start;
    double t_stop = grid.t_end;
    std::vector<double> breaks = pulse_breaks(probe);
    if (controls) {
        const auto [w0, w1] = controls->write_window();
        rec.write_onset = w0;
        auto wb = pulse_breaks(controls->write);
        breaks.insert(breaks.end(), wb.begin(), wb.end());
        if (retrieval != Retrieval::none) {
            t_stop = w1;
            rec.write_end = w1;
        }
    }
    require(t_stop > t_start, "solve: integration horizon ends before the probe starts");
    const auto times1 = segment_times(t_start, t_stop, grid.dt, breaks);

    double read_end_local = 0.0;
    double horizon = 0.0;
    std::vector<double> breaks2;
    if (retrieval != Retrieval::none) {
        read_end_local = controls->read_window().second;
        horizon = options.read_horizon > 0.0 ? options.read_horizon : read_end_local + 10.0;
        breaks2 = pulse_breaks(controls->read);
    }

    const std::size_t snap_bytes = (nz + 2 * (nz - 1)) * sizeof(cplx);
    std::size_t stride = options.snapshot_stride;
    const double expected_steps =
        static_cast<double>(times1.size()) + (retrieval != Retrieval::none ? horizon / grid.dt : 0.0);
    if (stride == 0 && options.snapshot_budget_bytes > 0) {
        const double max_snaps = static_cast<double>(options.snapshot_budget_bytes) / static_cast<double>(snap_bytes);
        stride = static_cast<std::size_t>(std::max(1.0, std::ceil(expected_steps / std::max(1.0, max_snaps))));
    }
    const bool keep_snaps = options.snapshot_budget_bytes > 0 || options.snapshot_stride > 0;

    auto take_snapshot = [&](double t_rec, cplx e0) {
        rec.snapshots.push_back(Snapshot{t_rec, integ.field(e0), integ.p(), integ.s()});
    };
    auto push = [&](double t_rec, cplx ein, cplx eout) {
        rec.tau.push_back(t_rec);
        rec.e_in.push_back(ein);
        rec.e_out.push_back(eout);
        rec.input_cumulative.push_back(integ.input_energy());
        rec.transmitted_cumulative.push_back(integ.transmitted_energy());
        rec.dissipated_cumulative.push_back(integ.dissipated_energy());
    };
    auto check_finite = [&](double t, cplx eout) {
        if (!std::isfinite(integ.dissipated_energy()) || !std::isfinite(eout.real()) ||
            !std::isfinite(eout.imag())) {
            std::ostringstream os;
            os << "solve: non-finite field at tau = " << t << " (unstable step, dt = " << grid.dt << ")";
            throw SolverError(os.str());
        }
    };

    // Phase 1: absorption (and writing).
    Drive drive1;
    drive1.input = [&probe](double t, int side) { return amplitude(probe, t, side); };
    if (controls) {
        const ControlSchedule& c = *controls;
        drive1.control = [&c](double t, int side) { return c.rabi_scale * amplitude(c.write, t, side); };
    }
    std::size_t step_count = 0;
    Phase ph1;
    ph1.first = 0;
    ph1.polariton_start = 0.0;
    const cplx e_first = amplitude(probe, times1.front(), +1);
    push(times1.front(), e_first, e_first);
    if (keep_snaps) {
        take_snapshot(times1.front(), e_first);
    }
    for (std::size_t i = 1; i < times1.size(); ++i) {
        const double t = times1[i - 1];
        const double h = times1[i] - t;
        const cplx eout = integ.step(t, h, drive1);
        check_finite(times1[i], eout);
        push(times1[i], amplitude(probe, times1[i], -1), eout);
        ++step_count;
        if (keep_snaps && step_count % stride == 0) {
            take_snapshot(times1[i], rec.e_in.back());
        }
    }
    ph1.last = rec.tau.size() - 1;
    ph1.polariton_end = integ.polariton_energy();
    ph1.spin_end = integ.spin_energy();
    ph1.input = integ.input_energy();
    ph1.transmitted = integ.transmitted_energy();
    ph1.dissipated = integ.dissipated_energy();
    rec.phases.push_back(ph1);

    double discarded = 0.0;
    double storage_decay = 0.0;
    if (retrieval != Retrieval::none) {
        const ControlSchedule& c = *controls;
        // Storage: drop the optical coherence, decay and optionally reverse the spin wave.
        discarded = integ.polarization_energy();
        integ.clear_polarization();
        rec.spin_stored = integ.spin_energy();
        integ.scale_spin(std::exp(-medium.spin_decay() * c.storage_time));
        storage_decay = rec.spin_stored - integ.spin_energy();
        if (retrieval == Retrieval::backward) {
            integ.reverse_spin();
        }
        rec.storage_time = c.storage_time;
        const double origin = t_stop + c.storage_time;
        rec.read_start = origin;

        Phase ph2;
        ph2.first = rec.tau.size();
        ph2.polariton_start = integ.polariton_energy();
        const double in_before = integ.input_energy();
        const double out_before = integ.transmitted_energy();
        const double diss_before = integ.dissipated_energy();

        Drive drive2;
        drive2.control = [&c](double t, int side) { return c.rabi_scale * amplitude(c.read, t, side); };
        const double read_begin = std::min(0.0, c.read_window().first);
        push(origin + read_begin, 0.0, 0.0);
        if (keep_snaps) {
            take_snapshot(origin + read_begin, 0.0);
        }
        std::vector<double> knots = segment_times(read_begin, read_end_local, grid.dt, breaks2);
        const double reference = std::max(ph2.polariton_start, 1e-300);
        double peak = 0.0;
        double t = read_begin;
        std::size_t knot = 1;
        while (true) {
            double h = grid.dt;
            if (knot < knots.size()) {
                h = knots[knot] - t;
                ++knot;
            }
            const cplx eout = integ.step(t, h, drive2);
            t += h;
            check_finite(origin + t, eout);
            push(origin + t, 0.0, eout);
            ++step_count;
            if (keep_snaps && step_count % stride == 0) {
                take_snapshot(origin + t, 0.0);
            }
            const double intensity = std::norm(eout);
            peak = std::max(peak, intensity);
            if (t >= read_end_local) {
                const bool dim = intensity <= options.stop_fraction * peak;
                const bool drained = integ.polarization_energy() <= options.drain_fraction * reference;
                if ((dim && drained) || t >= horizon) {
                    break;
                }
            }
        }
        ph2.last = rec.tau.size() - 1;
        ph2.polariton_end = integ.polariton_energy();
        ph2.spin_end = integ.spin_energy();
        ph2.input = integ.input_energy() - in_before;
        ph2.transmitted = integ.transmitted_energy() - out_before;
        ph2.dissipated = integ.dissipated_energy() - diss_before;
        rec.phases.push_back(ph2);
    }

    rec.storage_decay = storage_decay;
    rec.ledger.input = integ.input_energy();
    rec.ledger.transmitted = integ.transmitted_energy();
    rec.ledger.polariton = integ.polariton_energy();
    rec.ledger.dissipated = integ.dissipated_energy() + storage_decay;
    rec.ledger.discarded = discarded;

    if (options.check_ledger && rec.ledger.input > 0.0) {
        const double residual = std::abs(rec.ledger.imbalance()) / rec.ledger.input;
        if (residual > 10.0 * options.ledger_tolerance) {
            std::ostringstream os;
            os << std::setprecision(6) << "solve: energy balance violated (input = transmitted + polariton + "
               << "dissipated + discarded): input " << rec.ledger.input << ", transmitted "
               << rec.ledger.transmitted << ", polariton " << rec.ledger.polariton << ", dissipated "
               << rec.ledger.dissipated << ", discarded " << rec.ledger.discarded << ", relative residual "
               << residual;
            throw SolverError(os.str());
        }
    }
    return rec;
}

EmissionResult superradiant_emission(const MediumParams& medium, const PulseSpec& probe, const GridSpec& grid,
                                     const SolveOptions& options)
{
    EmissionResult res;
    double t_off = 0.0;
    if (const auto* r = std::get_if<RisingExponential>(&probe)) {
        t_off = r->t_off;
    } else {
        t_off = support(probe).second;
        if (const auto* g = std::get_if<Gaussian>(&probe)) {
            t_off = g->t_center;
        }
    }
    res.switch_off = t_off;
    res.record = solve(medium, probe, std::nullopt, grid, Retrieval::none, options);
    const FieldRecord& rec = res.record;
    for (std::size_t i = 0; i < rec.tau.size(); ++i) {
        if (rec.tau[i] >= t_off) {
            res.tau.push_back(rec.tau[i]);
            res.e_out.push_back(rec.e_out[i]);
        }
    }
    require(rec.ledger.input > 0.0, "superradiant_emission: probe carries no energy");
    res.efficiency = rec.transmitted_between(t_off, rec.tau.back()) / rec.ledger.input;
    return res;
}

double energy_audit(const FieldRecord& record)
{
    require(record.ledger.input > 0.0, "energy_audit: zero input energy");
    return std::abs(record.ledger.imbalance()) / record.ledger.input;
}

void write_field_record(const FieldRecord& record, const std::string& path)
{
    std::ofstream out(path);
    require(static_cast<bool>(out), "write_field_record: cannot open " + path);
    out << std::scientific << std::setprecision(17);
    out << "# boundary\n";
    out << "tau re_e_in im_e_in re_e_out im_e_out\n";
    for (std::size_t i = 0; i < record.tau.size(); ++i) {
        out << record.tau[i] << ' ' << record.e_in[i].real() << ' ' << record.e_in[i].imag() << ' '
            << record.e_out[i].real() << ' ' << record.e_out[i].imag() << '\n';
    }
    out << "# snapshots\n";
    out << "zeta tau re_e im_e re_p im_p re_s im_s\n";
    for (const auto& snap : record.snapshots) {
        // p and s are cell averages; report them at nodes by averaging neighbours.
        const std::size_t n = snap.e.size();
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t lo = j == 0 ? 0 : j - 1;
            const std::size_t hi = std::min(j, snap.p.size() - 1);
            const cplx p = 0.5 * (snap.p[lo] + snap.p[hi]);
            const cplx s = 0.5 * (snap.s[lo] + snap.s[hi]);
            out << record.zeta[j] << ' ' << snap.tau << ' ' << snap.e[j].real() << ' ' << snap.e[j].imag() << ' '
                << p.real() << ' ' << p.imag() << ' ' << s.real() << ' ' << s.imag() << '\n';
        }
    }
}

}  // namespace srmem
