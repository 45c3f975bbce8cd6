#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srmem/control.hpp"
#include "srmem/model.hpp"
#include "srmem/pulse.hpp"

namespace srmem {

/// Raised when the integration becomes unstable or the energy balance
/// breaks down.
class SolverError : public Error {
public:
    using Error::Error;
};

enum class Retrieval { none, forward, backward };

const char* to_string(Retrieval r);
Retrieval retrieval_from_string(const std::string& s);

/// Energy bookkeeping of a run, in units of |e|^2 * tau. `discarded` is the
/// optical polarization dropped at the start of the storage interval.
struct EnergyLedger {
    double input = 0.0;
    double transmitted = 0.0;
    double polariton = 0.0;
    double dissipated = 0.0;
    double discarded = 0.0;

    /// input - transmitted - polariton - dissipated - discarded.
    double imbalance() const { return input - transmitted - polariton - dissipated - discarded; }
};

struct Snapshot {
    double tau = 0.0;
    std::vector<cplx> e;  // nodes
    std::vector<cplx> p;  // cell centres
    std::vector<cplx> s;  // cell centres
};

/// One time-stepped integration interval. Cumulative series are aligned with
/// FieldRecord::tau over [first, last].
struct Phase {
    std::size_t first = 0;
    std::size_t last = 0;
    double polariton_start = 0.0;
    double polariton_end = 0.0;
    double spin_end = 0.0;
    double input = 0.0;
    double transmitted = 0.0;
    double dissipated = 0.0;
};

/// Sampled fields of a run. e lives on the nz nodes `zeta`; p and s on the
/// nz - 1 cell centres `zeta_cells`. Boundary series are stored at every
/// step, spatial snapshots at a stride.
struct FieldRecord {
    std::vector<double> zeta;
    std::vector<double> zeta_cells;
    std::vector<double> tau;
    std::vector<cplx> e_in;
    std::vector<cplx> e_out;
    std::vector<double> input_cumulative;
    std::vector<double> transmitted_cumulative;
    std::vector<double> dissipated_cumulative;
    std::vector<Snapshot> snapshots;
    std::vector<Phase> phases;
    EnergyLedger ledger;

    // Protocol timing on the record clock; NaN when absent.
    double write_onset = std::numeric_limits<double>::quiet_NaN();
    double write_end = std::numeric_limits<double>::quiet_NaN();
    double read_start = std::numeric_limits<double>::quiet_NaN();
    double storage_time = 0.0;
    double spin_stored = 0.0;      // spin-wave energy entering storage
    double storage_decay = 0.0;    // spin energy lost while stored
    Retrieval retrieval = Retrieval::none;

    /// Output energy between record times t0 and t1 (interpolated on the
    /// cumulative series).
    double transmitted_between(double t0, double t1) const;
};

struct SolveOptions {
    /// Upper bound on memory spent on spatial snapshots; 0 disables them.
    std::size_t snapshot_budget_bytes = 64u << 20;
    /// Explicit snapshot stride in steps; 0 picks one from the budget.
    std::size_t snapshot_stride = 0;
    /// Relative ledger tolerance; runs exceeding 10x this throw.
    double ledger_tolerance = 1e-4;
    bool check_ledger = true;
    /// Retrieval stops after the read pulse once |e_out|^2 < stop_fraction * peak
    /// and the optical polarization holds less than drain_fraction of the
    /// medium energy at read start. Spin left behind without a control field
    /// cannot radiate and stays in the polariton term.
    double stop_fraction = 1e-6;
    double drain_fraction = 1e-4;
    /// Hard limit on the read phase duration measured from the read origin.
    double read_horizon = 0.0;
};

/// Right-hand side drive of the integrator.
struct Drive {
    std::function<cplx(double, int)> input;
    std::function<cplx(double, int)> control;
};

/// Method-of-lines integrator for
///   d_zeta e = i k p,   d_tau p = -p + i k e + (i/2) W s,
///   d_tau s = -g s + (i/2) conj(W) p,        k = sqrt(d/2).
/// p and s are cell averages; e is integrated node to node with the cell
/// value (midpoint rule) and each cell is driven by the mean of its two node
/// fields, which makes the semi-discrete system conserve energy exactly.
/// Time stepping is classical RK4; energy fluxes are integrated with the
/// same stage weights so the ledger error is that of the time step.
class Integrator {
public:
    Integrator(const MediumParams& medium, int nz);

    int cells() const { return static_cast<int>(m_n); }
    double cell_width() const { return m_h; }

    std::vector<cplx> p() const;
    std::vector<cplx> s() const;
    void set_state(std::span<const cplx> p, std::span<const cplx> s);

    /// Node fields for the current state and boundary value e0.
    std::vector<cplx> field(cplx e0) const;

    /// Advance from t by h. Returns the output field at t + h.
    cplx step(double t, double h, const Drive& drive);

    void clear_polarization();
    void scale_spin(double factor);
    /// s(zeta) -> s(1 - zeta).
    void reverse_spin();

    double polariton_energy() const { return polarization_energy() + spin_energy(); }
    double spin_energy() const;
    double polarization_energy() const;

    // Running integrals of |e_in|^2, |e_out|^2 and the dissipation rate.
    double input_energy() const { return m_in; }
    double transmitted_energy() const { return m_out; }
    double dissipated_energy() const { return m_diss; }

private:
    struct Flux {
        double in;
        double out;
        double diss;
    };

    struct Buffers {
        std::vector<double> pr, pi, sr, si;
        void resize(std::size_t n);
    };

    // RHS at stage state `x`; acc (+)= wa*h*f and, with WriteNext, next = y + wn*h*f.
    template <bool InitAcc, bool WriteNext>
    Flux stage(const Buffers& x, cplx e0, cplx w, double h, double wa, double wn);

    std::size_t m_n;
    double m_h;
    double m_k;
    double m_gs;
    Buffers m_y, m_x, m_acc, m_next;
    std::vector<double> m_cr, m_ci;  // exclusive prefix sums of p
    double m_in = 0.0, m_out = 0.0, m_diss = 0.0;
};

/// Resolution rules: dt <= min(T_F, T_P, T_C, 1/W_max, 20/(1+d))/20 and
/// nz >= max(200, d/10 + 1). The spatial rule is loose because the cell
/// transfer is a diagonal Pade approximant; grid refinement tests cover it.
GridSpec default_grid(const MediumParams& medium, const PulseSpec& probe,
                      const std::optional<ControlSchedule>& controls = std::nullopt);

/// Integrates the Maxwell-Bloch system for a probe and optional write/read
/// controls. Without retrieval the run covers [probe start, grid.t_end].
/// With retrieval the first phase ends with the write pulse; the spin wave
/// then decays analytically over the storage time (reversed in zeta for
/// backward recall), and the read phase runs from the read origin until the
/// emission has died out.
FieldRecord solve(const MediumParams& medium, const PulseSpec& probe,
                  const std::optional<ControlSchedule>& controls, const GridSpec& grid,
                  Retrieval retrieval, const SolveOptions& options = {});

struct EmissionResult {
    std::vector<double> tau;
    std::vector<cplx> e_out;
    double switch_off = 0.0;
    double efficiency = 0.0;  // energy emitted after switch-off / input
    FieldRecord record;
};

/// Forward emission at zeta = 1 after the probe switch-off, no control.
EmissionResult superradiant_emission(const MediumParams& medium, const PulseSpec& probe, const GridSpec& grid,
                                     const SolveOptions& options = {});

/// |input - transmitted - polariton - dissipated - discarded| / input.
double energy_audit(const FieldRecord& record);

/// Writes boundary series and snapshots as whitespace-separated columns.
void write_field_record(const FieldRecord& record, const std::string& path);

}  // namespace srmem
