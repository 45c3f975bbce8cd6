#include "srmem/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace srmem {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double objective_value(Objective o, const ProtocolReport& r)
{
    switch (o) {
    case Objective::eta_total:
        return r.eta_total;
    case Objective::t_sr:
        return r.t_sr_fit;
    case Objective::leakage:
        return r.eta_sr_leakage;
    }
    return nan;
}

double param_or_nan(const ProtocolReport& r, const char* key)
{
    const auto it = r.params.find(key);
    return it == r.params.end() ? nan : it->second;
}

// eta of the configured protocol at depth d; 0 for an empty medium.
double eta_at(const RunConfig& cfg, double d)
{
    if (d == 0.0) {
        return 0.0;
    }
    RunConfig c = cfg;
    c.d = d;
    return run_protocol(c).eta_total;
}

}  // namespace

const char* to_string(Objective o)
{
    switch (o) {
    case Objective::eta_total:
        return "eta_total";
    case Objective::t_sr:
        return "t_sr";
    case Objective::leakage:
        return "leakage";
    }
    return "?";
}

Objective objective_from_string(const std::string& s)
{
    if (s == "eta_total" || s == "eta") {
        return Objective::eta_total;
    }
    if (s == "t_sr") {
        return Objective::t_sr;
    }
    if (s == "leakage") {
        return Objective::leakage;
    }
    throw Error("unknown objective '" + s + "' (eta_total, t_sr, leakage)");
}

const std::vector<std::string>& sweep_axes()
{
    static const std::vector<std::string> axes{"d", "T_P", "Omega", "B", "storage_time"};
    return axes;
}

RunConfig with_axis(const RunConfig& base, const std::string& axis, double value)
{
    require(std::isfinite(value), "sweep: axis values must be finite");
    RunConfig c = base;
    if (axis == "d") {
        c.d = value;
    } else if (axis == "T_P") {
        c.probe_T_P = value;
    } else if (axis == "B") {
        c.probe_T_P = probe_duration_for_bandwidth(c, value);
    } else if (axis == "storage_time") {
        c.storage_time = value;
    } else if (axis == "Omega") {
        switch (c.protocol) {
        case Protocol::sr:
            c.control_rabi = value;
            c.control_optimize = false;
            break;
        case Protocol::eit:
            c.eit_rabi = value;
            break;
        case Protocol::ats: {
            require(!std::isnan(c.ats_window_energy), "sweep: Omega axis for ATS needs ats.window_energy");
            const auto w = energy_window(make_probe(c), c.ats_window_energy);
            c.ats_area = value * (w.second - w.first);
            break;
        }
        }
    } else {
        throw Error("sweep: unknown axis '" + axis + "'");
    }
    return c;
}

void SweepPlan::validate() const
{
    const auto& axes = sweep_axes();
    require(std::find(axes.begin(), axes.end(), axis) != axes.end(), "sweep: unknown axis '" + axis + "'");
    require(!values.empty(), "sweep: no axis values");
    for (double v : values) {
        require(std::isfinite(v), "sweep: axis values must be finite");
    }
}

std::vector<double> linear_range(double lo, double hi, int n)
{
    require(n >= 1 && std::isfinite(lo) && std::isfinite(hi), "linear_range: bad arguments");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    }
    return v;
}

std::vector<double> log_range(double lo, double hi, int n)
{
    require(lo > 0.0 && hi > 0.0, "log_range: bounds must be positive");
    std::vector<double> v = linear_range(std::log(lo), std::log(hi), n);
    for (double& x : v) {
        x = std::exp(x);
    }
    return v;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f)
{
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            f(i);
        }
    };
    if (workers <= 1) {
        work();
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
}

std::string plan_hash(const SweepPlan& plan)
{
    std::string text = canonical_text(plan.base);
    text += "axis = " + plan.axis + "\nobjective = " + to_string(plan.objective) + "\nvalues =";
    for (double v : plan.values) {
        text += " " + format_cell(v);
    }
    return hash_text(text);
}

SweepResult run_sweep(const SweepPlan& plan, unsigned workers)
{
    plan.validate();
    SweepResult result;
    result.plan = plan;
    result.hash = plan_hash(plan);
    result.rows.resize(plan.values.size());
    parallel_for(plan.values.size(), workers, [&](std::size_t i) {
        SweepRow& row = result.rows[i];
        row.value = plan.values[i];
        try {
            const RunConfig c = with_axis(plan.base, plan.axis, row.value);
            if (c.d == 0.0) {
                // Empty medium: the probe passes and nothing is stored.
                row.report.protocol = c.protocol;
                row.report.direction = c.direction;
                row.report.eta_transmission_loss = 1.0;
                row.report.params["d"] = 0.0;
                row.report.params["T_P"] = probe_duration(make_probe(c));
            } else {
                row.report = run_protocol(c);
            }
            row.objective = objective_value(plan.objective, row.report);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.objective = nan;
            row.error = e.what();
        }
    });
    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const SweepRow& a, const SweepRow& b) { return a.value < b.value; });
    return result;
}

std::string format_cell(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

void Table::add(std::vector<double> values)
{
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) {
        cells.push_back(format_cell(v));
    }
    rows.push_back(std::move(cells));
}

void write_csv(std::ostream& out, const Table& table)
{
    require(!table.hash.empty(), "write_csv: table has no manifest hash");
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) {
            return s;
        }
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') {
                q += '"';
            }
            q += c == '\n' ? ' ' : c;
        }
        return q + "\"";
    };
    out << "# manifest: " << table.hash << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << table.columns[i];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << quote(row[i]);
        }
        out << "\n";
    }
}

void write_csv(const std::string& path, const Table& table)
{
    std::ofstream out(path);
    require(static_cast<bool>(out), "write_csv: cannot open " + path);
    write_csv(out, table);
}

Table sweep_table(const SweepResult& result)
{
    Table t;
    t.hash = result.hash;
    t.columns = {result.plan.axis,
                 "objective",
                 "eta_total",
                 "eta_transmission_loss",
                 "eta_sr_leakage",
                 "eta_decoherence_loss",
                 "residual_polariton",
                 "ledger_residual",
                 "t_sr_fit",
                 "d",
                 "T_P",
                 "rabi",
                 "status",
                 "error"};
    for (const auto& row : result.rows) {
        const ProtocolReport& r = row.report;
        std::vector<std::string> cells;
        if (row.ok) {
            for (double v : {row.value, row.objective, r.eta_total, r.eta_transmission_loss, r.eta_sr_leakage,
                             r.eta_decoherence_loss, r.residual_polariton, r.ledger_residual, r.t_sr_fit,
                             param_or_nan(r, "d"), param_or_nan(r, "T_P"), optimal_rabi(r)}) {
                cells.push_back(format_cell(v));
            }
            cells.push_back("ok");
            cells.push_back("");
        } else {
            cells.push_back(format_cell(row.value));
            for (int i = 0; i < 11; ++i) {
                cells.push_back("nan");
            }
            cells.push_back("failed");
            cells.push_back(row.error);
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

std::string RunManifest::to_json() const
{
    nlohmann::ordered_json j;
    j["hash"] = hash;
    j["version"] = version;
    j["timestamp"] = timestamp;
    j["config"] = config;
    j["grid"] = grid;
    j["points"] = points;
    return j.dump(2);
}

const char* version() { return "1.0.0"; }

RunManifest make_manifest(const SweepResult& result)
{
    RunManifest m;
    m.hash = result.hash;
    m.version = version();
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    m.timestamp = buf;
    m.config = canonical_text(result.plan.base) + "axis = " + result.plan.axis + "\n";
    m.grid["dt_refine"] = result.plan.base.dt_refine;
    m.grid["nz_refine"] = result.plan.base.nz_refine;
    m.grid["search_coarsening"] = result.plan.base.search_coarsening;
    for (const auto& row : result.rows) {
        std::map<std::string, double> p = row.report.params;
        p["axis_value"] = row.value;
        p["objective"] = row.objective;
        p["ok"] = row.ok ? 1.0 : 0.0;
        m.points.push_back(std::move(p));
    }
    return m;
}

std::string output_directory(const std::string& explicit_dir)
{
    std::string dir = explicit_dir;
    if (dir.empty()) {
        const char* env = std::getenv("SRMEM_OUTPUT_DIR");
        dir = env && *env ? env : "srmem-out";
    }
    std::filesystem::create_directories(dir);
    return dir;
}

double optimal_rabi(const ProtocolReport& r)
{
    const double v = param_or_nan(r, "rabi");
    return std::isnan(v) ? param_or_nan(r, "peak_rabi") : v;
}

DepthResult required_depth(const RunConfig& base, double B_gamma, double eta_target, double d_max, double rel_tol)
{
    require(eta_target >= 0.0 && eta_target < 1.0, "required_depth: eta_target must be in [0, 1)");
    require(d_max > 1.0 && rel_tol > 0.0, "required_depth: need d_max > 1 and rel_tol > 0");
    DepthResult out;
    if (eta_target == 0.0) {
        out.reachable = true;
        return out;
    }
    RunConfig cfg = base;
    cfg.probe_T_P = probe_duration_for_bandwidth(cfg, B_gamma);
    auto eval = [&](double d) {
        const double eta = eta_at(cfg, d);
        ++out.evaluations;
        out.history.emplace_back(d, eta);
        return eta;
    };
    double lo = 0.0;
    double hi = 1.0;
    double eta_hi = eval(hi);
    while (eta_hi < eta_target) {
        if (hi >= d_max) {
            out.reachable = false;
            out.d = d_max;
            out.eta = eta_hi;
            return out;
        }
        lo = hi;
        hi = std::min(2.0 * hi, d_max);
        eta_hi = eval(hi);
    }
    if (lo == 0.0) {
        lo = hi / 2.0;
        while (lo > 1e-3 && eval(lo) >= eta_target) {
            hi = lo;
            lo /= 2.0;
        }
    }
    double eta_best = eta_hi;
    while (hi / lo - 1.0 > rel_tol) {
        const double mid = std::sqrt(lo * hi);
        const double eta = eval(mid);
        if (eta >= eta_target) {
            hi = mid;
            eta_best = eta;
        } else {
            lo = mid;
        }
    }
    out.reachable = true;
    out.d = hi;
    out.eta = eta_best;
    std::sort(out.history.begin(), out.history.end());
    return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    require(x.size() == y.size() && x.size() >= 2, "fit_line: need two or more points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0.0, "fit_line: x values are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

ScalingResult control_power_scaling(const RunConfig& base, const std::vector<double>& B_gamma, double kappa,
                                    unsigned workers)
{
    require(B_gamma.size() >= 4, "control_power_scaling: needs at least 4 bandwidths");
    require(kappa > 0.0, "control_power_scaling: kappa must be > 0");
    ScalingResult s;
    s.bandwidth = B_gamma;
    std::sort(s.bandwidth.begin(), s.bandwidth.end());
    const std::size_t n = s.bandwidth.size();
    s.depth.resize(n);
    s.rabi.resize(n);
    s.eta.resize(n);
    std::vector<std::string> errors(n);
    parallel_for(n, workers, [&](std::size_t i) {
        try {
            RunConfig c = base;
            c.probe_T_P = probe_duration_for_bandwidth(c, s.bandwidth[i]);
            c.d = kappa / c.probe_T_P;
            if (c.protocol == Protocol::sr) {
                c.control_optimize = true;
            }
            const ProtocolReport r = run_protocol(c);
            s.depth[i] = c.d;
            s.rabi[i] = optimal_rabi(r);
            s.eta[i] = r.eta_total;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& e : errors) {
        require(e.empty(), "control_power_scaling: " + e);
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = 2.0 * pi * s.bandwidth[i];
    }
    const LineFit f = fit_line(x, s.rabi);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += x[i] * s.rabi[i];
        sxx += x[i] * x[i];
    }
    s.slope = sxy / sxx;
    s.ols_slope = f.slope;
    s.intercept = f.intercept;
    s.r_squared = f.r_squared;
    s.linear = f.r_squared >= 0.9;
    return s;
}

}  // namespace srmem
