#include "srmem/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "srmem/model.hpp"

namespace srmem {

namespace {

constexpr double inv_phi = 0.6180339887498949;

class Counted {
public:
    Counted(const std::function<double(double)>& f, const ScalarOptions& o, ScalarOptimum& out)
        : m_f(f), m_opt(o), m_out(out)
    {
    }

    // Objective in search coordinates, sign flipped so larger is better.
    double operator()(double u)
    {
        const double x = to_x(u);
        double v = m_f(x);
        m_out.history.emplace_back(x, v);
        ++m_out.evaluations;
        if (!std::isfinite(v)) {
            v = -std::numeric_limits<double>::infinity();
            return v;
        }
        return m_opt.maximize ? v : -v;
    }

    double to_x(double u) const { return m_opt.log_scale ? std::exp(u) : u; }
    double to_u(double x) const { return m_opt.log_scale ? std::log(x) : x; }
    double value(double g) const { return m_opt.maximize ? g : -g; }
    bool budget_left() const { return m_out.evaluations < m_opt.max_evaluations; }

private:
    const std::function<double(double)>& m_f;
    const ScalarOptions& m_opt;
    ScalarOptimum& m_out;
};

// Golden section on [a, b] given one interior point c with value fc.
std::pair<double, double> golden(Counted& g, double a, double b, double tol_rel)
{
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = g(c);
    double fd = g(d);
    while (g.budget_left()) {
        const double mid = 0.5 * (a + b);
        const double width = std::abs(g.to_x(b) - g.to_x(a));
        if (width <= tol_rel * std::max(std::abs(g.to_x(mid)), 1e-300)) {
            break;
        }
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

ScalarOptimum optimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                              const ScalarOptions& options)
{
    require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "optimize_scalar: need a finite bracket lo < hi");
    require(!options.log_scale || lo > 0.0, "optimize_scalar: log-scale search needs lo > 0");
    require(options.scan_points >= 3, "optimize_scalar: scan_points must be >= 3");
    require(options.rel_tol > 0.0, "optimize_scalar: rel_tol must be > 0");

    ScalarOptimum out;
    Counted g(f, options, out);
    const double a = g.to_u(lo);
    const double b = g.to_u(hi);
    const double m = 0.5 * (a + b);
    const double fa = g(a);
    const double fm = g(m);
    const double fb = g(b);

    double best_u = m;
    double best_g = fm;
    if (fm >= fa && fm >= fb) {
        const auto [u, v] = golden(g, a, b, options.rel_tol);
        best_u = u;
        best_g = v;
    } else {
        out.unimodal = false;
        out.note = "bracket failed the 3-point unimodality probe; dense scan used";
        const int n = options.scan_points;
        std::vector<double> us(static_cast<std::size_t>(n));
        std::vector<double> vs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            us[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
        }
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            if (i == 0) {
                vs[k] = fa;
            } else if (i == n - 1) {
                vs[k] = fb;
            } else if (2 * i == n - 1) {
                vs[k] = fm;
            } else {
                vs[k] = g(us[k]);
            }
        }
        const auto k = static_cast<std::size_t>(std::max_element(vs.begin(), vs.end()) - vs.begin());
        best_u = us[k];
        best_g = vs[k];
        if (k > 0 && k + 1 < us.size()) {
            const auto [u, v] = golden(g, us[k - 1], us[k + 1], options.rel_tol);
            if (v >= best_g) {
                best_u = u;
                best_g = v;
            }
        } else {
            out.note += "; optimum at the bracket edge";
        }
    }
    out.x = g.to_x(best_u);
    out.f = g.value(best_g);
    return out;
}

}  // namespace srmem
