#include "srmem/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace srmem {

double FitResult::value(const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return params[i];
        }
    }
    throw Error("FitResult: no parameter '" + name + "'");
}

double FitResult::stderr_of(const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return stderrs[i];
        }
    }
    throw Error("FitResult: no parameter '" + name + "'");
}

FitResult least_squares(const ResidualFn& fn, std::size_t m, std::vector<double> x0, std::vector<std::string> names,
                        const LeastSquaresOptions& options)
{
    const std::size_t n = x0.size();
    require(n > 0 && m >= n, "least_squares: need at least as many residuals as parameters");
    require(names.size() == n, "least_squares: one name per parameter");

    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd r(m), r_try(m);
    Mat J(m, n);
    auto eval = [&](const Eigen::VectorXd& at, Eigen::VectorXd& res, Mat* jac) {
        fn(std::span<const double>(at.data(), n), std::span<double>(res.data(), m),
           jac ? std::span<double>(jac->data(), m * n) : std::span<double>{});
    };

    eval(x, r, &J);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    FitResult out;
    out.names = std::move(names);
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        bool accepted = false;
        Eigen::VectorXd step;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-300);
            step = A.ldlt().solve(-g);
            const Eigen::VectorXd x_try = x + step;
            eval(x_try, r_try, nullptr);
            const double c_try = r_try.squaredNorm();
            if (std::isfinite(c_try) && c_try <= cost) {
                x = x_try;
                cost = c_try;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No descent direction left: at a minimum to machine precision.
            out.converged = g.norm() <= 1e-8 * std::max(1.0, std::sqrt(cost)) * std::max(1.0, JtJ.norm()) ||
                            step.norm() <= options.step_tolerance * (x.norm() + options.step_tolerance);
            break;
        }
        eval(x, r, &J);
        if (step.norm() <= options.step_tolerance * (x.norm() + options.step_tolerance)) {
            out.converged = true;
            ++it;
            break;
        }
    }
    out.iterations = it;
    out.params.assign(x.data(), x.data() + n);
    out.residual_norm = std::sqrt(cost);
    out.stderrs.assign(n, 0.0);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    if (m > n) {
        const double s2 = cost / static_cast<double>(m - n);
        const Eigen::MatrixXd cov = JtJ.inverse() * s2;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
            out.stderrs[i] = std::isfinite(v) && v > 0.0 ? std::sqrt(v) : 0.0;
        }
    }
    return out;
}

ResidualFn exp_decay_residuals(std::vector<double> t, std::vector<double> y)
{
    require(t.size() == y.size(), "exp_decay_residuals: size mismatch");
    return [t = std::move(t), y = std::move(y)](std::span<const double> x, std::span<double> r, std::span<double> J) {
        const double T = x[0];
        const double A = x[1];
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double e = std::exp(-t[i] / T);
            r[i] = A * e - y[i];
            if (!J.empty()) {
                J[2 * i] = A * e * t[i] / (T * T);
                J[2 * i + 1] = e;
            }
        }
    };
}

ResidualFn lorentzian_residuals(std::vector<double> delta, std::vector<double> od)
{
    require(delta.size() == od.size(), "lorentzian_residuals: size mismatch");
    return [xs = std::move(delta), ys = std::move(od)](std::span<const double> x, std::span<double> r,
                                                         std::span<double> J) {
        const double dres = x[0];
        const double g = x[1];
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double q = xs[i] / g;
            const double den = 1.0 + 4.0 * q * q;
            r[i] = dres / den - ys[i];
            if (!J.empty()) {
                J[2 * i] = 1.0 / den;
                J[2 * i + 1] = dres * 8.0 * q * q / (g * den * den);
            }
        }
    };
}

ResidualFn tsr_residuals(std::vector<double> d, std::vector<double> t_sr)
{
    require(d.size() == t_sr.size(), "tsr_residuals: size mismatch");
    return [d = std::move(d), t = std::move(t_sr)](std::span<const double> x, std::span<double> r,
                                                   std::span<double> J) {
        const double g = x[0];
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double u = 1.0 / (1.0 + d[i] / 4.0);
            r[i] = u / g - t[i];
            if (!J.empty()) {
                J[i] = -u / (g * g);
            }
        }
    };
}

FitResult fit_exp_decay(std::span<const double> t, std::span<const double> y, Window window)
{
    require(t.size() == y.size(), "fit_exp_decay: t and y differ in length");
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (window.contains(t[i])) {
            ts.push_back(t[i]);
            ys.push_back(y[i]);
        }
    }
    require(ts.size() >= 5, "fit_exp_decay: fewer than 5 points in the window");

    // Seed: straight line through log y.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double t0 = ts.front();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        require(ys[i] > 0.0, "fit_exp_decay: y must be positive inside the window");
        const double u = ts[i] - t0;
        const double v = std::log(ys[i]);
        sx += u;
        sy += v;
        sxx += u * u;
        sxy += u * v;
    }
    const double k = static_cast<double>(ts.size());
    const double den = k * sxx - sx * sx;
    require(den > 0.0, "fit_exp_decay: window holds a single time value");
    const double slope = (k * sxy - sx * sy) / den;
    const double icpt = (sy - slope * sx) / k;
    require(slope < 0.0, "fit_exp_decay: data are not decaying");

    // Fit in shifted time so the amplitude is well conditioned, then undo.
    const std::size_t m = ts.size();
    std::vector<double> us(m);
    for (std::size_t i = 0; i < m; ++i) {
        us[i] = ts[i] - t0;
    }
    const ResidualFn fn = exp_decay_residuals(std::move(us), std::move(ys));
    FitResult fit = least_squares(fn, m, {-1.0 / slope, std::exp(icpt)}, {"T", "amplitude"});
    require(fit.converged, "fit_exp_decay: no convergence after " + std::to_string(fit.iterations) + " iterations");
    require(fit.params[0] > 0.0, "fit_exp_decay: fitted decay time is negative");
    const double shift = std::exp(t0 / fit.params[0]);
    // amplitude at t = 0; its error follows the same scale (T error ignored).
    fit.params[1] *= shift;
    fit.stderrs[1] *= shift;
    return fit;
}

FitResult fit_lorentzian_od(std::span<const double> delta, std::span<const double> od, std::optional<double> exclusion)
{
    require(delta.size() == od.size(), "fit_lorentzian_od: delta and od differ in length");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        if (exclusion && std::abs(delta[i]) < *exclusion) {
            continue;
        }
        xs.push_back(delta[i]);
        ys.push_back(od[i]);
    }
    require(xs.size() >= 5, "fit_lorentzian_od: fewer than 5 detuning points");
    const auto [mn, mx] = std::minmax_element(ys.begin(), ys.end());
    require(*mx - *mn > 1e-12 * std::max(1.0, std::abs(*mx)), "fit_lorentzian_od: degenerate data (all values equal)");

    // Seeds: peak sample and the half-maximum crossing around it.
    const std::size_t ipk = static_cast<std::size_t>(mx - ys.begin());
    const double d0 = *mx;
    double half = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ys[i] >= 0.5 * d0) {
            half = std::max(half, std::abs(xs[i] - xs[ipk]));
        }
    }
    if (half <= 0.0) {
        // Peak excluded or undersampled: fall back to the closest point.
        double closest = std::numeric_limits<double>::infinity();
        for (double x : xs) {
            if (x != xs[ipk]) {
                closest = std::min(closest, std::abs(x - xs[ipk]));
            }
        }
        half = closest;
    }
    double gamma0 = 2.0 * half;
    if (exclusion) {
        gamma0 = std::max(gamma0, 2.0 * *exclusion);
    }

    const std::size_t m = xs.size();
    const ResidualFn fn = lorentzian_residuals(std::move(xs), std::move(ys));
    FitResult fit = least_squares(fn, m, {d0, gamma0}, {"d_res", "Gamma"});
    require(fit.converged, "fit_lorentzian_od: no convergence after " + std::to_string(fit.iterations) + " iterations");
    fit.params[1] = std::abs(fit.params[1]);
    return fit;
}

FitResult fit_tsr_vs_d(std::span<const double> d, std::span<const double> t_sr)
{
    require(d.size() == t_sr.size(), "fit_tsr_vs_d: d and T_SR differ in length");
    require(d.size() >= 3, "fit_tsr_vs_d: need at least 3 points");
    // Seed from the linear problem in 1/Gamma.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double u = 1.0 / (1.0 + d[i] / 4.0);
        num += t_sr[i] * u;
        den += u * u;
    }
    require(num > 0.0, "fit_tsr_vs_d: decay times must be positive");
    const std::size_t m = d.size();
    const ResidualFn fn = tsr_residuals({d.begin(), d.end()}, {t_sr.begin(), t_sr.end()});
    FitResult fit = least_squares(fn, m, {den / num}, {"Gamma_eff"});
    require(fit.converged, "fit_tsr_vs_d: no convergence after " + std::to_string(fit.iterations) + " iterations");
    return fit;
}

Columns read_two_columns(std::istream& in)
{
    Columns c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a = 0.0, b = 0.0;
        if (!(ls >> a)) {
            continue;
        }
        if (!(ls >> b)) {
            throw Error("read_two_columns: line " + std::to_string(lineno) + " has a single column");
        }
        c.x.push_back(a);
        c.y.push_back(b);
    }
    return c;
}

Columns read_two_columns(const std::string& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), "read_two_columns: cannot open " + path);
    return read_two_columns(in);
}

std::string format_fit(const FitResult& fit)
{
    std::ostringstream os;
    os << std::setprecision(10);
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        os << fit.names[i] << " = " << fit.params[i] << " +- " << fit.stderrs[i] << '\n';
    }
    os << "residual_norm = " << fit.residual_norm << '\n';
    os << "converged = " << (fit.converged ? "true" : "false") << '\n';
    os << "iterations = " << fit.iterations << '\n';
    return os.str();
}

}  // namespace srmem
