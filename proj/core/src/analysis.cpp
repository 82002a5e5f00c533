#include "holemem/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "holemem/csv.hpp"
#include "holemem/units.hpp"

namespace holemem {

double spin_dephasing_factor(double ts_us, double gamma_khz) noexcept {
    const double x = units::pi * gamma_khz * 1e-3 * ts_us;
    return std::exp(-x * x / (2.0 * units::ln2));
}

double half_efficiency_time(double gamma_khz) {
    if (!(gamma_khz > 0.0)) throw ValidationError("half_efficiency_time: gamma must be positive");
    // (pi gamma T)^2 / (2 ln2) = ln2
    return std::sqrt(2.0) * units::ln2 / (units::pi * gamma_khz * 1e-3);
}

void DecayCurve::validate() const {
    if (ts_us.size() != efficiencies.size())
        throw ValidationError("decay curve: column lengths differ");
    if (!sigmas.empty() && sigmas.size() != ts_us.size())
        throw ValidationError("decay curve: sigma column length differs");
    for (std::size_t i = 0; i < ts_us.size(); ++i) {
        if (!std::isfinite(ts_us[i]) || !std::isfinite(efficiencies[i]))
            throw ValidationError("decay curve: non-finite value");
        if (efficiencies[i] < 0.0 || efficiencies[i] > 1.0)
            throw ValidationError("decay curve: efficiencies must lie in [0, 1]");
    }
    for (double s : sigmas)
        if (!(s > 0.0)) throw ValidationError("decay curve: sigmas must be positive");
}

DecayFit fit_decay(const DecayCurve& curve, const FitOptions& options) {
    curve.validate();
    const auto& t = curve.ts_us;
    const auto& y = curve.efficiencies;
    if (t.size() < 4) throw ValidationError("fit_decay: need at least 4 points");
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*hi - *lo <= 1e-12 * std::max(*hi, 1e-300))
        throw ValidationError("fit_decay: flat curve, linewidth not identifiable");

    // start from a log-linear fit of ln(eta) = ln(eta0) - a T^2
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(y[i] > 0.0)) continue;
        const double x = t[i] * t[i];
        const double ly = std::log(y[i]);
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
        ++m;
    }
    double eta0 = *hi;
    double gamma = 10.0;
    if (m >= 2) {
        const double denom = static_cast<double>(m) * sxx - sx * sx;
        if (denom != 0.0) {
            const double slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
            const double icept = (sy - slope * sx) / static_cast<double>(m);
            eta0 = std::exp(icept);
            if (slope < 0.0)
                gamma = std::sqrt(-slope * 2.0 * units::ln2) / units::pi * 1e3;
        }
    }

    const bool weighted = !curve.sigmas.empty();
    LeastSquaresProblem problem;
    problem.num_residuals = t.size();
    problem.residuals = [&](std::span<const double> p, std::span<double> r) {
        if (!(p[1] >= 0.0)) return false;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double w = weighted ? 1.0 / curve.sigmas[i] : 1.0;
            r[i] = w * (p[0] * spin_dephasing_factor(t[i], p[1]) - y[i]);
        }
        return true;
    };
    problem.jacobian = [&](std::span<const double> p, std::span<double> jac) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double w = weighted ? 1.0 / curve.sigmas[i] : 1.0;
            const double dfac = spin_dephasing_factor(t[i], p[1]);
            const double c = units::pi * 1e-3 * t[i];
            // d/dgamma exp(-(c gamma)^2 / (2 ln2)) = -(c^2 gamma / ln2) D
            jac[2 * i] = w * dfac;
            jac[2 * i + 1] = w * p[0] * dfac * (-(c * c * p[1]) / units::ln2);
        }
    };
    auto sol = solve_least_squares(problem, {eta0, gamma}, options);

    DecayFit fit{sol.parameters[1], sol.parameters[0], std::move(sol.report)};
    if (fit.gamma_khz > 0.0) {
        const double t_e = std::sqrt(2.0 * units::ln2) / (units::pi * fit.gamma_khz * 1e-3);
        const double span = *std::max_element(t.begin(), t.end()) - *std::min_element(t.begin(), t.end());
        if (span < t_e)
            throw ValidationError("fit_decay: storage times span " + std::to_string(span) +
                                  " us, less than the 1/e time " + std::to_string(t_e) + " us");
    }
    return fit;
}

namespace {

DecayCurve from_table(const csv::Table& table) {
    DecayCurve c;
    for (const auto& row : table.rows) {
        c.ts_us.push_back(row[0]);
        c.efficiencies.push_back(row[1]);
    }
    c.validate();
    return c;
}

}  // namespace

DecayCurve read_decay_curve(const std::string& path) {
    return from_table(csv::read(path, {"ts_us", "eta_s"}));
}

DecayCurve parse_decay_curve(const std::string& text) {
    return from_table(csv::parse(text, {"ts_us", "eta_s"}));
}

}  // namespace holemem
