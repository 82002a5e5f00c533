#include "holemem/hole_profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "holemem/csv.hpp"
#include "holemem/errors.hpp"
#include "holemem/units.hpp"

namespace holemem {

void HoleProfile::validate() const {
    if (!(delta0_khz > 0.0) || !std::isfinite(delta0_khz))
        throw ValidationError("hole profile: delta0 must be positive");
    if (!(n >= 1.0) || !std::isfinite(n)) throw ValidationError("hole profile: n must be >= 1");
    if (!(d >= 0.0) || !std::isfinite(d))
        throw ValidationError("hole profile: optical depth must be >= 0");
    if (!(feature_width_mhz * 1e3 > delta0_khz / 1000.0) || !std::isfinite(feature_width_mhz))
        throw ValidationError("hole profile: feature width must exceed delta0/1000");
}

namespace {

// x = |2 D / D0|^n, and g = x / (1 + x) avoids cancellation near the center.
inline double shape(double delta_khz, double delta0_khz, double n) noexcept {
    const double u = std::abs(2.0 * delta_khz / delta0_khz);
    if (u == 0.0) return 0.0;
    const double x = std::pow(u, n);
    if (!std::isfinite(x)) return 1.0;
    return x / (1.0 + x);
}

}  // namespace

double g(double delta_khz, const HoleProfile& profile) noexcept {
    if (std::abs(delta_khz) > 0.5 * profile.feature_width_mhz * 1e3) return 0.0;
    return shape(delta_khz, profile.delta0_khz, profile.n);
}

double g_angular(double delta, const HoleProfile& profile) noexcept {
    return g(units::angular_to_khz(delta), profile);
}

void AbsorptionTrace::validate() const {
    if (detunings_khz.size() != optical_depths.size())
        throw ValidationError("absorption trace: column lengths differ");
    for (std::size_t i = 0; i < detunings_khz.size(); ++i) {
        if (!std::isfinite(detunings_khz[i]) || !std::isfinite(optical_depths[i]))
            throw ValidationError("absorption trace: non-finite value at row " + std::to_string(i));
        if (i > 0 && !(detunings_khz[i] > detunings_khz[i - 1]))
            throw ValidationError("absorption trace: detunings must be strictly increasing");
    }
}

AbsorptionTrace synthesize_trace(const HoleProfile& profile,
                                 std::span<const double> detunings_khz) {
    AbsorptionTrace t;
    t.detunings_khz.assign(detunings_khz.begin(), detunings_khz.end());
    t.optical_depths.reserve(detunings_khz.size());
    for (double x : detunings_khz) t.optical_depths.push_back(profile.d * g(x, profile));
    return t;
}

AbsorptionTrace parse_absorption_trace(const std::string& text) {
    const auto table = csv::parse(text, {"detuning_khz", "od"});
    AbsorptionTrace t;
    for (const auto& row : table.rows) {
        t.detunings_khz.push_back(row[0]);
        t.optical_depths.push_back(row[1]);
    }
    t.validate();
    return t;
}

AbsorptionTrace read_absorption_trace(const std::filesystem::path& path) {
    const auto table = csv::read(path, {"detuning_khz", "od"});
    AbsorptionTrace t;
    for (const auto& row : table.rows) {
        t.detunings_khz.push_back(row[0]);
        t.optical_depths.push_back(row[1]);
    }
    t.validate();
    return t;
}

std::string format_absorption_trace(const AbsorptionTrace& trace) {
    std::ostringstream out;
    out << "detuning_khz,od\n";
    for (std::size_t i = 0; i < trace.detunings_khz.size(); ++i)
        out << csv::format_number(trace.detunings_khz[i]) << ','
            << csv::format_number(trace.optical_depths[i]) << '\n';
    return out.str();
}

HoleFit fit_hole(const AbsorptionTrace& trace, const HoleProfile& init, const FitOptions& options) {
    trace.validate();
    init.validate();
    const auto& x = trace.detunings_khz;
    const auto& y = trace.optical_depths;
    if (x.size() < 4) throw ValidationError("fit_hole: need at least 4 points");
    if (x.front() > -2.0 * init.delta0_khz || x.back() < 2.0 * init.delta0_khz)
        throw ValidationError("fit_hole: trace must cover at least +-2 delta0 around the hole");
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi)))
        throw ValidationError("fit_hole: degenerate (constant) trace");

    const double half_w = 0.5 * init.feature_width_mhz * 1e3;
    // parameters: delta0 [kHz], n, d
    LeastSquaresProblem problem;
    problem.num_residuals = x.size();
    problem.residuals = [&](std::span<const double> p, std::span<double> r) {
        if (!(p[0] > 0.0) || !(p[1] >= 1.0) || !(p[2] >= 0.0)) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double gi = std::abs(x[i]) > half_w ? 0.0 : shape(x[i], p[0], p[1]);
            r[i] = p[2] * gi - y[i];
        }
        return true;
    };
    problem.jacobian = [&](std::span<const double> p, std::span<double> jac) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double* row = &jac[3 * i];
            const double u = std::abs(2.0 * x[i] / p[0]);
            if (std::abs(x[i]) > half_w || u == 0.0) {
                row[0] = row[1] = row[2] = 0.0;
                continue;
            }
            const double xn = std::pow(u, p[1]);
            const double gi = xn / (1.0 + xn);
            const double dgdx = 1.0 / ((1.0 + xn) * (1.0 + xn));
            row[0] = p[2] * dgdx * (-p[1] * xn / p[0]);
            row[1] = p[2] * dgdx * xn * std::log(u);
            row[2] = gi;
        }
    };
    auto sol = solve_least_squares(problem, {init.delta0_khz, init.n, init.d}, options);
    HoleFit out;
    out.profile = init;
    out.profile.delta0_khz = sol.parameters[0];
    out.profile.n = sol.parameters[1];
    out.profile.d = sol.parameters[2];
    out.report = std::move(sol.report);
    return out;
}

double extrapolate_od(double d_ref, double strength_ratio) {
    if (!(d_ref >= 0.0)) throw ValidationError("extrapolate_od: reference depth must be >= 0");
    if (!(strength_ratio > 0.0))
        throw ValidationError("extrapolate_od: strength ratio must be positive");
    return d_ref * strength_ratio;
}

}  // namespace holemem
