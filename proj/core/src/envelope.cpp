#include "holemem/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "holemem/errors.hpp"
#include "holemem/units.hpp"

namespace holemem {

ComplexEnvelope::ComplexEnvelope(TimeGrid grid) : grid_(grid), samples_(grid.count()) {}

ComplexEnvelope::ComplexEnvelope(TimeGrid grid, std::vector<complex> samples)
    : grid_(grid), samples_(std::move(samples)) {
    if (samples_.size() != grid_.count())
        throw ValidationError("envelope: sample count does not match grid");
    for (const auto& s : samples_)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw ValidationError("envelope: non-finite sample");
}

double ComplexEnvelope::peak_magnitude() const noexcept {
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, std::abs(s));
    return m;
}

ComplexEnvelope ComplexEnvelope::scaled(complex factor) const {
    std::vector<complex> out(samples_);
    for (auto& s : out) s *= factor;
    return ComplexEnvelope(grid_, std::move(out));
}

double gaussian_pulse_energy(double fwhm, double peak) noexcept {
    return peak * peak * fwhm * std::sqrt(units::pi / (4.0 * units::ln2));
}

ComplexEnvelope make_gaussian_pulse(double fwhm, double center, double peak, const TimeGrid& grid) {
    if (!(fwhm > 0.0)) throw ValidationError("gaussian pulse: fwhm must be positive");
    if (center < grid.t_start() || center > grid.t_end())
        throw ValidationError("gaussian pulse: center outside time grid");
    // intensity ~ exp(-4 ln2 (t-c)^2 / fwhm^2); fraction of energy beyond a is erfc(a*s)/2
    const double s = std::sqrt(4.0 * units::ln2) / fwhm;
    const double outside = 0.5 * std::erfc(s * (center - grid.t_start())) +
                           0.5 * std::erfc(s * (grid.t_end() - center));
    if (peak != 0.0 && outside > 1e-6)
        throw TruncationError("gaussian pulse: " + std::to_string(outside) +
                              " of the energy is truncated by the time grid (limit 1e-6)");
    std::vector<complex> out(grid.count());
    const double a = 2.0 * units::ln2 / (fwhm * fwhm);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = grid.time(i) - center;
        out[i] = peak * std::exp(-a * x * x);
    }
    return ComplexEnvelope(grid, std::move(out));
}

ComplexEnvelope make_square_pulse(double duration, double start, double area, double rise,
                                  const TimeGrid& grid) {
    if (rise < 0.0) throw ValidationError("square pulse: rise must be non-negative");
    if (duration <= 0.0) {
        if (area != 0.0) throw ValidationError("square pulse: non-zero area with zero duration");
        return ComplexEnvelope(grid);
    }
    if (!(duration > 2.0 * rise))
        throw ValidationError("square pulse: duration must exceed twice the rise time");
    std::vector<complex> out(grid.count());
    if (area == 0.0) return ComplexEnvelope(grid, std::move(out));

    const double stop = start + duration;
    const double tol = 1e-9 * grid.dt();
    std::vector<double> shape(grid.count(), 0.0);
    for (std::size_t i = 0; i < shape.size(); ++i) {
        const double t = grid.time(i);
        if (t < start - tol || t > stop + tol) continue;
        double v = 1.0;
        if (rise > 0.0) {
            const double up = (t - start) / rise;
            const double down = (stop - t) / rise;
            if (up < 1.0) v = 0.5 * (1.0 - std::cos(units::pi * std::max(up, 0.0)));
            else if (down < 1.0) v = 0.5 * (1.0 - std::cos(units::pi * std::max(down, 0.0)));
        }
        shape[i] = v;
    }
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < shape.size(); ++i)
        integral += 0.5 * (shape[i] + shape[i + 1]) * grid.dt();
    if (!(integral > 0.0))
        throw ValidationError("square pulse: pulse lies outside the time grid or below resolution");
    const double amplitude = area / integral;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = amplitude * shape[i];
    return ComplexEnvelope(grid, std::move(out));
}

double pulse_energy(std::span<const complex> samples, double dt) noexcept {
    if (samples.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double w = (i == 0 || i + 1 == samples.size()) ? 0.5 : 1.0;
        acc += w * std::norm(samples[i]);
    }
    return acc * dt;
}

double pulse_energy(const ComplexEnvelope& env) noexcept {
    return pulse_energy(env.samples(), env.grid().dt());
}

double window_energy(const ComplexEnvelope& env, double t_lo, double t_hi) {
    const auto& g = env.grid();
    if (t_hi < t_lo) throw ValidationError("window: upper bound below lower bound");
    if (t_lo < g.t_start() - 1e-9 || t_hi > g.t_end() + 1e-9)
        throw ValidationError("window: [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) +
                              "] us lies outside the time grid");
    const std::size_t lo = g.index_at_or_after(t_lo);
    std::size_t hi = g.index_at_or_after(t_hi);
    if (hi >= g.count() || g.time(hi) > t_hi + 1e-9 * g.dt()) hi = hi == 0 ? 0 : hi - 1;
    if (hi <= lo) return 0.0;
    return pulse_energy(env.samples().subspan(lo, hi - lo + 1), g.dt());
}

complex pulse_area(const ComplexEnvelope& env) noexcept {
    const auto s = env.samples();
    complex acc{};
    for (std::size_t i = 0; i + 1 < s.size(); ++i) acc += 0.5 * (s[i] + s[i + 1]);
    return acc * env.grid().dt();
}

ComplexEnvelope operator+(const ComplexEnvelope& a, const ComplexEnvelope& b) {
    if (!(a.grid() == b.grid())) throw ValidationError("envelope sum: grids differ");
    std::vector<complex> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return ComplexEnvelope(a.grid(), std::move(out));
}

}  // namespace holemem
