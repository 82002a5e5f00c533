#include "holemem/grid.hpp"

#include <cmath>
#include <string>

#include "holemem/errors.hpp"
#include "holemem/units.hpp"

namespace holemem {

TimeGrid::TimeGrid(double t_start, double t_end, double dt) : t_start_(t_start), t_end_(t_end) {
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !std::isfinite(dt))
        throw ValidationError("time grid: non-finite bounds or step");
    if (!(dt > 0.0)) throw ValidationError("time grid: dt must be positive");
    if (!(t_end > t_start)) throw ValidationError("time grid: t_end must exceed t_start");
    const double steps = std::round((t_end - t_start) / dt);
    count_ = static_cast<std::size_t>(steps) + 1;
    dt_ = (t_end - t_start) / steps;
    if (count_ < 2) throw ValidationError("time grid: needs at least two samples");
}

std::size_t TimeGrid::index_at_or_after(double t) const noexcept {
    if (t <= t_start_) return 0;
    const double x = std::ceil((t - t_start_) / dt_ - 1e-9);
    if (x >= static_cast<double>(count_)) return count_;
    return static_cast<std::size_t>(x);
}

void TimeGrid::check_resolution(double max_rate) const {
    if (max_rate <= 0.0) return;
    const double limit = 0.1 / max_rate;
    // small slack so that dt exactly at the limit is accepted despite rounding
    if (dt_ > limit * (1.0 + 1e-12))
        throw ValidationError("time grid: dt = " + std::to_string(dt_) +
                              " us exceeds resolution limit " + std::to_string(limit) +
                              " us for max rate " + std::to_string(max_rate) + " rad/us");
}

DetuningGrid::DetuningGrid(double half_span, std::vector<double> detunings,
                           std::vector<double> weights, double spacing)
    : half_span_(half_span),
      detunings_(std::move(detunings)),
      weights_(std::move(weights)),
      spacing_(spacing) {}

DetuningGrid DetuningGrid::uniform(double half_span, std::size_t count) {
    if (!(half_span > 0.0) || !std::isfinite(half_span))
        throw ValidationError("detuning grid: span must be positive");
    if (count < 3) throw ValidationError("detuning grid: needs at least 3 bins");
    const double h = 2.0 * half_span / static_cast<double>(count - 1);
    std::vector<double> det(count);
    std::vector<double> w(count, h);
    for (std::size_t k = 0; k < count; ++k) {
        // mirror-symmetric construction: det[k] == -det[count-1-k] exactly
        const double offset = static_cast<double>(k) - 0.5 * static_cast<double>(count - 1);
        det[k] = offset * h;
    }
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
    return DetuningGrid(half_span, std::move(det), std::move(w), h);
}

DetuningGrid DetuningGrid::from_span_mhz(double span_mhz, std::size_t count) {
    return uniform(units::mhz_to_angular(0.5 * span_mhz), count);
}

namespace {

template <typename T>
T pairwise_impl(std::span<const T> v) noexcept {
    constexpr std::size_t block = 8;
    if (v.size() <= block) {
        T acc{};
        for (const T& x : v) acc += x;
        return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_impl(v.first(half)) + pairwise_impl(v.subspan(half));
}

}  // namespace

double pairwise_sum(std::span<const double> values) noexcept { return pairwise_impl(values); }

std::complex<double> pairwise_sum(std::span<const std::complex<double>> values) noexcept {
    return pairwise_impl(values);
}

}  // namespace holemem
