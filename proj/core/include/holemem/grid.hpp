#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace holemem {

/// Uniform time axis in microseconds. Immutable after construction.
class TimeGrid {
public:
    /// count = round((t_end - t_start) / dt) + 1; dt is then re-derived so that
    /// the last sample lands exactly on t_end.
    TimeGrid(double t_start, double t_end, double dt);

    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_end_; }
    double dt() const noexcept { return dt_; }
    std::size_t count() const noexcept { return count_; }
    double time(std::size_t i) const noexcept { return t_start_ + static_cast<double>(i) * dt_; }
    double duration() const noexcept { return t_end_ - t_start_; }

    /// Index of the first sample at or after t (clamped to [0, count]).
    std::size_t index_at_or_after(double t) const noexcept;

    /// Throws ValidationError unless dt <= 0.1 / max_rate (max_rate in rad/us).
    void check_resolution(double max_rate) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t_start_;
    double t_end_;
    double dt_;
    std::size_t count_;
};

/// Discretized inhomogeneous-broadening axis: ordered angular detunings with
/// trapezoidal weights. Nodes are symmetric about zero.
class DetuningGrid {
public:
    /// `count` trapezoid nodes spanning [-half_span, +half_span] (rad/us).
    static DetuningGrid uniform(double half_span, std::size_t count);

    /// Convenience: span given as a full width in MHz.
    static DetuningGrid from_span_mhz(double span_mhz, std::size_t count);

    std::span<const double> detunings() const noexcept { return detunings_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return detunings_.size(); }
    double span() const noexcept { return 2.0 * half_span_; }
    double spacing() const noexcept { return spacing_; }

private:
    DetuningGrid(double half_span, std::vector<double> detunings, std::vector<double> weights,
                 double spacing);

    double half_span_;
    std::vector<double> detunings_;
    std::vector<double> weights_;
    double spacing_;
};

/// Pairwise (cascade) summation in a fixed, data-independent order.
double pairwise_sum(std::span<const double> values) noexcept;
std::complex<double> pairwise_sum(std::span<const std::complex<double>> values) noexcept;

}  // namespace holemem
