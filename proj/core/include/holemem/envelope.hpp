#pragma once

#include <complex>
#include <span>
#include <vector>

#include "holemem/grid.hpp"

namespace holemem {

using complex = std::complex<double>;

/// Uniformly sampled complex envelope in Rabi-frequency units (rad/us).
class ComplexEnvelope {
public:
    /// All-zero envelope on `grid`.
    explicit ComplexEnvelope(TimeGrid grid);
    /// Throws ValidationError if sizes differ or any sample is non-finite.
    ComplexEnvelope(TimeGrid grid, std::vector<complex> samples);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const complex> samples() const noexcept { return samples_; }
    const complex& operator[](std::size_t i) const noexcept { return samples_[i]; }
    std::size_t size() const noexcept { return samples_.size(); }

    /// Largest |sample|.
    double peak_magnitude() const noexcept;

    ComplexEnvelope scaled(complex factor) const;

private:
    TimeGrid grid_;
    std::vector<complex> samples_;
};

/// Real Gaussian whose *intensity* FWHM equals `fwhm`. Throws TruncationError
/// if more than 1e-6 of the pulse energy falls outside the grid.
ComplexEnvelope make_gaussian_pulse(double fwhm, double center, double peak, const TimeGrid& grid);

/// Closed-form energy of the Gaussian above: peak^2 * fwhm * sqrt(pi / (4 ln 2)).
double gaussian_pulse_energy(double fwhm, double peak) noexcept;

/// Flat-top pulse on [start, start + duration] with raised-cosine edges of
/// width `rise`. The amplitude is scaled so that the trapezoidal integral of
/// the sampled envelope equals `area` (radians).
ComplexEnvelope make_square_pulse(double duration, double start, double area, double rise,
                                  const TimeGrid& grid);

/// Trapezoidal integral of |samples|^2 dt.
double pulse_energy(const ComplexEnvelope& env) noexcept;
double pulse_energy(std::span<const complex> samples, double dt) noexcept;

/// Trapezoidal energy restricted to samples with t in [t_lo, t_hi].
double window_energy(const ComplexEnvelope& env, double t_lo, double t_hi);

/// Trapezoidal integral of the complex amplitude (pulse area for real pulses).
complex pulse_area(const ComplexEnvelope& env) noexcept;

/// Sample-wise sum of envelopes on the same grid.
ComplexEnvelope operator+(const ComplexEnvelope& a, const ComplexEnvelope& b);

}  // namespace holemem
