#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "holemem/least_squares.hpp"

namespace holemem {

/// A single-class absorption feature of width W with a hyperlorentzian hole
/// burnt at its center:
///
///     g(D) = 1 - 1 / (1 + |2 D / D0|^n)     for |D| <= W/2
///     g(D) = 0                              outside the feature
///
/// The optical depth seen at detuning D is d * g(D).
struct HoleProfile {
    double delta0_khz = 230.0;        ///< hole width D0 (g = 1/2 at +-D0/2)
    double n = 3.0;                   ///< shape exponent, 2 is lorentzian
    double d = 8.7;                   ///< optical depth alpha*L of the feature
    double feature_width_mhz = 2.1;   ///< full width W of the absorbing feature

    /// Throws ValidationError on delta0 <= 0, n < 1, d < 0 or W <= delta0/1000.
    void validate() const;

    friend bool operator==(const HoleProfile&, const HoleProfile&) = default;
};

/// Hole lineshape at detuning `delta_khz`, in [0, 1].
double g(double delta_khz, const HoleProfile& profile) noexcept;

/// Same, with the detuning in rad/us.
double g_angular(double delta, const HoleProfile& profile) noexcept;

/// Measured (or synthetic) optical-depth spectrum.
struct AbsorptionTrace {
    std::vector<double> detunings_khz;
    std::vector<double> optical_depths;
    double noise_sigma = 0.0;

    /// Equal lengths, strictly increasing detunings, finite values.
    void validate() const;
};

/// Noiseless d*g(D) sampled at `detunings_khz`.
AbsorptionTrace synthesize_trace(const HoleProfile& profile, std::span<const double> detunings_khz);

/// CSV with header `detuning_khz,od`. Throws ValidationError with the
/// offending line number on malformed input.
AbsorptionTrace read_absorption_trace(const std::filesystem::path& path);
AbsorptionTrace parse_absorption_trace(const std::string& text);
std::string format_absorption_trace(const AbsorptionTrace& trace);

struct HoleFit {
    HoleProfile profile;
    FitReport report;
};

/// Least-squares fit of d*g(D) to the trace for (D0, n, d); the feature
/// width is taken from `init`. Damped Gauss-Newton, falling back to a
/// Nelder-Mead search if that fails. Throws FitError (carrying the best
/// parameters seen) on non-convergence and ValidationError on a constant
/// trace or one that does not cover +-2 D0.
HoleFit fit_hole(const AbsorptionTrace& trace, const HoleProfile& init,
                 const FitOptions& options = {});

/// Optical depth on a transition with relative oscillator strength `ratio`.
double extrapolate_od(double d_ref, double strength_ratio);

}  // namespace holemem
