#pragma once

#include <span>
#include <vector>

#include "holemem/least_squares.hpp"

namespace holemem {

/// Efficiency loss of a spin wave dephased by a Gaussian spin distribution of
/// FWHM `gamma_khz` after storage time `ts_us`:
///     D(T) = exp(-(pi gamma T)^2 / (2 ln 2)),  D(0) = 1.
double spin_dephasing_factor(double ts_us, double gamma_khz) noexcept;

/// Storage time at which D(T) = 1/2.
double half_efficiency_time(double gamma_khz);

struct DecayCurve {
    std::vector<double> ts_us;
    std::vector<double> efficiencies;
    std::vector<double> sigmas;  ///< optional per-point uncertainties (empty = unweighted)

    void validate() const;
};

struct DecayFit {
    double gamma_khz = 0.0;
    double eta0 = 0.0;
    FitReport report;
};

/// Least-squares fit of eta0 * D(T; gamma). Needs >= 4 points whose span
/// reaches at least the fitted 1/e time. Throws ValidationError on a flat
/// curve or insufficient span, FitError on non-convergence.
DecayFit fit_decay(const DecayCurve& curve, const FitOptions& options = {});

/// CSV `ts_us,eta_s` (the sweep-ts output format).
DecayCurve read_decay_curve(const std::string& path);
DecayCurve parse_decay_curve(const std::string& text);

}  // namespace holemem
