#pragma once

#include <span>
#include <vector>

#include "holemem/envelope.hpp"
#include "holemem/hole_profile.hpp"
#include "holemem/propagation.hpp"

namespace holemem {

/// Hilbert transform of the hole lineshape,
///     H[g](w) = (1/pi) PV int g(x) / (w - x) dx,
/// with w and x in rad/us. Evaluated by adaptive Gauss-Kronrod quadrature
/// with the pole subtracted analytically.
double hilbert_g(double omega, const HoleProfile& profile);

/// Linear (Omega = 0) transfer function of the whole medium for a field
/// component exp(-i w t):
///     T(w) = exp(-(d/2) * (g(w) + i H[g](w))).
std::vector<complex> linear_transfer_oracle(const HoleProfile& profile,
                                            std::span<const double> omega_axis);

/// Positive group delay (us) at angular offset `omega`: -(d/2) dH[g]/dw.
double group_delay(const HoleProfile& profile, double omega = 0.0);

/// Uniform angular-frequency axis covering the Nyquist band of `grid`,
/// zero-padded by `padding` in time so the periodic reconstruction does not
/// wrap within padding * duration.
std::vector<double> default_omega_axis(const TimeGrid& grid, int padding = 4);

/// Output predicted by the transfer function: DFT of the input onto the
/// (uniform) axis, multiplication by T(w), inverse DFT onto the input grid.
/// Throws ValidationError if the axis holds less than 1 - 1e-6 of the input
/// spectral energy or is not uniform.
ComplexEnvelope predict_output(const ComplexEnvelope& input, const HoleProfile& profile,
                               std::span<const double> omega_axis);

struct OracleDiscrepancy {
    double relative_rms = 0.0;   ///< ||y_prop - y_oracle|| / ||y_oracle||
    double max_deviation = 0.0;  ///< max |y_prop - y_oracle| / max |y_oracle|
    double delay_propagated = 0.0;  ///< peak-intensity delay, time domain (us)
    double delay_oracle = 0.0;      ///< peak-intensity delay, oracle output (us)
};

/// Runs propagate() with Omega = 0 and compares against predict_output().
OracleDiscrepancy compare_oracle(const ComplexEnvelope& input, const HoleProfile& profile,
                                 const PropagationGrids& grids,
                                 const PropagationOptions& options = {});

/// Time of the peak of |env|^2, refined by a parabola through the maximum
/// sample and its neighbours.
double peak_time(const ComplexEnvelope& env);

struct CwProbe {
    double detuning_khz = 0.0;
    double duration_us = 40.0;
    double ramp_us = 10.0;      ///< raised-cosine switch-on
    double average_us = 2.0;    ///< averaging span at the end of the run
    double amplitude = 1e-3;
    double dt_us = 0.01;
};

/// Steady-state intensity transmission of a weak cw probe exp(-i w t),
/// measured by propagate() with Omega = 0. In the continuum limit this is
/// exp(-d g(detuning)).
double cw_transmission(const HoleProfile& profile, const CwProbe& probe,
                       const PropagationGrids& grids, const PropagationOptions& options = {});

}  // namespace holemem
