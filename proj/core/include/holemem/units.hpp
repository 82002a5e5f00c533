#pragma once

#include <numbers>

// Internal unit system: time in microseconds, angular frequency in rad/us,
// position along the crystal as z in [0, 1]. Public interfaces speak kHz/MHz.
namespace holemem::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double ln2 = std::numbers::ln2;

/// kHz -> rad/us.
constexpr double khz_to_angular(double f_khz) { return two_pi * f_khz * 1e-3; }
/// rad/us -> kHz.
constexpr double angular_to_khz(double w) { return w / two_pi * 1e3; }
/// MHz -> rad/us.
constexpr double mhz_to_angular(double f_mhz) { return two_pi * f_mhz; }
/// rad/us -> MHz.
constexpr double angular_to_mhz(double w) { return w / two_pi; }

}  // namespace holemem::units
