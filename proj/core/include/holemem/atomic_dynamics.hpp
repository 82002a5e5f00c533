#pragma once

#include <complex>
#include <span>
#include <vector>

namespace holemem {

using complex = std::complex<double>;

/// Probability amplitudes of the ground (g), excited (e) and spin storage (s)
/// levels in the rotating frame.
struct AtomicState {
    complex cg{1.0, 0.0};
    complex ce{};
    complex cs{};

    double norm() const noexcept { return std::norm(cg) + std::norm(ce) + std::norm(cs); }
    static constexpr AtomicState ground() noexcept { return {}; }
};

/// Instantaneous drive seen by one detuning class.
struct DriveSample {
    complex signal{};   ///< signal Rabi envelope E (rad/us), couples g <-> e
    complex raman{};    ///< Raman Rabi envelope Omega (rad/us), couples e <-> s
    double detuning{};  ///< inhomogeneous detuning Delta (rad/us)
};

/// `full` integrates all three amplitudes with the Hermitian generator
///
///         | 0      E*/2    0     |
///     H = | E/2    -Delta  Omega/2 |,   i dC/dt = H C.
///         | 0      Omega*/2  0     |
///
/// `perturbative` pins cg = 1 (weak signal) and integrates ce, cs only.
enum class Mode { full, perturbative };

namespace detail {

// Right-hand side of i dC/dt = H C.
inline void rhs_full(const complex& cg, const complex& ce, const complex& cs, const complex& e,
                     const complex& om, double delta, complex& dg, complex& de,
                     complex& ds) noexcept {
    constexpr complex mi{0.0, -1.0};
    dg = mi * (0.5 * std::conj(e) * ce);
    de = mi * (0.5 * e * cg - delta * ce + 0.5 * om * cs);
    ds = mi * (0.5 * std::conj(om) * ce);
}

inline void rhs_perturbative(const complex& ce, const complex& cs, const complex& e,
                             const complex& om, double delta, complex& de,
                             complex& ds) noexcept {
    constexpr complex mi{0.0, -1.0};
    de = mi * (0.5 * e - delta * ce + 0.5 * om * cs);
    ds = mi * (0.5 * std::conj(om) * ce);
}

/// One classical RK4 step of the perturbative equations for a single cell.
/// The field-march hot loop calls this directly.
inline void rk4_perturbative(complex& ce, complex& cs, const complex& e0, const complex& em,
                             const complex& e1, const complex& o0, const complex& om,
                             const complex& o1, double delta, double dt) noexcept {
    complex k1e, k1s, k2e, k2s, k3e, k3s, k4e, k4s;
    const double h2 = 0.5 * dt;
    rhs_perturbative(ce, cs, e0, o0, delta, k1e, k1s);
    rhs_perturbative(ce + h2 * k1e, cs + h2 * k1s, em, om, delta, k2e, k2s);
    rhs_perturbative(ce + h2 * k2e, cs + h2 * k2s, em, om, delta, k3e, k3s);
    rhs_perturbative(ce + dt * k3e, cs + dt * k3s, e1, o1, delta, k4e, k4s);
    const double h6 = dt / 6.0;
    ce += h6 * (k1e + 2.0 * (k2e + k3e) + k4e);
    cs += h6 * (k1s + 2.0 * (k2s + k3s) + k4s);
}

inline void rk4_full(complex& cg, complex& ce, complex& cs, const complex& e0, const complex& em,
                     const complex& e1, const complex& o0, const complex& om, const complex& o1,
                     double delta, double dt) noexcept {
    complex k1g, k1e, k1s, k2g, k2e, k2s, k3g, k3e, k3s, k4g, k4e, k4s;
    const double h2 = 0.5 * dt;
    rhs_full(cg, ce, cs, e0, o0, delta, k1g, k1e, k1s);
    rhs_full(cg + h2 * k1g, ce + h2 * k1e, cs + h2 * k1s, em, om, delta, k2g, k2e, k2s);
    rhs_full(cg + h2 * k2g, ce + h2 * k2e, cs + h2 * k2s, em, om, delta, k3g, k3e, k3s);
    rhs_full(cg + dt * k3g, ce + dt * k3e, cs + dt * k3s, e1, o1, delta, k4g, k4e, k4s);
    const double h6 = dt / 6.0;
    cg += h6 * (k1g + 2.0 * (k2g + k3g) + k4g);
    ce += h6 * (k1e + 2.0 * (k2e + k3e) + k4e);
    cs += h6 * (k1s + 2.0 * (k2s + k3s) + k4s);
}

}  // namespace detail

/// One RK4 step over dt. The four stages use the drive at the step start,
/// twice at the midpoint, and at the end. The detuning is taken from
/// `begin`. In perturbative mode the returned cg equals the input cg.
AtomicState rk4_step(const AtomicState& state, const DriveSample& begin, const DriveSample& mid,
                     const DriveSample& end, double dt, Mode mode) noexcept;

struct Trajectory {
    std::vector<AtomicState> states;  ///< one per drive sample, states[0] = initial
    AtomicState final_state() const { return states.back(); }
};

/// Integrates over drives sampled at the nodes of a uniform grid with step
/// dt. Midpoint drives are linear interpolations of neighbouring nodes.
Trajectory evolve(const AtomicState& state0, std::span<const DriveSample> drives, double dt,
                  Mode mode);

/// Same, with explicit midpoint samples (midpoints.size() == drives.size() - 1).
Trajectory evolve(const AtomicState& state0, std::span<const DriveSample> drives,
                  std::span<const DriveSample> midpoints, double dt, Mode mode);

/// Final state only, without storing the trajectory.
AtomicState evolve_final(const AtomicState& state0, std::span<const DriveSample> drives, double dt,
                         Mode mode);

}  // namespace holemem
