#include "holemem/atomic_dynamics.hpp"

#include "holemem/errors.hpp"

namespace holemem {

AtomicState rk4_step(const AtomicState& state, const DriveSample& begin, const DriveSample& mid,
                     const DriveSample& end, double dt, Mode mode) noexcept {
    AtomicState s = state;
    if (mode == Mode::perturbative) {
        detail::rk4_perturbative(s.ce, s.cs, begin.signal, mid.signal, end.signal, begin.raman,
                                 mid.raman, end.raman, begin.detuning, dt);
    } else {
        detail::rk4_full(s.cg, s.ce, s.cs, begin.signal, mid.signal, end.signal, begin.raman,
                         mid.raman, end.raman, begin.detuning, dt);
    }
    return s;
}

namespace {

DriveSample midpoint(const DriveSample& a, const DriveSample& b) noexcept {
    return {0.5 * (a.signal + b.signal), 0.5 * (a.raman + b.raman), 0.5 * (a.detuning + b.detuning)};
}

}  // namespace

Trajectory evolve(const AtomicState& state0, std::span<const DriveSample> drives, double dt,
                  Mode mode) {
    Trajectory tr;
    tr.states.reserve(drives.size());
    tr.states.push_back(state0);
    for (std::size_t i = 0; i + 1 < drives.size(); ++i)
        tr.states.push_back(rk4_step(tr.states.back(), drives[i], midpoint(drives[i], drives[i + 1]),
                                     drives[i + 1], dt, mode));
    return tr;
}

Trajectory evolve(const AtomicState& state0, std::span<const DriveSample> drives,
                  std::span<const DriveSample> midpoints, double dt, Mode mode) {
    if (!drives.empty() && midpoints.size() + 1 != drives.size())
        throw ValidationError("evolve: need exactly one midpoint per step");
    Trajectory tr;
    tr.states.reserve(drives.size());
    tr.states.push_back(state0);
    for (std::size_t i = 0; i + 1 < drives.size(); ++i)
        tr.states.push_back(
            rk4_step(tr.states.back(), drives[i], midpoints[i], drives[i + 1], dt, mode));
    return tr;
}

AtomicState evolve_final(const AtomicState& state0, std::span<const DriveSample> drives, double dt,
                         Mode mode) {
    AtomicState s = state0;
    for (std::size_t i = 0; i + 1 < drives.size(); ++i)
        s = rk4_step(s, drives[i], midpoint(drives[i], drives[i + 1]), drives[i + 1], dt, mode);
    return s;
}

}  // namespace holemem
