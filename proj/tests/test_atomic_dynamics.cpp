#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "holemem/atomic_dynamics.hpp"
#include "holemem/units.hpp"

using namespace holemem;

namespace {

// Exact propagation under a constant Hermitian generator by eigendecomposition.
AtomicState exact_constant(const AtomicState& s0, complex e, complex om, double delta, double t) {
    Eigen::Matrix3cd h;
    h << 0.0, 0.5 * std::conj(e), 0.0,
         0.5 * e, -delta, 0.5 * om,
         0.0, 0.5 * std::conj(om), 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> eig(h);
    const Eigen::Matrix3cd& v = eig.eigenvectors();
    Eigen::Vector3cd c(s0.cg, s0.ce, s0.cs);
    Eigen::Vector3cd a = v.adjoint() * c;
    for (int i = 0; i < 3; ++i) a[i] *= std::exp(complex(0.0, -eig.eigenvalues()[i] * t));
    const Eigen::Vector3cd out = v * a;
    return {out[0], out[1], out[2]};
}

double distance(const AtomicState& a, const AtomicState& b) {
    return std::sqrt(std::norm(a.cg - b.cg) + std::norm(a.ce - b.ce) + std::norm(a.cs - b.cs));
}

// Smooth, non-polynomial drives.
DriveSample drive_at(double t) {
    return {complex(1.5 * std::exp(-std::pow(t - 1.0, 2)), 0.4 * std::sin(2.0 * t)),
            complex(2.0 * std::cos(1.3 * t), 0.5), 0.8};
}

AtomicState integrate_exact_midpoints(double t_end, int steps, Mode mode) {
    const double h = t_end / steps;
    AtomicState s{};
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        s = rk4_step(s, drive_at(t), drive_at(t + 0.5 * h), drive_at(t + h), h, mode);
    }
    return s;
}

}  // namespace

TEST(Rk4, ConstantDriveMatchesMatrixExponential) {
    const complex e{1.2, -0.3};
    const complex om{2.5, 0.7};
    const double delta = 1.1;
    const double dt = 0.001;
    std::vector<DriveSample> d(2001, DriveSample{e, om, delta});
    const auto traj = evolve(AtomicState::ground(), d, dt, Mode::full);
    const auto exact = exact_constant(AtomicState::ground(), e, om, delta, 2.0);
    EXPECT_LT(distance(traj.final_state(), exact), 1e-11);
}

TEST(Rk4, NormConservedOverManySteps) {
    const double dt = 0.002;
    const int steps = 10000;
    std::vector<DriveSample> d(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        const double t = i * dt;
        d[i] = {complex(2.0 * std::sin(0.3 * t), 1.0), complex(3.0 * std::cos(0.2 * t), 0.0), 2.0};
    }
    const auto traj = evolve(AtomicState::ground(), d, dt, Mode::full);
    double worst = 0.0;
    for (const auto& s : traj.states) worst = std::max(worst, std::abs(s.norm() - 1.0));
    EXPECT_LE(worst, 1e-8);
}

TEST(Rk4, ResonantRamanPiPulseTransfersToSpin) {
    const double duration = 1.0;
    const double dt = 0.001;
    const int steps = static_cast<int>(std::lround(duration / dt));
    std::vector<DriveSample> d(steps + 1, DriveSample{0.0, units::pi / duration, 0.0});
    const AtomicState excited{0.0, 1.0, 0.0};
    const auto s = evolve_final(excited, d, dt, Mode::full);
    EXPECT_NEAR(std::norm(s.cs), 1.0, 1e-8);
    EXPECT_NEAR(std::norm(s.ce), 0.0, 1e-8);
    // same transfer in the weak-signal equations
    const auto p = evolve_final(excited, d, dt, Mode::perturbative);
    EXPECT_NEAR(std::norm(p.cs), 1.0, 1e-8);
}

TEST(Rk4, FourthOrderUnderStepHalving) {
    for (Mode mode : {Mode::full, Mode::perturbative}) {
        const auto y1 = integrate_exact_midpoints(2.0, 50, mode);
        const auto y2 = integrate_exact_midpoints(2.0, 100, mode);
        const auto y4 = integrate_exact_midpoints(2.0, 200, mode);
        const double order = std::log2(distance(y1, y2) / distance(y2, y4));
        EXPECT_NEAR(order, 4.0, 0.3);
    }
}

TEST(Rk4, LinearMidpointsExactForLinearDrive) {
    const double dt = 0.01;
    std::vector<DriveSample> nodes(301), mids(300);
    auto lin = [](double t) { return DriveSample{complex(0.5 + 0.3 * t, -0.1 * t), complex(1.0 - 0.2 * t), 0.4}; };
    for (int i = 0; i <= 300; ++i) nodes[i] = lin(i * dt);
    for (int i = 0; i < 300; ++i) mids[i] = lin((i + 0.5) * dt);
    const auto a = evolve(AtomicState::ground(), nodes, dt, Mode::full).final_state();
    const auto b = evolve(AtomicState::ground(), nodes, mids, dt, Mode::full).final_state();
    EXPECT_LT(distance(a, b), 1e-14);
}

TEST(Rk4, TwoPhotonResonanceKeepsGroundUntouched) {
    std::vector<DriveSample> d(501);
    for (int i = 0; i <= 500; ++i) d[i] = {0.0, complex(3.0 * std::sin(0.01 * i), 1.0), 0.0};
    for (Mode mode : {Mode::full, Mode::perturbative}) {
        const auto s = evolve_final(AtomicState::ground(), d, 0.01, mode);
        EXPECT_EQ(s.cg, complex(1.0, 0.0));
        EXPECT_EQ(s.ce, complex{});
        EXPECT_EQ(s.cs, complex{});
    }
}

TEST(Rk4, PerturbativeIsLinearInSignal) {
    std::vector<DriveSample> a(401), b(401);
    const complex scale{2.7, -1.1};
    for (int i = 0; i <= 400; ++i) {
        a[i] = drive_at(0.005 * i);
        b[i] = a[i];
        b[i].signal *= scale;
    }
    const auto sa = evolve_final(AtomicState::ground(), a, 0.005, Mode::perturbative);
    const auto sb = evolve_final(AtomicState::ground(), b, 0.005, Mode::perturbative);
    EXPECT_EQ(sa.cg, complex(1.0, 0.0));
    EXPECT_LT(std::abs(sb.ce - scale * sa.ce), 1e-12 * std::abs(scale * sa.ce));
    EXPECT_LT(std::abs(sb.cs - scale * sa.cs), 1e-12 * std::abs(scale * sa.cs));
}

TEST(Rk4, WeakFieldFullMatchesPerturbative) {
    std::vector<DriveSample> d(401);
    for (int i = 0; i <= 400; ++i) {
        d[i] = drive_at(0.005 * i);
        d[i].signal *= 1e-5;
    }
    const auto f = evolve_final(AtomicState::ground(), d, 0.005, Mode::full);
    const auto p = evolve_final(AtomicState::ground(), d, 0.005, Mode::perturbative);
    EXPECT_LT(std::abs(f.ce - p.ce), 1e-8 * std::abs(p.ce));
    EXPECT_LT(std::abs(f.cs - p.cs), 1e-8 * std::abs(p.cs));
}

TEST(Rk4, EvolveStoresEveryState) {
    std::vector<DriveSample> d(11, DriveSample{0.1, 0.0, 0.0});
    const auto traj = evolve(AtomicState::ground(), d, 0.01, Mode::full);
    ASSERT_EQ(traj.states.size(), 11u);
    EXPECT_EQ(traj.states.front().cg, complex(1.0, 0.0));
}
