#include <gtest/gtest.h>

#include <cmath>

#include "holemem/analysis.hpp"
#include "holemem/errors.hpp"
#include "holemem/protocol.hpp"

using namespace holemem;

namespace {

// Short, coarse sequence so each run takes well under a second.
SequenceSpec quick_sequence() {
    SequenceSpec s = default_sequence();
    s.n_z = 40;
    s.n_detuning = 500;
    s.set_storage_time(3.0);
    s.set_retrieval_span(8.0);
    return s;
}

}  // namespace

TEST(Sequence, DefaultsAreConsistent) {
    const auto s = default_sequence();
    EXPECT_NO_THROW(s.validate());
    EXPECT_DOUBLE_EQ(s.storage_time(), 8.0);
    EXPECT_DOUBLE_EQ(s.window_lo_us, s.raman2.end_us());
    EXPECT_DOUBLE_EQ(s.retrieval_span(), 12.0);
}

TEST(Sequence, Validation) {
    auto s = quick_sequence();
    s.raman1.start_us = s.input.center_us - 1.0;
    EXPECT_THROW(s.validate(), ValidationError);
    s = quick_sequence();
    s.raman2.start_us = s.raman1.start_us + 0.1;
    EXPECT_THROW(s.validate(), ValidationError);
    s = quick_sequence();
    s.window_lo_us = s.raman2.start_us;
    EXPECT_THROW(s.validate(), ValidationError);
    s = quick_sequence();
    s.window_hi_us = s.window_lo_us;
    EXPECT_THROW(s.validate(), ValidationError);
    s = quick_sequence();
    s.n_z = 0;
    EXPECT_THROW(run_sequence(s), ValidationError);
}

TEST(Sequence, ShiftsKeepStorageTime) {
    auto s = quick_sequence();
    s.set_raman1_start(10.0);
    EXPECT_DOUBLE_EQ(s.storage_time(), 3.0);
    EXPECT_DOUBLE_EQ(s.window_lo_us, s.raman2.end_us());
    EXPECT_DOUBLE_EQ(s.retrieval_span(), 8.0);
}

TEST(Storage, NoRamanRetrievesNothing) {
    // long enough storage that the slow-light pulse has left before the window
    auto s = quick_sequence();
    s.set_storage_time(8.0);
    s.raman1.area_rad = 0.0;
    s.raman2.area_rad = 0.0;
    const auto r = run_sequence(s);
    // only the dispersed slow-light tail reaches the window
    EXPECT_LT(r.eta_s, 0.01);
    EXPECT_LT(r.spin_after_raman1, 1e-12);
    const auto slow = run_slow_light(s);
    for (std::size_t i = 0; i < r.output.size(); ++i) ASSERT_EQ(r.output[i], slow.output[i]);
}

TEST(Storage, EfficiencyIndependentOfInputScale) {
    auto s = quick_sequence();
    const double a = run_sequence(s).eta_s;
    s.input.peak *= 40.0;
    const double b = run_sequence(s).eta_s;
    EXPECT_NEAR(a, b, 1e-10 * a);
    EXPECT_GT(a, 0.1);
}

TEST(Storage, EnergyBookkeeping) {
    const auto r = run_sequence(quick_sequence());
    EXPECT_NEAR(r.energy_balance, 1.0, 0.02);
    EXPECT_GE(r.leaked, 0.0);
    EXPECT_GT(r.spin_after_raman1, r.eta_s);
    EXPECT_FALSE(r.eta_s_decayed.has_value());
}

TEST(Storage, PiPulsesLeaveLittleBetween) {
    auto s = quick_sequence();
    s.profile.d = 17.5;
    s.input = {4.8, 10.0, 1e-3};
    s.raman1 = {14.0, 0.4, units::pi, 0.05};
    s.raman2 = {16.0, 0.4, units::pi, 0.05};
    s.set_retrieval_span(8.0);
    const auto r = run_sequence(s);
    EXPECT_LT(r.between, 1e-3);
}

TEST(Storage, DecayWeightedEfficiency) {
    auto s = quick_sequence();
    s.spin_linewidth_khz = 25.6;
    const auto r = run_sequence(s);
    ASSERT_TRUE(r.eta_s_decayed.has_value());
    EXPECT_DOUBLE_EQ(*r.eta_s_decayed, r.eta_s * spin_dephasing_factor(3.0, 25.6));
}

TEST(SlowLight, DelayAndTransmission) {
    auto s = quick_sequence();
    const auto r = run_slow_light(s);
    EXPECT_GT(r.delay_us, 4.0);
    EXPECT_LT(r.delay_us, 4.5);
    EXPECT_GT(r.transmission, 0.5);
    EXPECT_LT(r.transmission, 0.65);
}

TEST(StorageTimeSweep, FlatWithoutDephasing) {
    auto s = quick_sequence();
    const auto table = sweep_storage_time(s, {3.0, 10.0, 30.0});
    ASSERT_EQ(table.size(), 3u);
    EXPECT_EQ(table[0].eta_s, table[2].eta_s);
}

TEST(StorageTimeSweep, RoundTripsThroughDecayFit) {
    auto s = quick_sequence();
    s.spin_linewidth_khz = 25.6;
    const auto table = sweep_storage_time(s, {2, 5, 10, 15, 20, 25, 30, 40});
    DecayCurve curve;
    for (const auto& p : table) {
        curve.ts_us.push_back(p.ts_us);
        curve.efficiencies.push_back(p.eta_s);
    }
    const auto fit = fit_decay(curve);
    EXPECT_NEAR(fit.gamma_khz, 25.6, 1e-4);
}

TEST(StorageTimeSweep, Validation) {
    auto s = quick_sequence();
    EXPECT_THROW(sweep_storage_time(s, {}), ValidationError);
    EXPECT_THROW(sweep_storage_time(s, {0.1, 5.0}), ValidationError);
}

TEST(OdSweep, Validation) {
    auto s = quick_sequence();
    EXPECT_THROW(sweep_od(s, {}), ValidationError);
    EXPECT_THROW(sweep_od(s, {4.0, 2.0}), ValidationError);
    EXPECT_THROW(sweep_od(s, {-1.0, 2.0}), ValidationError);
}

TEST(OdSweep, ThreadCountDoesNotChangeTable) {
    auto s = quick_sequence();
    const TimingSearch search{2, 1.0};
    const auto one = sweep_od(s, {0.0, 6.0}, 1, search);
    const auto two = sweep_od(s, {0.0, 6.0}, 2, search);
    ASSERT_EQ(one.size(), 2u);
    // without a medium only the far tail of the input reaches the window
    EXPECT_LT(one[0].eta_s, 2e-3);
    EXPECT_GT(one[1].eta_s, 0.05);
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].eta_s, two[i].eta_s);
        EXPECT_EQ(one[i].raman1_start_us, two[i].raman1_start_us);
    }
}

TEST(TimingSearch, DoesNotLoseToStartingPoint) {
    auto s = quick_sequence();
    const double start = run_sequence(s).eta_s;
    const auto [best, r] = optimize_raman_timing(s, {4, 1.0});
    EXPECT_GE(r.eta_s, start - 0.02);
    EXPECT_GE(best.raman1.start_us, s.input.center_us);
    EXPECT_DOUBLE_EQ(best.storage_time(), s.storage_time());
}
