#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "expect_error.hpp"
#include "oracles.hpp"
#include "seisfeat/windows.hpp"

namespace seisfeat {
namespace {

EnergyBounds bounds_at(double t5, double t95, double fs) {
  EnergyBounds b;
  b.index_5th = std::llround(t5 * fs);
  b.index_95th = std::llround(t95 * fs);
  b.t_5th = t5;
  b.t_95th = t95;
  return b;
}

TEST(EnergyBounds, SingleNonzeroSample) {
  std::vector<double> x(100, 0.0);
  x[37] = -4.0;
  const auto b = energy_bounds(x, 1000, 100.0, 2.0);
  EXPECT_EQ(b.index_5th, 1037);
  EXPECT_EQ(b.index_95th, 1037);
  EXPECT_DOUBLE_EQ(b.t_5th, 2.0 + 10.37);
  EXPECT_EQ(b.t_5th, b.t_95th);
}

TEST(EnergyBounds, ZeroEnergy) {
  EXPECT_SEISFEAT_ERROR(energy_bounds(std::vector<double>(10, 0.0), 0, 10, 0), "zero energy");
}

TEST(EnergyBounds, SymmetricPulseIsCentred) {
  const double fs = 16000;
  const auto f = oracle::gaussian_pulse(1e6, 0.75, 0.05, 0.0);
  const auto x = oracle::sample(f, 0.0, fs, 24001);
  const auto b = energy_bounds(x, 0, fs, 0.0);
  const double peak = 0.75;
  EXPECT_NEAR((peak - b.t_5th) - (b.t_95th - peak), 0.0, 1.0 / fs + 1e-12);
}

TEST(EnergyBounds, GaussianMatchesOversampledOracle) {
  const double fs = 16000;
  const auto f = oracle::gaussian_pulse(1e7, 0.5, 0.05, 60.0);
  const auto x = oracle::sample(f, 0.0, fs, 24000);
  const auto b = energy_bounds(x, 0, fs, 0.0);
  const auto fine = oracle::fine_energy_bounds(f, 0.0, 1.5, fs, 10);
  EXPECT_NEAR(b.t_5th, fine.t5, 1.0 / fs);
  EXPECT_NEAR(b.t_95th, fine.t95, 1.0 / fs);
}

TEST(EnergyBounds, CoverageAndMinimality) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> len(1, 3000);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(len(rng));
    for (auto& v : x) v = u(rng) * std::exp(4.0 * u(rng));
    const auto b = energy_bounds(x, 0, 1000, 0.0);
    ASSERT_LE(b.index_5th, b.index_95th);
    std::vector<double> cum(x.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) cum[i] = acc += x[i] * x[i];
    const double total = cum.back();
    const auto i5 = static_cast<std::size_t>(b.index_5th);
    const auto i95 = static_cast<std::size_t>(b.index_95th);
    const double before = i5 == 0 ? 0.0 : cum[i5 - 1];
    const double captured = cum[i95] - before;
    EXPECT_GE(captured, 0.90 * total * (1 - 1e-12));
    EXPECT_LE(captured, 0.90 * total + x[i5] * x[i5] + x[i95] * x[i95] + 1e-12 * total);
    // Minimality: one sample less on either side misses the percentile.
    EXPECT_LT(before, 0.05 * total);
    if (i95 > 0) EXPECT_LT(cum[i95 - 1], 0.95 * total);
    EXPECT_GE(cum[i5], 0.05 * total);
    EXPECT_GE(cum[i95], 0.95 * total);
  }
}

TEST(Layout, LongIntervalAllValid) {
  const double fs = 1000;
  const auto early = bounds_at(100.0, 100.3, fs);
  const auto next = std::llround(112.0 * fs);
  const auto l = layout_windows(early, next, std::llround(200 * fs), fs, 0.0);
  EXPECT_EQ(l.valid_count(), 10);
  EXPECT_DOUBLE_EQ(l.late_starts[0], early.t_95th);
  for (int k = 1; k < kLateWindowCount; ++k) {
    EXPECT_NEAR(l.late_starts[k] - l.late_starts[k - 1], 1.0, 1e-12);
    EXPECT_EQ(l.late_begin[k] - l.late_begin[k - 1], 1000);
  }
}

TEST(Layout, FourSecondIntervalGivesThreeWindows) {
  const double fs = 16000;
  const auto early = bounds_at(10.0, 10.3, fs);
  const auto next = std::llround(14.0 * fs);
  const auto l = layout_windows(early, next, std::llround(100 * fs), fs, 0.0);
  EXPECT_EQ(l.valid_count(), oracle::valid_late_windows(10.3, 14.0));
  EXPECT_EQ(l.valid_count(), 3);
  EXPECT_TRUE(l.late_valid[2]);
  EXPECT_FALSE(l.late_valid[3]);
}

TEST(Layout, LastPulseLimitedOnlyByData) {
  const double fs = 1000;
  const auto early = bounds_at(5.0, 5.2, fs);
  EXPECT_EQ(layout_windows(early, std::nullopt, std::llround(15.2 * fs), fs, 0.0).valid_count(), 10);
  EXPECT_EQ(layout_windows(early, std::nullopt, std::llround(15.1 * fs), fs, 0.0).valid_count(), 9);
}

TEST(Layout, ValidWindowsAreDisjointAndBeforeNextPulse) {
  const double fs = 2000;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> span(0.01, 1.0), ipi(1.5, 15.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double t5 = 3.0;
    const double t95 = t5 + span(rng);
    const double next_t5 = t5 + ipi(rng);
    const auto l = layout_windows(bounds_at(t5, t95, fs), std::llround(next_t5 * fs),
                                  std::llround(1000 * fs), fs, 0.0);
    EXPECT_EQ(l.valid_count(), oracle::valid_late_windows(l.early.t_95th, std::llround(next_t5 * fs) / fs));
    for (int k = 0; k < kLateWindowCount; ++k) {
      if (k > 0) EXPECT_EQ(l.late_begin[k], l.late_end(k - 1));
      if (l.late_valid[k]) {
        EXPECT_LE(l.late_end(k), std::llround(next_t5 * fs));
        if (k > 0) EXPECT_TRUE(l.late_valid[k - 1]);
      }
    }
  }
}

TEST(Layout, ValidCountMonotoneInInterval) {
  const double fs = 1000;
  const auto early = bounds_at(0.0, 0.25, fs);
  int prev = 0;
  for (int ms = 0; ms <= 14000; ms += 7) {
    const int n = layout_windows(early, ms, 1'000'000, fs, 0.0).valid_count();
    EXPECT_GE(n, prev);
    prev = n;
  }
  EXPECT_EQ(prev, 10);
}

}  // namespace
}  // namespace seisfeat
