#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sigctl/cycledecomp.hpp"
#include "sigctl/error.hpp"
#include "sigctl/reward_pipeline.hpp"
#include "sigctl/sim.hpp"

namespace {

using sigctl::CycleWindow;

struct Interval {
  double flow = 0.0;
  double residual = 0.0;
  std::vector<CycleWindow> windows;
};

Interval random_interval(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Interval iv;
  const int c = 1 + static_cast<int>(u(rng) * 5);
  double start = std::floor(u(rng) * 12.0);
  for (int i = 0; i < c; ++i) {
    CycleWindow w;
    w.length = 60.0 + std::floor(u(rng) * 60.0);
    w.start_count = start;
    w.end_count = std::floor(u(rng) * 12.0);
    w.peak_count = std::max({w.start_count, w.end_count, std::floor(u(rng) * 20.0)}) + 1.0;
    start = w.end_count;
    iv.windows.push_back(w);
  }
  iv.residual = std::floor(u(rng) * 5.0);
  iv.flow = std::floor(u(rng) * 40.0 * c);
  for (auto& w : iv.windows) {
    w.start_count *= scale;
    w.end_count *= scale;
    w.peak_count *= scale;
  }
  iv.flow *= scale;
  iv.residual *= scale;
  return iv;
}

double raw_total(const sigctl::CycleDecomposition& d) {
  return std::accumulate(d.raw_flows.begin(), d.raw_flows.end(), 0.0) + d.raw_residual;
}

TEST(Decompose, SingleCycleHandExample) {
  const std::vector<CycleWindow> w{{60.0, 3.0, 3.0, 5.0}};
  const auto d = sigctl::decompose(6.0, w, 0.0);
  EXPECT_NEAR(d.zeta, 0.02, 1e-15);
  ASSERT_EQ(d.flows.size(), 1u);
  EXPECT_NEAR(d.arrival_rates[0], 0.1, 1e-15);
  EXPECT_NEAR(d.flows[0], 6.0, 1e-12);
}

TEST(Decompose, EmptyIntervalGivesZeros) {
  const std::vector<CycleWindow> w{{60.0, 0.0, 0.0, 0.0}, {80.0, 0.0, 0.0, 0.0}};
  const auto d = sigctl::decompose(0.0, w, 0.0);
  EXPECT_EQ(d.zeta, 0.0);
  for (double f : d.flows) EXPECT_EQ(f, 0.0);
}

TEST(Decompose, ZeroPeaksWithFlowIsDataError) {
  const std::vector<CycleWindow> w{{60.0, 0.0, 0.0, 0.0}};
  EXPECT_THROW(sigctl::decompose(5.0, w, 0.0), sigctl::DataError);
  EXPECT_THROW(sigctl::decompose(5.0, std::span<const CycleWindow>{}, 0.0), std::invalid_argument);
}

TEST(Decompose, NegativeZetaClampedToZero) {
  const std::vector<CycleWindow> w{{60.0, 10.0, 2.0, 10.0}};
  const auto d = sigctl::decompose(1.0, w, 0.0);
  EXPECT_TRUE(d.zeta_clamped);
  EXPECT_EQ(d.zeta, 0.0);
  for (double f : d.flows) EXPECT_GE(f, 0.0);
}

TEST(Decompose, ExactConservationBeforeClamping) {
  std::mt19937_64 rng(21);
  for (int n = 0; n < 1000; ++n) {
    const auto iv = random_interval(rng);
    const auto d = sigctl::decompose(iv.flow, iv.windows, iv.residual);
    if (d.zeta_clamped) continue;
    EXPECT_NEAR(raw_total(d), iv.flow, 1e-9 * std::max(1.0, iv.flow)) << "case " << n;
  }
}

// Non-negative flows can only conserve when the residual fits in the
// interval flow.
TEST(Decompose, ConservationSurvivesFlowClamping) {
  std::mt19937_64 rng(22);
  int clamped = 0;
  for (int n = 0; n < 1000; ++n) {
    const auto iv = random_interval(rng);
    const auto d = sigctl::decompose(iv.flow, iv.windows, iv.residual);
    if (d.zeta_clamped || iv.residual > iv.flow) continue;
    clamped += d.clamped_flows > 0;
    for (double f : d.flows) EXPECT_GE(f, 0.0);
    const double total = std::accumulate(d.flows.begin(), d.flows.end(), 0.0) + d.residual;
    EXPECT_NEAR(total, iv.flow, 1e-9 * std::max(1.0, iv.flow)) << "case " << n;
  }
  EXPECT_GT(clamped, 0);
}

TEST(Decompose, ScaleEquivariant) {
  for (double s : {0.5, 3.0, 17.0}) {
    std::mt19937_64 a(23), b(23);
    for (int n = 0; n < 200; ++n) {
      const auto base = random_interval(a);
      const auto scaled = random_interval(b, s);
      const auto d0 = sigctl::decompose(base.flow, base.windows, base.residual);
      const auto d1 = sigctl::decompose(scaled.flow, scaled.windows, scaled.residual);
      ASSERT_EQ(d0.flows.size(), d1.flows.size());
      for (std::size_t c = 0; c < d0.flows.size(); ++c)
        EXPECT_NEAR(d1.flows[c], s * d0.flows[c], 1e-9 * std::max(1.0, s * d0.flows[c]));
    }
  }
}

TEST(Decompose, ArrivalRatesProportionalToPeaks) {
  std::mt19937_64 rng(24);
  for (int n = 0; n < 300; ++n) {
    const auto iv = random_interval(rng);
    const auto d = sigctl::decompose(iv.flow, iv.windows, iv.residual);
    for (std::size_t c = 0; c < iv.windows.size(); ++c)
      EXPECT_NEAR(d.arrival_rates[c] / iv.windows[c].peak_count, d.zeta, 1e-9);
  }
}

TEST(Windows, FromCycleSamples) {
  sigctl::LaneCycleObservation a, b;
  a.cycle_length = 60.0;
  a.timestamps = {0.0, 5.0, 10.0};
  a.counts = {2.0, 7.0, 4.0};
  b.cycle_length = 70.0;
  b.timestamps = {0.0, 5.0};
  b.counts = {3.0, 1.0};
  const std::vector<sigctl::LaneCycleObservation> cycles{a, b};
  const auto w = sigctl::windows_from_cycles(cycles, 6.0);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].start_count, 2.0);
  EXPECT_EQ(w[0].end_count, 3.0);
  EXPECT_EQ(w[0].peak_count, 7.0);
  EXPECT_EQ(w[1].end_count, 6.0);
  EXPECT_EQ(w[1].length, 70.0);
}

TEST(Windows, MakeWindowHalfOpen) {
  const std::vector<double> t{0.0, 5.0, 10.0, 15.0};
  const std::vector<double> c{1.0, 9.0, 2.0, 4.0};
  const auto w = sigctl::make_window(t, c, 5.0, 15.0);
  EXPECT_EQ(w.length, 10.0);
  EXPECT_EQ(w.start_count, 9.0);
  EXPECT_EQ(w.end_count, 4.0);
  EXPECT_EQ(w.peak_count, 9.0);
  EXPECT_EQ(sigctl::count_at(t, c, 7.0), 9.0);
  EXPECT_EQ(sigctl::count_at(t, c, -1.0), 1.0);
}

// Decomposed flows against the simulator's own per-cycle departures.
TEST(Decompose, RecoversSimulatedCycleFlows) {
  const auto cfg = oracle::small_config();
  sigctl::BehaviorController behavior(cfg);
  const auto day = sigctl::simulate_day(cfg, behavior, 0, 5);
  const auto cycles = sigctl::decompose_days({day}, cfg);
  std::map<std::pair<int, long long>, double> truth;
  for (const auto& lc : day.lane_cycles) truth[{lc.lane, std::llround(lc.start)}] = lc.departures;
  std::vector<double> errors;
  for (const auto& c : cycles) {
    const auto it = truth.find({c.obs.lane, std::llround(c.obs.cycle_start)});
    if (it != truth.end()) errors.push_back(std::abs(c.obs.cycle_flow - it->second));
  }
  ASSERT_GT(errors.size(), 1000u);
  EXPECT_LE(oracle::median(errors), 1.0);
}

}  // namespace
