#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sigctl/dataset.hpp"
#include "sigctl/normalize.hpp"
#include "sigctl/perf.hpp"

namespace {

using sigctl::QueueParams;

sigctl::IntersectionSpec spec20() {
  sigctl::IntersectionSpec s;
  s.detection_range = 150.0;
  s.jam_density = 1.0 / 7.5;
  s.traverse_time = 25.0;
  s.wave_speed = 6.0;
  return s;
}

QueueParams random_theta(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QueueParams th;
  th.saturation_rate = 0.3 + 0.45 * u(rng);
  th.arrival_rate = (0.02 + 0.7 * u(rng)) * th.saturation_rate;
  th.initial_count = 10.0 * u(rng);
  return th;
}

TEST(Shockwave, WorkedExample) {
  const auto w = sigctl::shockwave_speeds({0.1, 0.5, 2.0}, spec20());
  EXPECT_NEAR(w.stopping, -1.0 / ((1.0 / 7.5) * 8.0 + 25.0 / 150.0), 1e-12);
  EXPECT_NEAR(w.stopping, -0.8108, 1e-4);
  EXPECT_DOUBLE_EQ(w.starting, -6.0);
}

TEST(Shockwave, SaturatedArrivalsMoveAtWaveSpeed) {
  const auto w = sigctl::shockwave_speeds({0.5 - 1e-9, 0.5, 0.0}, spec20());
  EXPECT_NEAR(w.stopping, -6.0, 1e-6);
  EXPECT_LT(sigctl::shockwave_speeds({0.2, 0.5, 0.0}, spec20()).stopping, 0.0);
}

TEST(MaxQueue, EmptyGeometry) {
  EXPECT_EQ(sigctl::max_queue({0.1, 0.5, 0.0}, 0.0, spec20()), 0.0);
  EXPECT_EQ(sigctl::lane_delay({0.1, 0.5, 0.0}, 0.0, spec20()), 0.0);
}

TEST(MaxQueue, MatchesFrontOracle) {
  std::mt19937_64 rng(41);
  const auto spec = spec20();
  for (int n = 0; n < 300; ++n) {
    const auto th = random_theta(rng);
    const double red = 10.0 + 80.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto w = sigctl::shockwave_speeds(th, spec);
    const double q0 = th.initial_count / spec.jam_density;
    const double expected = oracle::shockwave_front_qmax(q0, -w.stopping, -w.starting, red, 0.1);
    EXPECT_NEAR(sigctl::max_queue(th, red, spec), expected, 0.1 * expected) << "case " << n;
  }
}

TEST(MaxQueue, IncreasesWithRedTime) {
  std::mt19937_64 rng(42);
  const auto spec = spec20();
  for (int n = 0; n < 200; ++n) {
    const auto th = random_theta(rng);
    const double q0 = th.initial_count / spec.jam_density;
    double prev_q = q0, prev_d = 0.0;
    for (double red = 5.0; red <= 160.0; red *= 2.0) {
      const auto p = sigctl::cycle_performance(th, red, spec);
      EXPECT_GT(p.max_queue, prev_q);
      EXPECT_GT(p.delay, prev_d);
      EXPECT_GE(p.max_queue, p.initial_queue);
      EXPECT_GE(p.initial_queue, 0.0);
      prev_q = p.max_queue;
      prev_d = p.delay;
    }
  }
}

TEST(MaxQueue, ContinuousInRedTime) {
  const QueueParams th{0.2, 0.5, 3.0};
  for (double red = 1.0; red < 100.0; red += 7.3) {
    EXPECT_NEAR(sigctl::max_queue(th, red + 1e-7, spec20()), sigctl::max_queue(th, red, spec20()), 1e-5);
    EXPECT_NEAR(sigctl::lane_delay(th, red + 1e-7, spec20()), sigctl::lane_delay(th, red, spec20()), 1e-4);
  }
}

TEST(LaneDelay, TriangleWhenNoInitialQueue) {
  const QueueParams th{0.1, 0.5, 0.0};
  const double q = sigctl::max_queue(th, 40.0, spec20());
  EXPECT_NEAR(sigctl::lane_delay(th, 40.0, spec20()), 0.5 * 40.0 * q / 7.5, 1e-9);
}

// With an empty start the wave geometry and the point queue describe the
// same queue, so the two delays coincide.
TEST(LaneDelay, MatchesPointQueueWithoutInitialQueue) {
  std::mt19937_64 rng(43);
  for (int n = 0; n < 200; ++n) {
    auto th = random_theta(rng);
    th.initial_count = 0.0;
    const double red = 10.0 + 80.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double expected = oracle::point_queue_delay(th, red);
    EXPECT_NEAR(sigctl::lane_delay(th, red, spec20()), expected, 0.01 * expected) << "case " << n;
  }
}

// Stopped time of the kinematic-wave solution. Unlike the point queue, the
// initially queued vehicles stop waiting when the starting wave reaches them.
TEST(LaneDelay, WithinFifteenPercentOfStoppedTime) {
  std::mt19937_64 rng(44);
  const auto spec = spec20();
  for (int n = 0; n < 300; ++n) {
    const auto th = random_theta(rng);
    const double red = 10.0 + 80.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double expected = oracle::lwr_stopped_time(th, red, spec.jam_density, spec.wave_speed);
    EXPECT_NEAR(sigctl::lane_delay(th, red, spec20()), expected, 0.15 * expected)
        << "case " << n << " xi0=" << th.initial_count << " red=" << red;
  }
}

TEST(IntervalReward, Examples) {
  const std::vector<double> d{10.0, 20.0};
  const std::vector<double> f{1.0, 3.0};
  EXPECT_DOUBLE_EQ(sigctl::interval_reward(d, f), 17.5);
  const std::vector<double> same{7.0, 7.0, 7.0};
  const std::vector<double> f3{0.5, 9.0, 2.0};
  EXPECT_DOUBLE_EQ(sigctl::interval_reward(same, f3), 7.0);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_EQ(sigctl::interval_reward(d, zero), 0.0);
}

TEST(IntervalReward, WeightedMeanSandwich) {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int n = 0; n < 500; ++n) {
    std::vector<double> d(5), f(5);
    for (int i = 0; i < 5; ++i) {
      d[i] = u(rng);
      f[i] = u(rng) / 10.0;
    }
    const double r = sigctl::interval_reward(d, f);
    EXPECT_GE(r, *std::min_element(d.begin(), d.end()) - 1e-9);
    EXPECT_LE(r, *std::max_element(d.begin(), d.end()) + 1e-9);
  }
}

TEST(TrainingReward, CenteredAndMonotone) {
  sigctl::NormStats s;
  s.reward_mean = -20.0;
  s.reward_std = 10.0;
  EXPECT_DOUBLE_EQ(sigctl::to_training_reward(20.0, s), 5.0);
  EXPECT_GT(sigctl::to_training_reward(19.0, s), sigctl::to_training_reward(21.0, s));
}

TEST(TrainingReward, DatasetStatistics) {
  sigctl::TransitionDataset d;
  d.lane_count = 1;
  d.phase_order_count = 1;
  d.phase_count = 1;
  d.resize(3);
  d.states.setZero();
  d.next_states.setZero();
  d.actions.setConstant(0.5);
  d.actions.col(0).setConstant(90.0);
  d.rewards << 10.0, 20.0, 30.0;
  sigctl::IntersectionSpec spec = spec20();
  spec.lane_count = 1;
  spec.phase_count = 1;
  spec.phase_order_count = 1;
  const auto stats = sigctl::normalize_dataset(d, spec);
  const double mean = d.rewards.mean();
  const double var = (d.rewards.array() - mean).square().sum() / 2.0;
  EXPECT_NEAR(mean, 5.0, 1e-12);
  EXPECT_NEAR(var, 1.0, 1e-12);
  EXPECT_NEAR(d.rewards(0), sigctl::to_training_reward(10.0, stats), 1e-12);
  EXPECT_GT(d.rewards(0), d.rewards(2));
}

}  // namespace
