#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sigctl/config.hpp"
#include "sigctl/dataset.hpp"
#include "sigctl/error.hpp"
#include "sigctl/normalize.hpp"

namespace {

using sigctl::Config;
using sigctl::ConfigError;

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

TEST(Config, WaveSpeedDerivedFromTraverseTime) {
  const Config cfg = oracle::small_config();
  EXPECT_DOUBLE_EQ(cfg.spec.detection_range, 150.0);
  EXPECT_DOUBLE_EQ(cfg.spec.traverse_time, 25.0);
  EXPECT_NEAR(cfg.spec.wave_speed, 6.0, 1e-12);
}

TEST(Config, TraverseTimeDerivedFromWaveSpeed) {
  const auto text = replace(oracle::small_config_text(), "traverse_time = 25", "wave_speed = 5");
  const Config cfg = sigctl::parse_config(text);
  EXPECT_NEAR(cfg.spec.traverse_time, 30.0, 1e-12);
}

TEST(Config, InconsistentWaveSpeedRejected) {
  const auto text = replace(oracle::small_config_text(), "traverse_time = 25", "traverse_time = 25\nwave_speed = 5");
  EXPECT_THROW(sigctl::parse_config(text), ConfigError);
}

TEST(Config, DefaultsForAbsentKeys) {
  const Config cfg = oracle::small_config();
  EXPECT_DOUBLE_EQ(cfg.gp.amplitude, 0.5);
  EXPECT_DOUBLE_EQ(cfg.gp.length_scale, 2.0);
  EXPECT_DOUBLE_EQ(cfg.gp.noise, 1.0);
  EXPECT_DOUBLE_EQ(cfg.sql.alpha, 0.01);
  EXPECT_DOUBLE_EQ(cfg.sql.aug_sigma, 0.01);
  EXPECT_DOUBLE_EQ(cfg.sql.aug_clip, 0.025);
  EXPECT_EQ(cfg.mh.iterations, 1000);
  EXPECT_DOUBLE_EQ(cfg.mh.burn_in_fraction, 0.75);
}

TEST(Config, JamSpacingStoredAsDensity) {
  const Config cfg = oracle::small_config();
  EXPECT_NEAR(cfg.spec.jam_density, 1.0 / 7.5, 1e-15);
  EXPECT_NEAR(cfg.spec.capacity(), 20.0, 1e-12);
}

TEST(Config, GreenRatiosOffSimplexNamed) {
  const auto text = replace(oracle::small_config_text(), "green_ratios = 0.25 0.25 0.25 0.25",
                            "green_ratios = 0.3 0.3 0.3 0.2");
  try {
    sigctl::parse_config(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("green ratios sum 1.1"), std::string::npos) << e.what();
  }
}

TEST(Config, NonBinaryPhaseMatrixRejected) {
  const auto text = replace(oracle::small_config_text(), "order0 = 1 1 0", "order0 = 2 1 0");
  EXPECT_THROW(sigctl::parse_config(text), ConfigError);
}

TEST(Config, ControlledLaneWithoutGreenRejected) {
  const auto text = replace(oracle::small_config_text(), "0 0 0 0 0 0 1 1\norder1", "0 0 0 0 0 0 1 0\norder1");
  EXPECT_THROW(sigctl::parse_config(text), ConfigError);
}

TEST(Config, UncontrolledLaneMayLackGreen) {
  auto text = replace(oracle::small_config_text(), "0 0 0 0 0 0 1 1\norder1", "0 0 0 0 0 0 1 0\norder1");
  text = replace(text, "controlled = 1 1 1 1 1 1 1 1", "controlled = 1 1 1 1 1 1 1 0");
  EXPECT_NO_THROW(sigctl::parse_config(text));
}

TEST(Config, MalformedNumberNamesKey) {
  const auto text = replace(oracle::small_config_text(), "detection_range = 150", "detection_range = far");
  try {
    sigctl::parse_config(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("detection_range"), std::string::npos) << e.what();
  }
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(sigctl::load_config("/nonexistent/sigctl.ini"), ConfigError);
}

TEST(Config, CanonicalRenderingRoundTrips) {
  const Config a = oracle::small_config();
  const Config b = sigctl::parse_config(a.to_ini());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.to_ini(), b.to_ini());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Config, HashTracksEveryValue) {
  const Config a = oracle::small_config();
  const auto text = replace(oracle::small_config_text(), "gamma = 0.99", "gamma = 0.98");
  EXPECT_NE(a.hash(), sigctl::parse_config(text).hash());
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"ci.ini", "full17.ini"}) {
    const Config cfg = sigctl::load_config(oracle::config_path(name));
    EXPECT_GT(cfg.spec.lane_count, 0) << name;
  }
}

TEST(Config, FnvMatchesReferenceVectors) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(sigctl::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(sigctl::fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(sigctl::fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(TimingPlan, CycleBoundsEnforced) {
  const Config cfg = oracle::small_config();
  sigctl::TimingPlan plan = sigctl::equal_split_plan(4, 130.0);
  EXPECT_THROW(plan.validate(cfg.spec), ConfigError);
  plan.cycle_length = 90.0;
  EXPECT_NO_THROW(plan.validate(cfg.spec));
  EXPECT_DOUBLE_EQ(plan.green_time(0), 22.5);
  EXPECT_DOUBLE_EQ(plan.red_time(0), 67.5);
}

TEST(LaneCycleObservation, CountAboveCapacityPlusOneRejected) {
  sigctl::LaneCycleObservation obs;
  obs.cycle_length = 60.0;
  obs.timestamps = {0.0, 5.0};
  obs.counts = {3.0, 21.0};
  EXPECT_NO_THROW(obs.validate(20.0));
  obs.counts[1] = 21.5;
  EXPECT_THROW(obs.validate(20.0), sigctl::DataError);
  obs.counts[1] = 3.0;
  obs.timestamps = {5.0, 5.0};
  EXPECT_THROW(obs.validate(20.0), sigctl::DataError);
}

// A raw dataset with hand-chosen values for the normalization examples.
sigctl::TransitionDataset tiny_dataset(const sigctl::IntersectionSpec& spec, int rows, std::mt19937_64& rng) {
  sigctl::TransitionDataset d;
  d.lane_count = spec.lane_count;
  d.phase_order_count = spec.phase_order_count;
  d.phase_count = spec.phase_count;
  d.resize(rows);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < d.state_dim(); ++j) {
      d.states(i, j) = u(rng);
      d.next_states(i, j) = u(rng);
    }
    d.actions(i, 0) = 60.0 + 6.0 * u(rng);
    for (int p = 0; p < spec.phase_count; ++p) d.actions(i, 1 + p) = 1.0 / spec.phase_count;
    d.rewards(i) = u(rng) * 10.0;
    d.days[static_cast<std::size_t>(i)] = 0;
    d.terminals[static_cast<std::size_t>(i)] = i + 1 == rows;
  }
  return d;
}

TEST(Normalize, ConstantColumnMapsToZeroWithUnitStd) {
  const Config cfg = oracle::small_config();
  std::mt19937_64 rng(1);
  auto d = tiny_dataset(cfg.spec, 5, rng);
  d.states.col(2).setConstant(4.0);
  const auto stats = sigctl::normalize_dataset(d, cfg.spec);
  EXPECT_DOUBLE_EQ(stats.state_std(2), 1.0);
  for (Eigen::Index i = 0; i < d.size(); ++i) EXPECT_DOUBLE_EQ(d.states(i, 2), 0.0);
}

TEST(Normalize, RewardsBecomeMeanFiveStdOne) {
  const Config cfg = oracle::small_config();
  std::mt19937_64 rng(2);
  auto d = tiny_dataset(cfg.spec, 3, rng);
  d.rewards << -2.0, 0.0, 2.0;
  sigctl::normalize_dataset(d, cfg.spec);
  const double mean = d.rewards.mean();
  const double var = (d.rewards.array() - mean).square().sum() / 2.0;
  EXPECT_NEAR(mean, 5.0, 1e-12);
  EXPECT_NEAR(var, 1.0, 1e-12);
  // Delays are negated before scaling: the largest delay gets the lowest reward.
  EXPECT_NEAR(d.rewards(2), 4.0, 1e-12);
  EXPECT_NEAR(d.rewards(0), 6.0, 1e-12);
}

TEST(Normalize, CycleMidpointMapsToHalf) {
  const Config cfg = oracle::small_config();
  std::mt19937_64 rng(3);
  auto d = tiny_dataset(cfg.spec, 4, rng);
  const auto stats = sigctl::normalize_dataset(d, cfg.spec);
  Eigen::VectorXd a = Eigen::VectorXd::Constant(5, 0.25);
  a(0) = 90.0;
  EXPECT_NEAR(stats.normalize_action(a)(0), 0.5, 1e-12);
  EXPECT_NEAR(stats.normalize_action(a)(1), 0.25, 1e-12);
}

TEST(Normalize, RoundTripRestoresRawValues) {
  const Config cfg = oracle::small_config();
  std::mt19937_64 rng(4);
  const auto raw = tiny_dataset(cfg.spec, 20, rng);
  auto d = raw;
  sigctl::normalize_dataset(d, cfg.spec);
  sigctl::denormalize_dataset(d);
  EXPECT_LT((d.states - raw.states).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((d.next_states - raw.next_states).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((d.actions - raw.actions).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((d.rewards - raw.rewards).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Normalize, IdempotentUnderFixedStats) {
  const Config cfg = oracle::small_config();
  std::mt19937_64 rng(5);
  auto d = tiny_dataset(cfg.spec, 10, rng);
  const auto stats = sigctl::normalize_dataset(d, cfg.spec);
  const Eigen::VectorXd raw = Eigen::VectorXd::LinSpaced(stats.state_mean.size(), 1.0, 3.0);
  const Eigen::VectorXd once = stats.normalize_state(raw);
  EXPECT_EQ(once, stats.normalize_state(raw));
  EXPECT_LT((stats.denormalize_state(once) - raw).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(stats.delay_from_training_reward(stats.training_reward(37.0)), 37.0, 1e-9);
}

TEST(Normalize, EmptyDatasetRejected) {
  const Config cfg = oracle::small_config();
  sigctl::TransitionDataset d;
  d.lane_count = cfg.spec.lane_count;
  d.phase_order_count = cfg.spec.phase_order_count;
  d.phase_count = cfg.spec.phase_count;
  d.resize(0);
  EXPECT_THROW(sigctl::normalize_dataset(d, cfg.spec), sigctl::DataError);
}

}  // namespace
