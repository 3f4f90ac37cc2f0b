#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sigctl/types.hpp"

namespace sigctl {

// Squared-exponential kernel with a white-noise term.
struct GpHyper {
  double amplitude = 0.5;  // h_0
  double length_scale = 2.0;  // lambda, s
  double noise = 1.0;  // eta, vehicles
};

enum class MhEstimator {
  kAcceptedMean,  // mean of accepted proposals after burn-in
  kChainMean,  // textbook: mean over chain states, rejections repeat
};

struct MhConfig {
  int iterations = 1000;
  double burn_in_fraction = 0.75;
  double arrival_max = 1.0;  // upper bound of the v_n proposal box, veh/s
  double saturation_max = 1.5;  // upper bound of the v_s proposal box, veh/s
  double saturation_floor = 0.45;  // lower bound on the initial v_s, veh/s
  std::uint64_t seed = 1;
  MhEstimator estimator = MhEstimator::kAcceptedMean;
};

struct SqlConfig {
  double alpha = 0.01;
  double gamma = 0.99;
  double aug_sigma = 0.01;
  double aug_clip = 0.025;
  int batch_size = 256;
  long steps = 1'000'000;
  double learning_rate = 3e-5;
  double target_rate = 0.005;  // Polyak rate of the target value network
  int hidden = 256;
  int depth = 2;
  double init_log_std = -1.0;
  int log_every = 1000;
  std::uint64_t seed = 1;
};

struct SimConfig {
  double saturation_rate = 0.5;  // veh/s per lane
  double interval_length = 300.0;  // s
  double count_period = 5.0;  // s
  double warmup = 300.0;  // s simulated before midnight
  double day_length = 86400.0;  // s
};

// Noisy proportional-demand controller used to generate the offline data.
struct BehaviorConfig {
  double cycle_low = 70.0;  // s at zero demand
  double cycle_high = 115.0;  // s at demand_ref
  double demand_ref = 0.5;  // total critical demand (veh/s) that maps to cycle_high
  double cycle_noise = 10.0;  // s, std of Gaussian noise on T_c
  double split_noise = 0.25;  // std of log-normal noise on each green share
};

struct ScenarioConfig {
  // Piecewise-linear (hour, multiplier) knots; sampled per interval.
  std::vector<std::pair<double, double>> diurnal;
  std::vector<double> lane_peak_rates;  // veh/s at multiplier 1
  double day_variation = 0.1;  // per-day, per-lane multiplicative jitter std
  bool stochastic = true;  // Bernoulli arrivals when true, fluid otherwise
  // (hour, phase order id) switch points; the first entry must start at 0.
  std::vector<std::pair<double, int>> phase_order_schedule;
};

struct Config {
  IntersectionSpec spec;
  TimingPlan fixed_plan;
  GpHyper gp;
  MhConfig mh;
  SqlConfig sql;
  SimConfig sim;
  BehaviorConfig behavior;
  ScenarioConfig scenario;

  // 16 hex digits; FNV-1a over the canonical rendering of every resolved value.
  std::string hash() const;
  // Canonical INI text; reloading it yields an identical config and hash.
  std::string to_ini() const;
};

Config load_config(const std::string& path);
Config parse_config(const std::string& text);

// Multiplier of the diurnal profile at `seconds` since midnight.
double diurnal_multiplier(const ScenarioConfig& scenario, double seconds);
int scheduled_phase_order(const ScenarioConfig& scenario, double seconds);

std::string fnv1a_hex(const std::string& text);

}  // namespace sigctl
