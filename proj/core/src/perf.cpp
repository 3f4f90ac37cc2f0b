#include "sigctl/perf.hpp"

#include <cmath>
#include <stdexcept>

#include "sigctl/error.hpp"

namespace sigctl {
namespace {

void check(const QueueParams& theta, double red) {
  if (!(theta.arrival_rate >= 0.0) || !(theta.saturation_rate > theta.arrival_rate))
    throw InfeasibleError("performance needs 0 <= v_n < v_s");
  if (!(theta.initial_count >= 0.0)) throw InfeasibleError("initial count must be non-negative");
  if (!(red >= 0.0)) throw std::invalid_argument("red time must be non-negative");
}

struct Geometry {
  double w1 = 0.0;  // |w1|
  double w2 = 0.0;  // |w2|
  double q0 = 0.0;
  double meet = 0.0;  // t*
  double qmax = 0.0;
};

Geometry geometry(const QueueParams& theta, double red, const IntersectionSpec& spec) {
  check(theta, red);
  const auto speeds = shockwave_speeds(theta, spec);
  Geometry g;
  g.w1 = std::abs(speeds.stopping);
  g.w2 = std::abs(speeds.starting);
  if (!(g.w2 > g.w1)) throw InfeasibleError("degenerate fundamental diagram: |w2| must exceed |w1|");
  g.q0 = theta.initial_count / spec.jam_density;
  g.meet = (g.w2 * red + g.q0) / (g.w2 - g.w1);
  g.qmax = g.w2 * (g.q0 + g.w1 * red) / (g.w2 - g.w1);
  return g;
}

}  // namespace

ShockwaveSpeeds shockwave_speeds(const QueueParams& theta, const IntersectionSpec& spec) {
  if (!(theta.arrival_rate >= 0.0) || !(theta.saturation_rate > theta.arrival_rate))
    throw InfeasibleError("shockwave speeds need 0 <= v_n < v_s");
  ShockwaveSpeeds s;
  s.starting = -spec.wave_speed;
  if (theta.arrival_rate > 0.0) {
    const double slowness = spec.jam_density * (1.0 / theta.arrival_rate - 1.0 / theta.saturation_rate) +
                            spec.traverse_time / spec.detection_range;
    s.stopping = -1.0 / slowness;
  }
  return s;
}

double max_queue(const QueueParams& theta, double red, const IntersectionSpec& spec) {
  return geometry(theta, red, spec).qmax;
}

double lane_delay(const QueueParams& theta, double red, const IntersectionSpec& spec) {
  const Geometry g = geometry(theta, red, spec);
  return 0.5 * (red * g.qmax + g.q0 * g.meet) * spec.jam_density;
}

CyclePerformance cycle_performance(const QueueParams& theta, double red, const IntersectionSpec& spec) {
  const Geometry g = geometry(theta, red, spec);
  CyclePerformance p;
  p.stopping_wave = -g.w1;
  p.starting_wave = -g.w2;
  p.initial_queue = g.q0;
  p.max_queue = g.qmax;
  p.delay = 0.5 * (red * g.qmax + g.q0 * g.meet) * spec.jam_density;
  return p;
}

double interval_reward(std::span<const double> delays, std::span<const double> flows) {
  if (delays.size() != flows.size()) throw DimensionError("delays and flows differ in length");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    num += delays[i] * flows[i];
    den += flows[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

double to_training_reward(double delay, const NormStats& stats) { return stats.training_reward(delay); }

}  // namespace sigctl
