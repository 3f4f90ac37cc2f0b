#include <algorithm>
#include <cmath>

#include "sigctl/error.hpp"
#include "sigctl/sim.hpp"
#include "sigctl/state.hpp"

namespace sigctl {

void BehaviorController::begin_day(int day, std::uint64_t seed) {
  rng_.seed(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(day)), 0xbe4a7105ULL));
}

TimingPlan BehaviorController::decide(const IntervalObservation& last) {
  const IntersectionSpec& spec = cfg_.spec;
  const BehaviorConfig& b = cfg_.behavior;
  const int phases = spec.phase_count;
  std::vector<double> demand(static_cast<std::size_t>(phases), 0.0);
  for (int p = 0; p < phases; ++p)
    for (int l = 0; l < spec.lane_count; ++l)
      if (spec.is_controlled(l) && spec.green(last.phase_order, p, l))
        demand[static_cast<std::size_t>(p)] =
            std::max(demand[static_cast<std::size_t>(p)],
                     last.flows[static_cast<std::size_t>(l)] / cfg_.sim.interval_length);

  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> weight(static_cast<std::size_t>(phases));
  double total_demand = 0.0;
  double total_weight = 0.0;
  for (int p = 0; p < phases; ++p) {
    const auto i = static_cast<std::size_t>(p);
    total_demand += demand[i];
    weight[i] = (demand[i] + 0.01) * std::exp(b.split_noise * z(rng_));
    total_weight += weight[i];
  }
  const double m = spec.min_green_ratio;
  const double spread = 1.0 - phases * m;
  TimingPlan plan;
  for (double w : weight) plan.green_ratios.push_back(m + spread * w / total_weight);

  const double load = std::min(1.0, total_demand / b.demand_ref);
  const double cycle = b.cycle_low + (b.cycle_high - b.cycle_low) * load + b.cycle_noise * z(rng_);
  plan.cycle_length = std::clamp(cycle, spec.cycle_min, spec.cycle_max);
  return plan;
}

TimingPlan act(const GaussianPolicy& policy, const IntervalObservation& obs, const NormStats& stats,
               const IntersectionSpec& spec) {
  if (policy.state_dim() != state_dim(spec) || policy.phase_count() != spec.phase_count)
    throw DimensionError("policy dimensions do not match the intersection");
  if (stats.state_mean.size() != policy.state_dim() || stats.action_low.size() != policy.action_dim())
    throw DimensionError("normalization statistics do not match the policy");
  const Eigen::VectorXd s = stats.normalize_state(raw_state(obs, spec));
  const Eigen::VectorXd a = stats.denormalize_action(policy.mean_one(s));
  TimingPlan plan;
  plan.cycle_length = std::clamp(a(0), spec.cycle_min, spec.cycle_max);
  double sum = 0.0;
  for (int p = 0; p < spec.phase_count; ++p) sum += a(1 + p);
  // The squash keeps ratios on the simplex; dividing removes rounding drift.
  for (int p = 0; p < spec.phase_count; ++p) plan.green_ratios.push_back(a(1 + p) / sum);
  return plan;
}

}  // namespace sigctl
