#include "sigctl/types.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "sigctl/error.hpp"

namespace sigctl {
namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void require_positive(const char* name, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string(name) + " must be positive, got " + fmt_num(value));
  }
}

}  // namespace

void IntersectionSpec::validate() const {
  if (lane_count <= 0) throw ConfigError("lanes must be positive, got " + std::to_string(lane_count));
  if (phase_count <= 0) throw ConfigError("phases must be positive, got " + std::to_string(phase_count));
  if (phase_order_count <= 0) {
    throw ConfigError("phase_orders must be positive, got " + std::to_string(phase_order_count));
  }
  const auto expected = static_cast<std::size_t>(phase_order_count * phase_count * lane_count);
  if (phase_matrix.size() != expected) {
    throw ConfigError("phase_matrix has " + std::to_string(phase_matrix.size()) + " entries, expected " +
                      std::to_string(expected));
  }
  for (auto v : phase_matrix) {
    if (v > 1) throw ConfigError("phase_matrix entries must be 0 or 1, got " + std::to_string(v));
  }
  if (controlled.size() != static_cast<std::size_t>(lane_count)) {
    throw ConfigError("controlled has " + std::to_string(controlled.size()) + " entries, expected " +
                      std::to_string(lane_count));
  }
  for (int k = 0; k < phase_order_count; ++k) {
    for (int l = 0; l < lane_count; ++l) {
      if (!is_controlled(l)) continue;
      int served = 0;
      for (int p = 0; p < phase_count; ++p) served += green(k, p, l) ? 1 : 0;
      if (served == 0) {
        throw ConfigError("phase order " + std::to_string(k) + " never gives green to controlled lane " +
                          std::to_string(l));
      }
    }
  }
  require_positive("detection_range", detection_range);
  require_positive("jam_density", jam_density);
  require_positive("free_flow_speed", free_flow_speed);
  require_positive("wave_speed", wave_speed);
  require_positive("traverse_time", traverse_time);
  const double implied = detection_range / wave_speed;
  if (std::abs(implied - traverse_time) > 1e-9 * std::max(1.0, std::abs(traverse_time))) {
    throw ConfigError("traverse_time " + fmt_num(traverse_time) + " inconsistent with detection_range / wave_speed = " +
                      fmt_num(implied));
  }
  require_positive("cycle_min", cycle_min);
  if (!(cycle_max >= cycle_min)) {
    throw ConfigError("cycle_max " + fmt_num(cycle_max) + " below cycle_min " + fmt_num(cycle_min));
  }
  if (!(min_green_ratio >= 0.0) || min_green_ratio * phase_count >= 1.0) {
    throw ConfigError("min_green_ratio " + fmt_num(min_green_ratio) + " leaves no room on the simplex");
  }
}

void TimingPlan::validate(const IntersectionSpec& spec) const {
  if (green_ratios.size() != static_cast<std::size_t>(spec.phase_count)) {
    throw ConfigError("green ratios have " + std::to_string(green_ratios.size()) + " entries, expected " +
                      std::to_string(spec.phase_count));
  }
  for (std::size_t p = 0; p < green_ratios.size(); ++p) {
    if (!(green_ratios[p] > 0.0)) {
      throw ConfigError("green ratio " + std::to_string(p) + " must be positive, got " + fmt_num(green_ratios[p]));
    }
  }
  const double sum = std::accumulate(green_ratios.begin(), green_ratios.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("green ratios sum " + fmt_num(sum) + " ≠ 1");
  }
  if (!(cycle_length >= spec.cycle_min - 1e-9 && cycle_length <= spec.cycle_max + 1e-9)) {
    throw ConfigError("cycle length " + fmt_num(cycle_length) + " outside [" + fmt_num(spec.cycle_min) + ", " +
                      fmt_num(spec.cycle_max) + "]");
  }
}

TimingPlan equal_split_plan(int phase_count, double cycle_length) {
  TimingPlan plan;
  plan.cycle_length = cycle_length;
  plan.green_ratios.assign(static_cast<std::size_t>(phase_count), 1.0 / phase_count);
  return plan;
}

void LaneCycleObservation::validate(double capacity) const {
  if (timestamps.size() != counts.size()) {
    throw DataError("lane-cycle timestamps and counts differ in length");
  }
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    if (timestamps[i] < 0.0 || timestamps[i] > cycle_length) {
      throw DataError("count timestamp " + fmt_num(timestamps[i]) + " outside cycle [0, " + fmt_num(cycle_length) +
                      "]");
    }
    if (i > 0 && !(timestamps[i] > timestamps[i - 1])) {
      throw DataError("count timestamps must be strictly increasing");
    }
    if (counts[i] < 0.0 || counts[i] > capacity + 1.0) {
      throw DataError("spatial count " + fmt_num(counts[i]) + " outside [0, " + fmt_num(capacity + 1.0) + "]");
    }
  }
}

std::vector<double> IntervalObservation::mean_counts() const {
  std::vector<double> out(counts.size(), 0.0);
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l].empty()) continue;
    out[l] = std::accumulate(counts[l].begin(), counts[l].end(), 0.0) / static_cast<double>(counts[l].size());
  }
  return out;
}

void IntervalObservation::validate(const IntersectionSpec& spec, double interval_length, double count_period) const {
  const auto lanes = static_cast<std::size_t>(spec.lane_count);
  if (flows.size() != lanes || counts.size() != lanes) {
    throw DimensionError("interval observation lane dimension mismatch");
  }
  const auto expected = static_cast<std::size_t>(std::llround(interval_length / count_period));
  for (std::size_t l = 0; l < lanes; ++l) {
    if (flows[l] < 0.0) throw DataError("negative flow on lane " + std::to_string(l));
    if (counts[l].size() != expected) {
      throw DataError("lane " + std::to_string(l) + " has " + std::to_string(counts[l].size()) +
                      " count samples, expected " + std::to_string(expected));
    }
  }
  if (phase_order < 0 || phase_order >= spec.phase_order_count) {
    throw DataError("phase order id " + std::to_string(phase_order) + " out of range");
  }
}

}  // namespace sigctl
