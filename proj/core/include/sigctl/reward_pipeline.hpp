#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sigctl/config.hpp"
#include "sigctl/dataset.hpp"
#include "sigctl/perf.hpp"
#include "sigctl/queuing.hpp"
#include "sigctl/sim.hpp"

namespace sigctl {

// One controlled lane-cycle lying wholly inside a decision interval, carried
// through decomposition, inference and performance estimation.
struct LaneCycleEstimate {
  int day = 0;
  int interval = 0;
  LaneCycleObservation obs;  // cycle_flow from decomposition
  bool fallback = false;  // flow split by cycle length because every window had zero counts
  QueueParams theta;
  int accepted = 0;
  bool low_confidence = false;
  CyclePerformance perf;
};

struct DecomposeStats {
  long intervals = 0;
  long cycles = 0;
  long fallbacks = 0;
  long clamped = 0;
};

// Extracts every complete lane-cycle of intervals 0 .. N-1 from the timing
// log and splits each interval flow over its cycles. Partial windows at the
// interval edges absorb the residual. When no window saw a vehicle but the
// flow balance is nonzero, the flow is split in proportion to cycle length
// with a warning.
std::vector<LaneCycleEstimate> decompose_days(const std::vector<DayRecord>& days, const Config& cfg,
                                              DecomposeStats* stats = nullptr);

// Batch M-H over every cycle; deterministic for any `jobs`.
void infer_cycles(std::vector<LaneCycleEstimate>& cycles, const Config& cfg, int jobs);

// Shockwave performance of every cycle from its inferred parameters.
void estimate_performance(std::vector<LaneCycleEstimate>& cycles, const Config& cfg);

struct IntervalReward {
  int day = 0;
  int interval = 0;
  double reward = 0.0;  // r_t, flow-weighted mean cycle delay
  double total_delay = 0.0;  // veh s, sum of cycle delays
  double flow = 0.0;  // vehicles over the cycles used
  std::vector<double> max_queue;  // per lane, m, largest cycle q_max (0 for uncontrolled lanes)
};

// One row per (day, interval 0 .. N-1), in day order.
std::vector<IntervalReward> interval_rewards(const std::vector<LaneCycleEstimate>& cycles,
                                             const std::vector<DayRecord>& days, const Config& cfg);

// Raw transitions: s_t from the observation of interval t-1, a_t the plan of
// the first cycle starting in interval t (from the timing log), r_t the
// inferred reward of interval t, s' from interval t. The last interval of a
// day is terminal.
TransitionDataset build_dataset(const std::vector<DayRecord>& days, const std::vector<IntervalReward>& rewards,
                                const Config& cfg);

// Estimates against the simulator's hidden truth over the same lane-cycles.
struct IntervalFidelity {
  int day = 0;
  int interval = 0;
  double estimated = 0.0;  // veh s, sum of estimated cycle delays
  double truth = 0.0;  // veh s, sum of true delays of the same cycles
};

struct QueueFidelity {
  int day = 0;
  int lane = 0;
  double start = 0.0;
  double estimated = 0.0;  // m
  double truth = 0.0;  // m
  bool peak = false;
};

struct Fidelity {
  std::vector<IntervalFidelity> intervals;
  std::vector<QueueFidelity> cycles;
};

// Peak hours: diurnal multiplier at least this fraction of its maximum.
inline constexpr double kPeakFraction = 0.85;
bool is_peak(const ScenarioConfig& scenario, double seconds);

// Cycles without a truth record (none in practice) are skipped.
Fidelity compare_with_truth(const std::vector<LaneCycleEstimate>& cycles, const std::vector<DayRecord>& days,
                            const Config& cfg);

// cycles.csv: day,interval,lane,start,red,green,cycle_flow,fallback
//   plus v_n,v_s,xi0,accepted,low_confidence when `with_theta`.
void write_cycles(std::ostream& out, const std::vector<LaneCycleEstimate>& cycles, bool with_theta);
// Re-attaches count samples from the day records.
std::vector<LaneCycleEstimate> read_cycles(std::istream& in, const std::vector<DayRecord>& days, const Config& cfg);

// rewards.csv: day,interval,reward,normalized_reward,total_delay,flow,qmax0..qmax{L-1}
void write_rewards(std::ostream& out, const std::vector<IntervalReward>& rewards, const NormStats* stats);

}  // namespace sigctl
