#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "sigctl/config.hpp"
#include "sigctl/normalize.hpp"
#include "sigctl/policy.hpp"
#include "sigctl/types.hpp"

namespace sigctl {

// Discrete-time point-queue intersection with 1 s steps.
//
// Each lane holds a FIFO of arrival times at the stopline. A green lane
// discharges at saturation rate through a credit counter (one vehicle per
// unit of credit, at most one per second), so the first vehicle leaves in
// the first green second. Uncontrolled lanes pass every vehicle through in
// the step it arrives.
//
// The detected count projects the queue onto the road at jam spacing. Once
// the tail passes the detection range, vehicles only re-enter the counted
// zone as the discharge wave frees space, t_S later:
//   detected(t) = min(A(t), D(t - t_S) + L_dr k_j) - D(t).
class Simulator {
 public:
  Simulator(const IntersectionSpec& spec, double saturation_rate, bool stochastic, std::uint64_t seed,
            long start_time = 0);

  // Advances [t, t + 1): arrivals first, then departures.
  void step(const std::vector<double>& rates, const std::vector<bool>& green);

  long time() const { return time_; }
  int lane_count() const { return static_cast<int>(lanes_.size()); }
  long queue(int lane) const { return static_cast<long>(lanes_[idx(lane)].queue.size()); }
  long arrived(int lane) const { return lanes_[idx(lane)].arrived; }
  long departed(int lane) const { return lanes_[idx(lane)].departed; }
  double detected_count(int lane) const;
  // Vehicle-seconds waited so far: queue size after every step, summed.
  double delay(int lane) const { return lanes_[idx(lane)].delay; }
  // Last step only.
  int step_departures(int lane) const { return lanes_[idx(lane)].step_departures; }
  // Departures of the last step that waited at least 1 s.
  int step_stopped(int lane) const { return lanes_[idx(lane)].step_stopped; }

 private:
  struct Lane {
    std::deque<long> queue;
    double credit = 0.0;
    double fluid = 0.0;
    long arrived = 0;
    long departed = 0;
    std::vector<long> departed_history;  // cumulative departures at the start of each second
    double delay = 0.0;
    int step_departures = 0;
    int step_stopped = 0;
  };
  static std::size_t idx(int lane) { return static_cast<std::size_t>(lane); }

  IntersectionSpec spec_;
  double saturation_rate_;
  bool stochastic_;
  std::mt19937_64 rng_;
  long start_;
  long time_;
  std::vector<Lane> lanes_;
};

// Lane-cycle as the simulator saw it, with hidden ground truth.
struct LaneCycleTruth {
  int lane = 0;
  double start = 0.0;  // s since midnight, red onset
  double red = 0.0;
  double green = 0.0;
  double delay = 0.0;  // veh s waited inside [start, start + red + green)
  // m: jam spacing times the vehicles that stopped and left between green
  // onset and the first time the queue cleared, plus any still queued at the
  // end of the cycle if it never cleared.
  double max_queue = 0.0;
  double departures = 0.0;
};

struct IntervalTruth {
  int index = 0;
  std::vector<double> delay;  // per lane, veh s
};

// Everything one simulated day produces. `intervals` starts with the warm-up
// intervals (negative indices) followed by 0 .. N-1.
struct DayRecord {
  int day = 0;
  std::vector<IntervalObservation> intervals;
  std::vector<CycleRecord> cycles;  // executed plans, warm-up included
  std::vector<LaneCycleTruth> lane_cycles;  // controlled lanes, complete cycles only
  std::vector<IntervalTruth> interval_truth;  // indices 0 .. N-1
  double total_delay = 0.0;  // controlled lanes, veh s over [0, day_length)
  double total_queue = 0.0;  // m, sum of max_queue over lane-cycles starting in [0, day_length)
  long arrivals = 0;  // every lane, whole run
  long departures = 0;
  long in_system = 0;  // still queued at the end

  // Position in `intervals` of interval index `t`.
  std::size_t slot(int t) const;
};

// Chooses the plan for the next interval from the observation of the one
// that just ended. The plan takes effect at the next cycle start.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void begin_day(int day, std::uint64_t seed) {
    (void)day;
    (void)seed;
  }
  virtual TimingPlan decide(const IntervalObservation& last) = 0;
};

class FixedController : public Controller {
 public:
  explicit FixedController(TimingPlan plan) : plan_(std::move(plan)) {}
  TimingPlan decide(const IntervalObservation&) override { return plan_; }

 private:
  TimingPlan plan_;
};

// Noisy proportional-demand rule standing in for the operator's controller.
// Phase demand y_p is the largest flow rate among the controlled lanes the
// phase serves. Shares follow (y_p + 0.01) times log-normal noise above the
// min-green floor; the cycle length rises linearly from cycle_low to
// cycle_high as sum_p y_p approaches demand_ref, plus Gaussian noise,
// clamped to the cycle bounds.
class BehaviorController : public Controller {
 public:
  explicit BehaviorController(const Config& cfg) : cfg_(cfg) {}
  void begin_day(int day, std::uint64_t seed) override;
  TimingPlan decide(const IntervalObservation& last) override;

 private:
  const Config& cfg_;
  std::mt19937_64 rng_;
};

// Greedy policy: observation to state, mean action, back to a plan.
TimingPlan act(const GaussianPolicy& policy, const IntervalObservation& obs, const NormStats& stats,
               const IntersectionSpec& spec);

class PolicyController : public Controller {
 public:
  PolicyController(const GaussianPolicy& policy, const NormStats& stats, const IntersectionSpec& spec)
      : policy_(policy), stats_(stats), spec_(spec) {}
  TimingPlan decide(const IntervalObservation& last) override { return act(policy_, last, stats_, spec_); }

 private:
  const GaussianPolicy& policy_;
  const NormStats& stats_;
  const IntersectionSpec& spec_;
};

// Lane arrival rate (veh/s) on `day` at `seconds` since midnight. Constant
// within each interval: the diurnal profile is read at the interval midpoint
// and scaled by a per-(day, lane) log-normal factor.
double arrival_rate(const Config& cfg, int day, int lane, double seconds);

// Integer green seconds per phase summing to round(T_c), each at least 1,
// by largest remainder.
std::vector<int> round_greens(const TimingPlan& plan);

DayRecord simulate_day(const Config& cfg, Controller& controller, int day, std::uint64_t seed);

struct LaneCycleSpan {
  double start = 0.0;  // red onset
  double red = 0.0;
  double green = 0.0;
  double end() const { return start + red + green; }
};

// Red-onset-to-red-onset cycles of one controlled lane from the timing log,
// merging greens that touch across phases or cycles. Only cycles that end
// strictly before `until` and before the end of the last logged cycle are
// returned; uncontrolled lanes have none.
std::vector<LaneCycleSpan> lane_cycle_spans(const IntersectionSpec& spec, const std::vector<CycleRecord>& cycles,
                                            int lane, double until);

struct EvalRow {
  int day = 0;
  std::uint64_t seed = 0;
  double total_delay = 0.0;  // veh s
  double total_queue = 0.0;  // m
};

struct EvalReport {
  std::string policy;
  std::vector<EvalRow> rows;
  // Per interval of the day, veh s over controlled lanes, averaged over rows.
  std::vector<double> interval_delay;
  double mean_delay() const;
  double mean_queue() const;
};

// Closed-loop rollout on every (day, seed) pair, days outermost.
EvalReport evaluate(const Config& cfg, Controller& controller, const std::string& name, const std::vector<int>& days,
                    const std::vector<std::uint64_t>& seeds);

// "policy,day,seed,total_delay,total_queue", one row per run.
void write_eval(std::ostream& out, const std::vector<EvalReport>& reports);
std::vector<EvalReport> read_eval(std::istream& in);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace sigctl
