#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sigctl {

// Static description of one signalized intersection and its detection setup.
//
// Units: metres, seconds, vehicles. Jam density is stored as veh/m, so
// `capacity()` (detection range times jam density) is a vehicle count.
struct IntersectionSpec {
  int lane_count = 0;
  int phase_count = 0;
  int phase_order_count = 0;
  // Binary tensor K x P x L, row-major: index (k * P + p) * L + l.
  std::vector<std::uint8_t> phase_matrix;
  // Lanes that belong to signal-controlled movements. Right-turn lanes are
  // simulated but excluded from queue and delay accounting.
  std::vector<std::uint8_t> controlled;

  double detection_range = 150.0;  // m
  double jam_density = 1.0 / 7.5;  // veh/m
  double free_flow_speed = 10.0;   // m/s
  double wave_speed = 6.0;         // m/s
  double traverse_time = 25.0;     // s, detection_range / wave_speed

  double cycle_min = 60.0;  // s
  double cycle_max = 120.0;  // s
  double min_green_ratio = 0.05;

  bool green(int order, int phase, int lane) const {
    return phase_matrix[static_cast<std::size_t>((order * phase_count + phase) * lane_count + lane)] != 0;
  }
  bool is_controlled(int lane) const { return controlled[static_cast<std::size_t>(lane)] != 0; }
  // Vehicles that fit in the detection range at jam density.
  double capacity() const { return detection_range * jam_density; }
  double jam_spacing() const { return 1.0 / jam_density; }

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Cycle length plus per-phase green ratios. The ratios live on the simplex.
struct TimingPlan {
  double cycle_length = 0.0;
  std::vector<double> green_ratios;

  double green_time(int phase) const { return green_ratios[static_cast<std::size_t>(phase)] * cycle_length; }
  double red_time(int phase) const { return cycle_length - green_time(phase); }

  // Checks positivity, the unit sum (1e-9) and the cycle bounds of `spec`.
  void validate(const IntersectionSpec& spec) const;
};

// Uniform plan used as the fixed background timing.
TimingPlan equal_split_plan(int phase_count, double cycle_length);

// One lane's data within one lane-cycle. A lane-cycle starts at the lane's
// red onset, so the red phase comes first and the cycle ends when green does.
struct LaneCycleObservation {
  int lane = 0;
  double cycle_start = 0.0;  // s, absolute
  double cycle_length = 0.0;  // s
  double red = 0.0;  // s
  double green = 0.0;  // s
  std::vector<double> timestamps;  // s, relative to cycle_start
  std::vector<double> counts;  // vehicles in detection range
  double cycle_flow = 0.0;  // vehicles discharged in the cycle (decomposed)

  void validate(double capacity) const;
};

// Signal cycle as logged by the controller.
struct CycleRecord {
  double start = 0.0;
  int phase_order = 0;
  TimingPlan plan;
};

// Coarse observation of one 5-minute interval.
struct IntervalObservation {
  int day = 0;
  int index = 0;
  std::vector<double> flows;  // per lane, vehicles per interval
  std::vector<std::vector<double>> counts;  // per lane, 5 s cadence
  int phase_order = 0;  // active at the end of the interval
  std::vector<CycleRecord> cycles;  // cycles starting inside the interval

  // Per-lane mean of the count series.
  std::vector<double> mean_counts() const;
  void validate(const IntersectionSpec& spec, double interval_length, double count_period) const;
};

}  // namespace sigctl
