#pragma once

#include <span>

#include "sigctl/normalize.hpp"
#include "sigctl/queuing.hpp"
#include "sigctl/types.hpp"

namespace sigctl {

// Unit regime:
//   queue lengths        m            q0 = xi_0 / k_j
//   shockwave speeds     m/s          negative = travelling upstream
//   delay area           m s          region bounded by the two waves
//   delay                veh s        area times k_j
//   interval reward      veh s        flow-weighted mean of cycle delays
struct CyclePerformance {
  double stopping_wave = 0.0;  // w1, m/s
  double starting_wave = 0.0;  // w2, m/s
  double initial_queue = 0.0;  // q0, m
  double max_queue = 0.0;  // m
  double delay = 0.0;  // veh s
};

struct ShockwaveSpeeds {
  double stopping = 0.0;  // w1
  double starting = 0.0;  // w2
};

// w1 = -1 / (k_j (1/v_n - 1/v_s) + t_S / L_dr), w2 = -w. v_n = 0 gives w1 = 0.
ShockwaveSpeeds shockwave_speeds(const QueueParams& theta, const IntersectionSpec& spec);

// Meeting point of the stopping wave (from q0 at red onset) and the starting
// wave (from the stopline at green onset), in magnitudes:
//   q_max = |w2| (q0 + |w1| T_r) / (|w2| - |w1|).
double max_queue(const QueueParams& theta, double red, const IntersectionSpec& spec);

// d = k_j / 2 [T_r q_max + q0 t*], t* = (|w2| T_r + q0) / (|w2| - |w1|) the
// meeting time.
double lane_delay(const QueueParams& theta, double red, const IntersectionSpec& spec);

CyclePerformance cycle_performance(const QueueParams& theta, double red, const IntersectionSpec& spec);

// sum d_i x_i / sum x_i; 0 when the total flow is 0.
double interval_reward(std::span<const double> delays, std::span<const double> flows);

// 5 + (-r - mean) / std with statistics of the negated delays.
double to_training_reward(double delay, const NormStats& stats);

}  // namespace sigctl
