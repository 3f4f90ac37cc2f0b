#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sigctl/types.hpp"

namespace sigctl {

// theta = {v_n, v_s, xi_0}.
struct QueueParams {
  double arrival_rate = 0.0;  // v_n, veh/s
  double saturation_rate = 0.0;  // v_s, veh/s
  double initial_count = 0.0;  // xi_0, veh

  // Throws InfeasibleError unless 0 < v_n < v_s and 0 <= xi_0 <= capacity.
  void validate(double capacity) const;
};

// Red first, then green: red + green == cycle_length.
struct SignalTiming {
  double cycle_length = 0.0;
  double red = 0.0;
  double green = 0.0;

  static SignalTiming from(const LaneCycleObservation& obs) { return {obs.cycle_length, obs.red, obs.green}; }
  static SignalTiming red_green(double red, double green) { return {red + green, red, green}; }
};

// A_t = xi_0 + v_n t.
double cumulative_arrival(const QueueParams& theta, const SignalTiming& timing, double t);

// tau = (x_f - v_n T_g) / (v_s - v_n); throws InfeasibleError outside [0, T_g].
double dissipation_time(const QueueParams& theta, double green, double cycle_flow);

double cumulative_departure(const QueueParams& theta, const SignalTiming& timing, double cycle_flow, double t);

// xi_t = min(xi1_t, xi2_t + L_dr k_j).
double theoretical_count(const QueueParams& theta, const SignalTiming& timing, double cycle_flow,
                         const IntersectionSpec& spec, double t);

// Why a parameter set cannot describe a cycle; empty when feasible.
std::string infeasibility(const QueueParams& theta, const SignalTiming& timing, double cycle_flow, double capacity);

// Count curve of one lane-cycle with tau and the branch boundaries resolved
// once. Feasible means tau in [0, T_g]. A flow above xi_0 + v_n T_c is
// allowed and drives the post-clearance count negative; the likelihood, not
// a hard bound, penalizes it.
class QueueCurve {
 public:
  // Throws InfeasibleError. xi_0 above capacity is clamped with a warning.
  QueueCurve(const QueueParams& theta, const SignalTiming& timing, double cycle_flow, double capacity,
             double traverse_time);

  // Non-throwing, non-logging variant for sampler inner loops.
  static std::optional<QueueCurve> make(const QueueParams& theta, const SignalTiming& timing, double cycle_flow,
                                        double capacity, double traverse_time) noexcept;

  double tau() const { return tau_; }
  const QueueParams& params() const { return theta_; }
  const SignalTiming& timing() const { return timing_; }

  double arrival(double t) const;
  double departure(double t) const;
  // xi1 = A_t - D_t.
  double unrestricted(double t) const;
  // xi2 = D_{t - t_S} - D_t, via the case table.
  double spillback(double t) const;
  double count(double t) const;

  // Interior points where a branch of xi1 or xi2 changes, sorted, deduplicated.
  std::vector<double> breakpoints() const;

 private:
  QueueCurve() = default;
  void init();

  QueueParams theta_;
  SignalTiming timing_;
  double flow_ = 0.0;
  double capacity_ = 0.0;
  double ts_ = 0.0;
  double tau_ = 0.0;
};

// One "t,A,D,xi1,xi2,xi" row per second of the cycle, with a header line.
std::string dump_curve(const QueueCurve& curve);

}  // namespace sigctl
