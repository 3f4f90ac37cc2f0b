#include "sigctl/queuing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sigctl/error.hpp"
#include "sigctl/log.hpp"

namespace sigctl {
namespace {

constexpr double kSlack = 1e-9;

std::string describe(const QueueParams& theta, double cycle_flow) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "theta=(v_n=%.6g, v_s=%.6g, xi_0=%.6g), x_f=%.6g", theta.arrival_rate,
                theta.saturation_rate, theta.initial_count, cycle_flow);
  return buf;
}

void check_time(const SignalTiming& timing, double t) {
  if (!(t >= -kSlack && t <= timing.cycle_length + kSlack)) {
    std::ostringstream os;
    os << "time " << t << " s lies outside the cycle [0, " << timing.cycle_length << "]";
    throw std::out_of_range(os.str());
  }
}

}  // namespace

void QueueParams::validate(double capacity) const {
  if (!(arrival_rate > 0.0)) throw InfeasibleError("arrival rate must be positive, got " + std::to_string(arrival_rate));
  if (!(saturation_rate > arrival_rate))
    throw InfeasibleError("saturation rate " + std::to_string(saturation_rate) + " must exceed arrival rate " +
                          std::to_string(arrival_rate));
  if (!(initial_count >= 0.0 && initial_count <= capacity))
    throw InfeasibleError("initial count " + std::to_string(initial_count) + " outside [0, " +
                          std::to_string(capacity) + "]");
}

double cumulative_arrival(const QueueParams& theta, const SignalTiming& timing, double t) {
  if (!(theta.arrival_rate > 0.0)) throw InfeasibleError("arrival rate must be positive");
  check_time(timing, t);
  return theta.initial_count + theta.arrival_rate * t;
}

double dissipation_time(const QueueParams& theta, double green, double cycle_flow) {
  if (!(theta.saturation_rate > theta.arrival_rate))
    throw InfeasibleError("dissipation time needs v_s > v_n: " + describe(theta, cycle_flow));
  const double tau = (cycle_flow - theta.arrival_rate * green) / (theta.saturation_rate - theta.arrival_rate);
  const double slack = kSlack * std::max(1.0, green);
  if (!(tau >= -slack && tau <= green + slack)) {
    std::ostringstream os;
    os << "dissipation time " << tau << " s outside [0, " << green << "] for " << describe(theta, cycle_flow);
    throw InfeasibleError(os.str());
  }
  return std::clamp(tau, 0.0, green);
}

double cumulative_departure(const QueueParams& theta, const SignalTiming& timing, double cycle_flow, double t) {
  check_time(timing, t);
  const double tau = dissipation_time(theta, timing.green, cycle_flow);
  if (t >= timing.cycle_length) return cycle_flow;
  if (t <= timing.red) return 0.0;
  if (t <= timing.red + tau) return theta.saturation_rate * (t - timing.red);
  return theta.saturation_rate * tau + theta.arrival_rate * (t - timing.red - tau);
}

double theoretical_count(const QueueParams& theta, const SignalTiming& timing, double cycle_flow,
                         const IntersectionSpec& spec, double t) {
  check_time(timing, t);
  const QueueCurve curve(theta, timing, cycle_flow, spec.capacity(), spec.traverse_time);
  return curve.count(std::clamp(t, 0.0, timing.cycle_length));
}

std::string infeasibility(const QueueParams& theta, const SignalTiming& timing, double cycle_flow, double capacity) {
  if (!(timing.cycle_length > 0.0) || timing.red < 0.0 || timing.green < 0.0 ||
      std::abs(timing.red + timing.green - timing.cycle_length) > kSlack * std::max(1.0, timing.cycle_length))
    return "timing must satisfy red + green = cycle length with non-negative parts";
  if (!(cycle_flow >= 0.0)) return "cycle flow must be non-negative";
  if (!(theta.arrival_rate > 0.0)) return "arrival rate must be positive: " + describe(theta, cycle_flow);
  if (!(theta.saturation_rate > theta.arrival_rate)) return "v_s must exceed v_n: " + describe(theta, cycle_flow);
  if (!(theta.initial_count >= 0.0 && theta.initial_count <= capacity))
    return "initial count outside [0, capacity]: " + describe(theta, cycle_flow);
  const double tau =
      (cycle_flow - theta.arrival_rate * timing.green) / (theta.saturation_rate - theta.arrival_rate);
  const double slack = kSlack * std::max(1.0, timing.green);
  if (!(tau >= -slack && tau <= timing.green + slack))
    return "dissipation time outside [0, T_g]: " + describe(theta, cycle_flow);
  return {};
}

QueueCurve::QueueCurve(const QueueParams& theta, const SignalTiming& timing, double cycle_flow, double capacity,
                       double traverse_time)
    : theta_(theta), timing_(timing), flow_(cycle_flow), capacity_(capacity), ts_(traverse_time) {
  if (theta_.initial_count > capacity_) {
    log_warning("initial count " + std::to_string(theta_.initial_count) + " exceeds detection capacity " +
                std::to_string(capacity_) + "; clamped");
    theta_.initial_count = capacity_;
  }
  if (!(ts_ > 0.0)) throw ConfigError("traverse time must be positive");
  const std::string why = infeasibility(theta_, timing_, flow_, capacity_);
  if (!why.empty()) throw InfeasibleError(why);
  init();
}

std::optional<QueueCurve> QueueCurve::make(const QueueParams& theta, const SignalTiming& timing, double cycle_flow,
                                           double capacity, double traverse_time) noexcept {
  if (!(traverse_time > 0.0)) return std::nullopt;
  QueueParams th = theta;
  th.initial_count = std::min(th.initial_count, capacity);
  if (!infeasibility(th, timing, cycle_flow, capacity).empty()) return std::nullopt;
  QueueCurve c;
  c.theta_ = th;
  c.timing_ = timing;
  c.flow_ = cycle_flow;
  c.capacity_ = capacity;
  c.ts_ = traverse_time;
  c.init();
  return c;
}

void QueueCurve::init() {
  const double vn = theta_.arrival_rate;
  const double vs = theta_.saturation_rate;
  tau_ = std::clamp((flow_ - vn * timing_.green) / (vs - vn), 0.0, timing_.green);
}

double QueueCurve::arrival(double t) const { return theta_.initial_count + theta_.arrival_rate * t; }

double QueueCurve::departure(double t) const {
  const double tr = timing_.red;
  if (t >= timing_.cycle_length) return flow_;
  if (t <= tr) return 0.0;
  if (t <= tr + tau_) return theta_.saturation_rate * (t - tr);
  return theta_.saturation_rate * tau_ + theta_.arrival_rate * (t - tr - tau_);
}

double QueueCurve::unrestricted(double t) const {
  const double vn = theta_.arrival_rate;
  const double vs = theta_.saturation_rate;
  const double tr = timing_.red;
  if (t <= tr) return theta_.initial_count + vn * t;
  if (t <= tr + tau_) return theta_.initial_count + vs * tr + (vn - vs) * t;
  return theta_.initial_count + vn * timing_.cycle_length - flow_;
}

// Case table of D_{t - t_S} - D_t. After the queue clears (t > T_r + tau)
// the lagged departure curve is still in red up to T_r + t_S, then in
// saturated discharge up to T_r + tau + t_S, then in pass-through. The
// first of those windows is empty when t_S <= tau and the third when
// tau + t_S >= T_g; each branch is tied to its own window so the curve stays
// continuous in every t_S regime.
double QueueCurve::spillback(double t) const {
  const double vn = theta_.arrival_rate;
  const double vs = theta_.saturation_rate;
  const double tr = timing_.red;
  const double tc = timing_.cycle_length;
  if (t <= tr) return 0.0;
  if (t <= tr + tau_) {
    if (ts_ < tau_ && t > tr + ts_) return -vs * ts_;
    return -vs * (t - tr);
  }
  if (t <= tr + ts_) return -flow_ + vn * tc - vn * t;
  if (t <= tr + tau_ + ts_) return vn * tc - vs * (ts_ + tr) - flow_ + (vs - vn) * t;
  return -vn * ts_;
}

double QueueCurve::count(double t) const { return std::min(unrestricted(t), spillback(t) + capacity_); }

std::vector<double> QueueCurve::breakpoints() const {
  const double tr = timing_.red;
  std::vector<double> pts;
  for (double b : {tr, tr + tau_, tr + ts_, tr + tau_ + ts_})
    if (b > 0.0 && b < timing_.cycle_length) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            pts.end());
  return pts;
}

std::string dump_curve(const QueueCurve& curve) {
  std::ostringstream os;
  os << "t,A,D,xi1,xi2,xi\n";
  const double tc = curve.timing().cycle_length;
  const int n = static_cast<int>(std::floor(tc + 1e-9));
  char buf[200];
  for (int i = 0; i <= n; ++i) {
    const double t = std::min(static_cast<double>(i), tc);
    std::snprintf(buf, sizeof(buf), "%g,%.6f,%.6f,%.6f,%.6f,%.6f\n", t, curve.arrival(t), curve.departure(t),
                  curve.unrestricted(t), curve.spillback(t), curve.count(t));
    os << buf;
  }
  return os.str();
}

}  // namespace sigctl
