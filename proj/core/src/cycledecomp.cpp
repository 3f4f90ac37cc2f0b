#include "sigctl/cycledecomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sigctl/error.hpp"
#include "sigctl/log.hpp"

namespace sigctl {
namespace {

struct Solved {
  double zeta = 0.0;
  bool zeta_clamped = false;
  std::vector<double> rates;
  std::vector<double> raw;
};

Solved solve(double balance_flow, std::span<const CycleWindow> windows) {
  double boundary = 0.0;
  double weight = 0.0;
  for (const auto& w : windows) {
    boundary += w.start_count - w.end_count;
    weight += w.peak_count * w.length;
  }
  const double numerator = balance_flow - boundary;
  Solved s;
  if (weight <= 0.0) {
    if (std::abs(numerator) > 1e-9 * std::max(1.0, std::abs(balance_flow)))
      throw DataError("every cycle has zero peak count but the flow balance leaves " + std::to_string(numerator) +
                      " vehicles unexplained");
    s.zeta = 0.0;
  } else {
    s.zeta = numerator / weight;
  }
  if (s.zeta < 0.0) {
    std::ostringstream os;
    os << "negative normalized arrival rate " << s.zeta << " clamped to 0";
    log_warning(os.str());
    s.zeta = 0.0;
    s.zeta_clamped = true;
  }
  for (const auto& w : windows) {
    const double rate = s.zeta * w.peak_count;
    s.rates.push_back(rate);
    s.raw.push_back(w.start_count + rate * w.length - w.end_count);
  }
  return s;
}

// Zeroes negative entries and scales the positive ones so the total is
// `target` whenever that is possible.
int clamp_flows(std::vector<double>& flows, double target) {
  int clamped = 0;
  double positive = 0.0;
  for (double& f : flows) {
    if (f < 0.0) {
      f = 0.0;
      ++clamped;
    } else {
      positive += f;
    }
  }
  if (clamped == 0) return 0;
  if (target < 0.0) {
    log_warning("residual exceeds the interval flow; conservation cannot be restored");
  } else if (positive > 0.0) {
    const double scale = target / positive;
    for (double& f : flows) f *= scale;
  } else if (target > 0.0) {
    log_warning("all cycle flows were negative; conservation cannot be restored");
  }
  return clamped;
}

}  // namespace

double count_at(std::span<const double> times, std::span<const double> counts, double t) {
  if (times.size() != counts.size()) throw DimensionError("count series and timestamps differ in length");
  if (times.empty()) throw DataError("empty count series");
  const auto it = std::upper_bound(times.begin(), times.end(), t + 1e-9);
  if (it == times.begin()) return counts.front();
  return counts[static_cast<std::size_t>(std::distance(times.begin(), it) - 1)];
}

CycleWindow make_window(std::span<const double> times, std::span<const double> counts, double begin, double end) {
  CycleWindow w;
  w.length = end - begin;
  w.start_count = count_at(times, counts, begin);
  w.end_count = count_at(times, counts, end);
  bool any = false;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= begin - 1e-9 && times[i] < end - 1e-9) {
      w.peak_count = any ? std::max(w.peak_count, counts[i]) : counts[i];
      any = true;
    }
  }
  if (!any) w.peak_count = w.start_count;
  return w;
}

CycleDecomposition decompose(double interval_flow, std::span<const CycleWindow> cycles, double residual) {
  if (cycles.empty()) throw std::invalid_argument("decomposition needs at least one complete cycle");
  if (interval_flow < 0.0) throw DataError("interval flow must be non-negative");
  Solved s = solve(interval_flow - residual, cycles);
  CycleDecomposition out;
  out.zeta = s.zeta;
  out.zeta_clamped = s.zeta_clamped;
  out.arrival_rates = std::move(s.rates);
  out.raw_flows = s.raw;
  out.flows = s.raw;
  out.residual = residual;
  out.raw_residual = residual;
  out.clamped_flows = clamp_flows(out.flows, interval_flow - residual);
  return out;
}

std::vector<CycleWindow> windows_from_cycles(std::span<const LaneCycleObservation> cycles, double closing_count) {
  std::vector<CycleWindow> out;
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const auto& obs = cycles[c];
    if (obs.counts.empty()) throw DataError("cycle starting at " + std::to_string(obs.cycle_start) + " has no counts");
    CycleWindow w;
    w.length = obs.cycle_length;
    w.start_count = obs.counts.front();
    w.end_count = c + 1 < cycles.size() ? cycles[c + 1].counts.front() : closing_count;
    if (c + 1 < cycles.size() && cycles[c + 1].counts.empty())
      throw DataError("cycle starting at " + std::to_string(cycles[c + 1].cycle_start) + " has no counts");
    w.peak_count = *std::max_element(obs.counts.begin(), obs.counts.end());
    out.push_back(w);
  }
  return out;
}

CycleDecomposition decompose(double interval_flow, std::span<const LaneCycleObservation> cycles,
                             double closing_count, double residual) {
  const auto windows = windows_from_cycles(cycles, closing_count);
  return decompose(interval_flow, windows, residual);
}

CycleDecomposition decompose_interval(double interval_flow, std::span<const CycleWindow> complete,
                                      std::span<const CycleWindow> edges) {
  if (complete.empty()) throw std::invalid_argument("decomposition needs at least one complete cycle");
  if (interval_flow < 0.0) throw DataError("interval flow must be non-negative");
  std::vector<CycleWindow> all(complete.begin(), complete.end());
  all.insert(all.end(), edges.begin(), edges.end());
  Solved s = solve(interval_flow, all);

  std::vector<double> flows = s.raw;
  const int clamped = clamp_flows(flows, interval_flow);

  CycleDecomposition out;
  out.zeta = s.zeta;
  out.zeta_clamped = s.zeta_clamped;
  const auto n = complete.size();
  out.arrival_rates.assign(s.rates.begin(), s.rates.begin() + static_cast<std::ptrdiff_t>(n));
  out.raw_flows.assign(s.raw.begin(), s.raw.begin() + static_cast<std::ptrdiff_t>(n));
  out.flows.assign(flows.begin(), flows.begin() + static_cast<std::ptrdiff_t>(n));
  out.residual = std::accumulate(flows.begin() + static_cast<std::ptrdiff_t>(n), flows.end(), 0.0);
  out.raw_residual = std::accumulate(s.raw.begin() + static_cast<std::ptrdiff_t>(n), s.raw.end(), 0.0);
  out.clamped_flows = clamped;
  return out;
}

}  // namespace sigctl
