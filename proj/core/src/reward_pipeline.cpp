#include "sigctl/reward_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sigctl/cycledecomp.hpp"
#include "sigctl/error.hpp"
#include "sigctl/log.hpp"
#include "sigctl/mh.hpp"
#include "sigctl/state.hpp"

namespace sigctl {
namespace {

// Full-day count series of every lane, warm-up included.
struct DaySeries {
  std::vector<double> times;
  std::vector<std::vector<double>> counts;
};

DaySeries day_series(const DayRecord& rec, const Config& cfg) {
  DaySeries s;
  s.counts.resize(static_cast<std::size_t>(cfg.spec.lane_count));
  for (const auto& obs : rec.intervals) {
    const std::size_t n = obs.counts.empty() ? 0 : obs.counts.front().size();
    for (std::size_t k = 0; k < n; ++k) {
      s.times.push_back(obs.index * cfg.sim.interval_length + static_cast<double>(k) * cfg.sim.count_period);
      for (std::size_t l = 0; l < s.counts.size(); ++l) s.counts[l].push_back(obs.counts[l][k]);
    }
  }
  return s;
}

// Samples at start <= time <= end, relative to start.
void attach_samples(LaneCycleObservation& obs, const DaySeries& series) {
  const auto& counts = series.counts[static_cast<std::size_t>(obs.lane)];
  const double end = obs.cycle_start + obs.cycle_length;
  const auto lo = std::lower_bound(series.times.begin(), series.times.end(), obs.cycle_start - 1e-9);
  obs.timestamps.clear();
  obs.counts.clear();
  for (auto it = lo; it != series.times.end() && *it <= end + 1e-9; ++it) {
    obs.timestamps.push_back(*it - obs.cycle_start);
    obs.counts.push_back(counts[static_cast<std::size_t>(it - series.times.begin())]);
  }
}

std::int64_t cycle_key(int day, double start) {
  return static_cast<std::int64_t>(day) * 1'000'000 + static_cast<std::int64_t>(std::llround(start));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

}  // namespace

std::vector<LaneCycleEstimate> decompose_days(const std::vector<DayRecord>& days, const Config& cfg,
                                              DecomposeStats* stats) {
  const IntersectionSpec& spec = cfg.spec;
  const double len = cfg.sim.interval_length;
  const int n_intervals = static_cast<int>(std::lround(cfg.sim.day_length / len));
  DecomposeStats local;
  std::vector<LaneCycleEstimate> out;

  for (const DayRecord& rec : days) {
    const DaySeries series = day_series(rec, cfg);
    for (int l = 0; l < spec.lane_count; ++l) {
      if (!spec.is_controlled(l)) continue;
      const auto& counts = series.counts[static_cast<std::size_t>(l)];
      const auto spans = lane_cycle_spans(spec, rec.cycles, l, cfg.sim.day_length + 1e-9);
      std::size_t next = 0;
      for (int t = 0; t < n_intervals; ++t) {
        const double a = t * len;
        const double b = a + len;
        while (next < spans.size() && spans[next].start < a - 1e-9) ++next;
        std::vector<LaneCycleSpan> inside;
        for (std::size_t j = next; j < spans.size() && spans[j].end() <= b + 1e-9; ++j) inside.push_back(spans[j]);
        if (inside.empty()) continue;
        ++local.intervals;

        std::vector<CycleWindow> complete;
        for (const auto& s : inside) complete.push_back(make_window(series.times, counts, s.start, s.end()));
        std::vector<CycleWindow> edges;
        if (inside.front().start > a + 1e-9) edges.push_back(make_window(series.times, counts, a, inside.front().start));
        if (inside.back().end() < b - 1e-9) edges.push_back(make_window(series.times, counts, inside.back().end(), b));

        const double flow = rec.intervals[rec.slot(t)].flows[static_cast<std::size_t>(l)];
        std::vector<double> flows;
        bool fallback = false;
        try {
          const CycleDecomposition d = decompose_interval(flow, complete, edges);
          flows = d.flows;
          local.clamped += d.clamped_flows;
        } catch (const DataError& e) {
          fallback = true;
          ++local.fallbacks;
          log_warning("day " + std::to_string(rec.day) + " interval " + std::to_string(t) + " lane " +
                      std::to_string(l) + ": " + e.what() + "; splitting the flow by cycle length");
          for (const auto& s : inside) flows.push_back(flow * (s.red + s.green) / len);
        }

        for (std::size_t c = 0; c < inside.size(); ++c) {
          LaneCycleEstimate est;
          est.day = rec.day;
          est.interval = t;
          est.fallback = fallback;
          est.obs.lane = l;
          est.obs.cycle_start = inside[c].start;
          est.obs.red = inside[c].red;
          est.obs.green = inside[c].green;
          est.obs.cycle_length = inside[c].red + inside[c].green;
          est.obs.cycle_flow = flows[c];
          attach_samples(est.obs, series);
          out.push_back(std::move(est));
          ++local.cycles;
        }
        next += inside.size();
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const LaneCycleEstimate& x, const LaneCycleEstimate& y) {
    if (x.day != y.day) return x.day < y.day;
    if (x.interval != y.interval) return x.interval < y.interval;
    if (x.obs.lane != y.obs.lane) return x.obs.lane < y.obs.lane;
    return x.obs.cycle_start < y.obs.cycle_start;
  });
  if (stats) *stats = local;
  return out;
}

void infer_cycles(std::vector<LaneCycleEstimate>& cycles, const Config& cfg, int jobs) {
  std::vector<MhTask> tasks;
  tasks.reserve(cycles.size());
  for (const auto& c : cycles) tasks.push_back({&c.obs, cycle_key(c.day, c.obs.cycle_start)});
  const auto results = mh_infer_batch(tasks, cfg.spec, cfg.gp, cfg.mh, jobs);
  long low = 0;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    cycles[i].theta = results[i].theta;
    cycles[i].accepted = results[i].accepted;
    cycles[i].low_confidence = results[i].low_confidence;
    if (results[i].low_confidence) ++low;
  }
  if (low > 0)
    log_info(std::to_string(low) + " of " + std::to_string(cycles.size()) +
             " lane-cycles accepted no proposal and kept their initial parameters");
}

void estimate_performance(std::vector<LaneCycleEstimate>& cycles, const Config& cfg) {
  for (auto& c : cycles) c.perf = cycle_performance(c.theta, c.obs.red, cfg.spec);
}

std::vector<IntervalReward> interval_rewards(const std::vector<LaneCycleEstimate>& cycles,
                                             const std::vector<DayRecord>& days, const Config& cfg) {
  const int n_intervals = static_cast<int>(std::lround(cfg.sim.day_length / cfg.sim.interval_length));
  std::map<std::pair<int, int>, std::vector<const LaneCycleEstimate*>> by_interval;
  for (const auto& c : cycles) by_interval[{c.day, c.interval}].push_back(&c);

  std::vector<IntervalReward> out;
  for (const DayRecord& rec : days) {
    for (int t = 0; t < n_intervals; ++t) {
      IntervalReward r;
      r.day = rec.day;
      r.interval = t;
      r.max_queue.assign(static_cast<std::size_t>(cfg.spec.lane_count), 0.0);
      std::vector<double> delays, flows;
      const auto it = by_interval.find({rec.day, t});
      if (it != by_interval.end()) {
        for (const LaneCycleEstimate* c : it->second) {
          delays.push_back(c->perf.delay);
          flows.push_back(c->obs.cycle_flow);
          r.total_delay += c->perf.delay;
          r.flow += c->obs.cycle_flow;
          auto& q = r.max_queue[static_cast<std::size_t>(c->obs.lane)];
          q = std::max(q, c->perf.max_queue);
        }
      }
      r.reward = interval_reward(delays, flows);
      out.push_back(std::move(r));
    }
  }
  return out;
}

TransitionDataset build_dataset(const std::vector<DayRecord>& days, const std::vector<IntervalReward>& rewards,
                                const Config& cfg) {
  const IntersectionSpec& spec = cfg.spec;
  const int n_intervals = static_cast<int>(std::lround(cfg.sim.day_length / cfg.sim.interval_length));
  std::map<std::pair<int, int>, double> reward_of;
  for (const auto& r : rewards) reward_of[{r.day, r.interval}] = r.reward;

  TransitionDataset data;
  data.lane_count = spec.lane_count;
  data.phase_order_count = spec.phase_order_count;
  data.phase_count = spec.phase_count;
  data.resize(static_cast<Eigen::Index>(days.size()) * n_intervals);
  Eigen::Index row = 0;
  for (const DayRecord& rec : days) {
    for (int t = 0; t < n_intervals; ++t) {
      const auto& prev = rec.intervals[rec.slot(t - 1)];
      const auto& cur = rec.intervals[rec.slot(t)];
      if (cur.cycles.empty())
        throw DataError("day " + std::to_string(rec.day) + " interval " + std::to_string(t) + " has no cycle start");
      const TimingPlan& plan = cur.cycles.front().plan;
      const auto r = reward_of.find({rec.day, t});
      if (r == reward_of.end())
        throw DataError("no reward for day " + std::to_string(rec.day) + " interval " + std::to_string(t));
      data.states.row(row) = raw_state(prev, spec).transpose();
      data.next_states.row(row) = raw_state(cur, spec).transpose();
      data.actions(row, 0) = plan.cycle_length;
      for (int p = 0; p < spec.phase_count; ++p)
        data.actions(row, 1 + p) = plan.green_ratios[static_cast<std::size_t>(p)];
      data.rewards(row) = r->second;
      data.terminals[static_cast<std::size_t>(row)] = t == n_intervals - 1 ? 1 : 0;
      data.days[static_cast<std::size_t>(row)] = rec.day;
      ++row;
    }
  }
  return data;
}

bool is_peak(const ScenarioConfig& scenario, double seconds) {
  double top = 0.0;
  for (const auto& knot : scenario.diurnal) top = std::max(top, knot.second);
  return top > 0.0 && diurnal_multiplier(scenario, seconds) >= kPeakFraction * top;
}

Fidelity compare_with_truth(const std::vector<LaneCycleEstimate>& cycles, const std::vector<DayRecord>& days,
                            const Config& cfg) {
  std::map<std::tuple<int, int, std::int64_t>, const LaneCycleTruth*> truth;
  for (const DayRecord& rec : days)
    for (const auto& lc : rec.lane_cycles) truth[{rec.day, lc.lane, std::llround(lc.start)}] = &lc;

  Fidelity out;
  std::map<std::pair<int, int>, IntervalFidelity> by_interval;
  for (const auto& c : cycles) {
    const auto it = truth.find({c.day, c.obs.lane, std::llround(c.obs.cycle_start)});
    if (it == truth.end()) continue;
    auto& iv = by_interval[{c.day, c.interval}];
    iv.day = c.day;
    iv.interval = c.interval;
    iv.estimated += c.perf.delay;
    iv.truth += it->second->delay;
    out.cycles.push_back({c.day, c.obs.lane, c.obs.cycle_start, c.perf.max_queue, it->second->max_queue,
                          is_peak(cfg.scenario, std::fmod(c.obs.cycle_start, cfg.sim.day_length))});
  }
  for (const auto& [key, iv] : by_interval) out.intervals.push_back(iv);
  return out;
}

void write_cycles(std::ostream& out, const std::vector<LaneCycleEstimate>& cycles, bool with_theta) {
  out << "day,interval,lane,start,red,green,cycle_flow,fallback";
  if (with_theta) out << ",v_n,v_s,xi0,accepted,low_confidence";
  out << '\n';
  char buf[256];
  for (const auto& c : cycles) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%d", c.day, c.interval, c.obs.lane,
                  c.obs.cycle_start, c.obs.red, c.obs.green, c.obs.cycle_flow, c.fallback ? 1 : 0);
    out << buf;
    if (with_theta) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%d,%d", c.theta.arrival_rate, c.theta.saturation_rate,
                    c.theta.initial_count, c.accepted, c.low_confidence ? 1 : 0);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<LaneCycleEstimate> read_cycles(std::istream& in, const std::vector<DayRecord>& days, const Config& cfg) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("day,interval,lane,start", 0) != 0)
    throw DataError("cycle file lacks its header");
  const bool with_theta = line.find(",v_n,") != std::string::npos;
  const std::size_t fields = with_theta ? 13 : 8;
  std::map<int, DaySeries> series;
  for (const auto& rec : days) series.emplace(rec.day, day_series(rec, cfg));

  std::vector<LaneCycleEstimate> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != fields) throw DataError("malformed cycle row: " + line);
    try {
      LaneCycleEstimate c;
      c.day = std::stoi(f[0]);
      c.interval = std::stoi(f[1]);
      c.obs.lane = std::stoi(f[2]);
      c.obs.cycle_start = std::stod(f[3]);
      c.obs.red = std::stod(f[4]);
      c.obs.green = std::stod(f[5]);
      c.obs.cycle_length = c.obs.red + c.obs.green;
      c.obs.cycle_flow = std::stod(f[6]);
      c.fallback = f[7] == "1";
      if (with_theta) {
        c.theta = {std::stod(f[8]), std::stod(f[9]), std::stod(f[10])};
        c.accepted = std::stoi(f[11]);
        c.low_confidence = f[12] == "1";
      }
      const auto s = series.find(c.day);
      if (s == series.end()) throw DataError("cycle row for day " + f[0] + " without observations");
      if (c.obs.lane < 0 || c.obs.lane >= cfg.spec.lane_count) throw DataError("cycle row lane outside the intersection");
      attach_samples(c.obs, s->second);
      out.push_back(std::move(c));
    } catch (const std::logic_error&) {
      throw DataError("malformed cycle row: " + line);
    }
  }
  return out;
}

void write_rewards(std::ostream& out, const std::vector<IntervalReward>& rewards, const NormStats* stats) {
  out << "day,interval,reward,normalized_reward,total_delay,flow";
  const std::size_t lanes = rewards.empty() ? 0 : rewards.front().max_queue.size();
  for (std::size_t l = 0; l < lanes; ++l) out << ",qmax" << l;
  out << '\n';
  char buf[64];
  for (const auto& r : rewards) {
    out << r.day << ',' << r.interval;
    for (double v : {r.reward, stats ? stats->training_reward(r.reward) : 0.0, r.total_delay, r.flow}) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    for (double q : r.max_queue) {
      std::snprintf(buf, sizeof buf, ",%.17g", q);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace sigctl
