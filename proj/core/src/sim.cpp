#include "sigctl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "sigctl/error.hpp"

namespace sigctl {
namespace {

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

long whole_seconds(double v, const char* what) {
  const long r = std::lround(v);
  if (std::abs(v - static_cast<double>(r)) > 1e-9) throw ConfigError(std::string(what) + " must be whole seconds");
  return r;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Simulator::Simulator(const IntersectionSpec& spec, double saturation_rate, bool stochastic, std::uint64_t seed,
                     long start_time)
    : spec_(spec),
      saturation_rate_(saturation_rate),
      stochastic_(stochastic),
      rng_(seed),
      start_(start_time),
      time_(start_time),
      lanes_(static_cast<std::size_t>(spec.lane_count)) {
  if (!(saturation_rate > 0.0 && saturation_rate <= 1.0))
    throw ConfigError("simulator saturation rate must lie in (0, 1] veh/s");
  for (auto& lane : lanes_) lane.credit = 1.0 - saturation_rate_;
}

void Simulator::step(const std::vector<double>& rates, const std::vector<bool>& green) {
  if (rates.size() != lanes_.size() || green.size() != lanes_.size())
    throw DimensionError("simulator step needs one rate and one signal state per lane");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t l = 0; l < lanes_.size(); ++l) {
    Lane& lane = lanes_[l];
    lane.departed_history.push_back(lane.departed);
    lane.step_departures = 0;
    lane.step_stopped = 0;

    const double rate = std::max(0.0, rates[l]);
    int arrivals = 0;
    if (stochastic_) {
      // One draw per lane per step keeps the stream aligned across plans.
      if (unit(rng_) < rate) arrivals = 1;
    } else {
      lane.fluid += rate;
      while (lane.fluid >= 1.0 - 1e-9) {
        ++arrivals;
        lane.fluid -= 1.0;
      }
    }
    for (int i = 0; i < arrivals; ++i) lane.queue.push_back(time_);
    lane.arrived += arrivals;

    if (!spec_.is_controlled(static_cast<int>(l))) {
      lane.step_departures = static_cast<int>(lane.queue.size());
      lane.queue.clear();
    } else if (green[l]) {
      lane.credit = std::min(lane.credit + saturation_rate_, 1.0);
      while (lane.credit >= 1.0 - 1e-9 && !lane.queue.empty()) {
        if (time_ - lane.queue.front() >= 1) ++lane.step_stopped;
        lane.queue.pop_front();
        lane.credit -= 1.0;
        ++lane.step_departures;
      }
    } else {
      lane.credit = 1.0 - saturation_rate_;
    }
    lane.departed += lane.step_departures;
    lane.delay += static_cast<double>(lane.queue.size());
  }
  ++time_;
}

double Simulator::detected_count(int lane) const {
  const Lane& ln = lanes_[idx(lane)];
  const long lag = std::lround(spec_.traverse_time);
  const long at = time_ - lag - start_;
  double lagged = 0.0;
  if (at >= static_cast<long>(ln.departed_history.size()))
    lagged = static_cast<double>(ln.departed);
  else if (at >= 0)
    lagged = static_cast<double>(ln.departed_history[static_cast<std::size_t>(at)]);
  const double entered = std::min(static_cast<double>(ln.arrived), lagged + spec_.capacity());
  return entered - static_cast<double>(ln.departed);
}

std::size_t DayRecord::slot(int t) const {
  if (intervals.empty()) throw DataError("day record has no intervals");
  const long pos = static_cast<long>(t) - intervals.front().index;
  if (pos < 0 || pos >= static_cast<long>(intervals.size()))
    throw DataError("interval " + std::to_string(t) + " is not in the day record");
  return static_cast<std::size_t>(pos);
}

double arrival_rate(const Config& cfg, int day, int lane, double seconds) {
  const double len = cfg.sim.interval_length;
  const double mid = (std::floor(seconds / len) + 0.5) * len;
  const double wrapped = std::fmod(std::fmod(mid, cfg.sim.day_length) + cfg.sim.day_length, cfg.sim.day_length);
  const double sd = cfg.scenario.day_variation;
  double factor = 1.0;
  if (sd > 0.0) {
    std::mt19937_64 rng(mix_seed(mix_seed(0x5ce7a410ULL, static_cast<std::uint64_t>(day)),
                                 static_cast<std::uint64_t>(lane)));
    std::normal_distribution<double> z(0.0, 1.0);
    factor = std::exp(sd * z(rng) - 0.5 * sd * sd);
  }
  const double rate =
      cfg.scenario.lane_peak_rates[static_cast<std::size_t>(lane)] * diurnal_multiplier(cfg.scenario, wrapped) * factor;
  return std::clamp(rate, 0.0, 1.0);
}

std::vector<int> round_greens(const TimingPlan& plan) {
  const int p = static_cast<int>(plan.green_ratios.size());
  if (p == 0) throw DimensionError("plan has no phases");
  const int total = std::max(p, static_cast<int>(std::lround(plan.cycle_length)));
  std::vector<double> raw(static_cast<std::size_t>(p));
  std::vector<int> g(static_cast<std::size_t>(p));
  int sum = 0;
  for (int i = 0; i < p; ++i) {
    raw[static_cast<std::size_t>(i)] = plan.green_ratios[static_cast<std::size_t>(i)] * total;
    g[static_cast<std::size_t>(i)] = std::max(1, static_cast<int>(std::floor(raw[static_cast<std::size_t>(i)])));
    sum += g[static_cast<std::size_t>(i)];
  }
  while (sum < total) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < g.size(); ++i)
      if (raw[i] - g[i] > raw[best] - g[best]) best = i;
    ++g[best];
    ++sum;
  }
  while (sum > total) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < g.size(); ++i)
      if (g[i] > g[best]) best = i;
    --g[best];
    --sum;
  }
  return g;
}

DayRecord simulate_day(const Config& cfg, Controller& controller, int day, std::uint64_t seed) {
  const IntersectionSpec& spec = cfg.spec;
  const int lanes = spec.lane_count;
  const int phases = spec.phase_count;
  const long interval = whole_seconds(cfg.sim.interval_length, "sim.interval_length");
  const long period = whole_seconds(cfg.sim.count_period, "sim.count_period");
  const long begin = -whole_seconds(cfg.sim.warmup, "sim.warmup");
  const long end = whole_seconds(cfg.sim.day_length, "sim.day_length");
  if (begin >= 0 || begin % interval != 0) throw ConfigError("sim.warmup must be a positive multiple of the interval");
  const double spacing = spec.jam_spacing();

  controller.begin_day(day, seed);
  Simulator sim(spec, cfg.sim.saturation_rate, cfg.scenario.stochastic, mix_seed(seed, static_cast<std::uint64_t>(day)),
                begin);
  DayRecord rec;
  rec.day = day;

  TimingPlan pending = cfg.fixed_plan;
  long cycle_end = begin;
  int order = 0;
  std::vector<long> phase_end(static_cast<std::size_t>(phases));

  struct Track {
    bool open = false;
    long start = 0;
    long green_start = 0;
    double delay = 0.0;
    double stopped = 0.0;
    double departures = 0.0;
    bool clearing = false;
  };
  std::vector<Track> track(static_cast<std::size_t>(lanes));
  std::vector<bool> green(static_cast<std::size_t>(lanes), false);
  std::vector<bool> was_green(static_cast<std::size_t>(lanes), false);
  std::vector<double> rates(static_cast<std::size_t>(lanes), 0.0);

  IntervalObservation cur;
  IntervalTruth truth;
  long interval_start = begin;

  auto finish_interval = [&]() {
    cur.phase_order = order;
    rec.intervals.push_back(cur);
    if (cur.index >= 0) rec.interval_truth.push_back(truth);
  };

  for (long t = begin; t < end; ++t) {
    if ((t - begin) % interval == 0) {
      if (t > begin) {
        finish_interval();
        pending = controller.decide(rec.intervals.back());
      }
      interval_start = t;
      cur = IntervalObservation{};
      cur.day = day;
      cur.index = static_cast<int>(floor_div(t, interval));
      cur.flows.assign(static_cast<std::size_t>(lanes), 0.0);
      cur.counts.assign(static_cast<std::size_t>(lanes), {});
      truth = IntervalTruth{};
      truth.index = cur.index;
      truth.delay.assign(static_cast<std::size_t>(lanes), 0.0);
      for (int l = 0; l < lanes; ++l)
        rates[static_cast<std::size_t>(l)] = arrival_rate(cfg, day, l, static_cast<double>(t));
    }

    if (t == cycle_end) {
      order = scheduled_phase_order(cfg.scenario, static_cast<double>(t));
      const std::vector<int> g = round_greens(pending);
      long acc = t;
      TimingPlan executed;
      int total = 0;
      for (int v : g) total += v;
      executed.cycle_length = total;
      for (int p = 0; p < phases; ++p) {
        acc += g[static_cast<std::size_t>(p)];
        phase_end[static_cast<std::size_t>(p)] = acc;
        executed.green_ratios.push_back(static_cast<double>(g[static_cast<std::size_t>(p)]) / total);
      }
      cycle_end = acc;
      const CycleRecord cycle{static_cast<double>(t), order, executed};
      rec.cycles.push_back(cycle);
      cur.cycles.push_back(cycle);
    }

    int phase = 0;
    while (phase_end[static_cast<std::size_t>(phase)] <= t) ++phase;
    for (int l = 0; l < lanes; ++l)
      green[static_cast<std::size_t>(l)] = !spec.is_controlled(l) || spec.green(order, phase, l);

    if ((t - interval_start) % period == 0)
      for (int l = 0; l < lanes; ++l) cur.counts[static_cast<std::size_t>(l)].push_back(sim.detected_count(l));

    for (int l = 0; l < lanes; ++l) {
      if (!spec.is_controlled(l)) continue;
      const auto i = static_cast<std::size_t>(l);
      Track& tr = track[i];
      if (was_green[i] && !green[i]) {
        if (tr.open) {
          LaneCycleTruth lc;
          lc.lane = l;
          lc.start = static_cast<double>(tr.start);
          lc.red = static_cast<double>(tr.green_start - tr.start);
          lc.green = static_cast<double>(t - tr.green_start);
          lc.delay = tr.delay;
          lc.max_queue = (tr.stopped + (tr.clearing ? static_cast<double>(sim.queue(l)) : 0.0)) * spacing;
          lc.departures = tr.departures;
          rec.lane_cycles.push_back(lc);
          if (lc.start >= 0.0) rec.total_queue += lc.max_queue;
        }
        tr = Track{};
        tr.open = true;
        tr.start = t;
      } else if (!was_green[i] && green[i]) {
        tr.green_start = t;
        tr.clearing = true;
        tr.stopped = 0.0;
      }
    }

    sim.step(rates, green);

    for (int l = 0; l < lanes; ++l) {
      const auto i = static_cast<std::size_t>(l);
      cur.flows[i] += sim.step_departures(l);
      if (!spec.is_controlled(l)) continue;
      const double q = static_cast<double>(sim.queue(l));
      truth.delay[i] += q;
      if (t >= 0) rec.total_delay += q;
      Track& tr = track[i];
      tr.delay += q;
      tr.departures += sim.step_departures(l);
      if (tr.clearing && green[i]) {
        tr.stopped += sim.step_stopped(l);
        if (sim.queue(l) == 0) tr.clearing = false;
      }
    }
    was_green = green;
  }
  finish_interval();

  for (int l = 0; l < lanes; ++l) {
    rec.arrivals += sim.arrived(l);
    rec.departures += sim.departed(l);
    rec.in_system += sim.queue(l);
  }
  return rec;
}

std::vector<LaneCycleSpan> lane_cycle_spans(const IntersectionSpec& spec, const std::vector<CycleRecord>& cycles,
                                            int lane, double until) {
  std::vector<LaneCycleSpan> out;
  if (!spec.is_controlled(lane) || cycles.empty()) return out;
  std::vector<std::pair<double, double>> greens;
  double log_end = cycles.front().start;
  for (const auto& c : cycles) {
    const double total = c.plan.cycle_length;
    double at = c.start;
    for (int p = 0; p < static_cast<int>(c.plan.green_ratios.size()); ++p) {
      const double g = std::round(c.plan.green_ratios[static_cast<std::size_t>(p)] * total);
      if (spec.green(c.phase_order, p, lane)) {
        if (!greens.empty() && std::abs(greens.back().second - at) < 1e-9)
          greens.back().second = at + g;
        else
          greens.emplace_back(at, at + g);
      }
      at += g;
    }
    log_end = at;
  }
  for (std::size_t i = 0; i + 1 < greens.size(); ++i) {
    LaneCycleSpan s;
    s.start = greens[i].second;
    s.red = greens[i + 1].first - greens[i].second;
    s.green = greens[i + 1].second - greens[i + 1].first;
    if (s.end() < until && s.end() < log_end) out.push_back(s);
  }
  return out;
}

double EvalReport::mean_delay() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.total_delay;
  return s / static_cast<double>(rows.size());
}

double EvalReport::mean_queue() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.total_queue;
  return s / static_cast<double>(rows.size());
}

EvalReport evaluate(const Config& cfg, Controller& controller, const std::string& name, const std::vector<int>& days,
                    const std::vector<std::uint64_t>& seeds) {
  EvalReport report;
  report.policy = name;
  for (int day : days) {
    for (std::uint64_t seed : seeds) {
      const DayRecord rec = simulate_day(cfg, controller, day, seed);
      report.rows.push_back({day, seed, rec.total_delay, rec.total_queue});
      if (report.interval_delay.empty()) report.interval_delay.assign(rec.interval_truth.size(), 0.0);
      for (std::size_t t = 0; t < rec.interval_truth.size(); ++t)
        for (int l = 0; l < cfg.spec.lane_count; ++l)
          if (cfg.spec.is_controlled(l)) report.interval_delay[t] += rec.interval_truth[t].delay[static_cast<std::size_t>(l)];
    }
  }
  if (!report.rows.empty())
    for (double& d : report.interval_delay) d /= static_cast<double>(report.rows.size());
  return report;
}

void write_eval(std::ostream& out, const std::vector<EvalReport>& reports) {
  char buf[128];
  out << "policy,day,seed,total_delay,total_queue\n";
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      std::snprintf(buf, sizeof buf, "%d,%llu,%.17g,%.17g", row.day, static_cast<unsigned long long>(row.seed),
                    row.total_delay, row.total_queue);
      out << r.policy << ',' << buf << '\n';
    }
  }
}

std::vector<EvalReport> read_eval(std::istream& in) {
  std::vector<EvalReport> out;
  std::string line;
  if (!std::getline(in, line) || line.rfind("policy,", 0) != 0) throw DataError("evaluation file lacks its header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string name, day, seed, delay, queue;
    if (!std::getline(ss, name, ',') || !std::getline(ss, day, ',') || !std::getline(ss, seed, ',') ||
        !std::getline(ss, delay, ',') || !std::getline(ss, queue))
      throw DataError("malformed evaluation row: " + line);
    if (out.empty() || out.back().policy != name) {
      out.push_back({});
      out.back().policy = name;
    }
    out.back().rows.push_back({std::stoi(day), std::stoull(seed), std::stod(delay), std::stod(queue)});
  }
  return out;
}

}  // namespace sigctl
