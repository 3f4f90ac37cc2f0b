#include "sigctl/observation_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "sigctl/error.hpp"

namespace sigctl {
namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_write(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) throw DataError("cannot write " + path);
  return f;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing input file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Comma-separated numeric rows after a header; calls `row` with the fields.
template <class F>
void for_rows(const std::string& path, std::size_t fields, F&& row) {
  const std::string text = slurp(path);
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) throw DataError(path + " has no header row");
  ++pos;
  std::vector<double> v(fields);
  std::size_t line_no = 1;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    ++line_no;
    if (eol > pos) {
      const char* p = text.data() + pos;
      const char* e = text.data() + eol;
      for (std::size_t i = 0; i < fields; ++i) {
        const auto [next, ec] = std::from_chars(p, e, v[i]);
        if (ec != std::errc{}) throw DataError(path + ":" + std::to_string(line_no) + ": malformed number");
        p = next;
        if (i + 1 < fields) {
          if (p == e || *p != ',') throw DataError(path + ":" + std::to_string(line_no) + ": too few columns");
          ++p;
        }
      }
      if (p != e && *p != '\r') throw DataError(path + ":" + std::to_string(line_no) + ": too many columns");
      row(v);
    }
    pos = eol + 1;
  }
}

long floor_index(double t, double len) { return static_cast<long>(std::floor(t / len + 1e-9)); }

}  // namespace

ObservationPaths ObservationPaths::in(const std::string& dir) {
  const std::filesystem::path d(dir);
  return {(d / "flows.csv").string(),        (d / "counts.csv").string(),
          (d / "timing.csv").string(),       (d / "truth_cycles.csv").string(),
          (d / "truth_intervals.csv").string(), (d / "truth_days.csv").string()};
}

void write_observations(const std::string& dir, std::span<const DayRecord> days, const SimConfig& sim) {
  std::filesystem::create_directories(dir);
  const auto paths = ObservationPaths::in(dir);
  auto flows = open_write(paths.flows);
  auto counts = open_write(paths.counts);
  auto timing = open_write(paths.timing);
  auto tc = open_write(paths.truth_cycles);
  auto ti = open_write(paths.truth_intervals);
  auto td = open_write(paths.truth_days);

  std::fputs("day,interval,lane,flow\n", flows.get());
  std::fputs("day,time,lane,count\n", counts.get());
  std::fputs("day,start,phase_order,cycle_length", timing.get());
  const std::size_t phases =
      (!days.empty() && !days.front().cycles.empty()) ? days.front().cycles.front().plan.green_ratios.size() : 0;
  for (std::size_t p = 0; p < phases; ++p) std::fprintf(timing.get(), ",ratio%zu", p);
  std::fputs("\n", timing.get());
  std::fputs("day,lane,start,red,green,delay,max_queue,departures\n", tc.get());
  std::fputs("day,interval,lane,delay\n", ti.get());
  std::fputs("day,total_delay,total_queue,arrivals,departures,in_system\n", td.get());

  for (const DayRecord& rec : days) {
    for (const auto& obs : rec.intervals)
      for (std::size_t l = 0; l < obs.flows.size(); ++l)
        std::fprintf(flows.get(), "%d,%d,%zu,%.17g\n", rec.day, obs.index, l, obs.flows[l]);
    for (const auto& obs : rec.intervals) {
      const std::size_t n = obs.counts.empty() ? 0 : obs.counts.front().size();
      for (std::size_t k = 0; k < n; ++k) {
        const double t = obs.index * sim.interval_length + static_cast<double>(k) * sim.count_period;
        for (std::size_t l = 0; l < obs.counts.size(); ++l)
          std::fprintf(counts.get(), "%d,%.17g,%zu,%.17g\n", rec.day, t, l, obs.counts[l][k]);
      }
    }
    for (const auto& c : rec.cycles) {
      std::fprintf(timing.get(), "%d,%.17g,%d,%.17g", rec.day, c.start, c.phase_order, c.plan.cycle_length);
      for (double r : c.plan.green_ratios) std::fprintf(timing.get(), ",%.17g", r);
      std::fputs("\n", timing.get());
    }
    for (const auto& lc : rec.lane_cycles)
      std::fprintf(tc.get(), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", rec.day, lc.lane, lc.start, lc.red,
                   lc.green, lc.delay, lc.max_queue, lc.departures);
    for (const auto& it : rec.interval_truth)
      for (std::size_t l = 0; l < it.delay.size(); ++l)
        std::fprintf(ti.get(), "%d,%d,%zu,%.17g\n", rec.day, it.index, l, it.delay[l]);
    std::fprintf(td.get(), "%d,%.17g,%.17g,%ld,%ld,%ld\n", rec.day, rec.total_delay, rec.total_queue, rec.arrivals,
                 rec.departures, rec.in_system);
  }
}

std::vector<DayRecord> read_observations(const std::string& dir, const Config& cfg, bool with_truth) {
  const auto paths = ObservationPaths::in(dir);
  const int lanes = cfg.spec.lane_count;
  const int phases = cfg.spec.phase_count;
  const double len = cfg.sim.interval_length;
  const double period = cfg.sim.count_period;
  const auto samples = static_cast<std::size_t>(std::lround(len / period));
  constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  // day -> interval index -> observation
  std::map<int, std::map<int, IntervalObservation>> grid;
  auto lane_of = [&](double v, const std::string& path) {
    const int l = static_cast<int>(v);
    if (l < 0 || l >= lanes) throw DataError(path + ": lane " + std::to_string(l) + " outside the intersection");
    return static_cast<std::size_t>(l);
  };
  auto interval_of = [&](int day, int index) -> IntervalObservation& {
    auto& obs = grid[day][index];
    if (obs.flows.empty()) {
      obs.day = day;
      obs.index = index;
      obs.flows.assign(static_cast<std::size_t>(lanes), kUnset);
      obs.counts.assign(static_cast<std::size_t>(lanes), std::vector<double>(samples, kUnset));
    }
    return obs;
  };

  for_rows(paths.flows, 4, [&](const std::vector<double>& v) {
    interval_of(static_cast<int>(v[0]), static_cast<int>(v[1])).flows[lane_of(v[2], paths.flows)] = v[3];
  });
  for_rows(paths.counts, 4, [&](const std::vector<double>& v) {
    const int day = static_cast<int>(v[0]);
    const long index = floor_index(v[1], len);
    const long k = std::lround((v[1] - static_cast<double>(index) * len) / period);
    if (k < 0 || k >= static_cast<long>(samples)) throw DataError(paths.counts + ": sample time off the count grid");
    interval_of(day, static_cast<int>(index)).counts[lane_of(v[2], paths.counts)][static_cast<std::size_t>(k)] = v[3];
  });

  std::map<int, DayRecord> records;
  for_rows(paths.timing, 4 + static_cast<std::size_t>(phases), [&](const std::vector<double>& v) {
    CycleRecord c;
    c.start = v[1];
    c.phase_order = static_cast<int>(v[2]);
    if (c.phase_order < 0 || c.phase_order >= cfg.spec.phase_order_count)
      throw DataError(paths.timing + ": phase order outside [0, K)");
    c.plan.cycle_length = v[3];
    c.plan.green_ratios.assign(v.begin() + 4, v.end());
    records[static_cast<int>(v[0])].cycles.push_back(c);
  });

  std::vector<DayRecord> out;
  for (auto& [day, intervals] : grid) {
    DayRecord rec = std::move(records[day]);
    rec.day = day;
    std::size_t next_cycle = 0;
    int order = rec.cycles.empty() ? 0 : rec.cycles.front().phase_order;
    int expected = intervals.begin()->first;
    for (auto& [index, obs] : intervals) {
      if (index != expected) throw DataError("day " + std::to_string(day) + " is missing interval " +
                                             std::to_string(expected));
      ++expected;
      for (std::size_t l = 0; l < obs.flows.size(); ++l) {
        if (std::isnan(obs.flows[l])) throw DataError("day " + std::to_string(day) + " interval " +
                                                      std::to_string(index) + " lacks a flow for lane " +
                                                      std::to_string(l));
        for (double c : obs.counts[l])
          if (std::isnan(c))
            throw DataError("day " + std::to_string(day) + " interval " + std::to_string(index) +
                            " has an incomplete count series for lane " + std::to_string(l));
      }
      const double stop = (index + 1) * len;
      while (next_cycle < rec.cycles.size() && rec.cycles[next_cycle].start < stop - 1e-9) {
        obs.cycles.push_back(rec.cycles[next_cycle]);
        order = rec.cycles[next_cycle].phase_order;
        ++next_cycle;
      }
      obs.phase_order = order;
      rec.intervals.push_back(std::move(obs));
    }
    out.push_back(std::move(rec));
  }

  if (with_truth && std::filesystem::exists(paths.truth_days)) {
    std::map<int, std::size_t> at;
    for (std::size_t i = 0; i < out.size(); ++i) at[out[i].day] = i;
    auto day_of = [&](double v, const std::string& path) -> DayRecord& {
      const auto it = at.find(static_cast<int>(v));
      if (it == at.end()) throw DataError(path + ": truth for an unknown day");
      return out[it->second];
    };
    for_rows(paths.truth_cycles, 8, [&](const std::vector<double>& v) {
      LaneCycleTruth lc{static_cast<int>(v[1]), v[2], v[3], v[4], v[5], v[6], v[7]};
      day_of(v[0], paths.truth_cycles).lane_cycles.push_back(lc);
    });
    for_rows(paths.truth_intervals, 4, [&](const std::vector<double>& v) {
      DayRecord& rec = day_of(v[0], paths.truth_intervals);
      const int index = static_cast<int>(v[1]);
      if (rec.interval_truth.empty() || rec.interval_truth.back().index != index) {
        IntervalTruth it;
        it.index = index;
        it.delay.assign(static_cast<std::size_t>(lanes), 0.0);
        rec.interval_truth.push_back(it);
      }
      rec.interval_truth.back().delay[lane_of(v[2], paths.truth_intervals)] = v[3];
    });
    for_rows(paths.truth_days, 6, [&](const std::vector<double>& v) {
      DayRecord& rec = day_of(v[0], paths.truth_days);
      rec.total_delay = v[1];
      rec.total_queue = v[2];
      rec.arrivals = static_cast<long>(v[3]);
      rec.departures = static_cast<long>(v[4]);
      rec.in_system = static_cast<long>(v[5]);
    });
  }
  return out;
}

}  // namespace sigctl
