#pragma once

#include <span>
#include <string>
#include <vector>

#include "sigctl/config.hpp"
#include "sigctl/sim.hpp"

namespace sigctl {

// Observation files, comma-delimited with a header row, times in seconds
// since midnight of the row's day (warm-up rows are negative):
//
//   flows.csv            day,interval,lane,flow          vehicles per interval
//   counts.csv           day,time,lane,count             detected vehicles, every count_period
//   timing.csv           day,start,phase_order,cycle_length,ratio0..ratio{P-1}
//
// Ground truth, written by the simulator and read only by validation and
// reporting:
//
//   truth_cycles.csv     day,lane,start,red,green,delay,max_queue,departures
//   truth_intervals.csv  day,interval,lane,delay
//   truth_days.csv       day,total_delay,total_queue,arrivals,departures,in_system
struct ObservationPaths {
  std::string flows;
  std::string counts;
  std::string timing;
  std::string truth_cycles;
  std::string truth_intervals;
  std::string truth_days;

  static ObservationPaths in(const std::string& dir);
};

void write_observations(const std::string& dir, std::span<const DayRecord> days, const SimConfig& sim);

// Rebuilds day records from the observation files. Truth fields are filled
// when `with_truth` is set and the truth files exist. Throws DataError on
// missing files, malformed rows or incomplete count series.
std::vector<DayRecord> read_observations(const std::string& dir, const Config& cfg, bool with_truth);

}  // namespace sigctl
