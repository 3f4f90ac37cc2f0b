#include "sigctl/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sigctl/error.hpp"

namespace sigctl {
namespace {

namespace pt = boost::property_tree;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(trim(text), &used);
    if (used != trim(text).size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + key + " value '" + text + "' as a number");
  }
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream is(normalized);
  std::string tok;
  while (is >> tok) out.push_back(to_double(key, tok));
  return out;
}

std::vector<std::pair<double, double>> to_pairs(const std::string& key, const std::string& text) {
  std::vector<std::pair<double, double>> out;
  for (const auto& item : split(text, ',')) {
    const auto t = trim(item);
    if (t.empty()) continue;
    const auto parts = split(t, ':');
    if (parts.size() != 2) throw ConfigError(key + " entries must look like 'a:b', got '" + t + "'");
    out.emplace_back(to_double(key, parts[0]), to_double(key, parts[1]));
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(pt::ptree::path_type(section, '/'));
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '/'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    const auto v = raw(section, key);
    return v ? to_double(section + "." + key, *v) : fallback;
  }

  std::optional<double> maybe(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    return to_double(section + "." + key, *v);
  }

  int integer(const std::string& section, const std::string& key, int fallback) const {
    const double v = number(section, key, fallback);
    if (v != std::floor(v)) throw ConfigError(section + "." + key + " must be an integer, got " + num(v));
    return static_cast<int>(v);
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(section + "." + key + " must be a boolean, got '" + *v + "'");
  }

 private:
  const pt::ptree& tree_;
};

void check_positive(const std::string& name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name + " must be positive, got " + num(v));
}

Config build(const pt::ptree& tree) {
  Reader r(tree);
  Config cfg;
  IntersectionSpec& spec = cfg.spec;

  spec.lane_count = r.integer("intersection", "lanes", 0);
  spec.phase_count = r.integer("intersection", "phases", 0);
  spec.phase_order_count = r.integer("intersection", "phase_orders", 1);
  if (spec.lane_count <= 0) throw ConfigError("intersection.lanes must be positive");
  if (spec.phase_count <= 0) throw ConfigError("intersection.phases must be positive");
  if (spec.phase_order_count <= 0) throw ConfigError("intersection.phase_orders must be positive");

  spec.phase_matrix.clear();
  for (int k = 0; k < spec.phase_order_count; ++k) {
    const std::string key = "order" + std::to_string(k);
    const auto text = r.raw("intersection", key);
    if (!text) throw ConfigError("intersection." + key + " missing");
    const auto groups = split(*text, '|');
    if (static_cast<int>(groups.size()) != spec.phase_count) {
      throw ConfigError("intersection." + key + " has " + std::to_string(groups.size()) + " phase groups, expected " +
                        std::to_string(spec.phase_count));
    }
    for (const auto& g : groups) {
      const auto row = to_list("intersection." + key, g);
      if (static_cast<int>(row.size()) != spec.lane_count) {
        throw ConfigError("intersection." + key + " phase row has " + std::to_string(row.size()) +
                          " entries, expected " + std::to_string(spec.lane_count));
      }
      for (double v : row) {
        if (v != 0.0 && v != 1.0) throw ConfigError("intersection." + key + " entries must be 0 or 1, got " + num(v));
        spec.phase_matrix.push_back(static_cast<std::uint8_t>(v));
      }
    }
  }

  spec.controlled.assign(static_cast<std::size_t>(spec.lane_count), 1);
  if (const auto text = r.raw("intersection", "controlled")) {
    const auto flags = to_list("intersection.controlled", *text);
    if (static_cast<int>(flags.size()) != spec.lane_count) {
      throw ConfigError("intersection.controlled has " + std::to_string(flags.size()) + " entries, expected " +
                        std::to_string(spec.lane_count));
    }
    for (std::size_t i = 0; i < flags.size(); ++i) spec.controlled[i] = flags[i] != 0.0 ? 1 : 0;
  }

  spec.detection_range = r.number("intersection", "detection_range", 150.0);
  check_positive("intersection.detection_range", spec.detection_range);
  const auto density = r.maybe("intersection", "jam_density");
  const auto spacing = r.maybe("intersection", "jam_spacing");
  if (density && spacing) {
    if (std::abs(*density * *spacing - 1.0) > 1e-9) {
      throw ConfigError("intersection.jam_density " + num(*density) + " inconsistent with jam_spacing " + num(*spacing));
    }
  }
  if (density) {
    check_positive("intersection.jam_density", *density);
    spec.jam_density = *density;
  } else {
    const double s = spacing.value_or(7.5);
    check_positive("intersection.jam_spacing", s);
    spec.jam_density = 1.0 / s;
  }
  spec.free_flow_speed = r.number("intersection", "free_flow_speed", 10.0);

  const auto wave = r.maybe("intersection", "wave_speed");
  const auto traverse = r.maybe("intersection", "traverse_time");
  if (wave && traverse) {
    spec.wave_speed = *wave;
    spec.traverse_time = *traverse;
  } else if (wave) {
    check_positive("intersection.wave_speed", *wave);
    spec.wave_speed = *wave;
    spec.traverse_time = spec.detection_range / *wave;
  } else {
    spec.traverse_time = traverse.value_or(25.0);
    check_positive("intersection.traverse_time", spec.traverse_time);
    spec.wave_speed = spec.detection_range / spec.traverse_time;
  }
  spec.cycle_min = r.number("intersection", "cycle_min", 60.0);
  spec.cycle_max = r.number("intersection", "cycle_max", 120.0);
  spec.min_green_ratio = r.number("intersection", "min_green_ratio", 0.05);
  spec.validate();

  cfg.fixed_plan.cycle_length = r.number("fixed_plan", "cycle_length", 0.5 * (spec.cycle_min + spec.cycle_max));
  if (const auto text = r.raw("fixed_plan", "green_ratios")) {
    cfg.fixed_plan.green_ratios = to_list("fixed_plan.green_ratios", *text);
  } else {
    cfg.fixed_plan.green_ratios.assign(static_cast<std::size_t>(spec.phase_count), 1.0 / spec.phase_count);
  }
  cfg.fixed_plan.validate(spec);

  cfg.gp.amplitude = r.number("gp", "h0", 0.5);
  cfg.gp.length_scale = r.number("gp", "lambda", 2.0);
  cfg.gp.noise = r.number("gp", "eta", 1.0);
  check_positive("gp.h0", cfg.gp.amplitude);
  check_positive("gp.lambda", cfg.gp.length_scale);
  check_positive("gp.eta", cfg.gp.noise);

  cfg.mh.iterations = r.integer("mh", "iterations", 1000);
  cfg.mh.burn_in_fraction = r.number("mh", "burn_in", 0.75);
  cfg.mh.arrival_max = r.number("mh", "arrival_max", 1.0);
  cfg.mh.saturation_max = r.number("mh", "saturation_max", 1.5);
  cfg.mh.saturation_floor = r.number("mh", "saturation_floor", 0.45);
  cfg.mh.seed = static_cast<std::uint64_t>(r.number("mh", "seed", 1));
  const auto estimator = r.raw("mh", "estimator").value_or("accepted");
  if (estimator == "accepted") {
    cfg.mh.estimator = MhEstimator::kAcceptedMean;
  } else if (estimator == "chain") {
    cfg.mh.estimator = MhEstimator::kChainMean;
  } else {
    throw ConfigError("mh.estimator must be 'accepted' or 'chain', got '" + estimator + "'");
  }
  if (cfg.mh.iterations < 10) throw ConfigError("mh.iterations must be at least 10, got " + std::to_string(cfg.mh.iterations));
  if (!(cfg.mh.burn_in_fraction > 0.0 && cfg.mh.burn_in_fraction < 1.0)) {
    throw ConfigError("mh.burn_in must lie in (0, 1), got " + num(cfg.mh.burn_in_fraction));
  }
  check_positive("mh.arrival_max", cfg.mh.arrival_max);
  check_positive("mh.saturation_max", cfg.mh.saturation_max);

  SqlConfig& sql = cfg.sql;
  sql.alpha = r.number("sql", "alpha", 0.01);
  sql.gamma = r.number("sql", "gamma", 0.99);
  sql.aug_sigma = r.number("sql", "aug_sigma", 0.01);
  sql.aug_clip = r.number("sql", "aug_clip", 0.025);
  sql.batch_size = r.integer("sql", "batch_size", 256);
  sql.steps = static_cast<long>(r.number("sql", "steps", 1e6));
  sql.learning_rate = r.number("sql", "learning_rate", 3e-5);
  sql.target_rate = r.number("sql", "target_rate", 0.005);
  sql.hidden = r.integer("sql", "hidden", 256);
  sql.depth = r.integer("sql", "depth", 2);
  sql.init_log_std = r.number("sql", "init_log_std", -1.0);
  sql.log_every = r.integer("sql", "log_every", 1000);
  sql.seed = static_cast<std::uint64_t>(r.number("sql", "seed", 1));
  check_positive("sql.alpha", sql.alpha);
  if (!(sql.gamma > 0.0 && sql.gamma < 1.0)) throw ConfigError("sql.gamma must lie in (0, 1), got " + num(sql.gamma));
  if (!(sql.aug_sigma >= 0.0 && sql.aug_clip >= sql.aug_sigma)) {
    throw ConfigError("sql.aug_clip " + num(sql.aug_clip) + " must be >= aug_sigma " + num(sql.aug_sigma) + " >= 0");
  }
  if (sql.batch_size <= 0) throw ConfigError("sql.batch_size must be positive");
  if (sql.steps < 0) throw ConfigError("sql.steps must be non-negative");
  check_positive("sql.learning_rate", sql.learning_rate);
  if (!(sql.target_rate > 0.0 && sql.target_rate <= 1.0)) throw ConfigError("sql.target_rate must lie in (0, 1]");
  if (sql.hidden <= 0 || sql.depth < 1) throw ConfigError("sql.hidden and sql.depth must be positive");
  if (sql.log_every <= 0) throw ConfigError("sql.log_every must be positive");

  cfg.sim.saturation_rate = r.number("sim", "saturation_rate", 0.5);
  cfg.sim.interval_length = r.number("sim", "interval_length", 300.0);
  cfg.sim.count_period = r.number("sim", "count_period", 5.0);
  cfg.sim.warmup = r.number("sim", "warmup", 300.0);
  cfg.sim.day_length = r.number("sim", "day_length", 86400.0);
  check_positive("sim.saturation_rate", cfg.sim.saturation_rate);
  check_positive("sim.interval_length", cfg.sim.interval_length);
  check_positive("sim.count_period", cfg.sim.count_period);
  if (cfg.sim.saturation_rate > 1.0) throw ConfigError("sim.saturation_rate above 1 veh/s per lane is not supported");
  if (std::fmod(cfg.sim.day_length, cfg.sim.interval_length) != 0.0 ||
      std::fmod(cfg.sim.interval_length, cfg.sim.count_period) != 0.0) {
    throw ConfigError("sim.day_length, interval_length and count_period must nest evenly");
  }
  if (!(cfg.sim.warmup > 0.0) || std::fmod(cfg.sim.warmup, cfg.sim.interval_length) != 0.0)
    throw ConfigError("sim.warmup must be a positive multiple of sim.interval_length");
  if (std::fmod(cfg.sim.interval_length, 1.0) != 0.0 || std::fmod(cfg.sim.count_period, 1.0) != 0.0)
    throw ConfigError("sim.interval_length and sim.count_period must be whole seconds");

  cfg.behavior.cycle_low = r.number("behavior", "cycle_low", 70.0);
  cfg.behavior.cycle_high = r.number("behavior", "cycle_high", 115.0);
  cfg.behavior.demand_ref = r.number("behavior", "demand_ref", 0.5);
  cfg.behavior.cycle_noise = r.number("behavior", "cycle_noise", 10.0);
  cfg.behavior.split_noise = r.number("behavior", "split_noise", 0.25);
  check_positive("behavior.demand_ref", cfg.behavior.demand_ref);

  ScenarioConfig& sc = cfg.scenario;
  sc.diurnal = to_pairs("scenario.diurnal", r.raw("scenario", "diurnal").value_or("0:1, 24:1"));
  if (sc.diurnal.empty()) throw ConfigError("scenario.diurnal must have at least one knot");
  for (std::size_t i = 1; i < sc.diurnal.size(); ++i) {
    if (!(sc.diurnal[i].first > sc.diurnal[i - 1].first)) throw ConfigError("scenario.diurnal hours must increase");
  }
  if (const auto text = r.raw("scenario", "lane_peak_rates")) {
    sc.lane_peak_rates = to_list("scenario.lane_peak_rates", *text);
  } else {
    sc.lane_peak_rates.assign(static_cast<std::size_t>(spec.lane_count), 0.1);
  }
  if (static_cast<int>(sc.lane_peak_rates.size()) != spec.lane_count) {
    throw ConfigError("scenario.lane_peak_rates has " + std::to_string(sc.lane_peak_rates.size()) +
                      " entries, expected " + std::to_string(spec.lane_count));
  }
  for (double v : sc.lane_peak_rates) {
    if (v < 0.0) throw ConfigError("scenario.lane_peak_rates must be non-negative, got " + num(v));
  }
  sc.day_variation = r.number("scenario", "day_variation", 0.1);
  sc.stochastic = r.flag("scenario", "stochastic", true);
  sc.phase_order_schedule.clear();
  for (const auto& [hour, order] : to_pairs("scenario.phase_order_schedule",
                                            r.raw("scenario", "phase_order_schedule").value_or("0:0"))) {
    const int k = static_cast<int>(order);
    if (k < 0 || k >= spec.phase_order_count) {
      throw ConfigError("scenario.phase_order_schedule references unknown phase order " + num(order));
    }
    sc.phase_order_schedule.emplace_back(hour, k);
  }
  if (sc.phase_order_schedule.empty() || sc.phase_order_schedule.front().first != 0.0) {
    throw ConfigError("scenario.phase_order_schedule must start at hour 0");
  }
  return cfg;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += num(v[i]);
  }
  return out;
}

}  // namespace

Config parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  return build(tree);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string Config::to_ini() const {
  std::ostringstream os;
  os << "[intersection]\n";
  os << "lanes = " << spec.lane_count << "\n";
  os << "phases = " << spec.phase_count << "\n";
  os << "phase_orders = " << spec.phase_order_count << "\n";
  for (int k = 0; k < spec.phase_order_count; ++k) {
    os << "order" << k << " = ";
    for (int p = 0; p < spec.phase_count; ++p) {
      if (p) os << " | ";
      for (int l = 0; l < spec.lane_count; ++l) os << (l ? " " : "") << (spec.green(k, p, l) ? 1 : 0);
    }
    os << "\n";
  }
  os << "controlled = ";
  for (int l = 0; l < spec.lane_count; ++l) os << (l ? " " : "") << (spec.is_controlled(l) ? 1 : 0);
  os << "\n";
  os << "detection_range = " << num(spec.detection_range) << "\n";
  os << "jam_density = " << num(spec.jam_density) << "\n";
  os << "free_flow_speed = " << num(spec.free_flow_speed) << "\n";
  os << "wave_speed = " << num(spec.wave_speed) << "\n";
  os << "traverse_time = " << num(spec.traverse_time) << "\n";
  os << "cycle_min = " << num(spec.cycle_min) << "\n";
  os << "cycle_max = " << num(spec.cycle_max) << "\n";
  os << "min_green_ratio = " << num(spec.min_green_ratio) << "\n";

  os << "\n[fixed_plan]\n";
  os << "cycle_length = " << num(fixed_plan.cycle_length) << "\n";
  os << "green_ratios = " << join(fixed_plan.green_ratios) << "\n";

  os << "\n[gp]\n";
  os << "h0 = " << num(gp.amplitude) << "\nlambda = " << num(gp.length_scale) << "\neta = " << num(gp.noise) << "\n";

  os << "\n[mh]\n";
  os << "iterations = " << mh.iterations << "\nburn_in = " << num(mh.burn_in_fraction) << "\n";
  os << "arrival_max = " << num(mh.arrival_max) << "\nsaturation_max = " << num(mh.saturation_max) << "\n";
  os << "saturation_floor = " << num(mh.saturation_floor) << "\nseed = " << mh.seed << "\n";
  os << "estimator = " << (mh.estimator == MhEstimator::kAcceptedMean ? "accepted" : "chain") << "\n";

  os << "\n[sql]\n";
  os << "alpha = " << num(sql.alpha) << "\ngamma = " << num(sql.gamma) << "\n";
  os << "aug_sigma = " << num(sql.aug_sigma) << "\naug_clip = " << num(sql.aug_clip) << "\n";
  os << "batch_size = " << sql.batch_size << "\nsteps = " << sql.steps << "\n";
  os << "learning_rate = " << num(sql.learning_rate) << "\ntarget_rate = " << num(sql.target_rate) << "\n";
  os << "hidden = " << sql.hidden << "\ndepth = " << sql.depth << "\n";
  os << "init_log_std = " << num(sql.init_log_std) << "\nlog_every = " << sql.log_every << "\n";
  os << "seed = " << sql.seed << "\n";

  os << "\n[sim]\n";
  os << "saturation_rate = " << num(sim.saturation_rate) << "\ninterval_length = " << num(sim.interval_length) << "\n";
  os << "count_period = " << num(sim.count_period) << "\nwarmup = " << num(sim.warmup) << "\n";
  os << "day_length = " << num(sim.day_length) << "\n";

  os << "\n[behavior]\n";
  os << "cycle_low = " << num(behavior.cycle_low) << "\ncycle_high = " << num(behavior.cycle_high) << "\n";
  os << "demand_ref = " << num(behavior.demand_ref) << "\ncycle_noise = " << num(behavior.cycle_noise) << "\n";
  os << "split_noise = " << num(behavior.split_noise) << "\n";

  os << "\n[scenario]\n";
  os << "diurnal = ";
  for (std::size_t i = 0; i < scenario.diurnal.size(); ++i) {
    os << (i ? ", " : "") << num(scenario.diurnal[i].first) << ":" << num(scenario.diurnal[i].second);
  }
  os << "\nlane_peak_rates = " << join(scenario.lane_peak_rates) << "\n";
  os << "day_variation = " << num(scenario.day_variation) << "\n";
  os << "stochastic = " << (scenario.stochastic ? "true" : "false") << "\n";
  os << "phase_order_schedule = ";
  for (std::size_t i = 0; i < scenario.phase_order_schedule.size(); ++i) {
    os << (i ? ", " : "") << num(scenario.phase_order_schedule[i].first) << ":" << scenario.phase_order_schedule[i].second;
  }
  os << "\n";
  return os.str();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string Config::hash() const { return fnv1a_hex(to_ini()); }

double diurnal_multiplier(const ScenarioConfig& scenario, double seconds) {
  const double hour = seconds / 3600.0;
  const auto& knots = scenario.diurnal;
  if (hour <= knots.front().first) return knots.front().second;
  if (hour >= knots.back().first) return knots.back().second;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (hour <= knots[i].first) {
      const double f = (hour - knots[i - 1].first) / (knots[i].first - knots[i - 1].first);
      return knots[i - 1].second + f * (knots[i].second - knots[i - 1].second);
    }
  }
  return knots.back().second;
}

int scheduled_phase_order(const ScenarioConfig& scenario, double seconds) {
  const double hour = std::fmod(seconds / 3600.0 + 24.0, 24.0);
  int order = scenario.phase_order_schedule.front().second;
  for (const auto& [h, k] : scenario.phase_order_schedule) {
    if (hour >= h) order = k;
  }
  return order;
}

}  // namespace sigctl
