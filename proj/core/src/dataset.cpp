#include "sigctl/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sigctl/error.hpp"

namespace sigctl {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += num(v(i));
  }
  return out;
}

double parse_double(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw DataError("bad number '" + text + "' in " + where);
  return v;
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& where) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(parse_double(tok, where));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Collects key=value tokens from a comment line.
void read_pairs(const std::string& line, std::map<std::string, std::string>& into) {
  std::istringstream is(line.substr(1));
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    into[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
}

int required_int(const std::map<std::string, std::string>& kv, const std::string& key, const std::string& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw DataError(path + ": header lacks '" + key + "'");
  const double v = parse_double(it->second, path);
  if (v < 0 || v != std::floor(v)) throw DataError(path + ": header '" + key + "' must be a non-negative integer");
  return static_cast<int>(v);
}

}  // namespace

void TransitionDataset::resize(Eigen::Index rows) {
  states.resize(rows, state_dim());
  actions.resize(rows, action_dim());
  rewards.resize(rows);
  next_states.resize(rows, state_dim());
  terminals.assign(static_cast<std::size_t>(rows), 0);
  days.assign(static_cast<std::size_t>(rows), 0);
}

void TransitionDataset::validate() const {
  const Eigen::Index n = size();
  if (states.cols() != state_dim() || next_states.cols() != state_dim())
    throw DimensionError("state width " + std::to_string(states.cols()) + " does not equal 2L+K+P = " +
                         std::to_string(state_dim()));
  if (actions.cols() != action_dim())
    throw DimensionError("action width " + std::to_string(actions.cols()) + " does not equal 1+P = " +
                         std::to_string(action_dim()));
  if (actions.rows() != n || rewards.size() != n || next_states.rows() != n ||
      static_cast<Eigen::Index>(terminals.size()) != n || static_cast<Eigen::Index>(days.size()) != n)
    throw DimensionError("dataset columns have inconsistent row counts");
  if (!states.allFinite() || !actions.allFinite() || !rewards.allFinite() || !next_states.allFinite())
    throw DataError("dataset contains non-finite values");
}

void save_dataset(const TransitionDataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset " + path);
  out << "# sigctl-dataset v1\n";
  out << "# lanes=" << data.lane_count << " phase_orders=" << data.phase_order_count << " phases=" << data.phase_count
      << " config_hash=" << (data.config_hash.empty() ? "-" : data.config_hash) << " rows=" << data.size()
      << " normalized=" << (data.normalized() ? 1 : 0) << "\n";
  if (data.norm) {
    const NormStats& s = *data.norm;
    out << "# norm.state_mean=" << join(s.state_mean) << "\n";
    out << "# norm.state_std=" << join(s.state_std) << "\n";
    out << "# norm.reward_mean=" << num(s.reward_mean) << " norm.reward_std=" << num(s.reward_std) << "\n";
    out << "# norm.action_low=" << join(s.action_low) << "\n";
    out << "# norm.action_high=" << join(s.action_high) << "\n";
  }
  out << "day,terminal,reward";
  for (int j = 0; j < data.state_dim(); ++j) out << ",s" << j;
  for (int j = 0; j < data.action_dim(); ++j) out << ",a" << j;
  for (int j = 0; j < data.state_dim(); ++j) out << ",n" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    out << data.days[row] << ',' << static_cast<int>(data.terminals[row]) << ',' << num(data.rewards(i));
    for (int j = 0; j < data.state_dim(); ++j) out << ',' << num(data.states(i, j));
    for (int j = 0; j < data.action_dim(); ++j) out << ',' << num(data.actions(i, j));
    for (int j = 0; j < data.state_dim(); ++j) out << ',' << num(data.next_states(i, j));
    out << "\n";
  }
  if (!out) throw DataError("write failed for " + path);
}

TransitionDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line) || line != "# sigctl-dataset v1") throw DataError(path + ": not a sigctl dataset file");

  std::map<std::string, std::string> kv;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      read_pairs(line, kv);
      continue;
    }
    header_seen = true;
    break;
  }
  if (!header_seen) throw DataError(path + ": missing column header");

  TransitionDataset data;
  data.lane_count = required_int(kv, "lanes", path);
  data.phase_order_count = required_int(kv, "phase_orders", path);
  data.phase_count = required_int(kv, "phases", path);
  data.config_hash = kv.count("config_hash") && kv["config_hash"] != "-" ? kv["config_hash"] : "";
  const int rows = required_int(kv, "rows", path);
  if (required_int(kv, "normalized", path) == 1) {
    NormStats s;
    for (const char* key : {"norm.state_mean", "norm.state_std", "norm.reward_mean", "norm.reward_std",
                            "norm.action_low", "norm.action_high"})
      if (!kv.count(key)) throw DataError(path + ": header lacks '" + key + "'");
    s.state_mean = parse_vector(kv["norm.state_mean"], path);
    s.state_std = parse_vector(kv["norm.state_std"], path);
    s.reward_mean = parse_double(kv["norm.reward_mean"], path);
    s.reward_std = parse_double(kv["norm.reward_std"], path);
    s.action_low = parse_vector(kv["norm.action_low"], path);
    s.action_high = parse_vector(kv["norm.action_high"], path);
    if (s.state_mean.size() != data.state_dim() || s.state_std.size() != data.state_dim() ||
        s.action_low.size() != data.action_dim() || s.action_high.size() != data.action_dim())
      throw DimensionError(path + ": normalization statistics do not match the declared dimensions");
    data.norm = s;
  }

  data.resize(rows);
  const int width = 3 + 2 * data.state_dim() + data.action_dim();
  std::vector<double> cells(static_cast<std::size_t>(width));
  for (int i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw DataError(path + ": expected " + std::to_string(rows) + " rows, found " +
                                                 std::to_string(i));
    std::stringstream ss(line);
    std::string tok;
    int c = 0;
    while (std::getline(ss, tok, ',')) {
      if (c >= width) throw DimensionError(path + ": row " + std::to_string(i) + " has too many columns");
      cells[static_cast<std::size_t>(c++)] = parse_double(tok, path);
    }
    if (c != width) throw DimensionError(path + ": row " + std::to_string(i) + " has " + std::to_string(c) +
                                         " columns, expected " + std::to_string(width));
    const auto row = static_cast<std::size_t>(i);
    data.days[row] = static_cast<int>(cells[0]);
    data.terminals[row] = cells[1] != 0.0 ? 1 : 0;
    data.rewards(i) = cells[2];
    int k = 3;
    for (int j = 0; j < data.state_dim(); ++j) data.states(i, j) = cells[static_cast<std::size_t>(k++)];
    for (int j = 0; j < data.action_dim(); ++j) data.actions(i, j) = cells[static_cast<std::size_t>(k++)];
    for (int j = 0; j < data.state_dim(); ++j) data.next_states(i, j) = cells[static_cast<std::size_t>(k++)];
  }
  data.validate();
  return data;
}

}  // namespace sigctl
