#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigctl/normalize.hpp"

namespace sigctl {

// Offline transitions at the decision cadence, one row per transition.
//
// Before normalization `rewards` holds the inferred average delay r_t and the
// actions are raw (cycle length in seconds, green ratios). After
// `normalize_dataset` the states are z-scored, actions live in the unit box
// and rewards are training rewards centred on 5.
struct TransitionDataset {
  int lane_count = 0;
  int phase_order_count = 0;
  int phase_count = 0;
  std::string config_hash;
  std::optional<NormStats> norm;

  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::VectorXd rewards;
  Eigen::MatrixXd next_states;
  std::vector<std::uint8_t> terminals;
  // Day index of every row; lets evaluation tools regroup transitions.
  std::vector<int> days;

  Eigen::Index size() const { return states.rows(); }
  int state_dim() const { return 2 * lane_count + phase_order_count + phase_count; }
  int action_dim() const { return 1 + phase_count; }
  bool normalized() const { return norm.has_value(); }

  void resize(Eigen::Index rows);
  void validate() const;
};

// Delimited text layout, lossless for doubles:
//
//   # sigctl-dataset v1
//   # lanes=L phase_orders=K phases=P config_hash=<hex> rows=N normalized=0|1
//   # norm.state_mean=v1,v2,...      (only when normalized)
//   # norm.state_std=...
//   # norm.reward_mean=<v> norm.reward_std=<v>
//   # norm.action_low=...
//   # norm.action_high=...
//   day,terminal,reward,s0..s{S-1},a0..a{A-1},n0..n{S-1}
//   <rows>
void save_dataset(const TransitionDataset& data, const std::string& path);
TransitionDataset load_dataset(const std::string& path);

}  // namespace sigctl
