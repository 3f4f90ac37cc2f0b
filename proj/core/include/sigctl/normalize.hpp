#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sigctl/types.hpp"

namespace sigctl {

struct TransitionDataset;

// Statistics that map raw features into the training space and back.
//
// States are z-scored per dimension. Training rewards are
// 5 + (-delay - reward_mean) / reward_std, where the statistics are taken over
// the negated delays. Actions are mapped affinely onto [0, 1] per dimension.
struct NormStats {
  Eigen::VectorXd state_mean;
  Eigen::VectorXd state_std;
  double reward_mean = 0.0;
  double reward_std = 1.0;
  Eigen::VectorXd action_low;
  Eigen::VectorXd action_high;

  Eigen::VectorXd normalize_state(const Eigen::VectorXd& raw) const;
  Eigen::VectorXd denormalize_state(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd normalize_states(const Eigen::MatrixXd& raw_rows) const;

  double training_reward(double delay) const;
  double delay_from_training_reward(double value) const;

  Eigen::VectorXd normalize_action(const Eigen::VectorXd& raw) const;
  Eigen::VectorXd denormalize_action(const Eigen::VectorXd& unit) const;
};

inline constexpr double kRewardCenter = 5.0;

// Mean and sample standard deviation; zero-variance (or single-sample)
// columns report std 1.
void column_stats(const Eigen::MatrixXd& rows, Eigen::VectorXd& mean, Eigen::VectorXd& std_dev);

// Action bounds: cycle length in [cycle_min, cycle_max], green ratios in [0, 1].
void action_bounds(const IntersectionSpec& spec, Eigen::VectorXd& low, Eigen::VectorXd& high);

// Fits statistics on a raw dataset and rewrites it into the training space.
// Throws DataError on an empty dataset.
NormStats normalize_dataset(TransitionDataset& data, const IntersectionSpec& spec);

// Inverse of normalize_dataset given the stored statistics.
void denormalize_dataset(TransitionDataset& data);

}  // namespace sigctl
