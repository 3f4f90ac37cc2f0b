#include "sigctl/normalize.hpp"

#include <cmath>

#include "sigctl/dataset.hpp"
#include "sigctl/error.hpp"

namespace sigctl {

Eigen::VectorXd NormStats::normalize_state(const Eigen::VectorXd& raw) const {
  if (raw.size() != state_mean.size()) throw DimensionError("state dimension mismatch in normalize_state");
  return (raw - state_mean).cwiseQuotient(state_std);
}

Eigen::VectorXd NormStats::denormalize_state(const Eigen::VectorXd& z) const {
  if (z.size() != state_mean.size()) throw DimensionError("state dimension mismatch in denormalize_state");
  return z.cwiseProduct(state_std) + state_mean;
}

Eigen::MatrixXd NormStats::normalize_states(const Eigen::MatrixXd& raw_rows) const {
  if (raw_rows.cols() != state_mean.size()) throw DimensionError("state dimension mismatch in normalize_states");
  Eigen::MatrixXd out = raw_rows.rowwise() - state_mean.transpose();
  out.array().rowwise() /= state_std.transpose().array();
  return out;
}

double NormStats::training_reward(double delay) const { return kRewardCenter + (-delay - reward_mean) / reward_std; }

double NormStats::delay_from_training_reward(double value) const {
  return -((value - kRewardCenter) * reward_std + reward_mean);
}

Eigen::VectorXd NormStats::normalize_action(const Eigen::VectorXd& raw) const {
  if (raw.size() != action_low.size()) throw DimensionError("action dimension mismatch in normalize_action");
  return (raw - action_low).cwiseQuotient(action_high - action_low);
}

Eigen::VectorXd NormStats::denormalize_action(const Eigen::VectorXd& unit) const {
  if (unit.size() != action_low.size()) throw DimensionError("action dimension mismatch in denormalize_action");
  return unit.cwiseProduct(action_high - action_low) + action_low;
}

void column_stats(const Eigen::MatrixXd& rows, Eigen::VectorXd& mean, Eigen::VectorXd& std_dev) {
  const Eigen::Index n = rows.rows();
  mean = Eigen::VectorXd::Zero(rows.cols());
  std_dev = Eigen::VectorXd::Ones(rows.cols());
  if (n == 0) return;
  mean = rows.colwise().mean().transpose();
  if (n < 2) return;
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const double ss = (rows.col(j).array() - mean(j)).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    // Constant columns (up to rounding) keep std 1.
    std_dev(j) = sd > 1e-12 * std::max(1.0, std::abs(mean(j))) ? sd : 1.0;
  }
}

void action_bounds(const IntersectionSpec& spec, Eigen::VectorXd& low, Eigen::VectorXd& high) {
  low = Eigen::VectorXd::Zero(1 + spec.phase_count);
  high = Eigen::VectorXd::Ones(1 + spec.phase_count);
  low(0) = spec.cycle_min;
  high(0) = spec.cycle_max;
}

NormStats normalize_dataset(TransitionDataset& data, const IntersectionSpec& spec) {
  if (data.size() == 0) throw DataError("cannot normalize an empty dataset");
  if (data.normalized()) throw DataError("dataset is already normalized");
  data.validate();

  NormStats stats;
  column_stats(data.states, stats.state_mean, stats.state_std);

  Eigen::MatrixXd negated = -data.rewards;
  Eigen::VectorXd rmean, rstd;
  column_stats(negated, rmean, rstd);
  stats.reward_mean = rmean(0);
  stats.reward_std = rstd(0);

  action_bounds(spec, stats.action_low, stats.action_high);
  if (stats.action_low.size() != data.actions.cols()) throw DimensionError("action dimension does not match spec");

  data.states = stats.normalize_states(data.states);
  data.next_states = stats.normalize_states(data.next_states);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    data.rewards(i) = stats.training_reward(data.rewards(i));
    data.actions.row(i) = stats.normalize_action(data.actions.row(i).transpose()).transpose();
  }
  data.norm = stats;
  return stats;
}

void denormalize_dataset(TransitionDataset& data) {
  if (!data.norm) throw DataError("dataset carries no normalization statistics");
  const NormStats& s = *data.norm;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    data.states.row(i) = s.denormalize_state(data.states.row(i).transpose()).transpose();
    data.next_states.row(i) = s.denormalize_state(data.next_states.row(i).transpose()).transpose();
    data.actions.row(i) = s.denormalize_action(data.actions.row(i).transpose()).transpose();
    data.rewards(i) = s.delay_from_training_reward(data.rewards(i));
  }
  data.norm.reset();
}

}  // namespace sigctl
