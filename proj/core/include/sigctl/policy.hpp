#pragma once

#include <iosfwd>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "sigctl/nnet.hpp"

namespace sigctl {

// Diagonal Gaussian over the unit action box [T_c, ratio_1..ratio_P] with a
// state-independent log-std.
//
// The network emits 1 + P numbers. The cycle head passes through a sigmoid;
// the P ratio logits pass through
//   ratio_p = m + (1 - P m) softmax(z)_p,
// so mean ratios are on the simplex and never below the floor m.
class GaussianPolicy {
 public:
  static constexpr double kMinLogStd = -5.0;
  static constexpr double kMaxLogStd = 1.0;

  GaussianPolicy() = default;
  GaussianPolicy(int state_dim, int phase_count, int hidden, int depth, double min_ratio, double init_log_std);

  int state_dim() const { return net.input_dim(); }
  int action_dim() const { return net.output_dim(); }
  int phase_count() const { return action_dim() - 1; }

  // Columns are samples.
  Eigen::MatrixXd mean(const Eigen::MatrixXd& states) const;
  Eigen::VectorXd mean_one(const Eigen::VectorXd& state) const { return mean(state).col(0); }
  Eigen::VectorXd log_prob(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const;

  // -mean_i w_i log pi(a_i | s_i) and its gradients.
  double weighted_nll(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions, const Eigen::VectorXd& weights,
                      Eigen::VectorXd* net_grad, Eigen::VectorXd* log_std_grad) const;

  // Maps raw head outputs to the mean action.
  Eigen::MatrixXd squash(const Eigen::MatrixXd& head) const;

  Mlp net;
  Eigen::VectorXd log_std;
  double min_ratio = 0.0;
};

void write_policy(std::ostream& out, const GaussianPolicy& policy);
GaussianPolicy read_policy(std::istream& in);

}  // namespace sigctl
