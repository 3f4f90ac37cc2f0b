#pragma once

#include <span>

#include <Eigen/Dense>

#include "sigctl/config.hpp"
#include "sigctl/queuing.hpp"
#include "sigctl/types.hpp"

namespace sigctl {

// K_ij = h0 exp(-((t_i - t_j) / lambda)^2) + eta^2 [t_i == t_j].
Eigen::MatrixXd kernel_matrix(std::span<const double> timestamps, const GpHyper& hyper);

void validate_hyper(const GpHyper& hyper);

// Gaussian density of one count series around a candidate mean. The kernel
// depends on the timestamps only, so it is factorized once per series.
class GpLikelihood {
 public:
  GpLikelihood(std::span<const double> timestamps, std::span<const double> counts, const GpHyper& hyper);

  // log N(counts; mean, K).
  double evaluate(const Eigen::VectorXd& mean) const;
  // Same, with the mean taken from a count curve at the stored timestamps.
  double evaluate(const QueueCurve& curve) const;

  Eigen::Index size() const { return counts_.size(); }
  double log_normalizer() const { return log_norm_; }

 private:
  Eigen::VectorXd times_;
  Eigen::VectorXd counts_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_norm_ = 0.0;  // -0.5 log det(2 pi K)
};

// -infinity when theta is infeasible for the cycle.
double log_likelihood(const QueueParams& theta, const LaneCycleObservation& obs, const IntersectionSpec& spec,
                      const GpHyper& hyper);

}  // namespace sigctl
