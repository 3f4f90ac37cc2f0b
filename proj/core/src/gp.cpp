#include "sigctl/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "sigctl/error.hpp"

namespace sigctl {

void validate_hyper(const GpHyper& hyper) {
  if (!(hyper.amplitude > 0.0) || !(hyper.length_scale > 0.0) || !(hyper.noise > 0.0))
    throw ConfigError("GP hyperparameters h0, lambda and eta must all be positive");
}

Eigen::MatrixXd kernel_matrix(std::span<const double> timestamps, const GpHyper& hyper) {
  validate_hyper(hyper);
  const auto n = static_cast<Eigen::Index>(timestamps.size());
  Eigen::MatrixXd k(n, n);
  const double noise = hyper.noise * hyper.noise;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = timestamps[static_cast<std::size_t>(i)];
    if (!std::isfinite(ti)) throw DataError("non-finite timestamp");
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double tj = timestamps[static_cast<std::size_t>(j)];
      const double z = (ti - tj) / hyper.length_scale;
      double v = hyper.amplitude * std::exp(-z * z);
      if (ti == tj) v += noise;
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

GpLikelihood::GpLikelihood(std::span<const double> timestamps, std::span<const double> counts, const GpHyper& hyper) {
  if (timestamps.size() != counts.size()) throw DimensionError("timestamps and counts differ in length");
  if (timestamps.empty()) throw DataError("likelihood needs at least one count sample");
  const auto n = static_cast<Eigen::Index>(timestamps.size());
  times_ = Eigen::Map<const Eigen::VectorXd>(timestamps.data(), n);
  counts_ = Eigen::Map<const Eigen::VectorXd>(counts.data(), n);
  llt_.compute(kernel_matrix(timestamps, hyper));
  if (llt_.info() != Eigen::Success) throw std::runtime_error("kernel matrix factorization failed");
  const auto& l = llt_.matrixLLT();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(l(i, i));
  log_norm_ = -0.5 * (log_det + static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
}

double GpLikelihood::evaluate(const Eigen::VectorXd& mean) const {
  if (mean.size() != counts_.size()) throw DimensionError("mean and counts differ in length");
  const Eigen::VectorXd white = llt_.matrixL().solve(counts_ - mean);
  return log_norm_ - 0.5 * white.squaredNorm();
}

double GpLikelihood::evaluate(const QueueCurve& curve) const {
  Eigen::VectorXd mean(times_.size());
  for (Eigen::Index i = 0; i < times_.size(); ++i) mean(i) = curve.count(times_(i));
  return evaluate(mean);
}

double log_likelihood(const QueueParams& theta, const LaneCycleObservation& obs, const IntersectionSpec& spec,
                      const GpHyper& hyper) {
  const GpLikelihood lik(obs.timestamps, obs.counts, hyper);
  const auto curve =
      QueueCurve::make(theta, SignalTiming::from(obs), obs.cycle_flow, spec.capacity(), spec.traverse_time);
  if (!curve) return -std::numeric_limits<double>::infinity();
  return lik.evaluate(*curve);
}

}  // namespace sigctl
