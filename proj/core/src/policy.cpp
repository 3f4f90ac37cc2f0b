#include "sigctl/policy.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>

#include "sigctl/error.hpp"

namespace sigctl {
namespace {

std::vector<int> policy_widths(int state_dim, int phase_count, int hidden, int depth) {
  if (state_dim <= 0 || phase_count <= 0 || hidden <= 0 || depth < 0)
    throw DimensionError("policy dimensions must be positive");
  std::vector<int> w{state_dim};
  for (int i = 0; i < depth; ++i) w.push_back(hidden);
  w.push_back(1 + phase_count);
  return w;
}

}  // namespace

GaussianPolicy::GaussianPolicy(int state_dim, int phase_count, int hidden, int depth, double min_ratio_in,
                               double init_log_std)
    : net(policy_widths(state_dim, phase_count, hidden, depth)),
      log_std(Eigen::VectorXd::Constant(1 + phase_count, init_log_std)),
      min_ratio(min_ratio_in) {
  if (!(min_ratio >= 0.0) || min_ratio * phase_count >= 1.0)
    throw DimensionError("min green ratio times phase count must stay below 1");
}

Eigen::MatrixXd GaussianPolicy::squash(const Eigen::MatrixXd& head) const {
  const Eigen::Index p = head.rows() - 1;
  const double spread = 1.0 - static_cast<double>(p) * min_ratio;
  Eigen::MatrixXd mu(head.rows(), head.cols());
  for (Eigen::Index c = 0; c < head.cols(); ++c) {
    mu(0, c) = 1.0 / (1.0 + std::exp(-head(0, c)));
    const auto z = head.col(c).tail(p);
    const double top = z.maxCoeff();
    const Eigen::VectorXd e = (z.array() - top).exp();
    const double sum = e.sum();
    mu.col(c).tail(p) = (min_ratio + spread * (e.array() / sum)).matrix();
  }
  return mu;
}

Eigen::MatrixXd GaussianPolicy::mean(const Eigen::MatrixXd& states) const { return squash(net.forward(states)); }

Eigen::VectorXd GaussianPolicy::log_prob(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const {
  if (actions.rows() != action_dim() || actions.cols() != states.cols())
    throw DimensionError("action batch does not match the policy");
  const Eigen::MatrixXd mu = mean(states);
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  const double log_norm = -log_std.sum() - 0.5 * static_cast<double>(action_dim()) * std::log(2.0 * std::numbers::pi);
  Eigen::VectorXd out(states.cols());
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    const Eigen::ArrayXd d = (actions.col(c) - mu.col(c)).array();
    out(c) = log_norm - 0.5 * (d.square() * inv_var).sum();
  }
  return out;
}

double GaussianPolicy::weighted_nll(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                                    const Eigen::VectorXd& weights, Eigen::VectorXd* net_grad,
                                    Eigen::VectorXd* log_std_grad) const {
  const Eigen::Index b = states.cols();
  if (b == 0) throw DataError("empty policy batch");
  if (actions.rows() != action_dim() || actions.cols() != b || weights.size() != b)
    throw DimensionError("policy batch shapes disagree");
  Mlp::Cache cache;
  const Eigen::MatrixXd head = net.forward(states, &cache);
  const Eigen::MatrixXd mu = squash(head);
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  const double log_norm = -log_std.sum() - 0.5 * static_cast<double>(action_dim()) * std::log(2.0 * std::numbers::pi);
  const double scale = 1.0 / static_cast<double>(b);
  const Eigen::Index p = action_dim() - 1;
  const double spread = 1.0 - static_cast<double>(p) * min_ratio;

  double loss = 0.0;
  Eigen::MatrixXd g_head(head.rows(), b);
  Eigen::VectorXd g_log_std = Eigen::VectorXd::Zero(action_dim());
  for (Eigen::Index c = 0; c < b; ++c) {
    const Eigen::ArrayXd d = (actions.col(c) - mu.col(c)).array();
    const double w = weights(c);
    loss -= w * (log_norm - 0.5 * (d.square() * inv_var).sum());
    // dL/dmu = -w (a - mu) / sigma^2, scaled by 1/B below.
    const Eigen::ArrayXd g_mu = -w * d * inv_var;
    g_log_std.array() += -w * (d.square() * inv_var - 1.0);
    const double m0 = mu(0, c);
    g_head(0, c) = g_mu(0) * m0 * (1.0 - m0);
    const Eigen::ArrayXd s = (mu.col(c).tail(p).array() - min_ratio) / spread;
    const Eigen::ArrayXd g_r = g_mu.tail(p);
    const double dot = (g_r * s).sum();
    g_head.col(c).tail(p) = (spread * s * (g_r - dot)).matrix();
  }
  if (net_grad) *net_grad = net.backward(cache, g_head * scale);
  if (log_std_grad) *log_std_grad = g_log_std * scale;
  return loss * scale;
}

void write_policy(std::ostream& out, const GaussianPolicy& policy) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", policy.min_ratio);
  out << "policy min_ratio " << buf << " log_std " << policy.log_std.size();
  for (Eigen::Index i = 0; i < policy.log_std.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", policy.log_std(i));
    out << ' ' << buf;
  }
  out << '\n';
  write_mlp(out, policy.net);
}

GaussianPolicy read_policy(std::istream& in) {
  std::string tag, key1, key2;
  GaussianPolicy p;
  Eigen::Index n = 0;
  std::string tok;
  if (!(in >> tag >> key1 >> tok) || tag != "policy" || key1 != "min_ratio") throw DataError("malformed policy block");
  p.min_ratio = std::strtod(tok.c_str(), nullptr);
  if (!(in >> key2 >> n) || key2 != "log_std" || n <= 0 || n > 4096) throw DataError("malformed policy log_std");
  p.log_std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(in >> tok)) throw DataError("truncated policy log_std");
    p.log_std(i) = std::strtod(tok.c_str(), nullptr);
  }
  p.net = read_mlp(in);
  if (p.net.output_dim() != n) throw DimensionError("policy head width does not match log_std");
  return p;
}

}  // namespace sigctl
