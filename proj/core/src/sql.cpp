#include "sigctl/sql.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <functional>
#include <ostream>

#include "sigctl/error.hpp"

namespace sigctl {
namespace {

std::vector<int> widths(int in, int hidden, int depth, int out) {
  std::vector<int> w{in};
  for (int i = 0; i < depth; ++i) w.push_back(hidden);
  w.push_back(out);
  return w;
}

void check_config(const SqlConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("sql.alpha must be positive");
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) throw ConfigError("sql.gamma must lie in [0, 1)");
  if (!(cfg.aug_sigma >= 0.0) || !(cfg.aug_clip >= cfg.aug_sigma))
    throw ConfigError("augmentation needs clip >= sigma >= 0");
  if (cfg.batch_size <= 0) throw ConfigError("sql.batch_size must be positive");
  if (cfg.steps < 0) throw ConfigError("sql.steps must be non-negative");
  if (cfg.hidden <= 0 || cfg.depth < 0) throw ConfigError("network width must be positive");
}

void check_finite(double value, const char* what, std::int64_t step) {
  if (!std::isfinite(value))
    throw NumericError(std::string("non-finite ") + what + " at step " + std::to_string(step));
}

void clamp_log_std(GaussianPolicy& policy) {
  policy.log_std = policy.log_std.cwiseMax(GaussianPolicy::kMinLogStd).cwiseMin(GaussianPolicy::kMaxLogStd);
}

Batch sample_batch(const TransitionDataset& data, int size, std::mt19937_64& rng) {
  std::uniform_int_distribution<Eigen::Index> pick(0, data.size() - 1);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(size));
  for (auto& r : rows) r = pick(rng);
  return gather_batch(data, rows);
}

void check_dataset(const TransitionDataset& data) {
  if (data.size() == 0) throw DataError("training needs at least one transition");
  if (!data.normalized()) throw DataError("training needs a normalized dataset");
  data.validate();
}

}  // namespace

double sql_v_loss(double x, double alpha) {
  const double z = 1.0 + x / (2.0 * alpha);
  return (z > 0.0 ? z * z : 0.0) - x / alpha;
}

double sql_v_loss_derivative(double x, double alpha) {
  const double z = 1.0 + x / (2.0 * alpha);
  return (z > 0.0 ? z / alpha : 0.0) - 1.0 / alpha;
}

double sql_pi_weight(double x, double alpha) {
  const double z = 1.0 + x / (2.0 * alpha);
  return z > 0.0 ? z : 0.0;
}

double sql_optimal_value(std::span<const double> q, double alpha) {
  if (q.empty()) throw DataError("value minimization needs at least one sample");
  std::vector<double> sorted(q.begin(), q.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double n = static_cast<double>(sorted.size());
  // Stationarity: sum_i max(0, 1 + (q_i - v)/2a) = n. With the top k
  // samples active, v = (sum_top_k q + 2a (k - n)) / k.
  double prefix = 0.0;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    prefix += sorted[k - 1];
    const double kk = static_cast<double>(k);
    const double v = (prefix + 2.0 * alpha * (kk - n)) / kk;
    const double threshold = v - 2.0 * alpha;
    const bool last_active = sorted[k - 1] > threshold;
    const bool next_inactive = k == sorted.size() || sorted[k] <= threshold;
    if (last_active && next_inactive) return v;
  }
  return std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
}

Eigen::MatrixXd augmentation_noise(Eigen::Index rows, Eigen::Index cols, double sigma, double clip,
                                   std::mt19937_64& rng) {
  Eigen::MatrixXd eps(rows, cols);
  if (sigma <= 0.0) return Eigen::MatrixXd::Zero(rows, cols);
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) eps(i, j) = std::clamp(normal(rng), -clip, clip);
  return eps;
}

Batch gather_batch(const TransitionDataset& data, std::span<const Eigen::Index> rows) {
  const auto b = static_cast<Eigen::Index>(rows.size());
  Batch out;
  out.states.resize(data.state_dim(), b);
  out.actions.resize(data.action_dim(), b);
  out.rewards.resize(b);
  out.next_states.resize(data.state_dim(), b);
  out.not_done.resize(b);
  for (Eigen::Index c = 0; c < b; ++c) {
    const Eigen::Index r = rows[static_cast<std::size_t>(c)];
    out.states.col(c) = data.states.row(r).transpose();
    out.actions.col(c) = data.actions.row(r).transpose();
    out.rewards(c) = data.rewards(r);
    out.next_states.col(c) = data.next_states.row(r).transpose();
    out.not_done(c) = data.terminals[static_cast<std::size_t>(r)] ? 0.0 : 1.0;
  }
  return out;
}

Eigen::MatrixXd q_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) {
  if (states.cols() != actions.cols()) throw DimensionError("state and action batches differ in size");
  Eigen::MatrixXd x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

LossGrad value_loss(const Mlp& value, const Eigen::MatrixXd& states, const Eigen::VectorXd& q, double alpha) {
  const Eigen::Index b = states.cols();
  if (q.size() != b) throw DimensionError("value targets and states differ in size");
  Mlp::Cache cache;
  const Eigen::MatrixXd v = value.forward(states, &cache);
  LossGrad out;
  Eigen::MatrixXd g(1, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const double x = q(i) - v(0, i);
    out.loss += sql_v_loss(x, alpha);
    g(0, i) = -sql_v_loss_derivative(x, alpha);
  }
  const double scale = 1.0 / static_cast<double>(b);
  out.loss *= scale;
  out.grad = value.backward(cache, g * scale);
  return out;
}

LossGrad q_loss(const Mlp& q, const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                const Eigen::VectorXd& target) {
  const Eigen::Index b = states.cols();
  if (target.size() != b) throw DimensionError("Q targets and states differ in size");
  Mlp::Cache cache;
  const Eigen::MatrixXd pred = q.forward(q_input(states, actions), &cache);
  const Eigen::RowVectorXd diff = pred.row(0) - target.transpose();
  const double scale = 1.0 / static_cast<double>(b);
  LossGrad out;
  out.loss = diff.squaredNorm() * scale;
  out.grad = q.backward(cache, 2.0 * scale * diff);
  return out;
}

SqlAgent make_agent(int state_dim, int phase_count, double min_ratio, const SqlConfig& cfg, std::mt19937_64& rng) {
  check_config(cfg);
  const int action_dim = 1 + phase_count;
  SqlAgent a;
  a.q = Mlp(widths(state_dim + action_dim, cfg.hidden, cfg.depth, 1));
  a.v = Mlp(widths(state_dim, cfg.hidden, cfg.depth, 1));
  a.policy = GaussianPolicy(state_dim, phase_count, cfg.hidden, cfg.depth, min_ratio, cfg.init_log_std);
  a.q.init_uniform(rng);
  a.v.init_uniform(rng);
  a.policy.net.init_uniform(rng);
  a.v_target = a.v;
  for (AdamState* s : {&a.q_opt, &a.v_opt, &a.pi_opt, &a.log_std_opt}) s->learning_rate = cfg.learning_rate;
  return a;
}

StepStats train_step(SqlAgent& agent, const Batch& batch, const SqlConfig& cfg, std::mt19937_64& rng) {
  const Eigen::Index b = batch.states.cols();
  const Eigen::MatrixXd noise = augmentation_noise(batch.states.rows(), b, cfg.aug_sigma, cfg.aug_clip, rng);
  const Eigen::MatrixXd s_aug = batch.states + noise;

  const Eigen::VectorXd q_sa = agent.q.forward(q_input(batch.states, batch.actions)).row(0).transpose();
  const Eigen::VectorXd v_s = agent.v.forward(batch.states).row(0).transpose();
  const Eigen::VectorXd v_next = agent.v_target.forward(batch.next_states).row(0).transpose();

  StepStats st;
  const LossGrad vl = value_loss(agent.v, s_aug, q_sa, cfg.alpha);
  st.v_loss = vl.loss;
  adam_step(agent.v_opt, agent.v.params(), vl.grad, "value network");

  const Eigen::VectorXd target = batch.rewards + cfg.gamma * batch.not_done.cwiseProduct(v_next);
  const LossGrad ql = q_loss(agent.q, s_aug, batch.actions, target);
  st.q_loss = ql.loss;
  adam_step(agent.q_opt, agent.q.params(), ql.grad, "Q network");

  Eigen::VectorXd w(b);
  int zeros = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    w(i) = sql_pi_weight(q_sa(i) - v_s(i), cfg.alpha);
    if (w(i) == 0.0) ++zeros;
  }
  Eigen::VectorXd g_net, g_std;
  st.pi_loss = agent.policy.weighted_nll(batch.states, batch.actions, w, &g_net, &g_std);
  adam_step(agent.pi_opt, agent.policy.net.params(), g_net, "policy network");
  adam_step(agent.log_std_opt, agent.policy.log_std, g_std, "policy log-std");
  clamp_log_std(agent.policy);

  polyak_update(agent.v_target, agent.v, cfg.target_rate);
  st.mean_weight = w.mean();
  st.zero_weight_fraction = static_cast<double>(zeros) / static_cast<double>(b);
  return st;
}

TrainResult sql_train(const TransitionDataset& data, double min_ratio, const SqlConfig& cfg,
                      const TrainCallback& on_log) {
  check_config(cfg);
  check_dataset(data);
  std::mt19937_64 rng(cfg.seed);
  TrainResult out;
  out.agent = make_agent(data.state_dim(), data.phase_count, min_ratio, cfg, rng);
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    const Batch batch = sample_batch(data, cfg.batch_size, rng);
    const StepStats st = train_step(out.agent, batch, cfg, rng);
    check_finite(st.q_loss, "Q loss", step);
    check_finite(st.v_loss, "value loss", step);
    check_finite(st.pi_loss, "policy loss", step);
    if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step == cfg.steps)) {
      out.curve.push_back({step, st});
      if (on_log) on_log(step, out.agent);
    }
  }
  return out;
}

TrainResult bc_train(const TransitionDataset& data, double min_ratio, const SqlConfig& cfg,
                     const TrainCallback& on_log) {
  check_config(cfg);
  check_dataset(data);
  std::mt19937_64 rng(cfg.seed);
  TrainResult out;
  out.agent = make_agent(data.state_dim(), data.phase_count, min_ratio, cfg, rng);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(cfg.batch_size);
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    const Batch batch = sample_batch(data, cfg.batch_size, rng);
    StepStats st;
    Eigen::VectorXd g_net, g_std;
    st.pi_loss = out.agent.policy.weighted_nll(batch.states, batch.actions, ones, &g_net, &g_std);
    check_finite(st.pi_loss, "policy loss", step);
    adam_step(out.agent.pi_opt, out.agent.policy.net.params(), g_net, "policy network");
    adam_step(out.agent.log_std_opt, out.agent.policy.log_std, g_std, "policy log-std");
    clamp_log_std(out.agent.policy);
    st.mean_weight = 1.0;
    if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step == cfg.steps)) {
      out.curve.push_back({step, st});
      if (on_log) on_log(step, out.agent);
    }
  }
  return out;
}

void write_curve(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "step,q_loss,v_loss,pi_loss,mean_weight,zero_weight_fraction\n";
  char buf[256];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(p.step),
                  p.stats.q_loss, p.stats.v_loss, p.stats.pi_loss, p.stats.mean_weight,
                  p.stats.zero_weight_fraction);
    out << buf;
  }
}

}  // namespace sigctl
