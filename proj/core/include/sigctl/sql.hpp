#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigctl/config.hpp"
#include "sigctl/dataset.hpp"
#include "sigctl/nnet.hpp"
#include "sigctl/policy.hpp"

namespace sigctl {

// x = Q - V.
//   L_V(x)  = [1 + x/2a > 0] (1 + x/2a)^2 - x/a
//   L_pi(x) = [1 + x/2a > 0] (1 + x/2a)
double sql_v_loss(double x, double alpha);
double sql_v_loss_derivative(double x, double alpha);
double sql_pi_weight(double x, double alpha);

// argmin_v mean_i L_V(q_i - v), solved exactly over the active set.
double sql_optimal_value(std::span<const double> q, double alpha);

// Per-component N(0, sigma^2) noise clipped to [-clip, clip].
Eigen::MatrixXd augmentation_noise(Eigen::Index rows, Eigen::Index cols, double sigma, double clip,
                                   std::mt19937_64& rng);

// Columns are samples.
struct Batch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::VectorXd rewards;
  Eigen::MatrixXd next_states;
  Eigen::VectorXd not_done;
};

Batch gather_batch(const TransitionDataset& data, std::span<const Eigen::Index> rows);

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// mean_i L_V(q_i - V(s_i)); q is held fixed.
LossGrad value_loss(const Mlp& value, const Eigen::MatrixXd& states, const Eigen::VectorXd& q, double alpha);
// mean_i (Q(s_i, a_i) - y_i)^2.
LossGrad q_loss(const Mlp& q, const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                const Eigen::VectorXd& target);
Eigen::MatrixXd q_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions);

struct SqlAgent {
  Mlp q;
  Mlp v;
  Mlp v_target;
  GaussianPolicy policy;
  AdamState q_opt;
  AdamState v_opt;
  AdamState pi_opt;
  AdamState log_std_opt;
};

SqlAgent make_agent(int state_dim, int phase_count, double min_ratio, const SqlConfig& cfg, std::mt19937_64& rng);

struct StepStats {
  double q_loss = 0.0;
  double v_loss = 0.0;
  double pi_loss = 0.0;
  double mean_weight = 0.0;
  double zero_weight_fraction = 0.0;
};

// One update of V, Q and pi on a batch drawn from the dataset. The same
// clipped noise perturbs the state fed to V and to the Q being regressed.
// Only dataset actions reach Q.
StepStats train_step(SqlAgent& agent, const Batch& batch, const SqlConfig& cfg, std::mt19937_64& rng);

struct CurvePoint {
  std::int64_t step = 0;
  StepStats stats;
};

struct TrainResult {
  SqlAgent agent;
  std::vector<CurvePoint> curve;
};

using TrainCallback = std::function<void(std::int64_t step, const SqlAgent& agent)>;

// Needs a normalized, non-empty dataset. The callback fires every
// cfg.log_every steps after logging.
TrainResult sql_train(const TransitionDataset& data, double min_ratio, const SqlConfig& cfg,
                      const TrainCallback& on_log = {});

// Maximum-likelihood fit of the Gaussian policy to the dataset actions.
TrainResult bc_train(const TransitionDataset& data, double min_ratio, const SqlConfig& cfg,
                     const TrainCallback& on_log = {});

void write_curve(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace sigctl
