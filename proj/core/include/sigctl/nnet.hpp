#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sigctl {

// Fully connected network, ReLU on hidden layers, identity output.
//
// Parameters live in one flat vector, layer by layer: W_l (column-major,
// out x in) followed by b_l. Batches are column-major too: one sample per
// column.
class Mlp {
 public:
  Mlp() = default;
  // widths = {input, hidden..., output}; at least two entries.
  explicit Mlp(std::vector<int> widths);

  // W, b ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  void init_uniform(std::mt19937_64& rng);

  const std::vector<int>& widths() const { return widths_; }
  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  int layer_count() const { return static_cast<int>(widths_.size()) - 1; }
  Eigen::Index parameter_count() const { return params_.size(); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  // Activations a_0 (input) .. a_L (output) of the last forward pass.
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;
  };

  // Throws DimensionError when x.rows() != input_dim().
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
  Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const;

  // d(loss)/d(params) given d(loss)/d(output) for the cached batch.
  Eigen::VectorXd backward(const Cache& cache, const Eigen::MatrixXd& grad_out) const;

 private:
  Eigen::Index weight_offset(int layer) const { return offsets_[static_cast<std::size_t>(layer)]; }
  Eigen::Index bias_offset(int layer) const;

  std::vector<int> widths_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

struct AdamState {
  double learning_rate = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
};

// Bias-corrected Adam update. Throws NumericError naming `block` on a
// non-finite gradient and DimensionError on a shape mismatch.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               const std::string& block = "parameters");

// target <- (1 - rate) target + rate source.
void polyak_update(Mlp& target, const Mlp& source, double rate);

// Text layout: "mlp <n_widths> w0 w1 ...", then one parameter per line.
void write_mlp(std::ostream& out, const Mlp& net);
Mlp read_mlp(std::istream& in);

}  // namespace sigctl
