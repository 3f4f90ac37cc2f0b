#include "sigctl/nnet.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "sigctl/error.hpp"

namespace sigctl {

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw DimensionError("an MLP needs an input and an output width");
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] <= 0 || widths_[l + 1] <= 0) throw DimensionError("MLP widths must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(widths_[l + 1]) * (widths_[l] + 1);
  }
  params_ = Eigen::VectorXd::Zero(total);
}

Eigen::Index Mlp::bias_offset(int layer) const {
  const auto l = static_cast<std::size_t>(layer);
  return offsets_[l] + static_cast<Eigen::Index>(widths_[l + 1]) * widths_[l];
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(int layer) {
  const auto l = static_cast<std::size_t>(layer);
  return {params_.data() + weight_offset(layer), widths_[l + 1], widths_[l]};
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  const auto l = static_cast<std::size_t>(layer);
  return {params_.data() + weight_offset(layer), widths_[l + 1], widths_[l]};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(int layer) {
  return {params_.data() + bias_offset(layer), widths_[static_cast<std::size_t>(layer) + 1]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), widths_[static_cast<std::size_t>(layer) + 1]};
}

void Mlp::init_uniform(std::mt19937_64& rng) {
  for (int l = 0; l < layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[static_cast<std::size_t>(l)]));
    std::uniform_real_distribution<double> u(-bound, bound);
    auto w = weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
    auto b = bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = u(rng);
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (x.rows() != input_dim())
    throw DimensionError("MLP expects input width " + std::to_string(input_dim()) + ", got " +
                         std::to_string(x.rows()));
  if (cache) {
    cache->activations.resize(static_cast<std::size_t>(layer_count()) + 1);
    cache->activations[0] = x;
  }
  Eigen::MatrixXd a = x;
  for (int l = 0; l < layer_count(); ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    if (l + 1 < layer_count()) z = z.cwiseMax(0.0);
    a = std::move(z);
    if (cache) cache->activations[static_cast<std::size_t>(l) + 1] = a;
  }
  return a;
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& x) const { return forward(x).col(0); }

Eigen::VectorXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_out) const {
  if (cache.activations.size() != static_cast<std::size_t>(layer_count()) + 1)
    throw DimensionError("backward called without a matching forward cache");
  const auto& out = cache.activations.back();
  if (grad_out.rows() != out.rows() || grad_out.cols() != out.cols())
    throw DimensionError("output gradient shape does not match the cached output");
  Eigen::VectorXd grads = Eigen::VectorXd::Zero(params_.size());
  Eigen::MatrixXd g = grad_out;
  for (int l = layer_count() - 1; l >= 0; --l) {
    const auto l_idx = static_cast<std::size_t>(l);
    const Eigen::MatrixXd& a_in = cache.activations[l_idx];
    Eigen::Map<Eigen::MatrixXd> dw(grads.data() + weight_offset(l), widths_[l_idx + 1], widths_[l_idx]);
    Eigen::Map<Eigen::VectorXd> db(grads.data() + bias_offset(l), widths_[l_idx + 1]);
    dw.noalias() = g * a_in.transpose();
    db = g.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weight(l).transpose() * g;
      // ReLU derivative taken at the stored post-activation value.
      g = (a_in.array() > 0.0).select(back, 0.0);
    }
  }
  return grads;
}

void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads, const std::string& block) {
  if (grads.size() != params.size())
    throw DimensionError(block + ": gradient has " + std::to_string(grads.size()) + " entries, parameters " +
                         std::to_string(params.size()));
  if (!grads.allFinite()) throw NumericError("non-finite gradient in " + block);
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
    state.step = 0;
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= state.learning_rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.epsilon);
}

void polyak_update(Mlp& target, const Mlp& source, double rate) {
  if (target.widths() != source.widths()) throw DimensionError("Polyak update between different architectures");
  target.params() = (1.0 - rate) * target.params() + rate * source.params();
}

void write_mlp(std::ostream& out, const Mlp& net) {
  out << "mlp " << net.widths().size();
  for (int w : net.widths()) out << ' ' << w;
  out << '\n';
  char buf[40];
  const auto& p = net.params();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", p(i));
    out << buf;
  }
}

Mlp read_mlp(std::istream& in) {
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "mlp" || n < 2 || n > 64) throw DataError("malformed MLP block");
  std::vector<int> widths(n);
  for (auto& w : widths)
    if (!(in >> w)) throw DataError("malformed MLP widths");
  Mlp net(widths);
  auto& p = net.params();
  std::string tok;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(in >> tok)) throw DataError("truncated MLP parameters");
    p(i) = std::strtod(tok.c_str(), nullptr);
  }
  return net;
}

}  // namespace sigctl
