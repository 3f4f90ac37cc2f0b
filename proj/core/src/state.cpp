#include "sigctl/state.hpp"

#include "sigctl/error.hpp"

namespace sigctl {

Eigen::VectorXd one_hot(int index, int size) {
  if (index < 0 || index >= size)
    throw DimensionError("one-hot index " + std::to_string(index) + " outside [0, " + std::to_string(size) + ")");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  v(index) = 1.0;
  return v;
}

int active_order(std::span<const double> order_one_hot) {
  int active = -1;
  for (std::size_t k = 0; k < order_one_hot.size(); ++k) {
    const double v = order_one_hot[k];
    if (v == 1.0) {
      if (active >= 0) throw DataError("phase order vector has more than one active entry");
      active = static_cast<int>(k);
    } else if (v != 0.0) {
      throw DataError("phase order vector is not one-hot");
    }
  }
  if (active < 0) throw DataError("phase order vector has no active entry");
  return active;
}

Eigen::VectorXd phase_pool(std::span<const double> flows, std::span<const double> order_one_hot,
                           const IntersectionSpec& spec) {
  if (static_cast<int>(flows.size()) != spec.lane_count) throw DimensionError("flow vector length differs from L");
  if (static_cast<int>(order_one_hot.size()) != spec.phase_order_count)
    throw DimensionError("phase order vector length differs from K");
  const int k = active_order(order_one_hot);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(spec.phase_count);
  for (int p = 0; p < spec.phase_count; ++p)
    for (int l = 0; l < spec.lane_count; ++l)
      if (spec.green(k, p, l)) out(p) += flows[static_cast<std::size_t>(l)];
  return out;
}

int state_dim(const IntersectionSpec& spec) { return 2 * spec.lane_count + spec.phase_order_count + spec.phase_count; }

Eigen::VectorXd raw_state(const IntervalObservation& obs, const IntersectionSpec& spec) {
  const int l = spec.lane_count;
  if (static_cast<int>(obs.flows.size()) != l) throw DimensionError("observation has the wrong number of lanes");
  const auto counts = obs.mean_counts();
  const Eigen::VectorXd order = one_hot(obs.phase_order, spec.phase_order_count);
  Eigen::VectorXd s(state_dim(spec));
  for (int i = 0; i < l; ++i) {
    s(i) = obs.flows[static_cast<std::size_t>(i)];
    s(l + i) = counts[static_cast<std::size_t>(i)];
  }
  s.segment(2 * l, spec.phase_order_count) = order;
  s.tail(spec.phase_count) =
      phase_pool(obs.flows, std::span<const double>(order.data(), static_cast<std::size_t>(order.size())), spec);
  return s;
}

}  // namespace sigctl
