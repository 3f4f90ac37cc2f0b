#pragma once

#include <span>

#include <Eigen/Dense>

#include "sigctl/types.hpp"

namespace sigctl {

Eigen::VectorXd one_hot(int index, int size);

// Active order index of a one-hot vector; throws DataError otherwise.
int active_order(std::span<const double> order_one_hot);

// out_p = sum_l flows_l Phi_M(k*, p, l) with k* the active order.
Eigen::VectorXd phase_pool(std::span<const double> flows, std::span<const double> order_one_hot,
                           const IntersectionSpec& spec);

// [flows (L), interval-mean counts (L), order one-hot (K), phase pool (P)],
// in raw units; normalization happens downstream.
Eigen::VectorXd raw_state(const IntervalObservation& obs, const IntersectionSpec& spec);

int state_dim(const IntersectionSpec& spec);

}  // namespace sigctl
