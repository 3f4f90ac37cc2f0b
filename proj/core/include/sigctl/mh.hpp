#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sigctl/config.hpp"
#include "sigctl/queuing.hpp"
#include "sigctl/types.hpp"

namespace sigctl {

struct MhTraceRow {
  int iteration = 0;
  QueueParams proposal;
  double log_likelihood = 0.0;
  bool accepted = false;
};

struct MhResult {
  QueueParams theta;
  QueueParams initial;
  int accepted = 0;
  int averaged = 0;  // samples entering the estimate
  // Set when no proposal was accepted; theta then equals the initial point.
  bool low_confidence = false;
};

// v_n = x_f / T_c, v_s = max(2 v_n, saturation_floor), xi_0 = first count
// clamped into [0, capacity].
QueueParams initial_params(const LaneCycleObservation& obs, const IntersectionSpec& spec, const MhConfig& cfg);

// Independence sampler with uniform proposals over
//   v_n in (0, arrival_max], v_s in (v_n, saturation_max], xi_0 in [0, capacity].
// A proposal is accepted iff log u < ll(proposal) - ll(current); infeasible
// proposals have ll = -inf and are never accepted. `obs.cycle_flow` is the
// decomposed flow of the cycle. Deterministic given cfg.seed.
MhResult mh_infer(const LaneCycleObservation& obs, const IntersectionSpec& spec, const GpHyper& hyper,
                  const MhConfig& cfg, std::vector<MhTraceRow>* trace = nullptr);

void write_trace(std::ostream& out, std::span<const MhTraceRow> trace);

// Seed of one chain, mixed from the global seed, lane and cycle index.
std::uint64_t chain_seed(std::uint64_t global_seed, int lane, std::int64_t cycle);

struct MhTask {
  const LaneCycleObservation* obs = nullptr;
  std::int64_t cycle_index = 0;
};

// Runs every task with its own chain seed on up to `jobs` threads. Results
// are positionally aligned with `tasks` and do not depend on `jobs`.
std::vector<MhResult> mh_infer_batch(std::span<const MhTask> tasks, const IntersectionSpec& spec,
                                     const GpHyper& hyper, const MhConfig& cfg, int jobs);

}  // namespace sigctl
