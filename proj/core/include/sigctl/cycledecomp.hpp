#pragma once

#include <span>
#include <vector>

#include "sigctl/types.hpp"

namespace sigctl {

// Count summary of one accounting window (a lane-cycle or an interval edge).
struct CycleWindow {
  double length = 0.0;  // s
  double start_count = 0.0;  // x^n at the window start
  double end_count = 0.0;  // x^n at the next window start
  double peak_count = 0.0;  // m_c, max of the samples inside the window
};

struct CycleDecomposition {
  double zeta = 0.0;  // veh/s per counted vehicle
  std::vector<double> arrival_rates;  // v_n^c = zeta m_c
  std::vector<double> flows;  // x^{f,c} after clamping
  std::vector<double> raw_flows;  // x^{f,c} before clamping
  double residual = 0.0;  // x^{n_r}
  double raw_residual = 0.0;  // x^{n_r} before clamping
  bool zeta_clamped = false;
  int clamped_flows = 0;
};

// Solves for zeta so that sum_c (start_c + zeta m_c T_c - end_c) + residual
// equals interval_flow, then derives every per-cycle quantity.
//
// Throws DataError when every m_c is zero but the flow balance is not, and
// std::invalid_argument for an empty window list. A negative zeta is clamped
// to 0 with a warning; negative flows are clamped to 0 and the deficit is
// taken proportionally from the positive flows.
CycleDecomposition decompose(double interval_flow, std::span<const CycleWindow> cycles, double residual);

// Windows for consecutive observed cycles: each start count is the first
// sample of its cycle, each end count the first sample of the next, and the
// last cycle closes on `closing_count`.
std::vector<CycleWindow> windows_from_cycles(std::span<const LaneCycleObservation> cycles, double closing_count);

CycleDecomposition decompose(double interval_flow, std::span<const LaneCycleObservation> cycles,
                             double closing_count, double residual);

// Interval-level variant: partial windows at the interval edges join the
// zeta balance, and their estimated discharge becomes the residual. The
// returned vectors cover the complete cycles only.
CycleDecomposition decompose_interval(double interval_flow, std::span<const CycleWindow> complete,
                                      std::span<const CycleWindow> edges);

// Count held from the most recent sample at or before `t`; before the first
// sample the first value is used. `times` must be sorted.
double count_at(std::span<const double> times, std::span<const double> counts, double t);

// Summarizes samples with begin <= time < end.
CycleWindow make_window(std::span<const double> times, std::span<const double> counts, double begin, double end);

}  // namespace sigctl
