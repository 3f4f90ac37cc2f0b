#include <random>

#include <benchmark/benchmark.h>

#include "sigctl/gp.hpp"
#include "sigctl/mh.hpp"
#include "sigctl/queuing.hpp"
#include "sigctl/sim.hpp"
#include "sigctl/sql.hpp"

namespace {

sigctl::IntersectionSpec one_lane() {
  sigctl::IntersectionSpec s;
  s.lane_count = 1;
  s.phase_count = 1;
  s.phase_order_count = 1;
  s.phase_matrix = {1};
  s.controlled = {1};
  return s;
}

// A 90 s lane-cycle sampled every 5 s from the model itself.
sigctl::LaneCycleObservation synthetic_cycle() {
  const sigctl::QueueParams theta{0.15, 0.5, 3.0};
  const auto timing = sigctl::SignalTiming::red_green(50.0, 40.0);
  const double flow = 0.15 * 90.0 + 1.0;
  const auto spec = one_lane();
  sigctl::LaneCycleObservation obs;
  obs.red = timing.red;
  obs.green = timing.green;
  obs.cycle_length = timing.cycle_length;
  obs.cycle_flow = flow;
  for (double t = 0.0; t < timing.cycle_length; t += 5.0) {
    obs.timestamps.push_back(t);
    obs.counts.push_back(sigctl::theoretical_count(theta, timing, flow, spec, t));
  }
  return obs;
}

void BM_TheoreticalCount(benchmark::State& state) {
  const sigctl::QueueCurve curve({0.15, 0.5, 3.0}, sigctl::SignalTiming::red_green(50.0, 40.0), 14.5, 20.0, 25.0);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(curve.count(t));
    t = t >= 90.0 ? 0.0 : t + 0.37;
  }
}
BENCHMARK(BM_TheoreticalCount);

void BM_GpLikelihood(benchmark::State& state) {
  const auto obs = synthetic_cycle();
  const sigctl::GpLikelihood ll(obs.timestamps, obs.counts, sigctl::GpHyper{});
  const sigctl::QueueCurve curve({0.14, 0.55, 2.0}, sigctl::SignalTiming::from(obs), obs.cycle_flow, 20.0, 25.0);
  for (auto _ : state) benchmark::DoNotOptimize(ll.evaluate(curve));
}
BENCHMARK(BM_GpLikelihood);

void BM_MhChain(benchmark::State& state) {
  const auto obs = synthetic_cycle();
  sigctl::MhConfig cfg;
  cfg.iterations = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sigctl::mh_infer(obs, one_lane(), sigctl::GpHyper{}, cfg));
}
BENCHMARK(BM_MhChain)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SimulatorStep(benchmark::State& state) {
  sigctl::IntersectionSpec spec = one_lane();
  spec.lane_count = 8;
  spec.phase_matrix.assign(8, 1);
  spec.controlled.assign(8, 1);
  sigctl::Simulator sim(spec, 0.5, true, 1);
  const std::vector<double> rates(8, 0.2);
  std::vector<bool> green(8, false);
  long t = 0;
  for (auto _ : state) {
    green.assign(8, (t++ % 90) >= 50);
    sim.step(rates, green);
  }
}
BENCHMARK(BM_SimulatorStep);

void BM_SqlTrainStep(benchmark::State& state) {
  const int state_dim = 13, phases = 4, batch = static_cast<int>(state.range(0));
  sigctl::SqlConfig cfg;
  cfg.hidden = 64;
  cfg.batch_size = batch;
  std::mt19937_64 rng(1);
  auto agent = sigctl::make_agent(state_dim, phases, 0.08, cfg, rng);
  std::normal_distribution<double> g;
  sigctl::Batch b;
  b.states = Eigen::MatrixXd::NullaryExpr(state_dim, batch, [&] { return g(rng); });
  b.next_states = Eigen::MatrixXd::NullaryExpr(state_dim, batch, [&] { return g(rng); });
  b.actions = Eigen::MatrixXd::Constant(phases + 1, batch, 0.3);
  b.rewards = Eigen::VectorXd::NullaryExpr(batch, [&] { return g(rng); });
  b.not_done = Eigen::VectorXd::Ones(batch);
  for (auto _ : state) benchmark::DoNotOptimize(sigctl::train_step(agent, b, cfg, rng));
}
BENCHMARK(BM_SqlTrainStep)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
