#include "sigctl/mh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "sigctl/error.hpp"
#include "sigctl/gp.hpp"

namespace sigctl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void validate(const MhConfig& cfg) {
  if (cfg.iterations < 10) throw ConfigError("mh.iterations must be at least 10");
  if (!(cfg.burn_in_fraction > 0.0 && cfg.burn_in_fraction < 1.0))
    throw ConfigError("mh.burn_in_fraction must lie in (0, 1)");
  if (!(cfg.arrival_max > 0.0) || !(cfg.saturation_max > cfg.arrival_max))
    throw ConfigError("mh proposal box needs 0 < arrival_max < saturation_max");
}

// Uniform draw on the half-open interval (lo, hi].
double open_low(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return hi - (hi - lo) * u(rng);
}

}  // namespace

QueueParams initial_params(const LaneCycleObservation& obs, const IntersectionSpec& spec, const MhConfig& cfg) {
  QueueParams th;
  th.arrival_rate = obs.cycle_length > 0.0 ? obs.cycle_flow / obs.cycle_length : 0.0;
  th.saturation_rate = std::max(2.0 * th.arrival_rate, cfg.saturation_floor);
  th.initial_count = obs.counts.empty() ? 0.0 : std::clamp(obs.counts.front(), 0.0, spec.capacity());
  return th;
}

MhResult mh_infer(const LaneCycleObservation& obs, const IntersectionSpec& spec, const GpHyper& hyper,
                  const MhConfig& cfg, std::vector<MhTraceRow>* trace) {
  validate(cfg);
  const GpLikelihood lik(obs.timestamps, obs.counts, hyper);
  const SignalTiming timing = SignalTiming::from(obs);
  const double capacity = spec.capacity();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  auto score = [&](const QueueParams& th) {
    const auto curve = QueueCurve::make(th, timing, obs.cycle_flow, capacity, spec.traverse_time);
    return curve ? lik.evaluate(*curve) : kNegInf;
  };

  MhResult result;
  result.initial = initial_params(obs, spec, cfg);
  QueueParams current = result.initial;
  double current_ll = score(current);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<QueueParams> accepted;
  accepted.reserve(static_cast<std::size_t>(cfg.iterations));
  std::vector<QueueParams> chain;
  if (cfg.estimator == MhEstimator::kChainMean) chain.reserve(static_cast<std::size_t>(cfg.iterations));
  if (trace) trace->clear();

  for (int k = 1; k <= cfg.iterations; ++k) {
    QueueParams prop;
    prop.arrival_rate = open_low(rng, 0.0, cfg.arrival_max);
    prop.saturation_rate = open_low(rng, prop.arrival_rate, cfg.saturation_max);
    prop.initial_count = capacity * unit(rng);
    const double log_u = std::log(unit(rng));

    const double ll = score(prop);
    bool take = false;
    if (ll != kNegInf) take = current_ll == kNegInf || log_u < ll - current_ll;
    if (take) {
      current = prop;
      current_ll = ll;
      accepted.push_back(prop);
    }
    if (cfg.estimator == MhEstimator::kChainMean) chain.push_back(current);
    if (trace) trace->push_back({k, prop, ll, take});
  }

  result.accepted = static_cast<int>(accepted.size());
  const std::vector<QueueParams>& pool = cfg.estimator == MhEstimator::kChainMean ? chain : accepted;
  const auto skip = static_cast<std::size_t>(std::floor(cfg.burn_in_fraction * static_cast<double>(pool.size())));
  if (accepted.empty() || skip >= pool.size()) {
    result.theta = result.initial;
    result.low_confidence = true;
    return result;
  }
  QueueParams mean;
  for (std::size_t i = skip; i < pool.size(); ++i) {
    mean.arrival_rate += pool[i].arrival_rate;
    mean.saturation_rate += pool[i].saturation_rate;
    mean.initial_count += pool[i].initial_count;
  }
  const double n = static_cast<double>(pool.size() - skip);
  result.theta = {mean.arrival_rate / n, mean.saturation_rate / n, mean.initial_count / n};
  result.averaged = static_cast<int>(pool.size() - skip);
  return result;
}

void write_trace(std::ostream& out, std::span<const MhTraceRow> trace) {
  out << "iteration,v_n,v_s,xi_0,log_likelihood,accepted\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << r.proposal.arrival_rate << ',' << r.proposal.saturation_rate << ','
        << r.proposal.initial_count << ',' << r.log_likelihood << ',' << (r.accepted ? 1 : 0) << '\n';
  }
}

std::uint64_t chain_seed(std::uint64_t global_seed, int lane, std::int64_t cycle) {
  std::uint64_t h = splitmix64(global_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(lane)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(cycle));
  return h;
}

std::vector<MhResult> mh_infer_batch(std::span<const MhTask> tasks, const IntersectionSpec& spec,
                                     const GpHyper& hyper, const MhConfig& cfg, int jobs) {
  validate(cfg);
  validate_hyper(hyper);
  std::vector<MhResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        MhConfig local = cfg;
        local.seed = chain_seed(cfg.seed, tasks[i].obs->lane, tasks[i].cycle_index);
        results[i] = mh_infer(*tasks[i].obs, spec, hyper, local);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks.size());
      }
    }
  };

  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace sigctl
