#include "sigctl/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "sigctl/dataset.hpp"
#include "sigctl/error.hpp"
#include "sigctl/log.hpp"
#include "sigctl/observation_io.hpp"
#include "sigctl/reward_pipeline.hpp"
#include "sigctl/sim.hpp"
#include "sigctl/sql.hpp"

namespace sigctl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kManifest = "manifest.json";
constexpr const char* kObsDir = "obs";
constexpr const char* kCycles = "cycles.csv";
constexpr const char* kCyclesTheta = "cycles_theta.csv";
constexpr const char* kRewards = "rewards.csv";
constexpr const char* kDataset = "dataset.csv";
constexpr const char* kEval = "eval.csv";
constexpr const char* kEvalCurves = "eval_curves.csv";
constexpr const char* kReportDir = "report";

// Stage tags keep per-stage seeds apart when derived from one global seed.
constexpr std::uint64_t kInferTag = 0x1f3e7a11ULL;
constexpr std::uint64_t kTrainTag = 0x7a1b0c5dULL;
constexpr std::uint64_t kEvalTag = 0xe7a10000ULL;

std::string at(const PipelineContext& ctx, const std::string& rel) { return (fs::path(ctx.out_dir) / rel).string(); }

std::string checkpoint_name(const std::string& algo) { return "policy_" + algo + ".json"; }
std::string curve_name(const std::string& algo) { return "curve_" + algo + ".csv"; }

std::vector<std::string> observation_files() {
  const auto p = ObservationPaths::in(kObsDir);
  return {p.flows, p.counts, p.timing, p.truth_cycles, p.truth_intervals, p.truth_days};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing input file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path);
}

json load_manifest(const PipelineContext& ctx) {
  const std::string path = at(ctx, kManifest);
  if (!fs::exists(path)) return json{{"stages", json::object()}};
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void record_stage(const PipelineContext& ctx, const std::string& name, std::uint64_t seed,
                  const std::vector<std::string>& inputs, const std::vector<std::string>& outputs, json params) {
  json m = load_manifest(ctx);
  m["stages"][name] = {{"config_hash", ctx.config_hash}, {"seed", seed},          {"inputs", inputs},
                       {"outputs", outputs},             {"params", std::move(params)}};
  write_text(at(ctx, kManifest), m.dump(2) + "\n");
}

// Upstream stage entry after checking its hash and that its files exist.
json require_stage(const PipelineContext& ctx, const std::string& name) {
  const json m = load_manifest(ctx);
  if (!m.contains("stages") || !m["stages"].contains(name))
    throw DataError("missing input: stage '" + name + "' has not run in " + ctx.out_dir);
  const json& st = m["stages"][name];
  const auto outputs = st.value("outputs", std::vector<std::string>{});
  const std::string found = st.value("config_hash", std::string("-"));
  if (found != ctx.config_hash)
    throw HashMismatchError(outputs.empty() ? name : at(ctx, outputs.front()), ctx.config_hash, found);
  for (const auto& f : outputs)
    if (!fs::exists(at(ctx, f))) throw DataError("missing input file " + at(ctx, f));
  return st;
}

std::unique_ptr<Controller> baseline_controller(const std::string& name, const Config& cfg) {
  if (name == "fixed") return std::make_unique<FixedController>(cfg.fixed_plan);
  if (name == "behavior") return std::make_unique<BehaviorController>(cfg);
  return nullptr;
}

std::vector<LaneCycleEstimate> load_cycles(const PipelineContext& ctx, const char* file,
                                           const std::vector<DayRecord>& days) {
  std::ifstream in(at(ctx, file), std::ios::binary);
  if (!in) throw DataError("missing input file " + at(ctx, file));
  return read_cycles(in, days, ctx.cfg);
}

template <class F>
void write_stream(const std::string& path, F&& body) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  body(out);
  if (!out) throw DataError("write failed for " + path);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }
Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

PipelineContext make_context(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
                             int jobs) {
  PipelineContext ctx;
  ctx.cfg = load_config(config_path);
  ctx.config_hash = ctx.cfg.hash();
  ctx.out_dir = out_dir;
  ctx.seed = seed;
  ctx.jobs = std::max(1, jobs);
  return ctx;
}

void cmd_simulate(const PipelineContext& ctx, const SimulateArgs& args) {
  if (args.days <= 0) throw DataError("simulate needs at least one day");
  auto controller = baseline_controller(args.policy, ctx.cfg);
  if (!controller) throw DataError("unknown data-generating policy '" + args.policy + "'");
  std::vector<DayRecord> days;
  for (int d = args.first_day; d < args.first_day + args.days; ++d) {
    days.push_back(simulate_day(ctx.cfg, *controller, d, ctx.seed));
    log_info("simulated day " + std::to_string(d));
  }
  write_observations(at(ctx, kObsDir), days, ctx.cfg.sim);
  record_stage(ctx, "simulate", ctx.seed, {}, observation_files(),
               {{"first_day", args.first_day}, {"days", args.days}, {"policy", args.policy}});
}

void cmd_decompose(const PipelineContext& ctx) {
  require_stage(ctx, "simulate");
  const auto days = read_observations(at(ctx, kObsDir), ctx.cfg, false);
  DecomposeStats stats;
  const auto cycles = decompose_days(days, ctx.cfg, &stats);
  write_stream(at(ctx, kCycles), [&](std::ostream& out) { write_cycles(out, cycles, false); });
  record_stage(ctx, "decompose", 0, observation_files(), {kCycles},
               {{"intervals", stats.intervals},
                {"cycles", stats.cycles},
                {"fallbacks", stats.fallbacks},
                {"clamped", stats.clamped}});
}

void cmd_infer(const PipelineContext& ctx) {
  require_stage(ctx, "decompose");
  const auto days = read_observations(at(ctx, kObsDir), ctx.cfg, false);
  auto cycles = load_cycles(ctx, kCycles, days);
  Config cfg = ctx.cfg;
  cfg.mh.seed = mix_seed(ctx.cfg.mh.seed, mix_seed(ctx.seed, kInferTag));
  infer_cycles(cycles, cfg, ctx.jobs);
  long low = 0;
  for (const auto& c : cycles) low += c.low_confidence ? 1 : 0;
  write_stream(at(ctx, kCyclesTheta), [&](std::ostream& out) { write_cycles(out, cycles, true); });
  record_stage(ctx, "infer", cfg.mh.seed, {kCycles}, {kCyclesTheta},
               {{"cycles", cycles.size()}, {"low_confidence", low}});
}

void cmd_reward(const PipelineContext& ctx) {
  require_stage(ctx, "infer");
  const auto days = read_observations(at(ctx, kObsDir), ctx.cfg, false);
  auto cycles = load_cycles(ctx, kCyclesTheta, days);
  estimate_performance(cycles, ctx.cfg);
  const auto rewards = interval_rewards(cycles, days, ctx.cfg);
  TransitionDataset data = build_dataset(days, rewards, ctx.cfg);
  data.config_hash = ctx.config_hash;
  const NormStats stats = normalize_dataset(data, ctx.cfg.spec);
  save_dataset(data, at(ctx, kDataset));
  write_stream(at(ctx, kRewards), [&](std::ostream& out) { write_rewards(out, rewards, &stats); });
  record_stage(ctx, "reward", 0, {kCyclesTheta}, {kDataset, kRewards}, {{"transitions", data.size()}});
}

void cmd_train(const PipelineContext& ctx, const TrainArgs& args) {
  if (args.algo != "sql" && args.algo != "bc") throw DataError("unknown training algorithm '" + args.algo + "'");
  require_stage(ctx, "reward");
  const std::string dataset_path = at(ctx, kDataset);
  const TransitionDataset data = load_dataset(dataset_path);
  if (data.config_hash != ctx.config_hash) throw HashMismatchError(dataset_path, ctx.config_hash, data.config_hash);
  if (!data.normalized()) throw DataError(dataset_path + " is not normalized");

  SqlConfig sc = ctx.cfg.sql;
  sc.seed = mix_seed(ctx.cfg.sql.seed, mix_seed(ctx.seed, kTrainTag));
  if (args.steps >= 0) sc.steps = args.steps;
  const double floor = ctx.cfg.spec.min_green_ratio;
  const TrainResult result = args.algo == "sql" ? sql_train(data, floor, sc) : bc_train(data, floor, sc);

  save_checkpoint({args.algo, ctx.config_hash, result.agent.policy, *data.norm}, at(ctx, checkpoint_name(args.algo)));
  write_stream(at(ctx, curve_name(args.algo)), [&](std::ostream& out) { write_curve(out, result.curve); });
  record_stage(ctx, "train_" + args.algo, sc.seed, {kDataset}, {checkpoint_name(args.algo), curve_name(args.algo)},
               {{"steps", sc.steps}});
}

void cmd_evaluate(const PipelineContext& ctx, const EvaluateArgs& args) {
  if (args.days <= 0 || args.seeds <= 0) throw DataError("evaluate needs at least one day and one seed");
  if (args.policies.empty()) throw DataError("evaluate needs at least one policy");
  std::vector<int> days;
  for (int d = args.first_day; d < args.first_day + args.days; ++d) days.push_back(d);
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < args.seeds; ++k) seeds.push_back(mix_seed(ctx.seed, kEvalTag + static_cast<std::uint64_t>(k)));

  std::vector<EvalReport> reports;
  std::vector<std::string> inputs;
  for (const auto& name : args.policies) {
    if (auto controller = baseline_controller(name, ctx.cfg)) {
      reports.push_back(evaluate(ctx.cfg, *controller, name, days, seeds));
    } else {
      require_stage(ctx, "train_" + name);
      const std::string path = at(ctx, checkpoint_name(name));
      const PolicyCheckpoint ckpt = load_checkpoint(path);
      if (ckpt.config_hash != ctx.config_hash) throw HashMismatchError(path, ctx.config_hash, ckpt.config_hash);
      PolicyController learned(ckpt.policy, ckpt.norm, ctx.cfg.spec);
      reports.push_back(evaluate(ctx.cfg, learned, name, days, seeds));
      inputs.push_back(checkpoint_name(name));
    }
    log_info("evaluated " + name + ": mean delay " + num(reports.back().mean_delay()));
  }

  write_stream(at(ctx, kEval), [&](std::ostream& out) { write_eval(out, reports); });
  write_stream(at(ctx, kEvalCurves), [&](std::ostream& out) {
    out << "interval,hour";
    for (const auto& r : reports) out << ',' << r.policy;
    out << '\n';
    const std::size_t n = reports.front().interval_delay.size();
    for (std::size_t t = 0; t < n; ++t) {
      out << t << ',' << num(static_cast<double>(t) * ctx.cfg.sim.interval_length / 3600.0);
      for (const auto& r : reports) out << ',' << num(r.interval_delay[t]);
      out << '\n';
    }
  });
  json seed_list = json::array();
  for (auto s : seeds) seed_list.push_back(s);
  record_stage(ctx, "evaluate", ctx.seed, inputs, {kEval, kEvalCurves},
               {{"first_day", args.first_day}, {"days", args.days}, {"seeds", seed_list},
                {"policies", args.policies}});
}

void cmd_report(const PipelineContext& ctx) {
  require_stage(ctx, "evaluate");
  const std::string dir = at(ctx, kReportDir);
  std::vector<EvalReport> reports;
  {
    std::ifstream in(at(ctx, kEval), std::ios::binary);
    reports = read_eval(in);
  }
  if (reports.empty()) throw DataError(at(ctx, kEval) + " has no rows");

  // Per-day rows average over seeds; the mean row averages the day rows.
  struct Summary {
    std::string policy;
    double mean_delay = 0.0;
    double std_delay = 0.0;
    double mean_queue = 0.0;
    double std_queue = 0.0;
  };
  std::vector<Summary> summaries;
  write_stream((fs::path(dir) / "table.csv").string(), [&](std::ostream& out) {
    out << "policy,day,total_delay,total_queue\n";
    for (const auto& r : reports) {
      std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_day;
      std::map<std::uint64_t, std::pair<std::vector<double>, std::vector<double>>> by_seed;
      for (const auto& row : r.rows) {
        by_day[row.day].first.push_back(row.total_delay);
        by_day[row.day].second.push_back(row.total_queue);
        by_seed[row.seed].first.push_back(row.total_delay);
        by_seed[row.seed].second.push_back(row.total_queue);
      }
      std::vector<double> day_delay, day_queue;
      for (const auto& [day, v] : by_day) {
        day_delay.push_back(mean_of(v.first));
        day_queue.push_back(mean_of(v.second));
        out << r.policy << ',' << day << ',' << num(day_delay.back()) << ',' << num(day_queue.back()) << '\n';
      }
      out << r.policy << ",mean," << num(mean_of(day_delay)) << ',' << num(mean_of(day_queue)) << '\n';
      // Spread across evaluation seeds of the per-seed mean over days.
      std::vector<double> seed_delay, seed_queue;
      for (const auto& [seed, v] : by_seed) {
        seed_delay.push_back(mean_of(v.first));
        seed_queue.push_back(mean_of(v.second));
      }
      summaries.push_back(
          {r.policy, mean_of(day_delay), sample_std(seed_delay), mean_of(day_queue), sample_std(seed_queue)});
    }
  });

  const Summary* fixed = nullptr;
  for (const auto& s : summaries)
    if (s.policy == "fixed") fixed = &s;
  write_stream((fs::path(dir) / "summary.csv").string(), [&](std::ostream& out) {
    out << "policy,mean_delay,std_delay,mean_queue,std_queue,delay_change_vs_fixed\n";
    for (const auto& s : summaries) {
      out << s.policy << ',' << num(s.mean_delay) << ',' << num(s.std_delay) << ',' << num(s.mean_queue) << ','
          << num(s.std_queue) << ',';
      if (fixed && fixed->mean_delay > 0.0) out << num(s.mean_delay / fixed->mean_delay - 1.0);
      out << '\n';
    }
  });

  write_text((fs::path(dir) / "daily_delay.csv").string(), read_text(at(ctx, kEvalCurves)));

  // Estimated vs true series exist once inference has run on simulated data.
  const json m = load_manifest(ctx);
  if (m["stages"].contains("infer")) {
    require_stage(ctx, "infer");
    const auto days = read_observations(at(ctx, kObsDir), ctx.cfg, true);
    auto cycles = load_cycles(ctx, kCyclesTheta, days);
    estimate_performance(cycles, ctx.cfg);
    const Fidelity fid = compare_with_truth(cycles, days, ctx.cfg);
    write_stream((fs::path(dir) / "delay_scatter.csv").string(), [&](std::ostream& out) {
      out << "day,interval,estimated_delay,true_delay\n";
      for (const auto& p : fid.intervals)
        out << p.day << ',' << p.interval << ',' << num(p.estimated) << ',' << num(p.truth) << '\n';
    });
    write_stream((fs::path(dir) / "qmax_scatter.csv").string(), [&](std::ostream& out) {
      out << "day,lane,start,estimated_qmax,true_qmax,peak\n";
      for (const auto& p : fid.cycles)
        out << p.day << ',' << p.lane << ',' << num(p.start) << ',' << num(p.estimated) << ',' << num(p.truth) << ','
            << (p.peak ? 1 : 0) << '\n';
    });
  }
}

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::string& path) {
  std::ostringstream policy_text;
  write_policy(policy_text, ckpt.policy);
  const json j = {{"format", "sigctl-policy v1"},
                  {"algo", ckpt.algo},
                  {"config_hash", ckpt.config_hash},
                  {"state_dim", ckpt.policy.state_dim()},
                  {"phase_count", ckpt.policy.phase_count()},
                  {"norm",
                   {{"state_mean", to_vec(ckpt.norm.state_mean)},
                    {"state_std", to_vec(ckpt.norm.state_std)},
                    {"reward_mean", ckpt.norm.reward_mean},
                    {"reward_std", ckpt.norm.reward_std},
                    {"action_low", to_vec(ckpt.norm.action_low)},
                    {"action_high", to_vec(ckpt.norm.action_high)}}},
                  {"policy", policy_text.str()}};
  write_text(path, j.dump(1) + "\n");
}

PolicyCheckpoint load_checkpoint(const std::string& path) {
  PolicyCheckpoint ckpt;
  try {
    const json j = json::parse(read_text(path));
    if (j.at("format") != "sigctl-policy v1") throw DataError(path + ": not a sigctl policy checkpoint");
    ckpt.algo = j.at("algo").get<std::string>();
    ckpt.config_hash = j.at("config_hash").get<std::string>();
    const json& n = j.at("norm");
    ckpt.norm.state_mean = from_vec(n.at("state_mean").get<std::vector<double>>());
    ckpt.norm.state_std = from_vec(n.at("state_std").get<std::vector<double>>());
    ckpt.norm.reward_mean = n.at("reward_mean").get<double>();
    ckpt.norm.reward_std = n.at("reward_std").get<double>();
    ckpt.norm.action_low = from_vec(n.at("action_low").get<std::vector<double>>());
    ckpt.norm.action_high = from_vec(n.at("action_high").get<std::vector<double>>());
    std::istringstream policy_text(j.at("policy").get<std::string>());
    ckpt.policy = read_policy(policy_text);
    if (ckpt.policy.state_dim() != j.at("state_dim").get<int>() ||
        ckpt.policy.phase_count() != j.at("phase_count").get<int>() ||
        ckpt.norm.state_mean.size() != ckpt.policy.state_dim() ||
        ckpt.norm.action_low.size() != ckpt.policy.action_dim())
      throw DimensionError(path + ": checkpoint dimensions disagree");
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return ckpt;
}

std::string error_json(const std::exception& e) {
  json j;
  if (const auto* h = dynamic_cast<const HashMismatchError*>(&e)) {
    j = {{"error", "hash_mismatch"}, {"file", h->file()}, {"expected", h->expected()}, {"found", h->found()}};
  } else if (dynamic_cast<const ConfigError*>(&e)) {
    j = {{"error", "config"}};
  } else if (dynamic_cast<const DataError*>(&e)) {
    j = {{"error", "data"}};
  } else if (dynamic_cast<const NumericError*>(&e)) {
    j = {{"error", "numeric"}};
  } else if (dynamic_cast<const DimensionError*>(&e)) {
    j = {{"error", "dimension"}};
  } else if (dynamic_cast<const InfeasibleError*>(&e)) {
    j = {{"error", "infeasible"}};
  } else {
    j = {{"error", "internal"}};
  }
  j["message"] = e.what();
  return j.dump();
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const HashMismatchError*>(&e)) return 4;
  if (dynamic_cast<const NumericError*>(&e)) return 5;
  if (dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const InfeasibleError*>(&e)) return 6;
  return 1;
}

}  // namespace sigctl
