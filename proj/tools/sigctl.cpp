// Command-line front end of the offline signal-control pipeline.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sigctl/config.hpp"
#include "sigctl/error.hpp"
#include "sigctl/log.hpp"
#include "sigctl/pipeline.hpp"
#include "sigctl/queuing.hpp"

namespace {

struct Globals {
  std::string config;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int jobs = 1;
  bool verbose = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sigctl: offline traffic-signal control from coarse camera data"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Scenario INI file (see README, 'Config format')")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Global seed (integer); stage seeds are derived from it")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory holding every stage's files and manifest.json")
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for M-H inference (count, >= 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");

  sigctl::SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate days under a data-generating policy; writes obs/");
  sim->add_option("--first-day", sim_args.first_day, "First day index (days)")->capture_default_str();
  sim->add_option("--days", sim_args.days, "Number of days to simulate (days)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim->add_option("--policy", sim_args.policy, "Data-generating controller")
      ->check(CLI::IsMember({"behavior", "fixed"}))
      ->capture_default_str();

  auto* dec = app.add_subcommand("decompose", "Split 5-min flows over lane-cycles; writes cycles.csv");
  auto* inf = app.add_subcommand("infer", "M-H inference of queue parameters per lane-cycle; writes cycles_theta.csv");
  auto* rew = app.add_subcommand("reward", "Shockwave delay rewards and the transition dataset; writes dataset.csv");

  sigctl::TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a policy offline; writes policy_<algo>.json and curve_<algo>.csv");
  train->add_option("--algo", train_args.algo, "sql (offline RL) or bc (behavior cloning)")
      ->check(CLI::IsMember({"sql", "bc"}))
      ->capture_default_str();
  train->add_option("--steps", train_args.steps, "Gradient steps (count); -1 uses sql.steps from the config")
      ->capture_default_str();

  sigctl::EvaluateArgs eval_args;
  auto* eval = app.add_subcommand("evaluate", "Closed-loop ground-truth evaluation; writes eval.csv");
  eval->add_option("--first-day", eval_args.first_day, "First held-out day index (days)")->capture_default_str();
  eval->add_option("--days", eval_args.days, "Held-out days (days)")->check(CLI::PositiveNumber)->capture_default_str();
  eval->add_option("--seeds", eval_args.seeds, "Evaluation seeds per day (count)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval->add_option("--policies", eval_args.policies, "fixed, behavior and/or trained algorithms (names)")
      ->capture_default_str();

  auto* report = app.add_subcommand("report", "Delay/queue tables and plot series; writes report/*.csv");

  sigctl::SimulateArgs run_sim;
  sigctl::EvaluateArgs run_eval;
  long run_steps = -1;
  auto* run = app.add_subcommand("run", "Every stage in order: simulate to report, training both sql and bc");
  run->add_option("--days", run_sim.days, "Training days to simulate (days)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--eval-days", run_eval.days, "Held-out evaluation days (days)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--eval-seeds", run_eval.seeds, "Evaluation seeds per day (count)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--steps", run_steps, "Gradient steps per algorithm (count); -1 uses the config")
      ->capture_default_str();

  sigctl::QueueParams theta{0.1, 0.5, 0.0};
  double red = 40.0, green = 30.0, flow = 6.0;
  auto* curve = app.add_subcommand("curve", "Debug: print the theoretical count curve of one lane-cycle");
  curve->add_option("--vn", theta.arrival_rate, "Arrival rate v_n (veh/s)")->capture_default_str();
  curve->add_option("--vs", theta.saturation_rate, "Saturation rate v_s (veh/s)")->capture_default_str();
  curve->add_option("--xi0", theta.initial_count, "Initial spatial count xi_0 (veh)")->capture_default_str();
  curve->add_option("--red", red, "Red time T_r (s)")->capture_default_str();
  curve->add_option("--green", green, "Green time T_g (s)")->capture_default_str();
  curve->add_option("--flow", flow, "Cycle flow x_f (veh)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  sigctl::set_log_level(g.verbose ? sigctl::LogLevel::kInfo : sigctl::LogLevel::kWarning);

  try {
    if (curve->parsed()) {
      sigctl::IntersectionSpec spec;
      if (!g.config.empty()) spec = sigctl::load_config(g.config).spec;
      const sigctl::QueueCurve c(theta, sigctl::SignalTiming::red_green(red, green), flow, spec.capacity(),
                                 spec.traverse_time);
      std::cout << sigctl::dump_curve(c);
      return 0;
    }
    if (g.config.empty()) throw sigctl::ConfigError("--config is required");
    const auto ctx = sigctl::make_context(g.config, g.out_dir, g.seed, g.jobs);
    if (sim->parsed()) sigctl::cmd_simulate(ctx, sim_args);
    if (dec->parsed()) sigctl::cmd_decompose(ctx);
    if (inf->parsed()) sigctl::cmd_infer(ctx);
    if (rew->parsed()) sigctl::cmd_reward(ctx);
    if (train->parsed()) sigctl::cmd_train(ctx, train_args);
    if (eval->parsed()) sigctl::cmd_evaluate(ctx, eval_args);
    if (report->parsed()) sigctl::cmd_report(ctx);
    if (run->parsed()) {
      sigctl::cmd_simulate(ctx, run_sim);
      sigctl::cmd_decompose(ctx);
      sigctl::cmd_infer(ctx);
      sigctl::cmd_reward(ctx);
      for (const char* algo : {"sql", "bc"}) sigctl::cmd_train(ctx, {algo, run_steps});
      sigctl::cmd_evaluate(ctx, run_eval);
      sigctl::cmd_report(ctx);
    }
  } catch (const std::exception& e) {
    std::cerr << sigctl::error_json(e) << '\n';
    return sigctl::exit_code(e);
  }
  return 0;
}
