#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sigctl/config.hpp"
#include "sigctl/normalize.hpp"
#include "sigctl/policy.hpp"

namespace sigctl {

// Offline pipeline over one output directory:
//
//   simulate   obs/                      observation and truth files
//   decompose  cycles.csv                lane-cycles with decomposed flows
//   infer      cycles_theta.csv          plus inferred queue parameters
//   reward     rewards.csv, dataset.csv  interval rewards, normalized transitions
//   train      policy_<algo>.json, curve_<algo>.csv
//   evaluate   eval.csv, eval_curves.csv closed-loop ground-truth totals
//   report     report/*.csv              tables and plot series
//
// Every stage records its config hash, seed and files in manifest.json and
// refuses to read the output of a stage that ran under another config hash.
struct PipelineContext {
  Config cfg;
  std::string config_hash;
  std::string out_dir;
  std::uint64_t seed = 1;
  int jobs = 1;
};

PipelineContext make_context(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
                             int jobs);

struct SimulateArgs {
  int first_day = 0;
  int days = 7;
  std::string policy = "behavior";  // behavior | fixed
};

struct TrainArgs {
  std::string algo = "sql";  // sql | bc
  long steps = -1;  // -1 keeps sql.steps from the config
};

struct EvaluateArgs {
  int first_day = 1000;  // held out from any simulated training day
  int days = 7;
  int seeds = 3;
  // fixed, behavior, or a trained algorithm name whose checkpoint exists.
  std::vector<std::string> policies{"fixed", "behavior", "sql", "bc"};
};

void cmd_simulate(const PipelineContext& ctx, const SimulateArgs& args);
void cmd_decompose(const PipelineContext& ctx);
void cmd_infer(const PipelineContext& ctx);
void cmd_reward(const PipelineContext& ctx);
void cmd_train(const PipelineContext& ctx, const TrainArgs& args);
void cmd_evaluate(const PipelineContext& ctx, const EvaluateArgs& args);
void cmd_report(const PipelineContext& ctx);

// Trained policy plus everything needed to act with it.
struct PolicyCheckpoint {
  std::string algo;
  std::string config_hash;
  GaussianPolicy policy;
  NormStats norm;
};

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::string& path);
PolicyCheckpoint load_checkpoint(const std::string& path);

// {"error":"<kind>","message":"..."} plus expected/found for hash mismatches.
std::string error_json(const std::exception& e);
// Process exit code for an exception escaping a command.
int exit_code(const std::exception& e);

}  // namespace sigctl
