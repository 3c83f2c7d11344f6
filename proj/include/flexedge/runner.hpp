#pragma once

// Experiment orchestration: the train/eval/sweep commands behind the CLI,
// with all outputs reproducible byte-for-byte from (config, seed).
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error,
// 3 corrupt or mismatched checkpoint.

#include <optional>
#include <string>
#include <vector>

#include "flexedge/config_io.hpp"
#include "flexedge/rl.hpp"

namespace flexedge::runner {

// Verbosity from the FLEXEDGE_LOG environment variable:
// unset/"warn" = 1, "quiet" = 0, "info" = 2, "debug" = 3.
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

struct TrainOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string algo = "ppo";  // "ppo" or "a2c"
  std::optional<long> total_episodes;  // overrides the config when set
};

// Trains and writes metrics.csv, checkpoint.final, config.resolved, and
// periodic checkpoint_ep<N> files into the output directory.
int cmd_train(const TrainOptions& opts);

struct EvalOptions {
  std::string checkpoint_path;  // may be empty when baseline is set
  std::string config_path;      // defaults to config.resolved next to the checkpoint
  std::string out_dir;
  long episodes = 10;
  std::uint64_t seed = 0;
  std::string baseline;  // "random" selects the non-learning baseline
};

// Evaluates a checkpoint (deterministic actions) or the named baseline and
// writes aggregate.csv plus trajectory.csv for the last episode.
int cmd_eval(const EvalOptions& opts);

struct SweepOptions {
  std::string config_path;
  std::string axis;  // "vehicles", "bandwidth", or "task_size"
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  long episodes = 150;       // training episodes per leg
  long eval_episodes = 20;
  int jobs = 1;
};

// Trains/evaluates every (value, seed) leg and writes sweep.csv. The
// vehicles axis retrains per value (the decision dimensions change with the
// fleet size); the other axes train once per seed at the base config and
// re-evaluate that policy per value. Failed legs are recorded and the sweep
// continues.
int cmd_sweep(const SweepOptions& opts);

// metrics.csv rows for a training history (episode-level).
std::string metrics_csv(const std::vector<rl::EpisodeMetrics>& history);

std::string aggregate_csv(const rl::EvalResult& result);

std::string trajectory_csv(const rl::EvalResult& result, int num_vehicles);

}  // namespace flexedge::runner
