// Command-line front end: train, eval, and sweep subcommands.

#include <CLI11.hpp>
#include <string>
#include <vector>

#include "flexedge/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"flexedge: energy-aware offloading and trajectory control "
               "for an aerial vehicular edge server"};
  app.require_subcommand(1);

  flexedge::runner::TrainOptions train_opts;
  long train_episodes = -1;
  auto* train = app.add_subcommand("train", "train a policy");
  train->add_option("--config", train_opts.config_path, "config file")
      ->required();
  train->add_option("--seed", train_opts.seed, "master seed")->required();
  train->add_option("--algo", train_opts.algo, "ppo or a2c")
      ->check(CLI::IsMember({"ppo", "a2c"}));
  train->add_option("--out", train_opts.out_dir, "output directory")
      ->required();
  train->add_option("--episodes", train_episodes,
                    "override total_episodes from the config");

  flexedge::runner::EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or baseline");
  eval->add_option("--checkpoint", eval_opts.checkpoint_path,
                   "checkpoint file");
  eval->add_option("--config", eval_opts.config_path,
                   "config file (defaults to config.resolved next to the "
                   "checkpoint)");
  eval->add_option("--episodes", eval_opts.episodes, "episodes to evaluate")
      ->required();
  eval->add_option("--seed", eval_opts.seed, "evaluation seed")->required();
  eval->add_option("--out", eval_opts.out_dir, "output directory")->required();
  eval->add_option("--baseline", eval_opts.baseline,
                   "evaluate a baseline instead (random)");

  flexedge::runner::SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "parameter sweep");
  sweep->add_option("--config", sweep_opts.config_path, "config file")
      ->required();
  sweep->add_option("--axis", sweep_opts.axis,
                    "vehicles, bandwidth, or task_size")
      ->required();
  sweep->add_option("--values", sweep_opts.values, "axis values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_opts.seeds, "seeds")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", sweep_opts.out_dir, "output directory")
      ->required();
  sweep->add_option("--episodes", sweep_opts.episodes,
                    "training episodes per leg");
  sweep->add_option("--eval-episodes", sweep_opts.eval_episodes,
                    "evaluation episodes per leg");
  sweep->add_option("--jobs", sweep_opts.jobs, "parallel legs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (train->parsed()) {
    if (train_episodes >= 0) {
      train_opts.total_episodes = train_episodes;
    }
    return flexedge::runner::cmd_train(train_opts);
  }
  if (eval->parsed()) {
    return flexedge::runner::cmd_eval(eval_opts);
  }
  return flexedge::runner::cmd_sweep(sweep_opts);
}
