#include "flexedge/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "flexedge/baselines.hpp"
#include "flexedge/nn.hpp"

namespace flexedge::runner {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot write " + path.string());
  }
  os << content;
  if (!os) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

int detect_log_level() {
  const char* env = std::getenv("FLEXEDGE_LOG");
  if (!env) return 1;
  const std::string v(env);
  if (v == "quiet" || v == "0") return 0;
  if (v == "warn" || v == "1") return 1;
  if (v == "info" || v == "2") return 2;
  if (v == "debug" || v == "3") return 3;
  return 1;
}

std::mutex log_mutex;

}  // namespace

int log_level() {
  static const int level = detect_log_level();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 2) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "[flexedge] " << msg << '\n';
  }
}

void log_debug(const std::string& msg) {
  if (log_level() >= 3) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "[flexedge] " << msg << '\n';
  }
}

std::string metrics_csv(const std::vector<rl::EpisodeMetrics>& history) {
  std::ostringstream os;
  os << "episode,reward,cost,energy_uav_compute,energy_rsu,energy_fly,"
        "penalty,violation_count\n";
  for (const auto& m : history) {
    os << m.episode << ',' << fmt(m.reward) << ',' << fmt(m.cost) << ','
       << fmt(m.energy_uav) << ',' << fmt(m.energy_rsu) << ','
       << fmt(m.energy_fly) << ',' << fmt(m.penalty) << ','
       << m.violation_count << '\n';
  }
  return os.str();
}

std::string aggregate_csv(const rl::EvalResult& r) {
  std::ostringstream os;
  os << "episodes,mean_cost,std_cost,mean_reward,mean_energy_uav_compute,"
        "mean_energy_rsu,mean_energy_fly,mean_penalty,violation_rate\n";
  os << r.episodes << ',' << fmt(r.mean_cost) << ',' << fmt(r.std_cost) << ','
     << fmt(r.mean_reward) << ',' << fmt(r.mean_energy_uav) << ','
     << fmt(r.mean_energy_rsu) << ',' << fmt(r.mean_energy_fly) << ','
     << fmt(r.mean_penalty) << ',' << fmt(r.violation_rate) << '\n';
  return os.str();
}

std::string trajectory_csv(const rl::EvalResult& r, int num_vehicles) {
  std::ostringstream os;
  os << "slot,uav_x,uav_y";
  for (int i = 0; i < num_vehicles; ++i) {
    os << ",veh" << i << "_x,veh" << i << "_y";
  }
  os << '\n';
  for (const auto& row : r.trajectory) {
    os << row.slot << ',' << fmt(row.uav_x) << ',' << fmt(row.uav_y);
    for (double v : row.vehicle_xy) {
      os << ',' << fmt(v);
    }
    os << '\n';
  }
  return os.str();
}

int cmd_train(const TrainOptions& opts) {
  RunConfig rc;
  try {
    rc = load_run_config(opts.config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  rc.train.seed = opts.seed;
  if (opts.total_episodes) {
    rc.train.total_episodes = *opts.total_episodes;
  }
  const rl::Algo algo = opts.algo == "a2c" ? rl::Algo::a2c : rl::Algo::ppo;
  if (opts.algo != "ppo" && opts.algo != "a2c") {
    std::cerr << "error: unknown algorithm '" << opts.algo << "'\n";
    return 2;
  }

  try {
    fs::create_directories(opts.out_dir);
    const std::uint64_t digest = scenario_digest(rc.scenario);
    write_file(fs::path(opts.out_dir) / "config.resolved", serialize(rc));

    const auto hook = [&](long episode, const nn::PolicyParams& params) {
      nn::save_checkpoint(
          (fs::path(opts.out_dir) / ("checkpoint_ep" + std::to_string(episode)))
              .string(),
          params, digest);
      log_info("checkpoint at episode " + std::to_string(episode));
    };

    const auto result = rl::train(rc.scenario, rc.train, algo, hook);
    write_file(fs::path(opts.out_dir) / "metrics.csv",
               metrics_csv(result.history));
    nn::save_checkpoint((fs::path(opts.out_dir) / "checkpoint.final").string(),
                        result.params, digest);
    if (result.diverged) {
      std::cerr << "error: training diverged after "
                << result.episodes_completed
                << " episodes; last good checkpoint saved\n";
      return 1;
    }
    std::string took;
    if (!result.history.empty()) {
      took = " in " + fmt(result.history.back().wall_time) + " s";
    }
    log_info("trained " + std::to_string(result.episodes_completed) +
             " episodes (" + opts.algo + ", seed " +
             std::to_string(opts.seed) + ")" + took);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_eval(const EvalOptions& opts) {
  if (opts.baseline.empty() && opts.checkpoint_path.empty()) {
    std::cerr << "error: eval needs a checkpoint or a baseline\n";
    return 2;
  }
  if (!opts.baseline.empty() && opts.baseline != "random") {
    std::cerr << "error: unknown baseline '" << opts.baseline << "'\n";
    return 2;
  }
  if (opts.episodes <= 0) {
    std::cerr << "error: episodes must be positive\n";
    return 2;
  }

  std::string config_path = opts.config_path;
  if (config_path.empty()) {
    if (opts.checkpoint_path.empty()) {
      std::cerr << "error: baseline eval needs --config\n";
      return 2;
    }
    config_path =
        (fs::path(opts.checkpoint_path).parent_path() / "config.resolved")
            .string();
  }

  RunConfig rc;
  try {
    rc = load_run_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  std::unique_ptr<Policy> policy;
  bool deterministic = true;
  if (!opts.baseline.empty()) {
    policy = std::make_unique<baselines::RandomOffloadingPolicy>();
  } else {
    try {
      std::uint64_t digest = 0;
      auto params = nn::load_checkpoint(opts.checkpoint_path, &digest);
      if (digest != scenario_digest(rc.scenario)) {
        std::cerr << "error: checkpoint was trained under a different "
                     "scenario configuration\n";
        return 3;
      }
      if (params.actor.input_dim() != observation_dim(rc.scenario) ||
          params.actor.output_dim() != action_dim(rc.scenario)) {
        std::cerr << "error: checkpoint dimensions do not match the "
                     "scenario\n";
        return 3;
      }
      policy = std::make_unique<rl::NetworkPolicy>(std::move(params));
    } catch (const nn::CheckpointError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    }
  }

  try {
    const auto result = rl::evaluate(*policy, rc.scenario, opts.episodes,
                                     opts.seed, deterministic);
    fs::create_directories(opts.out_dir);
    write_file(fs::path(opts.out_dir) / "aggregate.csv",
               aggregate_csv(result));
    write_file(fs::path(opts.out_dir) / "trajectory.csv",
               trajectory_csv(result, rc.scenario.num_vehicles));
    log_info("evaluated " + std::to_string(opts.episodes) +
             " episodes, mean cost " + fmt(result.mean_cost));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

namespace {

struct SweepLeg {
  double value = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  rl::EvalResult eval;
};

ScenarioConfig scenario_for(const std::string& axis, double value,
                            const ScenarioConfig& base) {
  ScenarioConfig c = base;
  if (axis == "vehicles") {
    c.num_vehicles = static_cast<int>(value);
  } else if (axis == "bandwidth") {
    c.bandwidth = value;
  } else if (axis == "task_size") {
    c.task_bits_max = value;
  }
  return c;
}

}  // namespace

int cmd_sweep(const SweepOptions& opts) {
  if (opts.values.empty()) {
    std::cerr << "usage error: sweep needs a non-empty --values list\n";
    return 2;
  }
  if (opts.seeds.empty()) {
    std::cerr << "usage error: sweep needs a non-empty --seeds list\n";
    return 2;
  }
  if (opts.axis != "vehicles" && opts.axis != "bandwidth" &&
      opts.axis != "task_size") {
    std::cerr << "usage error: unknown axis '" << opts.axis << "'\n";
    return 2;
  }
  for (double v : opts.values) {
    const bool whole = v == std::floor(v);
    if (!std::isfinite(v) || v <= 0 ||
        (opts.axis == "vehicles" && !whole)) {
      std::cerr << "usage error: bad value for axis " << opts.axis << ": "
                << v << '\n';
      return 2;
    }
  }

  RunConfig base;
  try {
    base = load_run_config(opts.config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  base.train.total_episodes = opts.episodes;

  fs::create_directories(opts.out_dir);
  const bool retrain_per_value = opts.axis == "vehicles";

  // policies per seed for the shared-policy axes
  std::vector<nn::PolicyParams> shared(opts.seeds.size());
  std::vector<bool> shared_ok(opts.seeds.size(), false);
  if (!retrain_per_value) {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (std::size_t i = next.fetch_add(1); i < opts.seeds.size();
           i = next.fetch_add(1)) {
        rl::TrainConfig tc = base.train;
        tc.seed = opts.seeds[i];
        try {
          auto res = rl::train(base.scenario, tc, rl::Algo::ppo);
          shared[i] = std::move(res.params);
          shared_ok[i] = !res.diverged;
        } catch (const std::exception& e) {
          log_info(std::string("sweep training failed: ") + e.what());
        }
      }
    };
    std::vector<std::thread> pool;
    const int jobs = std::max(1, opts.jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<SweepLeg> legs;
  for (double v : opts.values) {
    for (std::uint64_t s : opts.seeds) {
      SweepLeg leg;
      leg.value = v;
      leg.seed = s;
      legs.push_back(leg);
    }
  }

  std::atomic<std::size_t> next{0};
  auto leg_worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < legs.size();
         i = next.fetch_add(1)) {
      SweepLeg& leg = legs[i];
      const std::size_t seed_idx =
          i % opts.seeds.size();  // legs are value-major
      try {
        const ScenarioConfig scen =
            scenario_for(opts.axis, leg.value, base.scenario);
        nn::PolicyParams params;
        if (retrain_per_value) {
          rl::TrainConfig tc = base.train;
          tc.seed = leg.seed;
          auto res = rl::train(scen, tc, rl::Algo::ppo);
          if (res.diverged) {
            continue;
          }
          params = std::move(res.params);
        } else {
          if (!shared_ok[seed_idx]) continue;
          params = shared[seed_idx];
        }
        rl::NetworkPolicy policy(std::move(params));
        // sweeps score the stochastic policy itself: its expected cost is
        // the trained objective, and shared noise streams keep the legs of
        // one seed directly comparable
        leg.eval = rl::evaluate(policy, scen, opts.eval_episodes, leg.seed,
                                /*deterministic=*/false);
        leg.ok = true;
        log_info("sweep leg " + opts.axis + "=" + fmt(leg.value) + " seed " +
                 std::to_string(leg.seed) + ": mean cost " +
                 fmt(leg.eval.mean_cost));
      } catch (const std::exception& e) {
        log_info(std::string("sweep leg failed: ") + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  const int jobs = std::max(1, opts.jobs);
  for (int j = 0; j < jobs; ++j) pool.emplace_back(leg_worker);
  for (auto& t : pool) t.join();

  std::ostringstream os;
  os << "axis_value,seed,mean_cost,mean_energy_uav_compute,mean_energy_rsu,"
        "mean_energy_fly,mean_penalty,violation_rate,status\n";
  for (const auto& leg : legs) {
    os << fmt(leg.value) << ',' << leg.seed << ',';
    if (leg.ok) {
      os << fmt(leg.eval.mean_cost) << ',' << fmt(leg.eval.mean_energy_uav)
         << ',' << fmt(leg.eval.mean_energy_rsu) << ','
         << fmt(leg.eval.mean_energy_fly) << ',' << fmt(leg.eval.mean_penalty)
         << ',' << fmt(leg.eval.violation_rate) << ",ok\n";
    } else {
      os << ",,,,,,failed\n";
    }
  }
  try {
    write_file(fs::path(opts.out_dir) / "sweep.csv", os.str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace flexedge::runner
