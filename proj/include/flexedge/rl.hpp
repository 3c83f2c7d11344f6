#pragma once

// On-policy actor-critic training: rollout collection, generalized advantage
// estimation, the clipped surrogate objective (with an unclipped single-epoch
// mode as the A2C ablation), and policy evaluation.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "flexedge/env.hpp"
#include "flexedge/nn.hpp"
#include "flexedge/scenario.hpp"

namespace flexedge::rl {

enum class Algo { ppo, a2c };

struct TrainConfig {
  double discount = 0.95;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  int epochs_per_update = 10;
  int minibatch_size = 64;
  int episodes_per_update = 4;
  long total_episodes = 300;
  double entropy_coef = 1e-3;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double grad_clip_norm = 0.5;
  bool normalize_advantages = true;
  // rewards are rescaled by this factor inside the trainer only; logged
  // metrics stay in physical units
  double reward_scale = 1e-3;
  double init_log_std = -0.5;
  std::vector<int> hidden_sizes{128, 128};
  long checkpoint_every = 50;  // episodes
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

// Named generator streams derived from the master seed; episode k of a run
// always draws its world from mix_seed(seed, kEpisodeStream + k), so two
// runs (or a run and a baseline evaluation) can share worlds exactly.
inline constexpr std::uint64_t kParamInitStream = 1;
inline constexpr std::uint64_t kPolicyStream = 2;
inline constexpr std::uint64_t kShuffleStream = 3;
inline constexpr std::uint64_t kEpisodeStream = 1000;

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd targets;  // advantages + values
};

// Exponentially weighted advantage over the temporal-difference residuals,
// truncated at the episode end. `values` carries one bootstrap entry more
// than `rewards`.
GaeResult compute_gae(const Eigen::VectorXd& rewards,
                      const Eigen::VectorXd& values, double discount,
                      double gae_lambda);

struct ActorLossResult {
  double loss = 0;        // minimized objective
  double surrogate = 0;   // mean clipped surrogate (maximized)
  double entropy = 0;
  double clip_fraction = 0;
  double approx_kl = 0;
  Eigen::VectorXd dlog_prob;  // dLoss/dlog_prob per sample
};

// Clipped-ratio surrogate. Advantages are expected already normalized when
// normalization is enabled upstream.
ActorLossResult ppo_actor_loss(const Eigen::VectorXd& log_prob_new,
                               const Eigen::VectorXd& log_prob_old,
                               const Eigen::VectorXd& advantages,
                               double clip_epsilon, double entropy_coef,
                               double entropy);

// Unclipped advantage-weighted log-probability objective.
ActorLossResult a2c_actor_loss(const Eigen::VectorXd& log_prob_new,
                               const Eigen::VectorXd& advantages,
                               double entropy_coef, double entropy);

// Mean squared error; optionally emits dLoss/dpred.
double critic_loss(const Eigen::VectorXd& values_pred,
                   const Eigen::VectorXd& targets,
                   Eigen::VectorXd* grad = nullptr);

// In-place zero-mean unit-variance rescaling (order preserving).
void normalize_advantages(Eigen::VectorXd& advantages);

struct EpisodeMetrics {
  long episode = 0;
  double reward = 0;
  double cost = 0;
  double energy_uav = 0;
  double energy_rsu = 0;
  double energy_fly = 0;
  double penalty = 0;
  long violation_count = 0;
  double wall_time = 0;  // s since training start; log-only, not serialized
};

struct TrainResult {
  nn::PolicyParams params;
  std::vector<EpisodeMetrics> history;
  bool diverged = false;
  long episodes_completed = 0;
};

using CheckpointHook =
    std::function<void(long episode, const nn::PolicyParams&)>;

// Runs the training loop: collect a batch of episodes under the synchronized
// old policy, estimate advantages, then optimize the actor and critic. A
// non-finite loss aborts with the last completed update's parameters.
TrainResult train(const ScenarioConfig& scenario, const TrainConfig& config,
                  Algo algo, const CheckpointHook& hook = nullptr);

/// Learned policy adapter: squashed-Gaussian sample (or mean) decoded into a
/// feasible action.
class NetworkPolicy : public Policy {
 public:
  explicit NetworkPolicy(nn::PolicyParams params)
      : params_(std::move(params)) {}
  Action act(const Eigen::VectorXd& obs, const WorldState& state,
             const ScenarioConfig& config, Rng& rng,
             bool deterministic) override;
  const nn::PolicyParams& params() const { return params_; }

 private:
  nn::PolicyParams params_;
};

struct TrajectoryRow {
  int slot = 0;
  double uav_x = 0, uav_y = 0;
  std::vector<double> vehicle_xy;  // x0, y0, x1, y1, ...
};

struct EvalResult {
  long episodes = 0;
  double mean_cost = 0, std_cost = 0;
  double mean_reward = 0;
  double mean_energy_uav = 0, mean_energy_rsu = 0, mean_energy_fly = 0;
  double mean_penalty = 0;
  double violation_rate = 0;  // violating vehicle-slots / total vehicle-slots
  std::vector<TrajectoryRow> trajectory;  // last episode, one row per slot
};

// Evaluates a policy over full episodes. Episode k draws its world from
// mix_seed(seed, kEpisodeStream + episode_offset + k).
EvalResult evaluate(Policy& policy, const ScenarioConfig& scenario,
                    long episodes, std::uint64_t seed, bool deterministic,
                    long episode_offset = 0);

}  // namespace flexedge::rl
