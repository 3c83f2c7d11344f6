#include "flexedge/rl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace flexedge::rl {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw ConfigError("invalid training configuration: " + what);
  }
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

void validate(const TrainConfig& c) {
  require(c.discount > 0 && c.discount <= 1, "discount must lie in (0, 1]");
  require(c.gae_lambda > 0 && c.gae_lambda <= 1,
          "gae_lambda must lie in (0, 1]");
  require(c.clip_epsilon > 0 && c.clip_epsilon < 1,
          "clip_epsilon must lie in (0, 1)");
  require(c.epochs_per_update > 0, "epochs_per_update must be positive");
  require(c.minibatch_size > 0, "minibatch_size must be positive");
  require(c.episodes_per_update > 0, "episodes_per_update must be positive");
  require(c.total_episodes >= 0, "total_episodes must be non-negative");
  require(c.entropy_coef >= 0, "entropy_coef must be non-negative");
  require(c.actor_lr > 0, "actor_lr must be positive");
  require(c.critic_lr > 0, "critic_lr must be positive");
  require(c.grad_clip_norm >= 0, "grad_clip_norm must be non-negative");
  require(c.reward_scale > 0, "reward_scale must be positive");
  require(c.checkpoint_every > 0, "checkpoint_every must be positive");
  require(!c.hidden_sizes.empty(), "hidden_sizes must not be empty");
  for (int h : c.hidden_sizes) {
    require(h > 0, "hidden_sizes must be positive");
  }
}

GaeResult compute_gae(const Eigen::VectorXd& rewards,
                      const Eigen::VectorXd& values, double discount,
                      double gae_lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n + 1) {
    throw std::invalid_argument(
        "compute_gae: values must hold one bootstrap entry more than rewards");
  }
  GaeResult r;
  r.advantages.resize(n);
  double running = 0.0;
  for (Eigen::Index t = n; t-- > 0;) {
    const double delta =
        rewards(t) + discount * values(t + 1) - values(t);
    running = delta + discount * gae_lambda * running;
    r.advantages(t) = running;
  }
  r.targets = r.advantages + values.head(n);
  return r;
}

ActorLossResult ppo_actor_loss(const Eigen::VectorXd& log_prob_new,
                               const Eigen::VectorXd& log_prob_old,
                               const Eigen::VectorXd& advantages,
                               double clip_epsilon, double entropy_coef,
                               double entropy) {
  const Eigen::Index n = log_prob_new.size();
  if (log_prob_old.size() != n || advantages.size() != n) {
    throw std::invalid_argument("ppo_actor_loss: length mismatch");
  }
  if (!all_finite(log_prob_new) || !all_finite(log_prob_old) ||
      !all_finite(advantages)) {
    throw std::runtime_error("ppo_actor_loss: non-finite inputs");
  }
  ActorLossResult r;
  r.dlog_prob.setZero(n);
  const Eigen::ArrayXd log_ratio = (log_prob_new - log_prob_old).array();
  const Eigen::ArrayXd ratio = log_ratio.exp();
  double surrogate = 0.0;
  long clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = advantages(i);
    const double clipped_ratio =
        std::clamp(ratio(i), 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    const double unclipped_term = ratio(i) * a;
    const double clipped_term = clipped_ratio * a;
    surrogate += std::min(unclipped_term, clipped_term);
    // the clipped branch is flat in the ratio exactly when it is both
    // selected and saturated
    const bool clipped_out = clipped_term < unclipped_term &&
                             (ratio(i) > 1.0 + clip_epsilon ||
                              ratio(i) < 1.0 - clip_epsilon);
    if (std::abs(ratio(i) - 1.0) > clip_epsilon) clipped += 1;
    if (!clipped_out) {
      r.dlog_prob(i) = -a * ratio(i) / static_cast<double>(n);
    }
  }
  r.surrogate = surrogate / static_cast<double>(n);
  r.entropy = entropy;
  r.loss = -r.surrogate - entropy_coef * entropy;
  r.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  r.approx_kl = ((ratio - 1.0) - log_ratio).mean();
  return r;
}

ActorLossResult a2c_actor_loss(const Eigen::VectorXd& log_prob_new,
                               const Eigen::VectorXd& advantages,
                               double entropy_coef, double entropy) {
  const Eigen::Index n = log_prob_new.size();
  if (advantages.size() != n) {
    throw std::invalid_argument("a2c_actor_loss: length mismatch");
  }
  if (!all_finite(log_prob_new) || !all_finite(advantages)) {
    throw std::runtime_error("a2c_actor_loss: non-finite inputs");
  }
  ActorLossResult r;
  r.surrogate = log_prob_new.dot(advantages) / static_cast<double>(n);
  r.entropy = entropy;
  r.loss = -r.surrogate - entropy_coef * entropy;
  r.dlog_prob = -advantages / static_cast<double>(n);
  return r;
}

double critic_loss(const Eigen::VectorXd& values_pred,
                   const Eigen::VectorXd& targets, Eigen::VectorXd* grad) {
  const Eigen::Index n = values_pred.size();
  if (targets.size() != n) {
    throw std::invalid_argument("critic_loss: length mismatch");
  }
  if (!all_finite(values_pred) || !all_finite(targets)) {
    throw std::runtime_error("critic_loss: non-finite inputs");
  }
  const Eigen::VectorXd diff = values_pred - targets;
  if (grad) {
    *grad = 2.0 * diff / static_cast<double>(n);
  }
  return diff.squaredNorm() / static_cast<double>(n);
}

void normalize_advantages(Eigen::VectorXd& advantages) {
  const Eigen::Index n = advantages.size();
  if (n < 2) return;
  const double mean = advantages.mean();
  const double var = (advantages.array() - mean).square().sum() / n;
  advantages = (advantages.array() - mean) / (std::sqrt(var) + 1e-8);
}

Action NetworkPolicy::act(const Eigen::VectorXd& obs, const WorldState& state,
                          const ScenarioConfig& config, Rng& rng,
                          bool deterministic) {
  (void)state;
  const auto s =
      nn::policy_sample(params_.actor, params_.log_std, obs, rng,
                        deterministic);
  return decode_action(s.action, config);
}

namespace {

struct RolloutBatch {
  Eigen::MatrixXd obs;       // obs_dim x B
  Eigen::MatrixXd actions;   // act_dim x B
  Eigen::VectorXd log_prob;  // B
  Eigen::VectorXd advantages;
  Eigen::VectorXd targets;
};

struct EpisodeAccumulator {
  double reward = 0, cost = 0, e_uav = 0, e_rsu = 0, e_fly = 0, penalty = 0;
  long violations = 0;
  void add(const SlotOutcome& o) {
    reward += o.reward;
    cost += o.cost;
    e_uav += o.energy_uav;
    e_rsu += o.energy_rsu;
    e_fly += o.energy_fly;
    penalty += o.penalty;
    for (const auto& v : o.vehicles) {
      if (v.violation > 0) violations += 1;
    }
  }
};

}  // namespace

TrainResult train(const ScenarioConfig& scenario, const TrainConfig& config,
                  Algo algo, const CheckpointHook& hook) {
  flexedge::validate(scenario);
  validate(config);

  const int obs_dim = observation_dim(scenario);
  const int act_dim = action_dim(scenario);
  const int slots = scenario.num_slots;

  Rng init_rng(mix_seed(config.seed, kParamInitStream));
  Rng policy_rng(mix_seed(config.seed, kPolicyStream));
  Rng shuffle_rng(mix_seed(config.seed, kShuffleStream));

  TrainResult result;
  result.params = nn::init_policy(obs_dim, act_dim, config.hidden_sizes,
                                  init_rng, config.init_log_std);
  nn::PolicyParams& p = result.params;
  nn::PolicyParams last_good = p;

  nn::AdamState actor_opt, critic_opt;
  nn::MlpGrads actor_grads = nn::MlpGrads::zeros_like(p.actor);
  nn::MlpGrads critic_grads = nn::MlpGrads::zeros_like(p.critic);

  Env env(scenario);
  const auto t_start = std::chrono::steady_clock::now();
  long episodes_done = 0;
  long next_checkpoint = config.checkpoint_every;

  while (episodes_done < config.total_episodes) {
    const long batch_episodes = std::min<long>(
        config.episodes_per_update, config.total_episodes - episodes_done);
    const Eigen::Index batch = batch_episodes * slots;

    nn::sync_old_policy(p);

    RolloutBatch buf;
    buf.obs.resize(obs_dim, batch);
    buf.actions.resize(act_dim, batch);
    buf.log_prob.resize(batch);
    buf.advantages.resize(batch);
    buf.targets.resize(batch);
    Eigen::VectorXd rewards(slots), values(slots + 1);

    for (long e = 0; e < batch_episodes; ++e) {
      const long episode = episodes_done + e;
      Eigen::VectorXd obs =
          env.reset(mix_seed(config.seed, kEpisodeStream + episode));
      EpisodeAccumulator acc;
      const Eigen::Index base = e * slots;
      for (int n = 0; n < slots; ++n) {
        const auto sample =
            nn::policy_sample(p.actor, p.log_std, obs, policy_rng);
        const double value = nn::forward(p.critic, obs)(0);
        const auto sr = env.step(decode_action(sample.action, scenario));

        buf.obs.col(base + n) = obs;
        buf.actions.col(base + n) = sample.action;
        buf.log_prob(base + n) = sample.log_prob;
        rewards(n) = sr.outcome.reward * config.reward_scale;
        values(n) = value;
        acc.add(sr.outcome);
        obs = sr.observation;
      }
      values(slots) = 0.0;  // terminal bootstrap
      const auto gae =
          compute_gae(rewards, values, config.discount, config.gae_lambda);
      buf.advantages.segment(base, slots) = gae.advantages;
      buf.targets.segment(base, slots) = gae.targets;

      EpisodeMetrics m;
      m.episode = episode;
      m.reward = acc.reward;
      m.cost = acc.cost;
      m.energy_uav = acc.e_uav;
      m.energy_rsu = acc.e_rsu;
      m.energy_fly = acc.e_fly;
      m.penalty = acc.penalty;
      m.violation_count = acc.violations;
      m.wall_time = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t_start)
                        .count();
      result.history.push_back(m);
    }

    if (config.normalize_advantages) {
      normalize_advantages(buf.advantages);
    }

    const double entropy = nn::gaussian_entropy(p.log_std);
    const int epochs = algo == Algo::a2c ? 1 : config.epochs_per_update;
    std::vector<Eigen::Index> order(batch);
    std::iota(order.begin(), order.end(), 0);

    bool diverged = false;
    for (int epoch = 0; epoch < epochs && !diverged; ++epoch) {
      // Fisher-Yates with the dedicated stream
      for (Eigen::Index i = batch - 1; i > 0; --i) {
        const int j = shuffle_rng.uniform_int(static_cast<int>(i + 1));
        std::swap(order[i], order[j]);
      }
      for (Eigen::Index start = 0; start < batch && !diverged;
           start += config.minibatch_size) {
        const Eigen::Index count =
            std::min<Eigen::Index>(config.minibatch_size, batch - start);
        Eigen::MatrixXd mb_obs(obs_dim, count), mb_act(act_dim, count);
        Eigen::VectorXd mb_logp(count), mb_adv(count), mb_tgt(count);
        for (Eigen::Index i = 0; i < count; ++i) {
          const Eigen::Index src = order[start + i];
          mb_obs.col(i) = buf.obs.col(src);
          mb_act.col(i) = buf.actions.col(src);
          mb_logp(i) = buf.log_prob(src);
          mb_adv(i) = buf.advantages(src);
          mb_tgt(i) = buf.targets(src);
        }

        auto eval = nn::policy_evaluate(p.actor, p.log_std, mb_obs, mb_act);
        ActorLossResult al;
        try {
          al = algo == Algo::a2c
                   ? a2c_actor_loss(eval.log_prob, mb_adv,
                                    config.entropy_coef, entropy)
                   : ppo_actor_loss(eval.log_prob, mb_logp, mb_adv,
                                    config.clip_epsilon, config.entropy_coef,
                                    entropy);
        } catch (const std::runtime_error&) {
          diverged = true;
          break;
        }
        if (!std::isfinite(al.loss)) {
          diverged = true;
          break;
        }
        actor_grads.set_zero();
        Eigen::VectorXd dlog_std = Eigen::VectorXd::Zero(act_dim);
        nn::policy_backward(p.actor, p.log_std, eval, mb_act, al.dlog_prob,
                            actor_grads, dlog_std);
        dlog_std.array() -= config.entropy_coef;  // entropy bonus term
        nn::adam_step(p.actor, &p.log_std, actor_grads, &dlog_std, actor_opt,
                      config.actor_lr, config.grad_clip_norm);
        p.log_std =
            p.log_std.cwiseMax(nn::kLogStdMin).cwiseMin(nn::kLogStdMax);

        nn::MlpTrace critic_trace;
        const Eigen::MatrixXd v = nn::forward(p.critic, mb_obs, &critic_trace);
        Eigen::VectorXd dv;
        double closs = 0;
        try {
          closs = critic_loss(v.row(0).transpose(), mb_tgt, &dv);
        } catch (const std::runtime_error&) {
          diverged = true;
          break;
        }
        if (!std::isfinite(closs)) {
          diverged = true;
          break;
        }
        critic_grads.set_zero();
        nn::backward(p.critic, critic_trace, dv.transpose(), critic_grads);
        nn::adam_step(p.critic, nullptr, critic_grads, nullptr, critic_opt,
                      config.critic_lr, config.grad_clip_norm);
      }
    }

    if (diverged) {
      p = last_good;
      result.diverged = true;
      result.episodes_completed = episodes_done;
      return result;
    }

    episodes_done += batch_episodes;
    last_good = p;
    if (hook) {
      while (next_checkpoint <= episodes_done) {
        hook(next_checkpoint, p);
        next_checkpoint += config.checkpoint_every;
      }
    }
  }

  result.episodes_completed = episodes_done;
  return result;
}

EvalResult evaluate(Policy& policy, const ScenarioConfig& scenario,
                    long episodes, std::uint64_t seed, bool deterministic,
                    long episode_offset) {
  flexedge::validate(scenario);
  if (episodes <= 0) {
    throw std::invalid_argument("evaluate: episodes must be positive");
  }
  Env env(scenario);
  Rng rng(mix_seed(seed, kPolicyStream));
  const int slots = scenario.num_slots;
  const int k = scenario.num_vehicles;

  EvalResult r;
  r.episodes = episodes;
  std::vector<double> costs;
  costs.reserve(episodes);
  long violations = 0;

  for (long e = 0; e < episodes; ++e) {
    Eigen::VectorXd obs =
        env.reset(mix_seed(seed, kEpisodeStream + episode_offset + e));
    policy.on_reset(env.state_mut(), scenario);
    obs = encode_observation(env.state(), scenario);

    const bool record = e == episodes - 1;
    if (record) r.trajectory.clear();
    EpisodeAccumulator acc;
    for (int n = 0; n < slots; ++n) {
      if (record) {
        TrajectoryRow row;
        row.slot = env.state().slot;
        row.uav_x = env.state().uav_position(0);
        row.uav_y = env.state().uav_position(1);
        row.vehicle_xy.reserve(2 * k);
        for (const auto& v : env.state().vehicles) {
          row.vehicle_xy.push_back(v.position(0));
          row.vehicle_xy.push_back(v.position(1));
        }
        r.trajectory.push_back(std::move(row));
      }
      const Action a =
          policy.act(obs, env.state(), scenario, rng, deterministic);
      const auto sr = env.step(a);
      acc.add(sr.outcome);
      obs = sr.observation;
    }
    costs.push_back(acc.cost);
    violations += acc.violations;
    r.mean_reward += acc.reward;
    r.mean_energy_uav += acc.e_uav;
    r.mean_energy_rsu += acc.e_rsu;
    r.mean_energy_fly += acc.e_fly;
    r.mean_penalty += acc.penalty;
  }

  const double n = static_cast<double>(episodes);
  r.mean_cost = std::accumulate(costs.begin(), costs.end(), 0.0) / n;
  double var = 0;
  for (double c : costs) var += (c - r.mean_cost) * (c - r.mean_cost);
  r.std_cost = std::sqrt(var / n);
  r.mean_reward /= n;
  r.mean_energy_uav /= n;
  r.mean_energy_rsu /= n;
  r.mean_energy_fly /= n;
  r.mean_penalty /= n;
  r.violation_rate =
      static_cast<double>(violations) / (n * slots * k);
  return r;
}

}  // namespace flexedge::rl
