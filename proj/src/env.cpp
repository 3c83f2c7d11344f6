#include "flexedge/env.hpp"

#include <algorithm>
#include <cmath>

#include "flexedge/physics.hpp"

namespace flexedge {

int observation_dim(const ScenarioConfig& config) {
  return 4 * config.num_vehicles + 2;
}

int action_dim(const ScenarioConfig& config) {
  return 3 * config.num_vehicles + 2;
}

Eigen::VectorXd encode_observation(const WorldState& state,
                                   const ScenarioConfig& config) {
  const int k = config.num_vehicles;
  Eigen::VectorXd obs(4 * k + 2);
  const double inv_extent = 1.0 / config.area_half_extent;
  for (int i = 0; i < k; ++i) {
    obs(4 * i + 0) = state.vehicles[i].position(0) * inv_extent;
    obs(4 * i + 1) = state.vehicles[i].position(1) * inv_extent;
    obs(4 * i + 2) = state.tasks[i].bits / config.task_bits_max;
    obs(4 * i + 3) = state.tasks[i].density / config.task_density_max;
  }
  obs(4 * k + 0) = state.uav_position(0) * inv_extent;
  obs(4 * k + 1) = state.uav_position(1) * inv_extent;
  return obs;
}

Action decode_action(const Eigen::VectorXd& raw,
                     const ScenarioConfig& config) {
  const int k = config.num_vehicles;
  if (raw.size() != 3 * k + 2) {
    throw std::invalid_argument("decode_action: raw vector has length " +
                                std::to_string(raw.size()) + ", expected " +
                                std::to_string(3 * k + 2));
  }
  const Eigen::VectorXd r = raw.cwiseMax(-1.0).cwiseMin(1.0);

  Action a;
  a.partition = (r.segment(0, k).array() + 1.0) / 2.0;
  a.uav_alloc =
      (r.segment(k, k).array() + 1.0) / 2.0 * config.uav_cpu_max;
  const double total = a.uav_alloc.sum();
  if (total > config.uav_cpu_max) {
    a.uav_alloc *= config.uav_cpu_max / total;
  }
  a.rsu_alloc = (r.segment(2 * k, k).array() + 1.0) / 2.0 *
                config.rsu_cpu_per_vehicle_max;
  a.accel = physics::clamp_norm<double>(
      config.uav.a_max * Eigen::Vector2d(r(3 * k), r(3 * k + 1)),
      config.uav.a_max);
  return a;
}

bool action_is_feasible(const Action& a, const ScenarioConfig& config,
                        double tol) {
  const int k = config.num_vehicles;
  if (a.partition.size() != k || a.uav_alloc.size() != k ||
      a.rsu_alloc.size() != k) {
    return false;
  }
  if ((a.partition.array() < -tol).any() ||
      (a.partition.array() > 1.0 + tol).any()) {
    return false;
  }
  if ((a.uav_alloc.array() < -tol * config.uav_cpu_max).any()) return false;
  if (a.uav_alloc.sum() > config.uav_cpu_max * (1.0 + tol)) return false;
  if ((a.rsu_alloc.array() < -tol * config.rsu_cpu_per_vehicle_max).any() ||
      (a.rsu_alloc.array() >
       config.rsu_cpu_per_vehicle_max * (1.0 + tol))
          .any()) {
    return false;
  }
  return a.accel.norm() <= config.uav.a_max * (1.0 + tol);
}

SlotOutcome step_world(WorldState& state, const Action& action,
                       const ScenarioConfig& config) {
  namespace ph = physics;
  const int k = config.num_vehicles;
  const double dt = config.slot_len();
  SlotOutcome out;
  out.vehicles.resize(k);

  try {
    // relay link is shared: one gain/rate per slot
    const double relay_gain = ph::channel_gain<double>(
        state.uav_position, config.rsu_position, config.ref_channel_gain);
    const double relay_rate =
        ph::uplink_rate(relay_gain, config.tx_power_uav, config.bandwidth, k,
                        config.noise_psd);

    double violation_sum = 0.0;
    for (int i = 0; i < k; ++i) {
      const Task& task = state.tasks[i];
      VehicleOutcome& vo = out.vehicles[i];

      const double gain = ph::channel_gain<double>(
          state.uav_position, state.vehicles[i].position,
          config.ref_channel_gain);
      const double rate =
          ph::uplink_rate(gain, config.tx_power_vehicle, config.bandwidth, k,
                          config.noise_psd);
      const double alpha = action.partition(i);
      vo.t_offload = ph::offload_time(alpha, task.bits, rate);

      const auto local = ph::local_compute(
          alpha, task.bits, task.density, config.vehicle_cpu,
          config.vehicle_cpu * state.deviations.vehicle(i));
      vo.t_local = local.actual_time;
      vo.t_local_est = local.est_time;

      const double f_uav = action.uav_alloc(i);
      const auto uav = ph::uav_compute(
          alpha, task.bits, task.density, task.deadline, vo.t_offload, f_uav,
          f_uav * state.deviations.uav(i), config.effective_cap_coeff);
      vo.t_uav = uav.actual_time;
      vo.t_uav_est = uav.est_time;
      vo.e_uav = uav.energy;
      vo.relayed_bits = uav.relayed_bits;

      vo.t_relay = ph::relay_time(uav.relayed_bits, relay_rate);
      const double f_rsu = action.rsu_alloc(i);
      const auto rsu = ph::rsu_compute(
          uav.relayed_bits, task.density, task.deadline, vo.t_relay, f_rsu,
          f_rsu * state.deviations.rsu(i), config.effective_cap_coeff);
      vo.t_rsu = rsu.actual_time;
      vo.t_rsu_est = rsu.est_time;
      vo.e_rsu = rsu.energy;

      vo.t_edge = ph::edge_latency(vo.t_offload, vo.t_relay, vo.t_rsu, vo.t_uav);
      // violation degree past the deadline; a share that never completes
      // (infinite latency from a zero allocation) counts as late by the
      // whole period, keeping the penalty finite
      const double late =
          std::max({vo.t_local - task.deadline, vo.t_edge - task.deadline, 0.0});
      vo.violation = std::min(late, config.period);

      out.energy_uav += vo.e_uav;
      out.energy_rsu += vo.e_rsu;
      violation_sum += vo.violation;
    }
    out.penalty = config.penalty_coeff / k * violation_sum;

    const auto kin = ph::update_kinematics<double>(
        state.uav_position, state.uav_velocity, action.accel, dt,
        config.uav.v_max, config.uav.a_max);
    state.uav_position = kin.position;
    state.uav_velocity = kin.velocity;
    // flight energy of this slot, at the velocity the slot's command produced
    out.energy_fly =
        ph::propulsion_energy<double>(state.uav_velocity, dt, config.uav.rotor);
  } catch (const std::domain_error& e) {
    throw EpisodeFault(std::string("transition failed: ") + e.what());
  }

  out.cost = out.energy_uav + out.energy_rsu + out.energy_fly + out.penalty;
  out.reward = -out.cost;

  step_vehicles(state, dt, config);
  state.slot += 1;
  state.tasks = sample_tasks(state.rng, config);
  state.deviations = sample_deviation_ratios(state.rng, config);
  return out;
}

Env::Env(const ScenarioConfig& config) : config_(config) {
  validate(config_);
}

Eigen::VectorXd Env::reset(std::uint64_t seed) {
  state_ = init_scenario(config_, seed);
  steps_taken_ = 0;
  return encode_observation(state_, config_);
}

Env::StepResult Env::step(const Action& action) {
  StepResult r;
  r.outcome = step_world(state_, action, config_);
  steps_taken_ += 1;
  r.done = steps_taken_ >= config_.num_slots;
  r.observation = encode_observation(state_, config_);
  return r;
}

}  // namespace flexedge
