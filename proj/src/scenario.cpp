#include "flexedge/scenario.hpp"

#include <cmath>

namespace flexedge {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) {
    throw ConfigError("invalid configuration: " + field + " " + what);
  }
}

}  // namespace

void validate(const ScenarioConfig& c) {
  require(c.num_vehicles > 0, "num_vehicles", "must be positive");
  require(c.num_slots > 0, "num_slots", "must be positive");
  require(c.period > 0, "period", "must be positive");
  require(c.area_half_extent > 0, "area_half_extent", "must be positive");
  require(c.bandwidth > 0, "bandwidth", "must be positive");
  require(c.noise_psd > 0, "noise_psd", "must be positive");
  require(c.tx_power_vehicle > 0, "tx_power_vehicle", "must be positive");
  require(c.tx_power_uav > 0, "tx_power_uav", "must be positive");
  require(c.ref_channel_gain > 0, "ref_channel_gain", "must be positive");
  require(c.uav_altitude > 0, "uav_altitude", "must be positive");
  require(c.effective_cap_coeff > 0, "effective_cap_coeff",
          "must be positive");
  require(c.uav_cpu_max > 0, "uav_cpu_max", "must be positive");
  require(c.rsu_cpu_per_vehicle_max > 0, "rsu_cpu_per_vehicle_max",
          "must be positive");
  require(c.vehicle_cpu > 0, "vehicle_cpu", "must be positive");
  require(c.deviation_ratio >= 0 && c.deviation_ratio < 1, "deviation_ratio",
          "must lie in [0, 1)");
  require(c.task_bits_min > 0, "task_bits_range", "must be positive");
  require(c.task_bits_min <= c.task_bits_max, "task_bits_range",
          "must be ordered");
  require(c.task_density_min > 0, "task_density_range", "must be positive");
  require(c.task_density_min <= c.task_density_max, "task_density_range",
          "must be ordered");
  require(c.deadline > 0, "deadline", "must be positive");
  require(c.vehicle_speed > 0, "vehicle_speed", "must be positive");
  require(c.penalty_coeff >= 0, "penalty_coeff", "must be non-negative");
  require(c.uav.v_max > 0, "uav_v_max", "must be positive");
  require(c.uav.a_max > 0, "uav_a_max", "must be positive");
  require(c.uav.rotor.blade_power > 0, "uav_P0", "must be positive");
  require(c.uav.rotor.induced_power > 0, "uav_Pi", "must be positive");
  require(c.uav.rotor.tip_speed > 0, "uav_U_tip", "must be positive");
  require(c.uav.rotor.mean_rotor_velocity > 0, "uav_v0", "must be positive");
  require(c.uav.rotor.fuselage_drag_ratio > 0, "uav_d0", "must be positive");
  require(c.uav.rotor.rotor_solidity > 0, "uav_s", "must be positive");
  require(c.uav.rotor.air_density > 0, "uav_rho", "must be positive");
  require(c.uav.rotor.disc_area > 0, "uav_A", "must be positive");
  require(c.uav.rotor.profile_speed_exponent == 2 ||
              c.uav.rotor.profile_speed_exponent == 3,
          "profile_speed_exponent", "must be 2 or 3");
  // slot length is derived, so the period split is exact by construction;
  // keep the consistency check anyway for serialized round trips
  require(std::abs(c.slot_len() * c.num_slots - c.period) <=
              1e-12 * c.period,
          "num_slots", "does not divide the period consistently");
}

double wrap_coordinate(double x, double half_extent) {
  const double span = 2.0 * half_extent;
  return x - span * std::floor((x + half_extent) / span);
}

std::vector<Task> sample_tasks(Rng& rng, const ScenarioConfig& config) {
  std::vector<Task> tasks(config.num_vehicles);
  for (auto& t : tasks) {
    t.bits = rng.uniform(config.task_bits_min, config.task_bits_max);
    t.density = rng.uniform(config.task_density_min, config.task_density_max);
    t.deadline = config.deadline;
  }
  return tasks;
}

DeviationRatios sample_deviation_ratios(Rng& rng,
                                        const ScenarioConfig& config) {
  const int k = config.num_vehicles;
  const double eta = config.deviation_ratio;
  DeviationRatios d;
  d.vehicle.resize(k);
  d.uav.resize(k);
  d.rsu.resize(k);
  for (int i = 0; i < k; ++i) d.vehicle(i) = rng.uniform(-eta, eta);
  for (int i = 0; i < k; ++i) d.uav(i) = rng.uniform(-eta, eta);
  for (int i = 0; i < k; ++i) d.rsu(i) = rng.uniform(-eta, eta);
  return d;
}

Eigen::VectorXd sample_deviations(Rng& rng, const ScenarioConfig& config,
                                  const Eigen::VectorXd& est_freqs) {
  const double eta = config.deviation_ratio;
  Eigen::VectorXd dev(est_freqs.size());
  for (Eigen::Index i = 0; i < est_freqs.size(); ++i) {
    if (est_freqs(i) <= 0) {
      throw std::domain_error("sample_deviations: non-positive estimate");
    }
    dev(i) = est_freqs(i) * rng.uniform(-eta, eta);
  }
  return dev;
}

WorldState init_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  validate(config);
  WorldState state;
  state.rng = Rng(seed);
  state.slot = 1;
  state.vehicles.resize(config.num_vehicles);
  for (auto& v : state.vehicles) {
    v.road_axis = state.rng.uniform() < 0.5 ? RoadAxis::x : RoadAxis::y;
    const double coord =
        state.rng.uniform(-config.area_half_extent, config.area_half_extent);
    v.position = Eigen::Vector3d::Zero();
    v.position(v.road_axis == RoadAxis::x ? 0 : 1) = coord;
    v.heading = state.rng.uniform() < 0.5 ? 1 : -1;
    v.speed = config.vehicle_speed;
  }
  state.uav_position = Eigen::Vector3d(0.0, 0.0, config.uav_altitude);
  state.uav_velocity = Eigen::Vector2d::Zero();
  state.tasks = sample_tasks(state.rng, config);
  state.deviations = sample_deviation_ratios(state.rng, config);
  return state;
}

void step_vehicles(WorldState& state, double dt,
                   const ScenarioConfig& config) {
  for (auto& v : state.vehicles) {
    const int axis = v.road_axis == RoadAxis::x ? 0 : 1;
    v.position(axis) = wrap_coordinate(
        v.position(axis) + v.heading * v.speed * dt, config.area_half_extent);
  }
}

VehicleTwin vehicle_twin(const WorldState& state, int k,
                         const ScenarioConfig& config) {
  VehicleTwin twin;
  twin.task = state.tasks.at(k);
  twin.est_cpu = config.vehicle_cpu;
  twin.position = state.vehicles.at(k).position;
  return twin;
}

UavTwin uav_twin(const WorldState& state, const Eigen::VectorXd& est_cpu_alloc,
                 const Eigen::Vector2d& accel) {
  UavTwin twin;
  twin.est_cpu_alloc = est_cpu_alloc;
  twin.position = state.uav_position;
  twin.accel = accel;
  twin.velocity = state.uav_velocity;
  return twin;
}

}  // namespace flexedge
