#pragma once

// Scenario configuration, world state, vehicle mobility, and the stochastic
// task/deviation sampling that drives one service period.

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexedge/physics.hpp"
#include "flexedge/rng.hpp"

namespace flexedge {

/// Thrown for invalid configuration values; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UavParams {
  physics::RotorParams<double> rotor;
  double v_max = 20.0;  // m/s
  double a_max = 5.0;   // m/s^2
};

/// Every physical, network, and flight constant of the scenario. Defaults
/// describe the reference setup: 12 vehicles on a 500 m x 500 m cross road,
/// one roadside unit, one aerial server at 100 m altitude.
struct ScenarioConfig {
  int num_vehicles = 12;
  int num_slots = 40;
  double period = 40.0;            // s, split into num_slots slots
  double area_half_extent = 250.0; // m

  double bandwidth = 2e6;          // Hz, shared uplink band
  double noise_psd = 1e-16;        // W/Hz
  double tx_power_vehicle = 0.5;   // W
  double tx_power_uav = 0.8;       // W
  double ref_channel_gain = 1e-3;  // linear gain at 1 m
  double uav_altitude = 100.0;     // m
  Eigen::Vector3d rsu_position{-50.0, 0.0, 0.0};  // m

  double effective_cap_coeff = 1e-26;    // J s^2 / cycle^3
  double uav_cpu_max = 2e10;             // cycles/s, shared across vehicles
  double rsu_cpu_per_vehicle_max = 2e9;  // cycles/s per vehicle
  double vehicle_cpu = 1e9;              // cycles/s, twin-recorded estimate
  double deviation_ratio = 0.1;          // bound on |deviation| / estimate

  double task_bits_min = 0.2e6;    // bits
  double task_bits_max = 2e6;      // bits
  double task_density_min = 500;   // cycles/bit
  double task_density_max = 1500;  // cycles/bit
  double deadline = 1.0;           // s, per-slot task latency bound
  double vehicle_speed = 15.0;     // m/s

  UavParams uav;
  double penalty_coeff = 100.0;  // weight of the latency-violation penalty

  double slot_len() const { return period / num_slots; }
};

/// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& config);

enum class RoadAxis { x, y };

struct VehicleState {
  Eigen::Vector3d position{0.0, 0.0, 0.0};  // m, z always 0
  RoadAxis road_axis = RoadAxis::x;
  int heading = 1;  // +1 or -1 along the road axis
  double speed = 0.0;
};

struct Task {
  double bits = 0.0;
  double density = 0.0;   // cycles/bit
  double deadline = 0.0;  // s
};

/// Twin record of one vehicle: task, recorded CPU frequency, location.
struct VehicleTwin {
  Task task;
  double est_cpu = 0.0;  // cycles/s
  Eigen::Vector3d position;
};

/// Twin record of the aerial server: per-vehicle frequency allocation plus
/// the kinematic state used for trajectory decisions.
struct UavTwin {
  Eigen::VectorXd est_cpu_alloc;  // cycles/s per vehicle
  Eigen::Vector3d position;
  Eigen::Vector2d accel;
  Eigen::Vector2d velocity;
};

/// Per-slot deviation draws, stored as signed ratios in
/// [-deviation_ratio, +deviation_ratio]. The deviation of an estimated
/// frequency f is ratio * f, which keeps the actual frequency positive and
/// lets the draw happen before the slot's allocations are known.
struct DeviationRatios {
  Eigen::VectorXd vehicle;
  Eigen::VectorXd uav;
  Eigen::VectorXd rsu;
};

/// Ground truth for one slot. Copyable; all randomness flows through `rng`.
struct WorldState {
  int slot = 1;  // 1-based slot index
  std::vector<VehicleState> vehicles;
  Eigen::Vector3d uav_position{0.0, 0.0, 0.0};
  Eigen::Vector2d uav_velocity{0.0, 0.0};
  std::vector<Task> tasks;
  DeviationRatios deviations;
  Rng rng{0};
};

// Wraps a coordinate onto the torus [-half_extent, half_extent).
double wrap_coordinate(double x, double half_extent);

std::vector<Task> sample_tasks(Rng& rng, const ScenarioConfig& config);

DeviationRatios sample_deviation_ratios(Rng& rng, const ScenarioConfig& config);

// Signed frequency deviations for the given estimates, each uniform in
// [-ratio * f, +ratio * f]. Estimates must be strictly positive.
Eigen::VectorXd sample_deviations(Rng& rng, const ScenarioConfig& config,
                                  const Eigen::VectorXd& est_freqs);

// Places vehicles uniformly on the two perpendicular roads through the
// origin, parks the aerial server above the origin, and samples the first
// slot's tasks and deviations.
WorldState init_scenario(const ScenarioConfig& config, std::uint64_t seed);

// Advances every vehicle by speed * dt along its road with torus wraparound.
void step_vehicles(WorldState& state, double dt, const ScenarioConfig& config);

// Twin views, synchronized with the world at the slot boundary.
VehicleTwin vehicle_twin(const WorldState& state, int k,
                         const ScenarioConfig& config);
UavTwin uav_twin(const WorldState& state, const Eigen::VectorXd& est_cpu_alloc,
                 const Eigen::Vector2d& accel);

}  // namespace flexedge
