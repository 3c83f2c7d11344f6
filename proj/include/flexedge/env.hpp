#pragma once

// Decision-process wrapper around the scenario: observation encoding,
// constraint-respecting action decoding, the per-slot transition, and the
// energy-plus-penalty reward.
//
// Observation layout (length 4K + 2), all positions normalized by
// area_half_extent, task fields by their configured maxima:
//   [4k + 0]  vehicle k x
//   [4k + 1]  vehicle k y
//   [4k + 2]  vehicle k task bits / task_bits_max
//   [4k + 3]  vehicle k task density / task_density_max
//   [4K + 0]  uav x
//   [4K + 1]  uav y
//
// Raw action layout (length 3K + 2), entries in [-1, 1]:
//   [k]        -> partition alpha_k           via (raw + 1) / 2
//   [K + k]    -> uav allocation f_k          via (raw + 1) / 2 * uav_cpu_max,
//                 rescaled if the sum exceeds uav_cpu_max
//   [2K + k]   -> rsu allocation f_k          via (raw + 1) / 2 * rsu_cpu_per_vehicle_max
//   [3K + 0,1] -> acceleration (x, y)         via a_max * raw, norm-clamped to a_max

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "flexedge/scenario.hpp"

namespace flexedge {

/// Raised when a transition hits an invalid physical regime; never silent.
class EpisodeFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Feasible decision variables for one slot.
struct Action {
  Eigen::VectorXd partition;  // alpha_k in [0, 1]
  Eigen::VectorXd uav_alloc;  // cycles/s, sum <= uav_cpu_max
  Eigen::VectorXd rsu_alloc;  // cycles/s, each in [0, rsu_cpu_per_vehicle_max]
  Eigen::Vector2d accel;      // m/s^2, norm <= a_max
};

struct VehicleOutcome {
  double t_local = 0;      // s
  double t_local_est = 0;  // s, twin estimate
  double t_offload = 0;    // s
  double t_uav = 0;        // s
  double t_uav_est = 0;    // s
  double t_relay = 0;      // s
  double t_rsu = 0;        // s
  double t_rsu_est = 0;    // s
  double t_edge = 0;       // s
  double e_uav = 0;        // J
  double e_rsu = 0;        // J
  double relayed_bits = 0;
  double violation = 0;    // s past the deadline, capped at the period
};

struct SlotOutcome {
  std::vector<VehicleOutcome> vehicles;
  double energy_uav = 0;  // J, sum of aerial computing energies
  double energy_rsu = 0;  // J
  double energy_fly = 0;  // J
  double penalty = 0;     // J-equivalent latency penalty
  double cost = 0;        // energy_uav + energy_rsu + energy_fly + penalty
  double reward = 0;      // -cost
};

int observation_dim(const ScenarioConfig& config);
int action_dim(const ScenarioConfig& config);

Eigen::VectorXd encode_observation(const WorldState& state,
                                   const ScenarioConfig& config);

// Maps a raw vector in [-1, 1]^(3K+2) onto a feasible Action. Entries
// outside [-1, 1] are clamped first; a wrong length is a contract error.
Action decode_action(const Eigen::VectorXd& raw, const ScenarioConfig& config);

// Runtime feasibility guard over the decision-variable constraints.
bool action_is_feasible(const Action& action, const ScenarioConfig& config,
                        double tol = 1e-9);

// Advances the world by one slot under the given action and returns the
// realized latencies, energies, and reward. Mutates `state` in place.
SlotOutcome step_world(WorldState& state, const Action& action,
                       const ScenarioConfig& config);

/// A decision maker driving one episode; implemented by the learned policy
/// and by the non-learning baselines.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const Eigen::VectorXd& obs, const WorldState& state,
                     const ScenarioConfig& config, Rng& rng,
                     bool deterministic) = 0;
  // Hook applied right after reset; baselines use it to pick a start pose.
  virtual void on_reset(WorldState& state, const ScenarioConfig& config) {
    (void)state;
    (void)config;
  }
};

/// One environment instance; single-threaded, deterministic given the seed.
class Env {
 public:
  explicit Env(const ScenarioConfig& config);

  Eigen::VectorXd reset(std::uint64_t seed);

  struct StepResult {
    Eigen::VectorXd observation;
    SlotOutcome outcome;
    bool done = false;
  };
  StepResult step(const Action& action);

  const WorldState& state() const { return state_; }
  WorldState& state_mut() { return state_; }
  const ScenarioConfig& config() const { return config_; }
  int steps_taken() const { return steps_taken_; }

 private:
  ScenarioConfig config_;
  WorldState state_;
  int steps_taken_ = 0;
};

}  // namespace flexedge
