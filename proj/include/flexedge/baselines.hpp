#pragma once

// Non-learning comparison policies.

#include "flexedge/env.hpp"

namespace flexedge::baselines {

enum class BaselineKind { random_offloading };

struct BaselineSpec {
  BaselineKind kind = BaselineKind::random_offloading;
  double circle_radius = 300.0;  // m, loiter circle around the origin
};

// Loiter rate in rad/s at the feasible tangential speed.
double angular_speed(const BaselineSpec& spec, const ScenarioConfig& config);

/// Random offloading with fixed frequency splits and a fixed circular
/// loiter: partitions drawn uniformly each slot, the aerial CPU split
/// equally, half the per-vehicle roadside cap allocated, and the
/// acceleration tracking the loiter circle at the highest feasible constant
/// tangential speed.
class RandomOffloadingPolicy : public Policy {
 public:
  explicit RandomOffloadingPolicy(BaselineSpec spec = {}) : spec_(spec) {}

  Action act(const Eigen::VectorXd& obs, const WorldState& state,
             const ScenarioConfig& config, Rng& rng,
             bool deterministic) override;

  // Starts the loiter on the circle at angle zero, moving tangentially.
  void on_reset(WorldState& state, const ScenarioConfig& config) override;

  const BaselineSpec& spec() const { return spec_; }

  // Constant tangential speed: limited by the platform's top speed and by
  // the centripetal acceleration budget v^2 / r <= a_max.
  static double tangential_speed(double radius, const ScenarioConfig& config);

  // Circle-tracking acceleration for the current pose (no randomness).
  static Eigen::Vector2d circle_accel(const WorldState& state, double radius,
                                      const ScenarioConfig& config);

 private:
  BaselineSpec spec_;
};

}  // namespace flexedge::baselines
