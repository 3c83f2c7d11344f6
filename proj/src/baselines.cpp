#include "flexedge/baselines.hpp"

#include <cmath>

#include "flexedge/physics.hpp"

namespace flexedge::baselines {

double RandomOffloadingPolicy::tangential_speed(double radius,
                                                const ScenarioConfig& config) {
  return std::min(config.uav.v_max, std::sqrt(config.uav.a_max * radius));
}

double angular_speed(const BaselineSpec& spec, const ScenarioConfig& config) {
  return RandomOffloadingPolicy::tangential_speed(spec.circle_radius, config) /
         spec.circle_radius;
}

Eigen::Vector2d RandomOffloadingPolicy::circle_accel(
    const WorldState& state, double radius, const ScenarioConfig& config) {
  // proportional correction of radial error and tangential speed on top of
  // the nominal centripetal command
  constexpr double kRadialGain = 0.2;    // 1/s^2
  constexpr double kRadialDamping = 0.6; // 1/s
  constexpr double kSpeedGain = 0.5;     // 1/s

  const Eigen::Vector2d pos = state.uav_position.head<2>();
  const Eigen::Vector2d vel = state.uav_velocity;
  const double v_t = tangential_speed(radius, config);

  const double rho = pos.norm();
  if (rho < 1e-6) {
    // undefined direction at the center: push outward toward angle zero
    return physics::clamp_norm<double>(
        Eigen::Vector2d(config.uav.a_max, 0.0), config.uav.a_max);
  }
  const Eigen::Vector2d u_r = pos / rho;
  const Eigen::Vector2d u_t(-u_r.y(), u_r.x());  // counter-clockwise

  const double radial_err = rho - radius;
  const double radial_vel = vel.dot(u_r);
  const double tangential_vel = vel.dot(u_t);

  Eigen::Vector2d accel =
      -(v_t * v_t / rho) * u_r                                     // centripetal
      - (kRadialGain * radial_err + kRadialDamping * radial_vel) * u_r
      + kSpeedGain * (v_t - tangential_vel) * u_t;
  return physics::clamp_norm<double>(accel, config.uav.a_max);
}

Action RandomOffloadingPolicy::act(const Eigen::VectorXd& obs,
                                   const WorldState& state,
                                   const ScenarioConfig& config, Rng& rng,
                                   bool deterministic) {
  (void)obs;
  (void)deterministic;  // the offloading share is random by definition
  const int k = config.num_vehicles;
  Action a;
  a.partition.resize(k);
  for (int i = 0; i < k; ++i) {
    a.partition(i) = rng.uniform();
  }
  a.uav_alloc = Eigen::VectorXd::Constant(k, config.uav_cpu_max / k);
  a.rsu_alloc =
      Eigen::VectorXd::Constant(k, config.rsu_cpu_per_vehicle_max / 2.0);
  a.accel = circle_accel(state, spec_.circle_radius, config);
  return a;
}

void RandomOffloadingPolicy::on_reset(WorldState& state,
                                      const ScenarioConfig& config) {
  state.uav_position =
      Eigen::Vector3d(spec_.circle_radius, 0.0, config.uav_altitude);
  state.uav_velocity =
      Eigen::Vector2d(0.0, tangential_speed(spec_.circle_radius, config));
}

}  // namespace flexedge::baselines
