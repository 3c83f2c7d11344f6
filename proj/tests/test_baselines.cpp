#include <doctest.h>

#include <cmath>

#include "flexedge/baselines.hpp"
#include "flexedge/rl.hpp"
#include "oracles.hpp"

using namespace flexedge;
using baselines::RandomOffloadingPolicy;

TEST_CASE("loiter speed respects both platform limits") {
  ScenarioConfig c;
  // v^2 / r = 400 / 300 well below the 5 m/s^2 budget: full speed

  CHECK(RandomOffloadingPolicy::tangential_speed(300.0, c) ==
        doctest::Approx(20.0));
  CHECK(20.0 * 20.0 / 300.0 <= c.uav.a_max);

  // a tight circle forces the speed down so the centripetal load fits
  const double v_tight = RandomOffloadingPolicy::tangential_speed(10.0, c);
  CHECK(v_tight == doctest::Approx(std::sqrt(c.uav.a_max * 10.0)));
  CHECK(v_tight * v_tight / 10.0 <= c.uav.a_max * (1 + 1e-12));

  baselines::BaselineSpec spec;
  CHECK(baselines::angular_speed(spec, c) == doctest::Approx(20.0 / 300.0));
}

TEST_CASE("circle tracking stays near the loiter radius") {
  ScenarioConfig c;
  c.num_vehicles = 4;
  RandomOffloadingPolicy policy;
  Env env(c);
  Eigen::VectorXd obs = env.reset(17);
  policy.on_reset(env.state_mut(), c);
  CHECK(env.state().uav_position.head<2>().norm() == doctest::Approx(300.0));

  Rng rng(18);
  double max_drift = 0.0;
  double angle_covered = 0.0;
  Eigen::Vector2d prev = env.state().uav_position.head<2>();
  for (int n = 0; n < c.num_slots; ++n) {
    const Action a = policy.act(obs, env.state(), c, rng, false);
    const auto r = env.step(a);
    obs = r.observation;
    const Eigen::Vector2d pos = env.state().uav_position.head<2>();
    max_drift = std::max(max_drift, std::abs(pos.norm() - 300.0));
    const double cross = prev.x() * pos.y() - prev.y() * pos.x();
    angle_covered += std::asin(
        std::clamp(cross / (prev.norm() * pos.norm()), -1.0, 1.0));
    prev = pos;
  }
  CHECK(max_drift < 5.0);
  // it actually goes around (20 m/s on a 300 m circle for 40 s)
  CHECK(angle_covered > 2.0);
}

TEST_CASE("allocations are fixed, partitions random, actions feasible") {
  ScenarioConfig c;
  RandomOffloadingPolicy policy;
  Env env(c);
  Eigen::VectorXd obs = env.reset(19);
  policy.on_reset(env.state_mut(), c);
  Rng rng(20);

  Eigen::VectorXd first_uav, first_rsu;
  bool partitions_vary = false;
  Eigen::VectorXd prev_partition;
  for (int n = 0; n < 20; ++n) {
    const Action a = policy.act(obs, env.state(), c, rng, false);
    CHECK(oracle::action_feasible(a, c));
    CHECK(action_is_feasible(a, c));
    if (n == 0) {
      first_uav = a.uav_alloc;
      first_rsu = a.rsu_alloc;
    } else {
      CHECK((a.uav_alloc.array() == first_uav.array()).all());
      CHECK((a.rsu_alloc.array() == first_rsu.array()).all());
      if ((a.partition.array() != prev_partition.array()).any()) {
        partitions_vary = true;
      }
    }
    prev_partition = a.partition;
    obs = env.step(a).observation;
  }
  CHECK((first_uav.array() == c.uav_cpu_max / c.num_vehicles).all());
  CHECK((first_rsu.array() == c.rsu_cpu_per_vehicle_max / 2.0).all());
  CHECK(partitions_vary);
}

TEST_CASE("baseline evaluation is deterministic under a fixed seed") {
  ScenarioConfig c;
  c.num_vehicles = 3;
  c.num_slots = 10;
  c.period = 10.0;
  RandomOffloadingPolicy p1, p2;
  const auto a = rl::evaluate(p1, c, 3, 77, false);
  const auto b = rl::evaluate(p2, c, 3, 77, false);
  CHECK(a.mean_cost == b.mean_cost);
  CHECK(a.std_cost == b.std_cost);
  CHECK(a.violation_rate == b.violation_rate);
}

TEST_CASE("recovery from the degenerate center pose") {
  ScenarioConfig c;
  c.num_vehicles = 2;
  RandomOffloadingPolicy policy;
  Env env(c);
  Eigen::VectorXd obs = env.reset(23);  // aerial server above the origin
  Rng rng(24);
  for (int n = 0; n < c.num_slots; ++n) {
    const Action a = policy.act(obs, env.state(), c, rng, false);
    CHECK(a.accel.norm() <= c.uav.a_max * (1 + 1e-12));
    obs = env.step(a).observation;
  }
  // it has left the center and is heading toward the circle
  CHECK(env.state().uav_position.head<2>().norm() > 50.0);
}
