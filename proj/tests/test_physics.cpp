#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "flexedge/physics.hpp"
#include "flexedge/rng.hpp"
#include "oracles.hpp"

using namespace flexedge;
namespace ph = flexedge::physics;

namespace {
constexpr double kRel = 1e-9;

bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}
}  // namespace

TEST_CASE("channel gain follows the inverse-square law") {
  const Eigen::Vector3d uav(0, 0, 100), veh(0, 0, 0);
  const double h = ph::channel_gain<double>(uav, veh, 1e-3);
  CHECK(h == doctest::Approx(1e-7).epsilon(1e-12));

  // doubling the distance quarters the gain
  const Eigen::Vector3d far(0, 0, 200);
  CHECK(ph::channel_gain<double>(far, veh, 1e-3) ==
        doctest::Approx(h / 4.0).epsilon(1e-12));

  CHECK_THROWS_AS(ph::channel_gain<double>(uav, uav, 1e-3),
                  std::domain_error);
}

TEST_CASE("uplink rate matches the high-precision reference") {
  const double r = ph::uplink_rate(1e-7, 0.5, 2e6, 12, 1e-16);
  const long double ref = oracle::uplink_rate(1e-7L, 0.5L, 2e6L, 12, 1e-16L);
  CHECK(close_rel(r, static_cast<double>(ref), kRel));
  CHECK(r == doctest::Approx(1.9252046e6).epsilon(1e-6));

  // relay link with the reference geometry
  const Eigen::Vector3d uav(0, 0, 100), rsu(-50, 0, 0);
  const double h = ph::channel_gain<double>(uav, rsu, 1e-3);
  CHECK(h == doctest::Approx(8e-8).epsilon(1e-12));
  const double rr = ph::uplink_rate(h, 0.8, 2e6, 12, 1e-16);
  const long double rref = oracle::uplink_rate(8e-8L, 0.8L, 2e6L, 12, 1e-16L);
  CHECK(close_rel(rr, static_cast<double>(rref), kRel));
  CHECK(rr == doctest::Approx(1.9845444e6).epsilon(1e-6));

  // vanishing signal
  CHECK(ph::uplink_rate(1e-30, 0.5, 2e6, 12, 1e-16) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("uplink rate monotonicity") {
  const Eigen::Vector3d veh(0, 0, 0);
  double prev = std::numeric_limits<double>::infinity();
  for (double d = 50; d <= 800; d += 50) {
    const Eigen::Vector3d uav(d, 0, 100);
    const double r = ph::uplink_rate(
        ph::channel_gain<double>(uav, veh, 1e-3), 0.5, 2e6, 12, 1e-16);
    CHECK(r < prev);
    prev = r;
  }
  double prev_p = 0.0;
  for (double p = 0.1; p <= 2.0; p += 0.1) {
    const double r = ph::uplink_rate(1e-7, p, 2e6, 12, 1e-16);
    CHECK(r > prev_p);
    prev_p = r;
  }
  double prev_b = 0.0;
  for (double b = 5e5; b <= 5e6; b += 5e5) {
    const double r = ph::uplink_rate(1e-7, 0.5, b, 12, 1e-16);
    CHECK(r > prev_b);
    prev_b = r;
  }
}

TEST_CASE("local compute time split") {
  SUBCASE("zero deviation") {
    const auto r = ph::local_compute<double>(0.0, 1e6, 1000, 1e9, 0.0);
    CHECK(r.est_time == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.time_gap == 0.0);
    CHECK(r.actual_time == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("full offload leaves nothing local") {
    const auto r = ph::local_compute<double>(1.0, 1e6, 1000, 1e9, 1e8);
    CHECK(r.est_time == 0.0);
    CHECK(r.time_gap == 0.0);
    CHECK(r.actual_time == 0.0);
  }
  SUBCASE("positive deviation speeds up the real device") {
    const auto r = ph::local_compute<double>(0.0, 1e6, 1000, 1e9, 1e8);
    CHECK(close_rel(r.actual_time, 1e9 / 1.1e9, 1e-12));
    CHECK(r.time_gap == doctest::Approx(-1.0 / 11.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ph::local_compute<double>(0.0, 1e6, 1000, 1e9, -1e9),
                  std::domain_error);
  CHECK_THROWS_AS(ph::local_compute<double>(0.0, 1e6, 1000, 0.0, 0.0),
                  std::domain_error);
}

TEST_CASE("offload time") {
  CHECK(ph::offload_time<double>(0.0, 1e6, 1e6) == 0.0);
  CHECK(ph::offload_time<double>(1.0, 2e6, 2e6) == doctest::Approx(1.0));
  CHECK(ph::offload_time<double>(0.5, 1e6, 1.9252e6) ==
        doctest::Approx(0.2597132765426969).epsilon(1e-12));
  CHECK_THROWS_AS(ph::offload_time<double>(0.5, 1e6, 0.0), std::domain_error);
}

TEST_CASE("aerial compute energy and relay split") {
  SUBCASE("budget-limited energy") {
    // f = 2e9 over half a second fits 1e9 cycles; the 5e8-cycle load wins
    const auto r =
        ph::uav_compute<double>(0.5, 1e6, 1000, 1.0, 0.5, 2e9, 0.0, 1e-26);
    CHECK(r.energy == doctest::Approx(20.0).epsilon(1e-12));
  }
  SUBCASE("no offload, no cost") {
    const auto r =
        ph::uav_compute<double>(0.0, 1e6, 1000, 1.0, 0.0, 2e9, 0.0, 1e-26);
    CHECK(r.energy == 0.0);
    CHECK(r.relayed_bits == 0.0);
    CHECK(r.actual_time == 0.0);
  }
  SUBCASE("leftover bits relay") {
    const auto r =
        ph::uav_compute<double>(1.0, 1e6, 1000, 1.0, 0.5, 1e9, 0.0, 1e-26);
    CHECK(r.relayed_bits == doctest::Approx(5e5).epsilon(1e-12));
  }
  SUBCASE("relay share never exceeds the offloaded share") {
    Rng rng(41);
    for (int i = 0; i < 1000; ++i) {
      const double alpha = rng.uniform();
      const double bits = rng.uniform(0.2e6, 2e6);
      const double density = rng.uniform(500, 1500);
      const double f = rng.uniform(0, 2e10);
      const double t_off = rng.uniform(0, 1.5);
      const auto r = ph::uav_compute<double>(alpha, bits, density, 1.0, t_off,
                                             f, 0.0, 1e-26);
      CHECK(r.relayed_bits >= 0.0);
      CHECK(r.relayed_bits <= alpha * bits + 1e-9);
      CHECK(r.energy >= 0.0);
    }
  }
  SUBCASE("zero allocation with work assigned never completes on board") {
    const auto r =
        ph::uav_compute<double>(0.5, 1e6, 1000, 1.0, 0.1, 0.0, 0.0, 1e-26);
    CHECK(std::isinf(r.est_time));
    CHECK(std::isinf(r.actual_time));
    CHECK(r.energy == 0.0);
    CHECK(r.relayed_bits == doctest::Approx(5e5));
  }
  SUBCASE("late arrival relays everything") {
    const auto r =
        ph::uav_compute<double>(0.5, 1e6, 1000, 1.0, 1.2, 1e9, 0.0, 1e-26);
    CHECK(r.energy == 0.0);
    CHECK(r.relayed_bits == doctest::Approx(5e5));
  }
  CHECK_THROWS_AS(
      ph::uav_compute<double>(0.5, 1e6, 1000, 1.0, 0.1, 1e9, -2e9, 1e-26),
      std::domain_error);
}

TEST_CASE("aerial energy monotone when the load term binds") {
  // grid chosen so the workload branch of the min is active throughout
  const double bits = 1e6, density = 500, deadline = 1.0, t_off = 0.1;
  double prev_alpha = -1.0;
  for (double alpha = 0.1; alpha <= 0.9; alpha += 0.1) {
    const auto r = ph::uav_compute<double>(alpha, bits, density, deadline,
                                           t_off, 2e9, 0.0, 1e-26);
    CHECK(r.energy > prev_alpha);
    prev_alpha = r.energy;
  }
  double prev_f = -1.0;
  for (double f = 1e9; f <= 1e10; f += 1e9) {
    const auto r = ph::uav_compute<double>(0.5, bits, density, deadline,
                                           t_off, f, 0.0, 1e-26);
    CHECK(r.energy > prev_f);
    prev_f = r.energy;
  }
}

TEST_CASE("roadside compute") {
  SUBCASE("nothing relayed, nothing spent") {
    const auto r = ph::rsu_compute<double>(0.0, 1000, 1.0, 0.0, 1e9, 0.0, 1e-26);
    CHECK(r.energy == 0.0);
    CHECK(r.actual_time == 0.0);
  }
  SUBCASE("load-limited energy") {
    const auto r =
        ph::rsu_compute<double>(5e5, 1000, 1.0, 0.25, 1e9, 0.0, 1e-26);
    CHECK(r.energy == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("zero deviation reproduces the twin estimate") {
    const auto r =
        ph::rsu_compute<double>(5e5, 1000, 1.0, 0.25, 1e9, 0.0, 1e-26);
    CHECK(r.actual_time == doctest::Approx(5e5 * 1000 / 1e9).epsilon(1e-15));
    CHECK(r.time_gap == 0.0);
  }
  CHECK_THROWS_AS(
      ph::rsu_compute<double>(5e5, 1000, 1.0, 0.25, 1e9, -2e9, 1e-26),
      std::domain_error);
}

TEST_CASE("relay time") {
  CHECK(ph::relay_time<double>(0.0, 1e6) == 0.0);
  CHECK(ph::relay_time<double>(1.9845e6, 1.9845e6) == doctest::Approx(1.0));
  CHECK(ph::relay_time<double>(5e5, 1.9845e6) ==
        doctest::Approx(0.2519526329050139).epsilon(1e-12));
  CHECK_THROWS_AS(ph::relay_time<double>(5e5, 0.0), std::domain_error);
}

TEST_CASE("edge latency takes the slower concurrent branch") {
  CHECK(ph::edge_latency<double>(0.26, 0.0, 0.0, 0.5) ==
        doctest::Approx(0.76).epsilon(1e-15));
  CHECK(ph::edge_latency<double>(0.0, 0.0, 0.0, 0.0) == 0.0);
  CHECK(ph::edge_latency<double>(0.2, 0.3, 0.4, 0.5) ==
        doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("twin estimate plus gap equals the closed-form actual time") {
  // the identity est + gap == cycles / (est_freq + dev) on all three paths
  Rng rng(123);
  for (int i = 0; i < 10000; ++i) {
    const double alpha = rng.uniform();
    const double bits = rng.uniform(0.2e6, 2e6);
    const double density = rng.uniform(500, 1500);
    const double f_local = rng.uniform(1e8, 5e9);
    const double dv_local = f_local * rng.uniform(-0.9, 0.9);
    const auto local =
        ph::local_compute(alpha, bits, density, f_local, dv_local);
    const double expect_local =
        (1.0 - alpha) * bits * density / (f_local + dv_local);
    CHECK(local.actual_time ==
          doctest::Approx(expect_local).epsilon(1e-9));

    const double f_uav = rng.uniform(1e8, 2e10);
    const double dv_uav = f_uav * rng.uniform(-0.9, 0.9);
    const auto uav = ph::uav_compute(alpha, bits, density, 1.0, 0.1, f_uav,
                                     dv_uav, 1e-26);
    if (alpha > 0) {
      const double expect_uav = alpha * bits * density / (f_uav + dv_uav);
      CHECK(uav.actual_time == doctest::Approx(expect_uav).epsilon(1e-9));
    }

    const double relayed = rng.uniform(0.0, 1e6);
    const double f_rsu = rng.uniform(1e8, 2e9);
    const double dv_rsu = f_rsu * rng.uniform(-0.9, 0.9);
    const auto rsu = ph::rsu_compute(relayed, density, 1.0, 0.1, f_rsu,
                                     dv_rsu, 1e-26);
    if (relayed > 0) {
      const double expect_rsu = relayed * density / (f_rsu + dv_rsu);
      CHECK(rsu.actual_time == doctest::Approx(expect_rsu).epsilon(1e-9));
    }
  }
}

TEST_CASE("deviation sign drives the gap sign") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double bits = rng.uniform(0.2e6, 2e6);
    const double density = rng.uniform(500, 1500);
    const double f = rng.uniform(1e8, 5e9);
    const double dev = f * rng.uniform(-0.9, 0.9);
    const auto r = ph::local_compute(0.25, bits, density, f, dev);
    if (dev > 0) CHECK(r.time_gap < 0);
    if (dev < 0) CHECK(r.time_gap > 0);
    if (dev == 0) CHECK(r.time_gap == 0);
  }
}

TEST_CASE("kinematics update") {
  const Eigen::Vector3d q(0, 0, 100);
  SUBCASE("plain double integration") {
    const auto r = ph::update_kinematics<double>(
        q, {10, 0}, {2, 0}, 1.0, 20.0, 5.0);
    CHECK(r.position(0) == doctest::Approx(11.0));
    CHECK(r.position(1) == doctest::Approx(0.0));
    CHECK(r.position(2) == doctest::Approx(100.0));
    CHECK(r.velocity(0) == doctest::Approx(12.0));
  }
  SUBCASE("speed saturates") {
    const auto r = ph::update_kinematics<double>(
        q, {20, 0}, {2, 0}, 1.0, 20.0, 5.0);
    CHECK(r.velocity.norm() == doctest::Approx(20.0).epsilon(1e-12));
  }
  SUBCASE("acceleration saturates, direction preserved") {
    const auto r = ph::update_kinematics<double>(
        q, {0, 0}, {6, 8}, 1.0, 20.0, 5.0);
    CHECK(r.applied_accel.norm() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.applied_accel(0) / r.applied_accel(1) ==
          doctest::Approx(6.0 / 8.0).epsilon(1e-12));
  }
}

TEST_CASE("propulsion power decomposition against the reference") {
  ph::RotorParams<double> rotor;  // reference constants
  SUBCASE("hover") {
    CHECK(close_rel(ph::propulsion_power(0.0, rotor), 128.10, kRel));
    const Eigen::Vector2d v(0, 0);
    CHECK(close_rel(ph::propulsion_energy<double>(v, 1.0, rotor), 128.10,
                    kRel));
  }
  SUBCASE("term-by-term at sampled speeds") {
    for (double v : {0.0, 1.0, 3.6, 5.0, 10.0, 15.0, 20.0}) {
      const auto ref = oracle::propulsion_terms(v, 39.03L, 89.07L, 100.0L,
                                                3.6L, 0.6L, 0.05L, 1.225L,
                                                0.5030L, 3);
      CHECK(close_rel(ph::propulsion_power(v, rotor),
                      static_cast<double>(ref.total()), kRel));
    }
    // frozen from the reference evaluation at v = 20
    CHECK(close_rel(ph::propulsion_power(20.0, rotor), 209.52584487499523,
                    1e-12));
  }
  SUBCASE("printed cubic profile term vs the quadratic variant") {
    ph::RotorParams<double> quad = rotor;
    quad.profile_speed_exponent = 2;
    const auto ref = oracle::propulsion_terms(20.0, 39.03L, 89.07L, 100.0L,
                                              3.6L, 0.6L, 0.05L, 1.225L,
                                              0.5030L, 2);
    CHECK(close_rel(ph::propulsion_power(20.0, quad),
                    static_cast<double>(ref.total()), kRel));
    CHECK(ph::propulsion_power(20.0, quad) <
          ph::propulsion_power(20.0, rotor));
  }
  SUBCASE("isotropy") {
    const Eigen::Vector2d a(12, 5), b(-5, 12), c(13, 0);
    CHECK(ph::propulsion_energy<double>(a, 1.0, rotor) ==
          doctest::Approx(ph::propulsion_energy<double>(b, 1.0, rotor))
              .epsilon(1e-12));
    CHECK(ph::propulsion_energy<double>(a, 1.0, rotor) ==
          doctest::Approx(ph::propulsion_energy<double>(c, 1.0, rotor))
              .epsilon(1e-12));
  }
  SUBCASE("extended-precision instantiation agrees") {
    ph::RotorParams<long double> wide;
    for (double v : {0.0, 7.5, 20.0}) {
      CHECK(close_rel(ph::propulsion_power(v, rotor),
                      static_cast<double>(
                          ph::propulsion_power<long double>(v, wide)),
                      1e-12));
    }
  }
}
