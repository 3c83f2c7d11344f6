#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "flexedge/rl.hpp"
#include "oracles.hpp"

using namespace flexedge;

TEST_CASE("advantage estimation") {
  SUBCASE("single step reduces to the reward") {
    Eigen::VectorXd r(1), v(2);
    r << 1.0;
    v << 0.0, 0.0;
    const auto g = rl::compute_gae(r, v, 0.95, 0.95);
    CHECK(g.advantages(0) == doctest::Approx(1.0));
    CHECK(g.targets(0) == doctest::Approx(1.0));
  }
  SUBCASE("lambda zero degenerates to one-step residuals") {
    Rng rng(10);
    Eigen::VectorXd r(12), v(13);
    for (int i = 0; i < 12; ++i) r(i) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 13; ++i) v(i) = rng.uniform(-1.0, 1.0);
    const double gamma = 0.9;
    const auto g = rl::compute_gae(r, v, gamma, 1e-300);
    for (int i = 0; i < 12; ++i) {
      const double delta = r(i) + gamma * v(i + 1) - v(i);
      CHECK(g.advantages(i) == doctest::Approx(delta).epsilon(1e-10));
    }
  }
  SUBCASE("recursion matches the brute-force double sum") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 40;
      Eigen::VectorXd r(n), v(n + 1);
      for (int i = 0; i < n; ++i) r(i) = rng.uniform(-2.0, 2.0);
      for (int i = 0; i <= n; ++i) v(i) = rng.uniform(-2.0, 2.0);
      v(n) = 0.0;
      const double gamma = rng.uniform(0.5, 1.0);
      const double lambda = rng.uniform(0.5, 1.0);
      const auto g = rl::compute_gae(r, v, gamma, lambda);
      const auto ref = oracle::gae_double_sum(r, v, gamma, lambda);
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(g.advantages(i) - ref(i)) < 1e-10);
        CHECK(g.targets(i) ==
              doctest::Approx(g.advantages(i) + v(i)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(
        rl::compute_gae(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3),
                        0.9, 0.9),
        std::invalid_argument);
  }
}

TEST_CASE("clipped surrogate") {
  const double ent = 0.0;
  SUBCASE("identity ratio recovers the mean advantage") {
    Eigen::VectorXd lp = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd adv(4);
    adv << 1.0, -2.0, 0.5, 3.0;
    const auto r = rl::ppo_actor_loss(lp, lp, adv, 0.2, 0.0, ent);
    CHECK(r.surrogate == doctest::Approx(adv.mean()).epsilon(1e-12));
    CHECK(r.loss == doctest::Approx(-adv.mean()).epsilon(1e-12));
    CHECK(r.clip_fraction == 0.0);
    CHECK(r.approx_kl == doctest::Approx(0.0));
  }
  SUBCASE("positive advantage, ratio above the band") {
    Eigen::VectorXd lp_new(1), lp_old(1), adv(1);
    lp_new << std::log(1.5);
    lp_old << 0.0;
    adv << 1.0;
    const auto r = rl::ppo_actor_loss(lp_new, lp_old, adv, 0.2, 0.0, ent);
    CHECK(r.surrogate == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(r.dlog_prob(0) == 0.0);  // saturated: no gradient through the ratio
    CHECK(r.clip_fraction == 1.0);
  }
  SUBCASE("negative advantage, ratio below the band") {
    Eigen::VectorXd lp_new(1), lp_old(1), adv(1);
    lp_new << std::log(0.5);
    lp_old << 0.0;
    adv << -1.0;
    const auto r = rl::ppo_actor_loss(lp_new, lp_old, adv, 0.2, 0.0, ent);
    CHECK(r.surrogate == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(r.dlog_prob(0) == 0.0);
  }
  SUBCASE("a wide band reproduces the unclipped objective") {
    Rng rng(12);
    const int n = 64;
    Eigen::VectorXd lp_new(n), lp_old(n), adv(n);
    for (int i = 0; i < n; ++i) {
      lp_new(i) = rng.uniform(-2.0, 2.0);
      lp_old(i) = rng.uniform(-2.0, 2.0);
      adv(i) = rng.uniform(-2.0, 2.0);
    }
    const auto wide = rl::ppo_actor_loss(lp_new, lp_old, adv, 0.999999e6, 0.0, ent);
    const Eigen::ArrayXd ratio = (lp_new - lp_old).array().exp();
    CHECK(wide.surrogate ==
          doctest::Approx((ratio * adv.array()).mean()).epsilon(1e-9));
    CHECK(wide.clip_fraction == 0.0);
  }
  SUBCASE("inside the band clipping is inactive per sample") {
    Rng rng(13);
    const int n = 200;
    Eigen::VectorXd lp_new(n), lp_old(n), adv(n);
    for (int i = 0; i < n; ++i) {
      lp_old(i) = rng.uniform(-1.0, 1.0);
      lp_new(i) = lp_old(i) + rng.uniform(-0.05, 0.05);  // ratio near 1
      adv(i) = rng.uniform(-2.0, 2.0);
    }
    const auto tight = rl::ppo_actor_loss(lp_new, lp_old, adv, 0.2, 0.0, ent);
    const auto wide = rl::ppo_actor_loss(lp_new, lp_old, adv, 0.9e9, 0.0, ent);
    CHECK(tight.surrogate == doctest::Approx(wide.surrogate).epsilon(1e-12));
    for (int i = 0; i < n; ++i) {
      CHECK(tight.dlog_prob(i) ==
            doctest::Approx(wide.dlog_prob(i)).epsilon(1e-12));
    }
  }
  SUBCASE("non-finite inputs are a training fault") {
    Eigen::VectorXd bad(1), ok(1);
    bad << std::numeric_limits<double>::quiet_NaN();
    ok << 0.0;
    CHECK_THROWS_AS(rl::ppo_actor_loss(bad, ok, ok, 0.2, 0.0, ent),
                    std::runtime_error);
  }
}

TEST_CASE("after synchronization the surrogate gradient is the plain one") {
  // with log-probs equal, each per-sample gradient is -A_i / n, exactly the
  // unclipped advantage-weighted objective's
  Rng rng(14);
  const int n = 32;
  Eigen::VectorXd lp(n), adv(n);
  for (int i = 0; i < n; ++i) {
    lp(i) = rng.uniform(-1.0, 1.0);
    adv(i) = rng.uniform(-2.0, 2.0);
  }
  const auto clipped = rl::ppo_actor_loss(lp, lp, adv, 0.2, 0.0, 0.0);
  const auto plain = rl::a2c_actor_loss(lp, adv, 0.0, 0.0);
  for (int i = 0; i < n; ++i) {
    CHECK(clipped.dlog_prob(i) ==
          doctest::Approx(plain.dlog_prob(i)).epsilon(1e-12));
    CHECK(clipped.dlog_prob(i) ==
          doctest::Approx(-adv(i) / n).epsilon(1e-12));
  }
}

TEST_CASE("critic loss") {
  Eigen::VectorXd a(3), b(3);
  a << 1.0, 2.0, 3.0;
  CHECK(rl::critic_loss(a, a) == 0.0);

  Eigen::VectorXd p(1), t(1);
  p << 0.0;
  t << 2.0;
  CHECK(rl::critic_loss(p, t) == doctest::Approx(4.0));

  Rng rng(15);
  const int n = 100;
  Eigen::VectorXd x(n), y(n);
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    x(i) = rng.uniform(-3.0, 3.0);
    y(i) = rng.uniform(-3.0, 3.0);
    xs[i] = x(i);
    ys[i] = y(i);
  }
  Eigen::VectorXd grad;
  const double loss = rl::critic_loss(x, y, &grad);
  CHECK(loss ==
        doctest::Approx(oracle::mean_squared_error(xs, ys)).epsilon(1e-12));
  for (int i = 0; i < n; ++i) {
    CHECK(grad(i) == doctest::Approx(2.0 * (x(i) - y(i)) / n).epsilon(1e-12));
  }
}

TEST_CASE("advantage normalization preserves the ordering") {
  Rng rng(16);
  Eigen::VectorXd adv(64);
  for (int i = 0; i < 64; ++i) adv(i) = rng.uniform(-100.0, 100.0);
  Eigen::VectorXd scaled = adv;
  rl::normalize_advantages(scaled);
  CHECK(std::abs(scaled.mean()) < 1e-9);
  CHECK(std::abs(scaled.squaredNorm() / 64 - 1.0) < 1e-6);
  std::vector<int> order_a(64);
  std::iota(order_a.begin(), order_a.end(), 0);
  std::vector<int> order_b(order_a);
  std::sort(order_a.begin(), order_a.end(),
            [&](int i, int j) { return adv(i) < adv(j); });
  std::sort(order_b.begin(), order_b.end(),
            [&](int i, int j) { return scaled(i) < scaled(j); });
  CHECK(order_a == order_b);
}

TEST_CASE("training with zero episodes returns the initial parameters") {
  ScenarioConfig scen;
  scen.num_vehicles = 2;
  scen.num_slots = 4;
  scen.period = 4.0;
  rl::TrainConfig tc;
  tc.total_episodes = 0;
  tc.hidden_sizes = {8};
  tc.seed = 42;
  const auto result = rl::train(scen, tc, rl::Algo::ppo);
  CHECK(result.episodes_completed == 0);
  CHECK(result.history.empty());

  Rng init(mix_seed(42, rl::kParamInitStream));
  const auto expected = nn::init_policy(observation_dim(scen),
                                        action_dim(scen), tc.hidden_sizes,
                                        init, tc.init_log_std);
  for (std::size_t l = 0; l < expected.actor.weights.size(); ++l) {
    CHECK((result.params.actor.weights[l].array() ==
           expected.actor.weights[l].array())
              .all());
  }
}

TEST_CASE("tiny training runs are reproducible") {
  ScenarioConfig scen;
  scen.num_vehicles = 2;
  scen.num_slots = 6;
  scen.period = 6.0;
  rl::TrainConfig tc;
  tc.total_episodes = 6;
  tc.episodes_per_update = 2;
  tc.epochs_per_update = 2;
  tc.minibatch_size = 8;
  tc.hidden_sizes = {12};
  tc.seed = 3;

  const auto a = rl::train(scen, tc, rl::Algo::ppo);
  const auto b = rl::train(scen, tc, rl::Algo::ppo);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].cost == b.history[i].cost);
    CHECK(a.history[i].reward == b.history[i].reward);
    CHECK(a.history[i].penalty == b.history[i].penalty);
  }
  CHECK(a.episodes_completed == 6);

  // the a2c mode runs and differs from the clipped variant
  const auto c = rl::train(scen, tc, rl::Algo::a2c);
  CHECK(c.episodes_completed == 6);
}

TEST_CASE("evaluation contract") {
  ScenarioConfig scen;
  scen.num_vehicles = 2;
  scen.num_slots = 5;
  scen.period = 5.0;
  Rng init(1);
  auto params = nn::init_policy(observation_dim(scen), action_dim(scen), {8},
                                init, -0.5);
  rl::NetworkPolicy policy(params);

  SUBCASE("zero episodes is an error") {
    CHECK_THROWS_AS(rl::evaluate(policy, scen, 0, 1, true),
                    std::invalid_argument);
  }
  SUBCASE("deterministic evaluation repeats exactly") {
    const auto a = rl::evaluate(policy, scen, 3, 9, true);
    const auto b = rl::evaluate(policy, scen, 3, 9, true);
    CHECK(a.mean_cost == b.mean_cost);
    CHECK(a.std_cost == b.std_cost);
    CHECK(a.mean_penalty == b.mean_penalty);
  }
  SUBCASE("trajectory covers every slot of the last episode") {
    const auto r = rl::evaluate(policy, scen, 2, 9, true);
    REQUIRE(r.trajectory.size() == static_cast<std::size_t>(scen.num_slots));
    for (int n = 0; n < scen.num_slots; ++n) {
      CHECK(r.trajectory[n].slot == n + 1);
      CHECK(r.trajectory[n].vehicle_xy.size() ==
            static_cast<std::size_t>(2 * scen.num_vehicles));
    }
  }
  SUBCASE("episode offset aligns worlds with training episodes") {
    // offset k means episode k of a training run with the same seed
    const auto a = rl::evaluate(policy, scen, 1, 9, true, 5);
    const auto b = rl::evaluate(policy, scen, 1, 9, true, 5);
    CHECK(a.mean_cost == b.mean_cost);
  }
}
