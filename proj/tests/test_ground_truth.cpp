#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "matd/errors.hpp"
#include "matd/ground_truth.hpp"
#include "matd/rng.hpp"

using namespace matd;

TEST_CASE("exact value function") {
  SUBCASE("desk instance, hand-solved 2x2 system") {
    const auto value = exact_value(testing::desk_mrp());
    CHECK(std::abs(value(0) - 24.0 / 13.0) <= 1e-10);
    CHECK(std::abs(value(1) - 4.0 / 13.0) <= 1e-10);
  }
  SUBCASE("zero rewards give zero value") {
    auto mrp = testing::desk_mrp();
    mrp.rewards.setZero();
    CHECK(exact_value(mrp).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("absorbing states give r / (1 - gamma)") {
    MarkovRewardProcess mrp;
    mrp.kernel.p = Eigen::MatrixXd::Identity(3, 3);
    mrp.rewards.resize(3);
    mrp.rewards << 1.0, -2.0, 0.5;
    mrp.gamma = 0.25;
    mrp.reward_bound = 2.0;
    const auto value = exact_value(mrp);
    for (int s = 0; s < 3; ++s)
      CHECK(value(s) == doctest::Approx(mrp.rewards(s) / 0.75).epsilon(1e-14));
  }
}

TEST_CASE("steady-state direction") {
  const auto mrp = testing::desk_mrp();
  const auto phi = identity_features(2);
  const auto pi = testing::desk_pi();

  SUBCASE("vanishes at the fixed point") {
    CHECK(steady_state_direction(mrp, phi, pi, testing::desk_theta_star()).norm() <= 1e-10);
  }
  SUBCASE("at theta = 0 it is D r") {
    const auto direction = steady_state_direction(mrp, phi, pi, Eigen::VectorXd::Zero(2));
    CHECK(direction(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(direction(1) == doctest::Approx(0.0));
  }
  SUBCASE("matches a Monte Carlo sampling oracle") {
    Rng rng(314);
    Eigen::VectorXd theta(2);
    theta << 0.7, -0.4;
    const int samples = 1000000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < samples; ++i) {
      const int s = rng.uniform01() < pi(0) ? 0 : 1;
      const auto obs = sample_step(mrp, s, rng);
      const Eigen::VectorXd g = td_direction(phi, mrp.gamma, theta, obs);
      sum += g;
      sum_sq += g.cwiseProduct(g);
    }
    const Eigen::VectorXd mc_mean = sum / samples;
    const auto exact = steady_state_direction(mrp, phi, pi, theta);
    for (int c = 0; c < 2; ++c) {
      const double var = sum_sq(c) / samples - mc_mean(c) * mc_mean(c);
      const double se = std::sqrt(var / samples);
      CHECK(std::abs(mc_mean(c) - exact(c)) <= 3.0 * se + 1e-12);
    }
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(steady_state_direction(mrp, phi, pi, Eigen::VectorXd::Zero(3)),
                    DimensionMismatch);
  }
}

TEST_CASE("projected fixed point") {
  const auto mrp = testing::desk_mrp();
  const auto pi = testing::desk_pi();

  SUBCASE("tabular features reduce to the exact value") {
    const auto phi = identity_features(2);
    const auto fixed_point = theta_star(mrp, phi, pi);
    CHECK(std::abs(fixed_point(0) - 24.0 / 13.0) <= 1e-10);
    CHECK(std::abs(fixed_point(1) - 4.0 / 13.0) <= 1e-10);
    CHECK((fixed_point - exact_value(mrp)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("root property on a random projected instance") {
    const auto big = generate_ergodic_mrp(25, 0.7, 1.0, 0.1, 5);
    const auto big_pi = stationary_distribution(big.kernel).pi;
    const auto big_phi = build_orthonormal_features(25, 6, 5);
    const auto fixed_point = theta_star(big, big_phi, big_pi);
    CHECK(steady_state_direction(big, big_phi, big_pi, fixed_point).norm() <= 1e-10);
  }
}

TEST_CASE("omega") {
  const auto pi = testing::desk_pi();
  SUBCASE("tabular: omega = min_s pi_s") {
    CHECK(std::abs(omega(identity_features(2), pi) - 1.0 / 3.0) <= 1e-12);
  }
  SUBCASE("quadratic scaling in a uniform column scale") {
    const auto big = generate_ergodic_mrp(20, 0.5, 1.0, 0.1, 21);
    const auto big_pi = stationary_distribution(big.kernel).pi;
    auto phi = build_orthonormal_features(20, 4, 9);
    const double base = omega(phi, big_pi);
    FeatureMatrix scaled{0.5 * phi.phi};
    CHECK(omega(scaled, big_pi) == doctest::Approx(0.25 * base).epsilon(1e-10));
  }
}

TEST_CASE("sigma_const") {
  Eigen::VectorXd small_star(2);
  small_star << 0.3, 0.4;  // norm 0.5
  CHECK(sigma_const(0.5, small_star, small_star) == 1.0);  // floor at 1

  CHECK(sigma_const(5.0, small_star, small_star) == 5.0);  // max selection

  // Desk instance, theta0 = 0: sigma = ||theta*|| = sqrt(592)/13 ~ 1.8716.
  const double desk_sigma =
      sigma_const(1.0, testing::desk_theta_star(), Eigen::VectorXd::Zero(2));
  CHECK(desk_sigma == doctest::Approx(std::sqrt(592.0) / 13.0).epsilon(1e-14));
  CHECK(std::abs(desk_sigma - 1.8718) <= 1e-3);
}

TEST_CASE("strong monotonicity of the steady-state direction") {
  Rng rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mrp = generate_ergodic_mrp(12, 0.6, 1.0, 0.1, 1000 + trial);
    const auto pi = stationary_distribution(mrp.kernel).pi;
    const auto phi = build_orthonormal_features(12, 4, 2000 + trial);
    const auto gt = compute_ground_truth(mrp, phi, pi, Eigen::VectorXd::Zero(4));
    for (int i = 0; i < 100; ++i) {
      const double scale = std::pow(10.0, -2.0 + 4.0 * rng.uniform01());
      const Eigen::VectorXd theta = testing::random_theta(4, scale, rng);
      const Eigen::VectorXd gap = gt.theta_star - theta;
      const double lhs = gap.dot(steady_state_direction(mrp, phi, pi, theta));
      const double rhs = gt.omega * (1.0 - mrp.gamma) * gap.squaredNorm();
      CHECK(lhs >= rhs - 1e-9 * (1.0 + theta.squaredNorm()));
    }
  }
}

TEST_CASE("direction is affine with the stated linear part") {
  const auto mrp = generate_ergodic_mrp(15, 0.8, 1.0, 0.1, 31);
  const auto pi = stationary_distribution(mrp.kernel).pi;
  const auto phi = build_orthonormal_features(15, 5, 31);
  const Eigen::MatrixXd linear = direction_linear_part(mrp, phi, pi);

  Rng rng(8);
  const Eigen::VectorXd theta = testing::random_theta(5, 1.0, rng);
  const double h = 1e-6;
  for (int j = 0; j < 5; ++j) {
    Eigen::VectorXd up = theta, down = theta;
    up(j) += h;
    down(j) -= h;
    const Eigen::VectorXd fd = (steady_state_direction(mrp, phi, pi, up) -
                                steady_state_direction(mrp, phi, pi, down)) /
                               (2.0 * h);
    CHECK((fd - linear.col(j)).cwiseAbs().maxCoeff() <= 1e-6);
  }

  SUBCASE("2-Lipschitz consequence around the fixed point") {
    const auto gt = compute_ground_truth(mrp, phi, pi, Eigen::VectorXd::Zero(5));
    Rng sampler(9);
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd t = testing::random_theta(5, 5.0, sampler);
      const double norm = steady_state_direction(mrp, phi, pi, t).norm();
      CHECK(norm <= 2.0 * (t - gt.theta_star).norm() + 1e-9);
    }
  }
}

TEST_CASE("ground-truth bundle and report") {
  const auto mrp = testing::desk_mrp();
  const auto phi = identity_features(2);
  const auto pi = testing::desk_pi();
  const auto gt = compute_ground_truth(mrp, phi, pi, Eigen::VectorXd::Zero(2));
  CHECK(gt.omega == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(steady_state_direction(mrp, phi, pi, gt.theta_star).norm() <= 1e-10);
  const auto j = to_json(gt);
  CHECK(j.contains("theta_star"));
  CHECK(j.contains("omega"));
  CHECK(j.contains("sigma_const"));
  CHECK(j.contains("value"));
}
