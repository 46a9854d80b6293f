#pragma once

#include <Eigen/Dense>

#include "matd/engine.hpp"
#include "matd/features.hpp"
#include "matd/mrp.hpp"
#include "matd/td_core.hpp"

namespace testing {

// Two-state desk instance used throughout: P = [[0.9, 0.1], [0.2, 0.8]],
// r = (1, 0), gamma = 0.5. Hand-derived ground truth:
//   pi = (2/3, 1/3), V = theta* = (24/13, 4/13), omega = 1/3.
inline matd::MarkovRewardProcess desk_mrp() {
  matd::MarkovRewardProcess mrp;
  mrp.kernel.p.resize(2, 2);
  mrp.kernel.p << 0.9, 0.1, 0.2, 0.8;
  mrp.rewards.resize(2);
  mrp.rewards << 1.0, 0.0;
  mrp.gamma = 0.5;
  mrp.reward_bound = 1.0;
  return mrp;
}

inline Eigen::VectorXd desk_pi() {
  Eigen::VectorXd pi(2);
  pi << 2.0 / 3.0, 1.0 / 3.0;
  return pi;
}

inline Eigen::VectorXd desk_theta_star() {
  Eigen::VectorXd theta(2);
  theta << 24.0 / 13.0, 4.0 / 13.0;
  return theta;
}

// Textbook single-agent TD(0) loop: sample, update, repeat. Written
// independently of the engine's buffering/delay machinery; shares only the
// sampling and direction primitives plus the stream seed, so the NoDelay/N=1
// reduction can be checked bit-for-bit.
inline std::vector<Eigen::VectorXd> reference_td0(const matd::MarkovRewardProcess& mrp,
                                                  const matd::FeatureMatrix& phi,
                                                  Eigen::VectorXd theta, double alpha,
                                                  long steps, int initial_state,
                                                  std::uint64_t master_seed) {
  matd::Rng rng(matd::agent_stream_seed(master_seed, 0));
  std::vector<Eigen::VectorXd> trajectory;
  trajectory.push_back(theta);
  int state = initial_state;
  for (long k = 0; k < steps; ++k) {
    const matd::Observation obs = matd::sample_step(mrp, state, rng);
    state = obs.next_state;
    theta += alpha * matd::td_direction(phi, mrp.gamma, theta, obs);
    trajectory.push_back(theta);
  }
  return trajectory;
}

// Exact enumeration of E[g(theta, o)] with s ~ weights(s), s' ~ P(.|s).
inline Eigen::VectorXd enumerate_direction(const matd::MarkovRewardProcess& mrp,
                                           const matd::FeatureMatrix& phi,
                                           const Eigen::VectorXd& weights,
                                           const Eigen::VectorXd& theta) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(phi.m());
  for (int s = 0; s < mrp.num_states(); ++s) {
    if (weights(s) == 0.0) continue;
    for (int s2 = 0; s2 < mrp.num_states(); ++s2) {
      const double w = weights(s) * mrp.kernel.p(s, s2);
      if (w == 0.0) continue;
      total += w * matd::td_direction(phi, mrp.gamma, theta, {s, mrp.rewards(s), s2});
    }
  }
  return total;
}

inline Eigen::VectorXd random_theta(int m, double scale, matd::Rng& rng) {
  Eigen::VectorXd theta(m);
  for (int c = 0; c < m; ++c) theta(c) = scale * rng.normal();
  return theta;
}

}  // namespace testing
