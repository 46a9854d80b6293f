#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "matd/features.hpp"
#include "matd/mrp.hpp"

namespace matd {

/// Monte Carlo estimate of the lag-tau conditional TD-direction expectation:
/// restart the chain at `anchor_state`, advance tau transitions, evaluate the
/// TD direction of the observation starting there, and average. Reports
/// per-component standard errors.
struct McDirectionEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  int restarts = 0;
};

McDirectionEstimate monte_carlo_conditional_direction(const MarkovRewardProcess& mrp,
                                                      const FeatureMatrix& phi,
                                                      const Eigen::VectorXd& theta,
                                                      int anchor_state, int tau,
                                                      int restarts, std::uint64_t seed);

/// Monte Carlo estimate of the stationary TD-direction expectation with
/// s ~ pi, s' ~ P(.|s). Companion oracle for the steady-state direction.
McDirectionEstimate monte_carlo_steady_direction(const MarkovRewardProcess& mrp,
                                                 const FeatureMatrix& phi,
                                                 const Eigen::VectorXd& pi,
                                                 const Eigen::VectorXd& theta,
                                                 int samples, std::uint64_t seed);

}  // namespace matd
