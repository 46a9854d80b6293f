#pragma once

#include <Eigen/Dense>

#include "json.hpp"
#include "matd/features.hpp"
#include "matd/mrp.hpp"

namespace matd {

/// Exact quantities the analysis treats as known, computed by dense direct
/// solves: the value function, the projected fixed point, the weighted Gram
/// matrix Sigma = Phi^T D Phi and its smallest eigenvalue omega, and the
/// noise scale sigma = max{1, r_bar, ||theta*||, ||theta0 - theta*||}.
struct GroundTruth {
  Eigen::VectorXd value;         // length n
  Eigen::VectorXd theta_star;    // length m
  Eigen::MatrixXd sigma_matrix;  // m x m
  double omega = 0.0;
  double sigma_const = 0.0;
};

/// Solves (I - gamma P) V = r.
Eigen::VectorXd exact_value(const MarkovRewardProcess& mrp);

/// Steady-state TD direction: Phi^T D (r + gamma P Phi theta - Phi theta),
/// D = diag(pi). Exact expectation of the random direction at stationarity.
Eigen::VectorXd steady_state_direction(const MarkovRewardProcess& mrp,
                                       const FeatureMatrix& phi,
                                       const Eigen::VectorXd& pi,
                                       const Eigen::VectorXd& theta);

/// Linear part of the (affine) steady-state direction: Phi^T D (gamma P - I) Phi.
Eigen::MatrixXd direction_linear_part(const MarkovRewardProcess& mrp,
                                      const FeatureMatrix& phi,
                                      const Eigen::VectorXd& pi);

/// Unique root of the steady-state direction, via the dense solve
/// Phi^T D (I - gamma P) Phi theta = Phi^T D r.
Eigen::VectorXd theta_star(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                           const Eigen::VectorXd& pi);

/// Smallest eigenvalue of the symmetric Sigma = Phi^T D Phi.
double omega(const FeatureMatrix& phi, const Eigen::VectorXd& pi);

/// max{1, reward_bound, ||theta*||, ||theta0 - theta*||}.
double sigma_const(double reward_bound, const Eigen::VectorXd& theta_star_vec,
                   const Eigen::VectorXd& theta0);

/// Bundles all of the above for one (instance, theta0) pair.
GroundTruth compute_ground_truth(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                                 const Eigen::VectorXd& pi, const Eigen::VectorXd& theta0);

nlohmann::ordered_json to_json(const GroundTruth& gt);

}  // namespace matd
