#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "matd/features.hpp"
#include "matd/mrp.hpp"

namespace matd {

/// Random TD update direction
///   g(theta, o) = (r + gamma <phi_{s'}, theta> - <phi_s, theta>) phi_s.
Eigen::VectorXd td_direction(const FeatureMatrix& phi, double gamma,
                             const Eigen::VectorXd& theta, const Observation& obs);

/// acc += g(theta, o). Hot-path form shared by the engine; same arithmetic
/// order as td_direction so single-agent reductions are bit-exact.
void accumulate_td_direction(const FeatureMatrix& phi, double gamma,
                             const Eigen::VectorXd& theta, const Observation& obs,
                             Eigen::VectorXd& acc);

/// Reporting checker for the norm bounds: ||g|| <= 2||theta|| + 2 r_bar and
/// ||g||^2 <= 8(||theta||^2 + sigma^2). Reports worst ratios; never asserts.
struct NormBoundReport {
  double max_ratio = 0.0;     // ||g|| / (2||theta|| + 2 r_bar)
  double max_sq_ratio = 0.0;  // ||g||^2 / (8(||theta||^2 + sigma^2))
  int violations = 0;         // ratios above 1 + 1e-9
  int samples = 0;
};

NormBoundReport check_norm_bound(const FeatureMatrix& phi, double gamma,
                                 double reward_bound, double sigma,
                                 const std::vector<std::pair<Eigen::VectorXd, Observation>>& samples);

/// Reporting checker for the 2-Lipschitz property of g(., o) and of the
/// steady-state direction.
struct LipschitzSample {
  Eigen::VectorXd theta_a;
  Eigen::VectorXd theta_b;
  Observation obs;
};

struct LipschitzReport {
  double max_ratio_random = 0.0;  // ||g(a,o)-g(b,o)|| / ||a-b||
  double max_ratio_steady = 0.0;  // same for the steady-state direction
  int violations = 0;             // ratios above 2 + 1e-9
  int samples = 0;
};

LipschitzReport check_lipschitz(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                                const Eigen::VectorXd& pi,
                                const std::vector<LipschitzSample>& pairs);

}  // namespace matd
