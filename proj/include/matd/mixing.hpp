#pragma once

#include <Eigen/Dense>
#include <vector>

#include "json.hpp"
#include "matd/features.hpp"
#include "matd/mrp.hpp"

namespace matd {

/// Worst-case mixing coefficients kappa(tau) over a lag window, with a fitted
/// geometric envelope kappa(tau) <= m rho^tau (m inflated to cover every point).
struct MixingProfile {
  std::vector<int> tau;
  std::vector<double> kappa;
  double fitted_m = 0.0;
  double fitted_rho = 0.0;
  double max_fit_violation = 0.0;
  bool degenerate = false;  // all kappa zero (already-stationary kernel)
};

std::string profile_to_csv(const MixingProfile& profile);
nlohmann::ordered_json to_json(const MixingProfile& profile);

struct GeometricFit {
  double m = 0.0;
  double rho = 0.0;
  double max_violation = 0.0;
  bool degenerate = false;
};

/// Least-squares fit of log kappa against tau over the points with kappa > 0;
/// m is then inflated so the envelope dominates every point. All-zero input
/// returns the degenerate sentinel (0, 0).
GeometricFit fit_geometric(const std::vector<std::pair<int, double>>& points);

/// Exact conditional TD-direction expectations and the mixing coefficient
/// behind the mixing-time selection.
///
/// All lags are anchored on a state: p_u(tau) = e_u^T P^tau is the state
/// distribution tau transitions after the chain occupies u, and
/// conditional_expected_direction(theta, u, tau) is the exact expectation of
/// the TD direction for the observation starting there. Matrix powers are
/// cached and reused across calls.
class MixingAnalysis {
 public:
  MixingAnalysis(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                 Eigen::VectorXd pi);

  /// E[g(theta, o)] when the observation's start state is distributed
  /// e_u^T P^tau (tau >= 0; tau = 0 conditions on the state being u now).
  Eigen::VectorXd conditional_expected_direction(const Eigen::VectorXd& theta,
                                                 int anchor_state, int tau) const;

  /// ||conditional_expected_direction - steady_state_direction||.
  double mu_coefficient(const Eigen::VectorXd& theta, int anchor_state, int tau) const;

  /// kappa(tau) = max over anchor states u of
  ///   max( sigma_max(Phi^T (diag(p_u) - D) (gamma P - I) Phi),
  ///        ||Phi^T (diag(p_u) - D) r|| ),
  /// which guarantees mu(theta, u, tau) <= kappa(tau) (1 + ||theta||) for all
  /// theta by the affine decomposition of the direction.
  double mixing_coefficient(int tau) const;

  /// Smallest tau >= 1 with kappa(tau) <= epsilon; linear scan up to `cap`.
  long mixing_time(double epsilon, long cap = 1000000) const;

  MixingProfile profile(int tau_lo, int tau_hi) const;

  const Eigen::VectorXd& pi() const { return pi_; }

 private:
  const Eigen::MatrixXd& power(int tau) const;

  MarkovRewardProcess mrp_;
  FeatureMatrix phi_;
  Eigen::VectorXd pi_;
  Eigen::MatrixXd drift_;  // (gamma P - I) Phi
  double noise_floor_ = 0.0;  // kappa below this is numerically zero
  mutable std::vector<Eigen::MatrixXd> powers_;  // powers_[j] = P^j
  mutable std::vector<double> kappa_cache_;      // kappa_cache_[tau], -1 = unset
};

}  // namespace matd
