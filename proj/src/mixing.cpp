#include "matd/mixing.hpp"

#include <cmath>
#include <cstdio>

#include "matd/errors.hpp"

namespace matd {

std::string profile_to_csv(const MixingProfile& profile) {
  std::string out = "tau,kappa\n";
  char buf[64];
  for (std::size_t i = 0; i < profile.tau.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", profile.tau[i], profile.kappa[i]);
    out += buf;
  }
  return out;
}

nlohmann::ordered_json to_json(const MixingProfile& profile) {
  nlohmann::ordered_json j;
  j["tau"] = profile.tau;
  j["kappa"] = profile.kappa;
  j["fitted_m"] = profile.fitted_m;
  j["fitted_rho"] = profile.fitted_rho;
  j["max_fit_violation"] = profile.max_fit_violation;
  j["degenerate"] = profile.degenerate;
  return j;
}

GeometricFit fit_geometric(const std::vector<std::pair<int, double>>& points) {
  // Coefficients at rounding level are zero for fitting purposes (an
  // already-stationary kernel leaves ~1e-16 residue from the pi solve).
  constexpr double kZeroFloor = 1e-14;
  std::vector<std::pair<int, double>> positive;
  for (const auto& pt : points)
    if (pt.second > kZeroFloor) positive.push_back(pt);
  if (positive.empty()) return {0.0, 0.0, 0.0, true};
  if (positive.size() < 3)
    throw PreconditionViolation("fit_geometric: need at least 3 points with kappa > 0");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double count = static_cast<double>(positive.size());
  for (const auto& [tau, kappa] : positive) {
    const double x = static_cast<double>(tau);
    const double y = std::log(kappa);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / count;

  GeometricFit fit;
  fit.rho = std::exp(slope);
  fit.m = std::exp(intercept);
  // Inflate m so the envelope covers every point, then report the residual
  // violation (zero by construction, up to rounding).
  for (const auto& [tau, kappa] : positive)
    fit.m = std::max(fit.m, kappa / std::pow(fit.rho, tau));
  for (const auto& [tau, kappa] : positive)
    fit.max_violation = std::max(fit.max_violation, kappa - fit.m * std::pow(fit.rho, tau));
  return fit;
}

MixingAnalysis::MixingAnalysis(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                               Eigen::VectorXd pi)
    : mrp_(mrp), phi_(phi), pi_(std::move(pi)) {
  if (phi_.n() != mrp_.num_states())
    throw DimensionMismatch("mixing: feature rows != state count");
  if (pi_.size() != mrp_.num_states())
    throw DimensionMismatch("mixing: stationary distribution length != state count");
  drift_ = mrp_.gamma * mrp_.kernel.p * phi_.phi - phi_.phi;
  // Matrix powers carry ~eps-level residuals that never decay, so coefficients
  // below this resolution are clamped to exact zero (keeps the tau scan
  // terminating for any epsilon > 0).
  noise_floor_ = 1e-13 * (1.0 + mrp_.rewards.cwiseAbs().maxCoeff() +
                          drift_.cwiseAbs().maxCoeff());
  powers_.push_back(Eigen::MatrixXd::Identity(mrp_.num_states(), mrp_.num_states()));
}

const Eigen::MatrixXd& MixingAnalysis::power(int tau) const {
  while (static_cast<int>(powers_.size()) <= tau)
    powers_.push_back(powers_.back() * mrp_.kernel.p);
  return powers_[tau];
}

Eigen::VectorXd MixingAnalysis::conditional_expected_direction(
    const Eigen::VectorXd& theta, int anchor_state, int tau) const {
  if (tau < 0) throw PreconditionViolation("conditional direction: tau must be >= 0");
  if (anchor_state < 0 || anchor_state >= mrp_.num_states())
    throw PreconditionViolation("conditional direction: anchor state out of range");
  if (theta.size() != phi_.m())
    throw DimensionMismatch("conditional direction: theta dimension != m");
  const Eigen::VectorXd p = power(tau).row(anchor_state).transpose();
  const Eigen::VectorXd z = mrp_.rewards + drift_ * theta;
  return phi_.phi.transpose() * p.cwiseProduct(z);
}

double MixingAnalysis::mu_coefficient(const Eigen::VectorXd& theta, int anchor_state,
                                      int tau) const {
  const Eigen::VectorXd p = power(tau).row(anchor_state).transpose();
  const Eigen::VectorXd z = mrp_.rewards + drift_ * theta;
  return (phi_.phi.transpose() * (p - pi_).cwiseProduct(z)).norm();
}

double MixingAnalysis::mixing_coefficient(int tau) const {
  if (tau < 1) throw PreconditionViolation("mixing_coefficient: tau must be >= 1");
  if (static_cast<int>(kappa_cache_.size()) <= tau) kappa_cache_.resize(tau + 1, -1.0);
  if (kappa_cache_[tau] >= 0.0) return kappa_cache_[tau];

  const Eigen::MatrixXd& p_tau = power(tau);
  double kappa = 0.0;
  for (int u = 0; u < mrp_.num_states(); ++u) {
    const Eigen::VectorXd d = p_tau.row(u).transpose() - pi_;
    const Eigen::MatrixXd linear = phi_.phi.transpose() * d.asDiagonal() * drift_;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(linear);
    const double sigma_max = svd.singularValues()(0);
    const double offset = (phi_.phi.transpose() * d.cwiseProduct(mrp_.rewards)).norm();
    kappa = std::max({kappa, sigma_max, offset});
  }
  if (kappa <= noise_floor_) kappa = 0.0;
  kappa_cache_[tau] = kappa;
  return kappa;
}

long MixingAnalysis::mixing_time(double epsilon, long cap) const {
  if (!(epsilon > 0.0)) throw PreconditionViolation("mixing_time: epsilon must be positive");
  for (long tau = 1; tau <= cap; ++tau)
    if (mixing_coefficient(static_cast<int>(tau)) <= epsilon) return tau;
  throw PreconditionViolation("mixing_time: scan cap exceeded (near-periodic chain?)");
}

MixingProfile MixingAnalysis::profile(int tau_lo, int tau_hi) const {
  if (tau_lo < 1 || tau_hi < tau_lo)
    throw PreconditionViolation("mixing profile: need 1 <= tau_lo <= tau_hi");
  MixingProfile profile;
  std::vector<std::pair<int, double>> points;
  for (int tau = tau_lo; tau <= tau_hi; ++tau) {
    const double kappa = mixing_coefficient(tau);
    profile.tau.push_back(tau);
    profile.kappa.push_back(kappa);
    points.emplace_back(tau, kappa);
  }
  int positive = 0;
  for (const auto& pt : points) positive += pt.second > 1e-14;
  if (positive >= 3) {
    const GeometricFit fit = fit_geometric(points);
    profile.fitted_m = fit.m;
    profile.fitted_rho = fit.rho;
    profile.max_fit_violation = fit.max_violation;
    profile.degenerate = fit.degenerate;
  } else {
    profile.degenerate = true;
  }
  return profile;
}

}  // namespace matd
