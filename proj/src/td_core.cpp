#include "matd/td_core.hpp"

#include "matd/errors.hpp"
#include "matd/ground_truth.hpp"

namespace matd {

namespace {

double td_error(const FeatureMatrix& phi, double gamma, const Eigen::VectorXd& theta,
                const Observation& obs) {
  return obs.reward + gamma * phi.row(obs.next_state).dot(theta) -
         phi.row(obs.state).dot(theta);
}

}  // namespace

Eigen::VectorXd td_direction(const FeatureMatrix& phi, double gamma,
                             const Eigen::VectorXd& theta, const Observation& obs) {
  if (theta.size() != phi.m()) throw DimensionMismatch("td_direction: theta dimension != m");
  return td_error(phi, gamma, theta, obs) * phi.row(obs.state).transpose();
}

void accumulate_td_direction(const FeatureMatrix& phi, double gamma,
                             const Eigen::VectorXd& theta, const Observation& obs,
                             Eigen::VectorXd& acc) {
  acc += td_error(phi, gamma, theta, obs) * phi.row(obs.state).transpose();
}

NormBoundReport check_norm_bound(const FeatureMatrix& phi, double gamma,
                                 double reward_bound, double sigma,
                                 const std::vector<std::pair<Eigen::VectorXd, Observation>>& samples) {
  NormBoundReport report;
  for (const auto& [theta, obs] : samples) {
    const double g_norm = td_direction(phi, gamma, theta, obs).norm();
    const double ratio = g_norm / (2.0 * theta.norm() + 2.0 * reward_bound);
    const double sq_ratio =
        g_norm * g_norm / (8.0 * (theta.squaredNorm() + sigma * sigma));
    report.max_ratio = std::max(report.max_ratio, ratio);
    report.max_sq_ratio = std::max(report.max_sq_ratio, sq_ratio);
    if (ratio > 1.0 + 1e-9 || sq_ratio > 1.0 + 1e-9) ++report.violations;
    ++report.samples;
  }
  return report;
}

LipschitzReport check_lipschitz(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                                const Eigen::VectorXd& pi,
                                const std::vector<LipschitzSample>& pairs) {
  LipschitzReport report;
  for (const auto& sample : pairs) {
    const double dist = (sample.theta_a - sample.theta_b).norm();
    const double g_diff = (td_direction(phi, mrp.gamma, sample.theta_a, sample.obs) -
                           td_direction(phi, mrp.gamma, sample.theta_b, sample.obs))
                              .norm();
    const double steady_diff =
        (steady_state_direction(mrp, phi, pi, sample.theta_a) -
         steady_state_direction(mrp, phi, pi, sample.theta_b))
            .norm();
    if (dist == 0.0) {
      if (g_diff > 1e-12 || steady_diff > 1e-12) ++report.violations;
    } else {
      const double ratio_g = g_diff / dist;
      const double ratio_s = steady_diff / dist;
      report.max_ratio_random = std::max(report.max_ratio_random, ratio_g);
      report.max_ratio_steady = std::max(report.max_ratio_steady, ratio_s);
      if (ratio_g > 2.0 + 1e-9 || ratio_s > 2.0 + 1e-9) ++report.violations;
    }
    ++report.samples;
  }
  return report;
}

}  // namespace matd
