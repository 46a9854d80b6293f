#include "matd/ground_truth.hpp"

#include <algorithm>

#include "matd/errors.hpp"

namespace matd {

namespace {

void require_dims(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                  const Eigen::VectorXd& pi) {
  if (phi.n() != mrp.num_states())
    throw DimensionMismatch("feature rows != state count");
  if (pi.size() != mrp.num_states())
    throw DimensionMismatch("stationary distribution length != state count");
}

}  // namespace

Eigen::VectorXd exact_value(const MarkovRewardProcess& mrp) {
  const int n = mrp.num_states();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - mrp.gamma * mrp.kernel.p;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw SingularSystem("exact_value: (I - gamma P) is singular");
  return lu.solve(mrp.rewards);
}

Eigen::VectorXd steady_state_direction(const MarkovRewardProcess& mrp,
                                       const FeatureMatrix& phi,
                                       const Eigen::VectorXd& pi,
                                       const Eigen::VectorXd& theta) {
  require_dims(mrp, phi, pi);
  if (theta.size() != phi.m()) throw DimensionMismatch("theta dimension != m");
  const Eigen::VectorXd v = phi.phi * theta;
  const Eigen::VectorXd bellman = mrp.rewards + mrp.gamma * (mrp.kernel.p * v) - v;
  return phi.phi.transpose() * pi.cwiseProduct(bellman);
}

Eigen::MatrixXd direction_linear_part(const MarkovRewardProcess& mrp,
                                      const FeatureMatrix& phi,
                                      const Eigen::VectorXd& pi) {
  require_dims(mrp, phi, pi);
  const Eigen::MatrixXd weighted = pi.asDiagonal() * (mrp.gamma * mrp.kernel.p * phi.phi - phi.phi);
  return phi.phi.transpose() * weighted;
}

Eigen::VectorXd theta_star(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                           const Eigen::VectorXd& pi) {
  require_dims(mrp, phi, pi);
  const int n = mrp.num_states();
  const Eigen::MatrixXd bellman_op =
      Eigen::MatrixXd::Identity(n, n) - mrp.gamma * mrp.kernel.p;
  const Eigen::MatrixXd a = phi.phi.transpose() * pi.asDiagonal() * bellman_op * phi.phi;
  const Eigen::VectorXd b = phi.phi.transpose() * pi.cwiseProduct(mrp.rewards);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw SingularSystem("theta_star: projected system is singular (rank or ergodicity violation)");
  return lu.solve(b);
}

double omega(const FeatureMatrix& phi, const Eigen::VectorXd& pi) {
  if (pi.size() != phi.n()) throw DimensionMismatch("stationary distribution length != n");
  const Eigen::MatrixXd sigma = phi.phi.transpose() * pi.asDiagonal() * phi.phi;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const double smallest = es.eigenvalues().minCoeff();
  if (!(smallest > 0.0))
    throw SingularSystem("omega: smallest eigenvalue of Sigma is not positive");
  return smallest;
}

double sigma_const(double reward_bound, const Eigen::VectorXd& theta_star_vec,
                   const Eigen::VectorXd& theta0) {
  if (theta0.size() != theta_star_vec.size())
    throw DimensionMismatch("sigma_const: theta0 dimension != m");
  const double delta0 = (theta0 - theta_star_vec).norm();
  return std::max({1.0, reward_bound, theta_star_vec.norm(), delta0});
}

GroundTruth compute_ground_truth(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                                 const Eigen::VectorXd& pi, const Eigen::VectorXd& theta0) {
  GroundTruth gt;
  gt.value = exact_value(mrp);
  gt.theta_star = theta_star(mrp, phi, pi);
  gt.sigma_matrix = phi.phi.transpose() * pi.asDiagonal() * phi.phi;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gt.sigma_matrix);
  gt.omega = es.eigenvalues().minCoeff();
  if (!(gt.omega > 0.0))
    throw SingularSystem("ground truth: smallest eigenvalue of Sigma is not positive");
  Eigen::VectorXd start = theta0;
  if (start.size() == 0) start = Eigen::VectorXd::Zero(phi.m());
  gt.sigma_const = sigma_const(mrp.reward_bound, gt.theta_star, start);
  return gt;
}

nlohmann::ordered_json to_json(const GroundTruth& gt) {
  nlohmann::ordered_json j;
  j["theta_star"] = std::vector<double>(gt.theta_star.begin(), gt.theta_star.end());
  j["omega"] = gt.omega;
  j["sigma_const"] = gt.sigma_const;
  j["value"] = std::vector<double>(gt.value.begin(), gt.value.end());
  return j;
}

}  // namespace matd
