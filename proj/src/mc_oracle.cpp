#include "matd/mc_oracle.hpp"

#include <cmath>

#include "matd/errors.hpp"
#include "matd/rng.hpp"
#include "matd/td_core.hpp"

namespace matd {

namespace {

McDirectionEstimate finalize(Eigen::VectorXd sum, Eigen::VectorXd sum_sq, int count) {
  McDirectionEstimate est;
  est.restarts = count;
  est.mean = sum / static_cast<double>(count);
  est.std_error.resize(sum.size());
  for (int c = 0; c < sum.size(); ++c) {
    const double var =
        std::max(0.0, sum_sq(c) / count - est.mean(c) * est.mean(c));
    est.std_error(c) = std::sqrt(var / count);
  }
  return est;
}

}  // namespace

McDirectionEstimate monte_carlo_conditional_direction(const MarkovRewardProcess& mrp,
                                                      const FeatureMatrix& phi,
                                                      const Eigen::VectorXd& theta,
                                                      int anchor_state, int tau,
                                                      int restarts, std::uint64_t seed) {
  if (tau < 0) throw PreconditionViolation("mc conditional direction: tau must be >= 0");
  Rng rng(seed);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(phi.m());
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(phi.m());
  for (int r = 0; r < restarts; ++r) {
    int state = anchor_state;
    for (int step = 0; step < tau; ++step) state = sample_step(mrp, state, rng).next_state;
    const Observation obs = sample_step(mrp, state, rng);
    const Eigen::VectorXd g = td_direction(phi, mrp.gamma, theta, obs);
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  return finalize(std::move(sum), std::move(sum_sq), restarts);
}

McDirectionEstimate monte_carlo_steady_direction(const MarkovRewardProcess& mrp,
                                                 const FeatureMatrix& phi,
                                                 const Eigen::VectorXd& pi,
                                                 const Eigen::VectorXd& theta,
                                                 int samples, std::uint64_t seed) {
  Rng rng(seed);
  const int n = mrp.num_states();
  Eigen::VectorXd cumulative(n);
  double acc = 0.0;
  for (int s = 0; s < n; ++s) {
    acc += pi(s);
    cumulative(s) = acc;
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(phi.m());
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(phi.m());
  for (int r = 0; r < samples; ++r) {
    const double x = rng.uniform01();
    int state = n - 1;
    for (int s = 0; s < n; ++s)
      if (x < cumulative(s)) {
        state = s;
        break;
      }
    const Observation obs = sample_step(mrp, state, rng);
    const Eigen::VectorXd g = td_direction(phi, mrp.gamma, theta, obs);
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  return finalize(std::move(sum), std::move(sum_sq), samples);
}

}  // namespace matd
