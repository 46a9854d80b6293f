#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

#include "matd/errors.hpp"
#include "matd/experiment.hpp"
#include "matd/mc_oracle.hpp"
#include "matd/td_core.hpp"

namespace matd {

namespace {

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// Gaussian parameter vectors at log-uniform scales 1e-2 .. 1e2.
std::vector<Eigen::VectorXd> sample_thetas(int m, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> thetas;
  thetas.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double scale = std::pow(10.0, -2.0 + 4.0 * rng.uniform01());
    Eigen::VectorXd theta(m);
    for (int c = 0; c < m; ++c) theta(c) = scale * rng.normal();
    thetas.push_back(std::move(theta));
  }
  return thetas;
}

Observation random_observation(const MarkovRewardProcess& mrp, Rng& rng) {
  const int s = rng.uniform_int(0, mrp.num_states() - 1);
  return sample_step(mrp, s, rng);
}

// Exact enumeration of E[g(theta, o)] with s ~ pi, s' ~ P(.|s): the
// brute-force route checked against the closed-form steady-state direction.
Eigen::VectorXd enumerate_steady_direction(const MarkovRewardProcess& mrp,
                                           const FeatureMatrix& phi,
                                           const Eigen::VectorXd& pi,
                                           const Eigen::VectorXd& theta) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(phi.m());
  for (int s = 0; s < mrp.num_states(); ++s)
    for (int s2 = 0; s2 < mrp.num_states(); ++s2) {
      const double weight = pi(s) * mrp.kernel.p(s, s2);
      if (weight == 0.0) continue;
      total += weight * td_direction(phi, mrp.gamma, theta,
                                     {s, mrp.rewards(s), s2});
    }
  return total;
}

}  // namespace

std::vector<PropertyVerdict> run_verify(const Instance& instance,
                                        const ExperimentConfig& cfg) {
  std::vector<PropertyVerdict> verdicts;
  const auto& mrp = instance.mrp;
  const auto& phi = instance.phi;
  const auto& pi = instance.pi;
  const auto& gt = instance.gt;
  const int m = phi.m();
  const std::uint64_t seed = derive_seed(cfg.master_seed, 0x7E57);

  // 1. Instance contract.
  {
    const double stationarity =
        ((pi.transpose() * mrp.kernel.p).transpose() - pi).cwiseAbs().maxCoeff();
    const bool pass = validate(mrp).ok && is_ergodic(mrp.kernel) && validate(phi).ok &&
                      stationarity <= 1e-10;
    verdicts.push_back({"instance_contract", pass,
                        fmt("stationarity residual %.3g", stationarity)});
  }

  const auto thetas = sample_thetas(m, 400, seed);

  // 2. Strong monotonicity of the steady-state direction.
  {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& theta : thetas) {
      const Eigen::VectorXd direction = steady_state_direction(mrp, phi, pi, theta);
      const Eigen::VectorXd gap = gt.theta_star - theta;
      const double lhs = gap.dot(direction);
      const double rhs = gt.omega * (1.0 - mrp.gamma) * gap.squaredNorm();
      worst = std::min(worst, lhs - rhs + 1e-9 * (1.0 + theta.squaredNorm()));
    }
    verdicts.push_back({"strong_monotonicity", worst >= 0.0,
                        fmt("worst slackened margin %.3g", worst)});
  }

  // 3. 2-Lipschitz property of the random and steady-state directions.
  {
    Rng rng(derive_seed(seed, 3));
    std::vector<LipschitzSample> pairs;
    for (std::size_t i = 0; i + 1 < thetas.size(); i += 2)
      pairs.push_back({thetas[i], thetas[i + 1], random_observation(mrp, rng)});
    const auto report = check_lipschitz(mrp, phi, pi, pairs);
    verdicts.push_back({"direction_lipschitz", report.violations == 0,
                        fmt("max ratio g %.6f, steady %.6f over %d pairs",
                            report.max_ratio_random, report.max_ratio_steady,
                            report.samples)});
  }

  // 4. Norm bounds on the random direction.
  {
    Rng rng(derive_seed(seed, 4));
    std::vector<std::pair<Eigen::VectorXd, Observation>> samples;
    for (const auto& theta : thetas)
      samples.emplace_back(theta, random_observation(mrp, rng));
    const auto report =
        check_norm_bound(phi, mrp.gamma, mrp.reward_bound, gt.sigma_const, samples);
    verdicts.push_back({"direction_norm_bounds", report.violations == 0,
                        fmt("max ratio %.6f, max squared ratio %.6f over %d samples",
                            report.max_ratio, report.max_sq_ratio, report.samples)});
  }

  // 5. Unbiasedness at stationarity, by exact enumeration.
  {
    double worst = 0.0;
    for (std::size_t i = 0; i < thetas.size(); i += 40) {
      const auto& theta = thetas[i];
      const double diff = (enumerate_steady_direction(mrp, phi, pi, theta) -
                           steady_state_direction(mrp, phi, pi, theta))
                              .norm() /
                          (1.0 + theta.norm());
      worst = std::max(worst, diff);
    }
    verdicts.push_back({"td_unbiasedness_enumeration", worst <= 1e-9,
                        fmt("worst relative deviation %.3g", worst)});
  }

  MixingAnalysis mixing(mrp, phi, pi);
  const double epsilon = std::pow(cfg.alpha, cfg.q);
  const long tau_eps = mixing.mixing_time(epsilon);

  // 6. Soundness of the mixing coefficient: mu <= kappa (1 + ||theta||).
  {
    double worst = 0.0;
    const std::vector<int> taus = {1, 2, static_cast<int>(std::max(3L, tau_eps / 2)),
                                   static_cast<int>(tau_eps)};
    for (std::size_t i = 0; i < thetas.size(); i += 8) {
      const auto& theta = thetas[i];
      for (int tau : taus) {
        const double kappa = mixing.mixing_coefficient(tau);
        for (int u = 0; u < mrp.num_states(); ++u) {
          const double mu = mixing.mu_coefficient(theta, u, tau);
          worst = std::max(worst, mu - kappa * (1.0 + theta.norm()));
        }
      }
    }
    verdicts.push_back({"kappa_soundness", worst <= 1e-12,
                        fmt("worst excess %.3g", worst)});
  }

  // 7. Monte Carlo consistency of the conditional direction.
  {
    Rng rng(derive_seed(seed, 7));
    double worst_se_ratio = 0.0;
    for (int probe = 0; probe < 3; ++probe) {
      const int u = rng.uniform_int(0, mrp.num_states() - 1);
      const int tau = probe + 1;
      const auto& theta = thetas[probe * 11];
      const auto mc = monte_carlo_conditional_direction(mrp, phi, theta, u, tau, 20000,
                                                        derive_seed(seed, 70 + probe));
      const Eigen::VectorXd exact = mixing.conditional_expected_direction(theta, u, tau);
      const double se_norm = std::max(mc.std_error.norm(), 1e-300);
      worst_se_ratio = std::max(worst_se_ratio, (mc.mean - exact).norm() / se_norm);
    }
    verdicts.push_back({"mixing_mc_consistency", worst_se_ratio <= 3.0,
                        fmt("worst deviation %.2f standard errors", worst_se_ratio)});
  }

  // Shared small ensemble for the trajectory-based checkers.
  RunConfig base;
  base.num_agents = cfg.agents.empty() ? 4 : std::min(4, cfg.agents.front());
  base.num_steps = std::min<long>(cfg.num_steps, 2000);
  base.alpha = cfg.alpha;
  base.delay = DelayModel::uniform_bounded(0, 3);
  base.master_seed = derive_seed(seed, 8);
  base.initial_state = cfg.initial_state;
  base.record_theta = true;
  const long needed = tau_eps + 2 * base.delay.tau_max + 10;
  base.num_steps = std::max(base.num_steps, needed);
  const auto ensemble = run_ensemble(instance, base, std::min(cfg.replications, 10));

  // 8. Mixing property instantiated on recorded iterates:
  //    mu(theta_j, u, tau_eps) <= alpha^q (1 + ||theta_j||).
  {
    double worst = 0.0;
    for (const auto& rec : ensemble) {
      for (long k = 0; k <= rec.config.num_steps; k += std::max(1L, rec.config.num_steps / 20)) {
        const Eigen::VectorXd theta = rec.theta_traj.row(k).transpose();
        for (int u = 0; u < mrp.num_states(); ++u) {
          const double mu = mixing.mu_coefficient(theta, u, static_cast<int>(tau_eps));
          worst = std::max(worst, mu - epsilon * (1.0 + theta.norm()));
        }
      }
    }
    verdicts.push_back({"mixing_property_on_trajectory", worst <= 1e-12,
                        fmt("worst excess %.3g at tau_eps=%ld", worst, tau_eps)});
  }

  // 9. Second-moment bound on the averaged direction.
  {
    const auto report =
        check_vk_second_moment(ensemble, gt.sigma_const, tau_eps, cfg.q, 16);
    verdicts.push_back({"averaged_direction_second_moment", report.pass,
                        fmt("min margin %.6g over %zu sampled k", report.min_margin,
                            report.ks.size())});
  }

  // 10. Delayed-difference bound.
  {
    const auto report =
        check_delta_kh_bound(ensemble, gt.sigma_const, tau_eps, cfg.q, 12);
    verdicts.push_back({"delayed_difference_bound", report.pass,
                        fmt("min margin %.6g over %zu (k,h) pairs", report.min_margin,
                            report.pairs.size())});
  }

  // 11. Delayed-recursion envelope dominance over simulated recursions.
  {
    Rng rng(derive_seed(seed, 11));
    double worst = -std::numeric_limits<double>::infinity();
    bool pass = true;
    for (int trial = 0; trial < 100; ++trial) {
      RecursionSpec spec;
      spec.p = 0.9 * rng.uniform01();
      spec.q = (1.0 - spec.p) * 0.95 * rng.uniform01();
      spec.beta = rng.uniform01();
      spec.d_max = rng.uniform_int(0, 20);
      const double v0 = 10.0 * rng.uniform01();
      std::vector<int> delays(2000);
      for (auto& d : delays) d = rng.uniform_int(0, spec.d_max);
      const auto envelope = recursion_envelope(spec, v0);
      const auto values = simulate_recursion(spec, v0, delays);
      for (std::size_t k = 0; k < values.size(); ++k) {
        const double excess = values[k] - envelope(static_cast<long>(k)) - 1e-12;
        worst = std::max(worst, excess);
        if (excess > 0.0) pass = false;
      }
    }
    verdicts.push_back({"recursion_envelope_dominance", pass,
                        fmt("worst excess %.3g over 100 specs", worst)});
  }

  // 12. Finite-time bound vs. an ensemble satisfying its hypotheses.
  {
    const long tau_max = 2;
    const auto capped = theorem_capped_alpha(instance, mixing, cfg.q, tau_max);
    RunConfig qualifying;
    qualifying.num_agents = 4;
    qualifying.alpha = capped.alpha;
    qualifying.delay = DelayModel::uniform_bounded(0, static_cast<int>(tau_max));
    qualifying.num_steps = std::max<long>(capped.tau + 2 * tau_max + 1, 1000);
    qualifying.master_seed = derive_seed(seed, 12);
    qualifying.initial_state = cfg.initial_state;
    const auto qualifying_runs = run_ensemble(instance, qualifying, 8);
    const auto cmp = compare_bound_to_empirical({}, qualifying_runs, gt.omega, mrp.gamma,
                                                capped.tau, gt.sigma_const, 0.5);
    const bool pass = cmp.hypotheses_ok && cmp.inflation <= 10.0;
    verdicts.push_back({"finite_time_bound_vs_empirical", pass,
                        fmt("bound %.6g, ball %.6g, inflation %.3f", cmp.bound_value,
                            cmp.ball.mean, cmp.inflation)});
  }

  return verdicts;
}

nlohmann::ordered_json verdicts_to_json(const std::vector<PropertyVerdict>& verdicts) {
  nlohmann::ordered_json j;
  auto list = nlohmann::ordered_json::array();
  bool all = true;
  for (const auto& verdict : verdicts) {
    nlohmann::ordered_json v;
    v["name"] = verdict.name;
    v["pass"] = verdict.pass;
    v["detail"] = verdict.detail;
    list.push_back(std::move(v));
    all = all && verdict.pass;
  }
  j["pass"] = all;
  j["properties"] = std::move(list);
  return j;
}

}  // namespace matd
