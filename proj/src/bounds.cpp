#include "matd/bounds.hpp"

#include <cmath>
#include <cstdio>

#include "matd/errors.hpp"

namespace matd {

double theorem_bound(const BoundConstants& constants, double alpha, double omega,
                     double gamma, long tau, long tau_max, double sigma, int num_agents,
                     long horizon) {
  const double effective_delay = static_cast<double>(tau + tau_max);
  std::string failures;
  const double alpha_cap = omega * (1.0 - gamma) / (constants.c0 * effective_delay);
  if (alpha > alpha_cap) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "alpha %.6g exceeds cap %.6g; ", alpha, alpha_cap);
    failures += buf;
  }
  if (horizon < tau + 2 * tau_max) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "T %ld below tau + 2 tau_max = %ld; ", horizon,
                  tau + 2 * tau_max);
    failures += buf;
  }
  if (!failures.empty())
    throw PreconditionViolation("theorem_bound hypotheses violated: " + failures);

  const double transient =
      std::exp(-alpha * (1.0 - gamma) * omega * static_cast<double>(horizon) /
               (2.0 * effective_delay)) *
      constants.c1 * sigma * sigma;
  const double ball = effective_delay * sigma * sigma / (omega * (1.0 - gamma)) *
                      (constants.c2 * alpha / num_agents +
                       constants.c3 * alpha * alpha * alpha);
  return transient + ball;
}

StepSizeChoice step_size_schedule(double tau_bar, double omega, double gamma,
                                  int num_agents, long horizon, double sigma,
                                  const BoundConstants& constants) {
  const double nt = static_cast<double>(num_agents) * static_cast<double>(horizon);
  const double log_nt = std::log(nt);
  const double one_minus_gamma = 1.0 - gamma;
  const double t_min = 2.0 * constants.c0 * num_agents * tau_bar * tau_bar * log_nt /
                       (omega * omega * one_minus_gamma * one_minus_gamma);
  if (static_cast<double>(horizon) < t_min) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "step_size_schedule: T = %ld below the required minimum %.6g", horizon,
                  t_min);
    throw PreconditionViolation(buf);
  }
  StepSizeChoice choice;
  choice.alpha = tau_bar * log_nt / (omega * one_minus_gamma * static_cast<double>(horizon));
  choice.simplified_bound = sigma * sigma * tau_bar * tau_bar * log_nt /
                            (omega * omega * one_minus_gamma * one_minus_gamma * nt);
  return choice;
}

double RecursionEnvelope::operator()(long k) const {
  return std::pow(rho, static_cast<double>(k)) * v0 + eps;
}

RecursionEnvelope recursion_envelope(const RecursionSpec& spec, double v0) {
  if (spec.p < 0.0 || spec.q < 0.0 || spec.beta < 0.0 || spec.d_max < 0)
    throw PreconditionViolation("recursion_envelope: parameters must be nonnegative");
  const double contraction = spec.p + spec.q;
  if (contraction >= 1.0)
    throw PreconditionViolation("recursion_envelope: contraction violated (p + q >= 1)");
  RecursionEnvelope env;
  env.rho = std::pow(contraction, 1.0 / (1.0 + spec.d_max));
  env.eps = spec.beta / (1.0 - contraction);
  env.v0 = v0;
  return env;
}

std::vector<double> simulate_recursion(const RecursionSpec& spec, double v0,
                                       const std::vector<int>& delays,
                                       const std::vector<double>& step_scale) {
  std::vector<double> v;
  v.reserve(delays.size() + 1);
  v.push_back(v0);
  for (std::size_t k = 0; k < delays.size(); ++k) {
    const int d = delays[k];
    if (d < 0 || d > spec.d_max)
      throw PreconditionViolation("simulate_recursion: delay outside [0, d_max]");
    const std::size_t lo = k >= static_cast<std::size_t>(d) ? k - d : 0;
    double window_max = 0.0;
    for (std::size_t l = lo; l <= k; ++l) window_max = std::max(window_max, v[l]);
    double next = spec.p * v[k] + spec.q * window_max + spec.beta;
    if (!step_scale.empty()) next *= step_scale[k % step_scale.size()];
    v.push_back(next);
  }
  return v;
}

BallEstimate window_ball(const std::vector<RunRecord>& ensemble, double lo_frac,
                         double hi_frac) {
  if (ensemble.empty()) throw PreconditionViolation("empirical_ball: empty ensemble");
  const long length = ensemble.front().delta_sq.size();
  const long lo = static_cast<long>(lo_frac * static_cast<double>(length));
  const long hi = static_cast<long>(hi_frac * static_cast<double>(length));
  const long window = std::min(hi, length) - lo;
  if (window < 100)
    throw PreconditionViolation("empirical_ball: tail window shorter than 100 points");

  std::vector<double> per_run;
  per_run.reserve(ensemble.size());
  for (const auto& rec : ensemble) {
    if (rec.delta_sq.size() != length)
      throw PreconditionViolation("empirical_ball: mismatched trajectory lengths");
    const auto segment = rec.delta_sq.segment(lo, window);
    // A frozen iterate (alpha = 0) gives a constant window; keep it exact.
    per_run.push_back((segment.array() == segment(0)).all() ? segment(0) : segment.mean());
  }

  BallEstimate estimate;
  estimate.window = window;
  estimate.replications = static_cast<int>(per_run.size());
  bool constant = true;
  for (double v : per_run) constant = constant && v == per_run.front();
  if (constant) {
    estimate.mean = per_run.front();
    return estimate;
  }
  double sum = 0.0;
  for (double v : per_run) sum += v;
  estimate.mean = sum / static_cast<double>(per_run.size());
  if (per_run.size() > 1) {
    double ss = 0.0;
    for (double v : per_run) ss += (v - estimate.mean) * (v - estimate.mean);
    estimate.std_error = std::sqrt(ss / (static_cast<double>(per_run.size()) *
                                         (static_cast<double>(per_run.size()) - 1.0)));
  }
  return estimate;
}

BallEstimate empirical_ball(const std::vector<RunRecord>& ensemble, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw PreconditionViolation("empirical_ball: tail_fraction must lie in (0,1]");
  return window_ball(ensemble, 1.0 - tail_fraction, 1.0);
}

BallEstimate empirical_ball(const RunRecord& record, double tail_fraction) {
  return empirical_ball(std::vector<RunRecord>{record}, tail_fraction);
}

BoundComparison compare_bound_to_empirical(const BoundConstants& constants,
                                           const std::vector<RunRecord>& ensemble,
                                           double omega, double gamma, long tau,
                                           double sigma, double tail_fraction) {
  if (ensemble.empty())
    throw PreconditionViolation("bound comparison: empty ensemble");
  const auto& cfg = ensemble.front().config;
  BoundComparison cmp;
  cmp.constants = constants;
  cmp.ball = empirical_ball(ensemble, tail_fraction);
  try {
    cmp.bound_value = theorem_bound(constants, cfg.alpha, omega, gamma, tau,
                                    cfg.delay.tau_max, sigma, cfg.num_agents,
                                    cfg.num_steps);
    cmp.hypotheses_ok = true;
  } catch (const PreconditionViolation& e) {
    cmp.hypothesis_failures = e.what();
    return cmp;
  }
  cmp.inflation = cmp.ball.mean > cmp.bound_value && cmp.bound_value > 0.0
                      ? cmp.ball.mean / cmp.bound_value
                      : 1.0;
  return cmp;
}

nlohmann::ordered_json to_json(const BoundComparison& cmp) {
  nlohmann::ordered_json j;
  j["hypotheses"]["ok"] = cmp.hypotheses_ok;
  j["hypotheses"]["failures"] = cmp.hypothesis_failures;
  j["bound_value"] = cmp.bound_value;
  j["empirical_ball"] = cmp.ball.mean;
  j["standard_error"] = cmp.ball.std_error;
  j["constants_used"] = {{"c0", cmp.constants.c0},
                         {"c1", cmp.constants.c1},
                         {"c2", cmp.constants.c2},
                         {"c3", cmp.constants.c3}};
  j["inflation_factor"] = cmp.inflation;
  return j;
}

}  // namespace matd
