#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "matd/engine.hpp"

namespace matd {

/// Constants of the finite-time bound; defaults read off the proof's final
/// display. All must be >= 1.
struct BoundConstants {
  double c0 = 112.0;  // step-size cap denominator
  double c1 = 6.0;    // transient coefficient
  double c2 = 352.0;  // variance term
  double c3 = 15.0;   // higher-order term
};

/// Right-hand side of the finite-time bound:
///   exp(-alpha (1-gamma) omega T / (2 (tau + tau_max))) C1 sigma^2
///   + ((tau + tau_max) sigma^2 / (omega (1-gamma))) (C2 alpha / N + C3 alpha^3).
/// Throws PreconditionViolation listing every violated hypothesis
/// (alpha <= omega(1-gamma)/(C0 (tau+tau_max)), T >= tau + 2 tau_max).
double theorem_bound(const BoundConstants& constants, double alpha, double omega,
                     double gamma, long tau, long tau_max, double sigma, int num_agents,
                     long horizon);

/// Step-size choice alpha = tau_bar log(NT) / (omega (1-gamma) T) and the
/// implied simplified bound sigma^2 tau_bar^2 log(NT) / (omega^2 (1-gamma)^2 N T)
/// (unit constant). Throws with the required minimum when T is below
/// 2 C0 N tau_bar^2 log(NT) / (omega^2 (1-gamma)^2).
struct StepSizeChoice {
  double alpha = 0.0;
  double simplified_bound = 0.0;
};

StepSizeChoice step_size_schedule(double tau_bar, double omega, double gamma,
                                  int num_agents, long horizon, double sigma,
                                  const BoundConstants& constants = {});

/// Delayed recursion V_{k+1} <= p V_k + q max_{(k-d(k))+ <= l <= k} V_l + beta
/// with d(k) <= d_max.
struct RecursionSpec {
  double p = 0.0;
  double q = 0.0;
  double beta = 0.0;
  int d_max = 0;
};

/// Geometric-plus-offset envelope rho^k v0 + eps with
/// rho = (p+q)^(1/(1+d_max)) and eps = beta / (1 - p - q). Requires p + q < 1.
struct RecursionEnvelope {
  double rho = 0.0;
  double eps = 0.0;
  double v0 = 0.0;

  double operator()(long k) const;
};

RecursionEnvelope recursion_envelope(const RecursionSpec& spec, double v0);

/// Brute-force simulation of one admissible recursion:
///   V_{k+1} = scale_k (p V_k + q max_{(k-d(k))+ <= l <= k} V_l + beta),
/// with the given delay sequence d(k) (each <= d_max) and optional per-step
/// shrink factors in (0,1] (empty = equality). Independent of the envelope
/// formula; used to check dominance.
std::vector<double> simulate_recursion(const RecursionSpec& spec, double v0,
                                       const std::vector<int>& delays,
                                       const std::vector<double>& step_scale = {});

/// Tail-window estimate of the steady-state squared error: the mean of
/// delta_k^2 over a trailing window, averaged across replications, with the
/// standard error across the per-run window means.
struct BallEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long window = 0;
  int replications = 0;
};

/// Window given as fractions of the trajectory, [lo_frac, hi_frac) of the
/// T+1 recorded iterations. Requires >= 100 points in the window.
BallEstimate window_ball(const std::vector<RunRecord>& ensemble, double lo_frac,
                         double hi_frac);

BallEstimate empirical_ball(const std::vector<RunRecord>& ensemble, double tail_fraction);
BallEstimate empirical_ball(const RunRecord& record, double tail_fraction);

/// Bound-vs-empirical comparison. `inflation` is the factor by which the
/// default constants would need to grow to dominate the ensemble (1 when the
/// bound already holds).
struct BoundComparison {
  bool hypotheses_ok = false;
  std::string hypothesis_failures;
  double bound_value = 0.0;
  BallEstimate ball;
  BoundConstants constants;
  double inflation = 0.0;
};

BoundComparison compare_bound_to_empirical(const BoundConstants& constants,
                                           const std::vector<RunRecord>& ensemble,
                                           double omega, double gamma, long tau,
                                           double sigma, double tail_fraction);

nlohmann::ordered_json to_json(const BoundComparison& cmp);

}  // namespace matd
