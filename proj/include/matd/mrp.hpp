#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "matd/rng.hpp"

namespace matd {

/// Row-stochastic transition matrix of a finite Markov chain. Construction
/// does not validate; see validate() for the row-stochasticity report.
struct TransitionKernel {
  Eigen::MatrixXd p;  // n x n, rows sum to 1

  int n() const { return static_cast<int>(p.rows()); }
};

struct ValidationReport {
  bool ok = true;
  std::string message;
};

/// Reports the first violated row-stochasticity constraint (shape, entry
/// range, row sums within 1e-12), or ok. Total function; never throws.
ValidationReport validate(const TransitionKernel& kernel);

/// True iff the chain is irreducible and aperiodic. Decided exactly by
/// raising the boolean support matrix to the Wielandt exponent n^2 - 2n + 2
/// and checking that every entry is reachable.
bool is_ergodic(const TransitionKernel& kernel);

struct StationaryDistribution {
  Eigen::VectorXd pi;
};

/// Solves pi P = pi, sum(pi) = 1 via a dense least-squares solve of
/// (P^T - I) augmented with the normalization row. Throws SingularSystem if
/// the augmented system is rank-deficient (non-ergodic chain).
StationaryDistribution stationary_distribution(const TransitionKernel& kernel);

/// One Markovian data tuple (s, r, s').
struct Observation {
  int state = 0;
  double reward = 0.0;
  int next_state = 0;
};

/// Finite Markov reward process: the policy-induced environment.
struct MarkovRewardProcess {
  TransitionKernel kernel;
  Eigen::VectorXd rewards;    // length n, rewards[s] depends on s only
  double gamma = 0.0;         // discount, in (0,1)
  double reward_bound = 0.0;  // >= max_s |rewards[s]|

  int num_states() const { return kernel.n(); }
};

ValidationReport validate(const MarkovRewardProcess& mrp);

/// Draws s' from row `state` by inverse-CDF (left-to-right cumulative scan,
/// strict `<` at boundaries) and returns (state, rewards[state], s').
/// Advances only the given stream.
Observation sample_step(const MarkovRewardProcess& mrp, int state, Rng& rng);

/// Random ergodic instance: normalized nonnegative uniform draws mixed with
/// the uniform kernel by `smoothing`, rewards uniform on [0, reward_bound].
/// Deterministic in seed.
MarkovRewardProcess generate_ergodic_mrp(int n, double gamma,
                                         double reward_bound, double smoothing,
                                         std::uint64_t seed);

nlohmann::ordered_json to_json(const MarkovRewardProcess& mrp);
MarkovRewardProcess mrp_from_json(const nlohmann::json& j);

}  // namespace matd
