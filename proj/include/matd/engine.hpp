#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "matd/features.hpp"
#include "matd/mrp.hpp"
#include "matd/rng.hpp"

namespace matd {

/// Per-(agent, step) staleness. Every drawn delay must satisfy
/// 0 <= tau <= tau_max.
struct DelayModel {
  enum class Kind { none, constant, uniform_bounded, schedule };

  Kind kind = Kind::none;
  int constant = 0;
  int lo = 0, hi = 0;
  std::vector<std::vector<int>> table;  // table[k][i] for Kind::schedule
  int tau_max = 0;

  static DelayModel none();
  static DelayModel constant_delay(int c);
  static DelayModel uniform_bounded(int lo, int hi);
  static DelayModel schedule(std::vector<std::vector<int>> table);

  /// Delay for (agent, step). Only the uniform variant consumes the stream.
  int draw(int agent, long step, Rng& delay_rng) const;

  std::string label() const;
};

nlohmann::ordered_json to_json(const DelayModel& d);
DelayModel delay_from_json(const nlohmann::json& j);

struct RunConfig {
  int num_agents = 1;
  long num_steps = 5000;  // T
  double alpha = 0.01;
  DelayModel delay;
  std::uint64_t master_seed = 0;
  int initial_state = 0;
  Eigen::VectorXd theta0;     // empty -> zero vector
  bool record_theta = false;  // keep the full iterate trajectory (T+1 x m)
};

nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Per-iteration trace of one run: the squared error trajectory, the squared
/// update norms, and optionally the full iterate trajectory.
struct RunRecord {
  RunConfig config;
  Eigen::VectorXd delta_sq;     // length T+1, ||theta_k - theta*||^2
  std::vector<double> vk_sq;    // length T, ||v_k||^2
  Eigen::VectorXd final_theta;
  Eigen::MatrixXd theta_traj;   // (T+1) x m when recorded, else empty
  double wall_seconds = 0.0;
};

nlohmann::ordered_json record_to_json(const RunRecord& rec);

/// Stream seeds shared with reference implementations so reductions can be
/// checked bit-exactly.
inline std::uint64_t agent_stream_seed(std::uint64_t master, int agent) {
  return derive_seed(derive_seed(master, seed_tag::agent), static_cast<std::uint64_t>(agent));
}
inline std::uint64_t delay_stream_seed(std::uint64_t master) {
  return derive_seed(master, seed_tag::delay);
}

/// The asynchronous multi-agent TD loop. Each global step: every agent
/// advances its own chain once and buffers the observation; the server draws
/// per-agent delays, reads the buffered (iterate, observation) pair from
/// t = max(0, k - tau), averages the TD directions in ascending agent order,
/// and applies theta <- theta + alpha v.
class AsyncTd {
 public:
  AsyncTd(const MarkovRewardProcess& mrp, const FeatureMatrix& phi, const RunConfig& cfg);

  void step();

  long steps_done() const { return step_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& last_direction() const { return v_; }
  /// t_{i,k} consumed by the most recent step.
  const std::vector<long>& last_stale_steps() const { return last_stale_; }

 private:
  const MarkovRewardProcess& mrp_;
  const FeatureMatrix& phi_;
  RunConfig cfg_;
  int capacity_;  // tau_max + 1

  long step_ = 0;
  Eigen::VectorXd theta_;
  Eigen::VectorXd v_;
  std::vector<Eigen::VectorXd> theta_ring_;
  std::vector<long> theta_stamp_;
  std::vector<std::vector<Observation>> obs_ring_;  // per agent
  std::vector<std::vector<long>> obs_stamp_;
  std::vector<int> chain_state_;
  std::vector<Rng> agent_rng_;
  Rng delay_rng_;
  std::vector<long> last_stale_;
};

/// Executes T steps from theta0, recording ||theta_k - theta*||^2 at every
/// iteration. Pure function of (mrp, phi, theta_star, config).
RunRecord run(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
              const Eigen::VectorXd& theta_star, const RunConfig& cfg);

/// ||theta_k - theta_{k-h}||; requires the run to have recorded the full
/// iterate trajectory.
double delta_kh(const RunRecord& rec, long k, long h);

/// Checker for the averaged-direction second-moment bound
///   E||v_k||^2 <= 8 max_{k-tau_max<=j<=k} E[delta_j^2] + 32 sigma^2/N + 8 sigma^2 alpha^(2q),
/// valid for k >= tau + tau_max. Expectations are ensemble means across runs.
struct VkMomentReport {
  std::vector<long> ks;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double min_margin = 0.0;  // min(rhs - lhs)
  bool pass = false;
};

VkMomentReport check_vk_second_moment(const std::vector<RunRecord>& ensemble,
                                      double sigma, long tau, int q,
                                      int num_samples);

/// Checker for the delayed-difference bound
///   E[delta_{k,h}^2] <= 8 alpha^2 h^2 (d_k + 4 sigma^2/N + sigma^2 alpha^(2q)),
/// d_k = max_{k-2 tau_max - tau <= j <= k} E[delta_j^2]; needs recorded
/// iterate trajectories.
struct DeltaKhReport {
  std::vector<std::pair<long, long>> pairs;  // (k, h)
  double min_margin = 0.0;
  bool pass = false;
};

DeltaKhReport check_delta_kh_bound(const std::vector<RunRecord>& ensemble,
                                   double sigma, long tau, int q,
                                   int num_samples);

}  // namespace matd
