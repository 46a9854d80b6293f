#include "matd/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "matd/errors.hpp"
#include "matd/td_core.hpp"

namespace matd {

DelayModel DelayModel::none() { return {}; }

DelayModel DelayModel::constant_delay(int c) {
  if (c < 0) throw PreconditionViolation("constant delay: must be nonnegative");
  DelayModel d;
  d.kind = Kind::constant;
  d.constant = c;
  d.tau_max = c;
  return d;
}

DelayModel DelayModel::uniform_bounded(int lo, int hi) {
  if (lo < 0 || hi < lo)
    throw PreconditionViolation("uniform delay: need 0 <= lo <= hi");
  DelayModel d;
  d.kind = Kind::uniform_bounded;
  d.lo = lo;
  d.hi = hi;
  d.tau_max = hi;
  return d;
}

DelayModel DelayModel::schedule(std::vector<std::vector<int>> table) {
  DelayModel d;
  d.kind = Kind::schedule;
  int max_tau = 0;
  for (const auto& row : table)
    for (int tau : row) {
      if (tau < 0) throw PreconditionViolation("schedule delay: negative entry");
      max_tau = std::max(max_tau, tau);
    }
  d.table = std::move(table);
  d.tau_max = max_tau;
  return d;
}

int DelayModel::draw(int agent, long step, Rng& delay_rng) const {
  switch (kind) {
    case Kind::none:
      return 0;
    case Kind::constant:
      return constant;
    case Kind::uniform_bounded:
      return delay_rng.uniform_int(lo, hi);
    case Kind::schedule: {
      if (step >= static_cast<long>(table.size()) ||
          agent >= static_cast<int>(table[step].size()))
        throw PreconditionViolation("schedule delay: no entry for (agent, step)");
      return table[step][agent];
    }
  }
  return 0;
}

std::string DelayModel::label() const {
  char buf[64];
  switch (kind) {
    case Kind::none:
      return "nodelay";
    case Kind::constant:
      std::snprintf(buf, sizeof(buf), "const%d", constant);
      return buf;
    case Kind::uniform_bounded:
      std::snprintf(buf, sizeof(buf), "unif%d-%d", lo, hi);
      return buf;
    case Kind::schedule:
      return "sched";
  }
  return "unknown";
}

nlohmann::ordered_json to_json(const DelayModel& d) {
  nlohmann::ordered_json j;
  switch (d.kind) {
    case DelayModel::Kind::none:
      j["variant"] = "none";
      break;
    case DelayModel::Kind::constant:
      j["variant"] = "constant";
      j["value"] = d.constant;
      break;
    case DelayModel::Kind::uniform_bounded:
      j["variant"] = "uniform";
      j["lo"] = d.lo;
      j["hi"] = d.hi;
      break;
    case DelayModel::Kind::schedule:
      j["variant"] = "schedule";
      j["table"] = d.table;
      break;
  }
  j["tau_max"] = d.tau_max;
  return j;
}

DelayModel delay_from_json(const nlohmann::json& j) {
  try {
    const std::string variant = j.at("variant").get<std::string>();
    DelayModel d;
    if (variant == "none") {
      d = DelayModel::none();
    } else if (variant == "constant") {
      d = DelayModel::constant_delay(j.at("value").get<int>());
    } else if (variant == "uniform") {
      d = DelayModel::uniform_bounded(j.at("lo").get<int>(), j.at("hi").get<int>());
    } else if (variant == "schedule") {
      d = DelayModel::schedule(j.at("table").get<std::vector<std::vector<int>>>());
    } else {
      throw ConfigError("delay model: unknown variant '" + variant + "'");
    }
    if (j.contains("tau_max")) {
      const int declared = j.at("tau_max").get<int>();
      if (declared < d.tau_max)
        throw ConfigError("delay model: declared tau_max below generated delays");
      d.tau_max = declared;
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("delay model json: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["agents"] = cfg.num_agents;
  j["T"] = cfg.num_steps;
  j["alpha"] = cfg.alpha;
  j["delay"] = to_json(cfg.delay);
  j["master_seed"] = cfg.master_seed;
  j["initial_state"] = cfg.initial_state;
  j["record_full_theta"] = cfg.record_theta;
  return j;
}

nlohmann::ordered_json record_to_json(const RunRecord& rec) {
  nlohmann::ordered_json j;
  j["config"] = to_json(rec.config);
  j["seeds"]["master"] = rec.config.master_seed;
  j["summary"]["T"] = rec.config.num_steps;
  j["summary"]["initial_delta_sq"] = rec.delta_sq(0);
  j["summary"]["final_delta_sq"] = rec.delta_sq(rec.delta_sq.size() - 1);
  j["summary"]["wall_seconds"] = rec.wall_seconds;
  return j;
}

AsyncTd::AsyncTd(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
                 const RunConfig& cfg)
    : mrp_(mrp),
      phi_(phi),
      cfg_(cfg),
      capacity_(cfg.delay.tau_max + 1),
      delay_rng_(delay_stream_seed(cfg.master_seed)) {
  const int n = mrp.num_states();
  const int m = phi.m();
  if (phi.n() != n) throw DimensionMismatch("engine: feature rows != state count");
  if (cfg.num_agents < 1) throw PreconditionViolation("engine: need at least one agent");
  if (cfg.delay.tau_max < 0)
    throw PreconditionViolation("engine: declared tau_max must be nonnegative");
  if (cfg.initial_state < 0 || cfg.initial_state >= n)
    throw PreconditionViolation("engine: initial state out of range");

  theta_ = cfg.theta0.size() == 0 ? Eigen::VectorXd::Zero(m) : cfg.theta0;
  if (theta_.size() != m) throw DimensionMismatch("engine: theta0 dimension != m");
  v_ = Eigen::VectorXd::Zero(m);

  theta_ring_.assign(capacity_, Eigen::VectorXd::Zero(m));
  theta_stamp_.assign(capacity_, -1);
  theta_ring_[0] = theta_;
  theta_stamp_[0] = 0;

  obs_ring_.assign(cfg.num_agents, std::vector<Observation>(capacity_));
  obs_stamp_.assign(cfg.num_agents, std::vector<long>(capacity_, -1));
  chain_state_.assign(cfg.num_agents, cfg.initial_state);
  agent_rng_.reserve(cfg.num_agents);
  for (int i = 0; i < cfg.num_agents; ++i)
    agent_rng_.emplace_back(agent_stream_seed(cfg.master_seed, i));
  last_stale_.assign(cfg.num_agents, 0);
}

void AsyncTd::step() {
  const long k = step_;
  const int slot_k = static_cast<int>(k % capacity_);

  // Every agent advances its chain exactly once per global step; delays only
  // affect which buffered pair the server reads.
  for (int i = 0; i < cfg_.num_agents; ++i) {
    const Observation obs = sample_step(mrp_, chain_state_[i], agent_rng_[i]);
    chain_state_[i] = obs.next_state;
    obs_ring_[i][slot_k] = obs;
    obs_stamp_[i][slot_k] = k;
  }

  v_.setZero();
  for (int i = 0; i < cfg_.num_agents; ++i) {
    const int tau = cfg_.delay.draw(i, k, delay_rng_);
    if (tau > cfg_.delay.tau_max)
      throw PreconditionViolation("engine: drawn delay exceeds declared tau_max (buffer miss)");
    const long t = std::max(0L, k - tau);
    const int slot_t = static_cast<int>(t % capacity_);
    if (theta_stamp_[slot_t] != t || obs_stamp_[i][slot_t] != t)
      throw PreconditionViolation("engine: buffered pair older than tau_max (buffer miss)");
    last_stale_[i] = t;
    accumulate_td_direction(phi_, mrp_.gamma, theta_ring_[slot_t], obs_ring_[i][slot_t], v_);
  }
  v_ /= static_cast<double>(cfg_.num_agents);

  theta_ += cfg_.alpha * v_;
  step_ = k + 1;
  const int slot_next = static_cast<int>(step_ % capacity_);
  theta_ring_[slot_next] = theta_;
  theta_stamp_[slot_next] = step_;
}

RunRecord run(const MarkovRewardProcess& mrp, const FeatureMatrix& phi,
              const Eigen::VectorXd& theta_star, const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (theta_star.size() != phi.m())
    throw DimensionMismatch("run: theta_star dimension != m");

  AsyncTd engine(mrp, phi, cfg);
  const long T = cfg.num_steps;

  RunRecord rec;
  rec.config = cfg;
  rec.delta_sq.resize(T + 1);
  rec.vk_sq.resize(T);
  if (cfg.record_theta) rec.theta_traj.resize(T + 1, phi.m());

  rec.delta_sq(0) = (engine.theta() - theta_star).squaredNorm();
  if (cfg.record_theta) rec.theta_traj.row(0) = engine.theta().transpose();
  for (long k = 0; k < T; ++k) {
    engine.step();
    rec.delta_sq(k + 1) = (engine.theta() - theta_star).squaredNorm();
    rec.vk_sq[k] = engine.last_direction().squaredNorm();
    if (cfg.record_theta) rec.theta_traj.row(k + 1) = engine.theta().transpose();
  }
  rec.final_theta = engine.theta();
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

double delta_kh(const RunRecord& rec, long k, long h) {
  if (rec.theta_traj.rows() == 0)
    throw PreconditionViolation("delta_kh: full iterate trajectory was not recorded");
  if (h < 0 || k < h || k >= rec.theta_traj.rows())
    throw PreconditionViolation("delta_kh: need 0 <= h <= k <= T");
  return (rec.theta_traj.row(k) - rec.theta_traj.row(k - h)).norm();
}

namespace {

// Ensemble mean of delta_j^2 at a fixed j.
double mean_delta_sq(const std::vector<RunRecord>& ensemble, long j) {
  double sum = 0.0;
  for (const auto& rec : ensemble) sum += rec.delta_sq(j);
  return sum / static_cast<double>(ensemble.size());
}

double max_mean_delta_sq(const std::vector<RunRecord>& ensemble, long lo, long hi) {
  double max_val = 0.0;
  for (long j = std::max(0L, lo); j <= hi; ++j)
    max_val = std::max(max_val, mean_delta_sq(ensemble, j));
  return max_val;
}

}  // namespace

VkMomentReport check_vk_second_moment(const std::vector<RunRecord>& ensemble,
                                      double sigma, long tau, int q,
                                      int num_samples) {
  if (ensemble.empty()) throw PreconditionViolation("vk moment check: empty ensemble");
  const auto& cfg = ensemble.front().config;
  const long T = cfg.num_steps;
  const long tau_max = cfg.delay.tau_max;
  const long k_min = tau + tau_max;
  if (k_min >= T) throw PreconditionViolation("vk moment check: T too small for k >= tau + tau_max");

  VkMomentReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  const double noise_terms =
      32.0 * sigma * sigma / cfg.num_agents +
      8.0 * sigma * sigma * std::pow(cfg.alpha, 2.0 * q);
  for (int s = 0; s < num_samples; ++s) {
    const long k = k_min + static_cast<long>((T - 1 - k_min) * static_cast<double>(s) /
                                             std::max(1, num_samples - 1));
    double lhs = 0.0;
    for (const auto& rec : ensemble) lhs += rec.vk_sq[k];
    lhs /= static_cast<double>(ensemble.size());
    const double rhs = 8.0 * max_mean_delta_sq(ensemble, k - tau_max, k) + noise_terms;
    report.ks.push_back(k);
    report.lhs.push_back(lhs);
    report.rhs.push_back(rhs);
    report.min_margin = std::min(report.min_margin, rhs - lhs);
  }
  report.pass = report.min_margin >= 0.0;
  return report;
}

DeltaKhReport check_delta_kh_bound(const std::vector<RunRecord>& ensemble,
                                   double sigma, long tau, int q,
                                   int num_samples) {
  if (ensemble.empty()) throw PreconditionViolation("delta_kh check: empty ensemble");
  const auto& cfg = ensemble.front().config;
  const long T = cfg.num_steps;
  const long tau_max = cfg.delay.tau_max;
  const long k_min = tau + 2 * tau_max;  // d_k well-defined from here
  if (k_min >= T)
    throw PreconditionViolation("delta_kh check: T too small for k >= tau + 2 tau_max");

  DeltaKhReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  const double noise_terms = 4.0 * sigma * sigma / cfg.num_agents +
                             sigma * sigma * std::pow(cfg.alpha, 2.0 * q);
  const long h_max = tau + tau_max;
  for (int s = 0; s < num_samples; ++s) {
    const long k = k_min + static_cast<long>((T - k_min) * static_cast<double>(s) /
                                             std::max(1, num_samples));
    for (long h : {1L, std::max(1L, h_max / 2), std::max(1L, std::min(h_max, k - tau_max))}) {
      if (k < tau_max + h || h < 0) continue;
      double lhs = 0.0;
      for (const auto& rec : ensemble) {
        const double d = delta_kh(rec, k, h);
        lhs += d * d;
      }
      lhs /= static_cast<double>(ensemble.size());
      const double d_k = max_mean_delta_sq(ensemble, k - 2 * tau_max - tau, k);
      const double rhs = 8.0 * cfg.alpha * cfg.alpha * static_cast<double>(h) * h *
                         (d_k + noise_terms);
      report.pairs.emplace_back(k, h);
      report.min_margin = std::min(report.min_margin, rhs - lhs);
    }
  }
  report.pass = report.min_margin >= 0.0;
  return report;
}

}  // namespace matd
