#include "matd/mrp.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "matd/errors.hpp"

namespace matd {

namespace {

std::string format_entry(const char* what, int row, int col, double value) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s at (%d,%d): %.17g", what, row, col, value);
  return buf;
}

// n x n boolean matrix, one bitset row per state.
struct BitMatrix {
  int n = 0;
  int words = 0;
  std::vector<std::uint64_t> bits;  // row-major, `words` per row

  explicit BitMatrix(int n_)
      : n(n_), words((n_ + 63) / 64), bits(static_cast<std::size_t>(n_) * words, 0) {}

  void set(int i, int j) { bits[static_cast<std::size_t>(i) * words + j / 64] |= 1ULL << (j % 64); }
  bool get(int i, int j) const {
    return (bits[static_cast<std::size_t>(i) * words + j / 64] >> (j % 64)) & 1ULL;
  }
  const std::uint64_t* row(int i) const { return bits.data() + static_cast<std::size_t>(i) * words; }
  std::uint64_t* row(int i) { return bits.data() + static_cast<std::size_t>(i) * words; }
};

BitMatrix bool_multiply(const BitMatrix& a, const BitMatrix& b) {
  BitMatrix c(a.n);
  for (int i = 0; i < a.n; ++i) {
    std::uint64_t* out = c.row(i);
    for (int k = 0; k < a.n; ++k) {
      if (a.get(i, k)) {
        const std::uint64_t* src = b.row(k);
        for (int w = 0; w < a.words; ++w) out[w] |= src[w];
      }
    }
  }
  return c;
}

bool all_ones(const BitMatrix& a) {
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      if (!a.get(i, j)) return false;
  return true;
}

}  // namespace

ValidationReport validate(const TransitionKernel& kernel) {
  const auto& p = kernel.p;
  if (p.rows() != p.cols()) return {false, "kernel is not square"};
  if (p.rows() < 2) return {false, "state count must be >= 2"};
  const int n = kernel.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = p(i, j);
      if (!(v >= 0.0)) return {false, format_entry("negative entry", i, j, v)};
      if (v > 1.0) return {false, format_entry("entry exceeds 1", i, j, v)};
    }
    const double row_sum = p.row(i).sum();
    if (std::abs(row_sum - 1.0) > 1e-12)
      return {false, format_entry("row sum not 1", i, -1, row_sum)};
  }
  return {};
}

bool is_ergodic(const TransitionKernel& kernel) {
  const int n = kernel.n();
  BitMatrix base(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (kernel.p(i, j) > 0.0) base.set(i, j);

  // Wielandt: a primitive support matrix B satisfies B^(n^2-2n+2) > 0, and no
  // power of a non-primitive one is ever all-positive.
  long exponent = static_cast<long>(n) * n - 2L * n + 2L;
  BitMatrix acc(n);
  for (int i = 0; i < n; ++i) acc.set(i, i);
  BitMatrix sq = base;
  while (exponent > 0) {
    if (exponent & 1L) acc = bool_multiply(acc, sq);
    exponent >>= 1;
    if (exponent > 0) sq = bool_multiply(sq, sq);
  }
  return all_ones(acc);
}

StationaryDistribution stationary_distribution(const TransitionKernel& kernel) {
  const int n = kernel.n();
  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = kernel.p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.bottomRows(1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < n)
    throw SingularSystem("stationary distribution: augmented system is rank-deficient (chain not ergodic?)");
  Eigen::VectorXd pi = qr.solve(b);
  for (int i = 0; i < n; ++i)
    if (!(pi(i) > 0.0))
      throw SingularSystem("stationary distribution: non-positive entry (chain not ergodic?)");
  return {std::move(pi)};
}

ValidationReport validate(const MarkovRewardProcess& mrp) {
  auto kernel_report = validate(mrp.kernel);
  if (!kernel_report.ok) return kernel_report;
  if (mrp.rewards.size() != mrp.num_states()) return {false, "reward vector length mismatch"};
  if (!(mrp.gamma > 0.0 && mrp.gamma < 1.0)) return {false, "gamma must lie in (0,1)"};
  for (int s = 0; s < mrp.num_states(); ++s)
    if (std::abs(mrp.rewards(s)) > mrp.reward_bound)
      return {false, format_entry("reward exceeds reward_bound", s, -1, mrp.rewards(s))};
  return {};
}

Observation sample_step(const MarkovRewardProcess& mrp, int state, Rng& rng) {
  const int n = mrp.num_states();
  if (state < 0 || state >= n) throw PreconditionViolation("sample_step: state index out of range");
  const double x = rng.uniform01();
  double cum = 0.0;
  int next = n - 1;  // absorbs any floating-point leftover in the last bucket
  for (int j = 0; j < n; ++j) {
    cum += mrp.kernel.p(state, j);
    if (x < cum) {
      next = j;
      break;
    }
  }
  return {state, mrp.rewards(state), next};
}

MarkovRewardProcess generate_ergodic_mrp(int n, double gamma, double reward_bound,
                                         double smoothing, std::uint64_t seed) {
  if (n < 2) throw PreconditionViolation("generate_ergodic_mrp: n must be >= 2");
  if (!(smoothing > 0.0 && smoothing <= 1.0))
    throw PreconditionViolation("generate_ergodic_mrp: smoothing must lie in (0,1]");
  if (!(reward_bound > 0.0))
    throw PreconditionViolation("generate_ergodic_mrp: reward_bound must be positive");

  Rng kernel_rng(derive_seed(seed, seed_tag::kernel));
  Eigen::MatrixXd p(n, n);
  const double uniform = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      p(i, j) = kernel_rng.uniform01();
      row_sum += p(i, j);
    }
    if (row_sum == 0.0) {
      p.row(i).setConstant(uniform);
      row_sum = 1.0;
    }
    for (int j = 0; j < n; ++j)
      p(i, j) = (1.0 - smoothing) * (p(i, j) / row_sum) + smoothing * uniform;
  }

  Rng reward_rng(derive_seed(seed, seed_tag::reward));
  Eigen::VectorXd r(n);
  for (int s = 0; s < n; ++s) r(s) = reward_rng.uniform01() * reward_bound;

  return {TransitionKernel{std::move(p)}, std::move(r), gamma, reward_bound};
}

nlohmann::ordered_json to_json(const MarkovRewardProcess& mrp) {
  nlohmann::ordered_json j;
  j["n"] = mrp.num_states();
  j["gamma"] = mrp.gamma;
  auto kernel = nlohmann::ordered_json::array();
  for (int i = 0; i < mrp.num_states(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int k = 0; k < mrp.num_states(); ++k) row.push_back(mrp.kernel.p(i, k));
    kernel.push_back(std::move(row));
  }
  j["kernel"] = std::move(kernel);
  auto rewards = nlohmann::ordered_json::array();
  for (int s = 0; s < mrp.num_states(); ++s) rewards.push_back(mrp.rewards(s));
  j["rewards"] = std::move(rewards);
  j["reward_bound"] = mrp.reward_bound;
  return j;
}

MarkovRewardProcess mrp_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    MarkovRewardProcess mrp;
    mrp.gamma = j.at("gamma").get<double>();
    mrp.reward_bound = j.at("reward_bound").get<double>();
    const auto& kernel = j.at("kernel");
    if (static_cast<int>(kernel.size()) != n) throw ConfigError("mrp json: kernel row count != n");
    mrp.kernel.p.resize(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(kernel[i].size()) != n) throw ConfigError("mrp json: kernel column count != n");
      for (int k = 0; k < n; ++k) mrp.kernel.p(i, k) = kernel[i][k].get<double>();
    }
    const auto& rewards = j.at("rewards");
    if (static_cast<int>(rewards.size()) != n) throw ConfigError("mrp json: rewards length != n");
    mrp.rewards.resize(n);
    for (int s = 0; s < n; ++s) mrp.rewards(s) = rewards[s].get<double>();
    return mrp;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("mrp json: ") + e.what());
  }
}

}  // namespace matd
