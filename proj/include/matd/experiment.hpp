#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "matd/bounds.hpp"
#include "matd/csv.hpp"
#include "matd/engine.hpp"
#include "matd/features.hpp"
#include "matd/ground_truth.hpp"
#include "matd/mixing.hpp"
#include "matd/mrp.hpp"

namespace matd {

/// How to obtain the problem instance: generate it from scalar parameters, or
/// load MRP/features from JSON files.
struct InstanceSpec {
  int n = 0;
  int m = 0;
  double gamma = 0.5;
  double reward_bound = 1.0;
  double smoothing = 0.1;
  std::string feature_mode = "orthonormal";  // or "identity"
  std::uint64_t seed = 0;
  std::optional<std::string> mrp_file;
  std::optional<std::string> features_file;
};

/// A validated instance with its exact ground truth.
struct Instance {
  MarkovRewardProcess mrp;
  FeatureMatrix phi;
  Eigen::VectorXd pi;
  GroundTruth gt;
};

/// Builds (or loads) the instance, refuses out-of-contract inputs
/// (non-stochastic kernel, non-ergodic chain, row norms above 1, rank
/// deficiency) with ConfigError, and computes the ground truth for theta0 = 0.
Instance build_instance(const InstanceSpec& spec,
                        const std::filesystem::path& base_dir = {});

struct ExperimentConfig {
  InstanceSpec instance;
  std::vector<int> agents;          // grid axis 1
  std::vector<DelayModel> delays;   // grid axis 2
  double alpha = 0.01;
  long num_steps = 5000;            // T
  int replications = 1;             // R
  std::uint64_t master_seed = 0;
  int initial_state = 0;
  int q = 2;
  double tail_fraction = 0.2;
  bool record_full_theta = false;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

struct GridCell {
  int num_agents = 1;
  DelayModel delay;

  std::string label() const;
};

/// Seed of one grid cell: a pure function of the master seed and the cell's
/// content (agent count + delay model), so editing the grid never perturbs
/// other cells.
std::uint64_t cell_seed(std::uint64_t master, const GridCell& cell);
std::uint64_t replication_seed(std::uint64_t cell_seed_value, int replication);

struct CellResult {
  GridCell cell;
  std::vector<RunRecord> runs;
  AggregateTrajectory aggregate;
  BallEstimate ball;
};

/// R replications of one run configuration; replication r runs with master
/// seed replication_seed(base.master_seed, r). Parallel across `threads`,
/// result independent of the thread count.
std::vector<RunRecord> run_ensemble(const Instance& instance, const RunConfig& base,
                                    int replications, int threads = 1);

/// Largest step size admitted by the bound's hypotheses, solved jointly with
/// the mixing time it depends on: alpha = omega(1-gamma)/(C0 (tau + tau_max))
/// with tau = mixing_time(alpha^q), iterated to a fixed point.
struct CappedStepSize {
  double alpha = 0.0;
  long tau = 0;
};

CappedStepSize theorem_capped_alpha(const Instance& instance, const MixingAnalysis& mixing,
                                    int q, long tau_max, const BoundConstants& constants = {});

/// Runs every (cell, replication) of the grid. Replications execute in
/// parallel across `threads` workers; results are identical for any thread
/// count (per-replication streams, fixed-order aggregation).
std::vector<CellResult> run_grid(const Instance& instance, const ExperimentConfig& cfg,
                                 int threads);

/// Writes per-run CSV + JSON records and the per-cell aggregate CSV under
/// out_dir/cells/<label>/.
void write_cell_results(const std::filesystem::path& out_dir,
                        const std::vector<CellResult>& results);

struct SweepReport {
  struct CellSummary {
    std::string label;
    int num_agents = 0;
    int tau_max = 0;
    double ball = 0.0;
    double std_error = 0.0;
  };
  std::vector<CellSummary> cells;
  // log(ball) vs log(N) slope per delay-model group with >= 3 agent counts.
  struct SlopeFit {
    std::string delay_label;
    double slope = 0.0;
    std::vector<double> speedup_vs_single;  // ball(N=min)/ball(N), per cell
  };
  std::vector<SlopeFit> slopes;
  // Ball-vs-tau_max ordering per agent-count group with >= 3 delay models.
  struct DelayOrdering {
    int num_agents = 0;
    bool nondecreasing_within_3se = false;
    double largest_gap_in_se = 0.0;  // (ball(max tau) - ball(min tau)) / combined se
  };
  std::vector<DelayOrdering> orderings;
};

/// Requires at least one group with >= 3 agent counts or >= 3 delay models.
SweepReport sweep_report(const std::vector<CellResult>& results);

nlohmann::ordered_json to_json(const SweepReport& report);
std::string sweep_csv(const SweepReport& report);

struct PropertyVerdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// The full inequality/property battery over the config's instance. Failures are
/// verdicts, not exceptions.
std::vector<PropertyVerdict> run_verify(const Instance& instance,
                                        const ExperimentConfig& cfg);

nlohmann::ordered_json verdicts_to_json(const std::vector<PropertyVerdict>& verdicts);

/// Ground-truth report for cmd_ground_truth: exact quantities plus the
/// mixing time at epsilon = alpha^q and the empirical K = tau_eps/log(1/eps).
nlohmann::ordered_json ground_truth_report(const Instance& instance,
                                           const ExperimentConfig& cfg);

}  // namespace matd
