#include "matd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <mutex>
#include <thread>

#include "matd/csv.hpp"
#include "matd/errors.hpp"
#include "matd/mc_oracle.hpp"
#include "matd/td_core.hpp"

namespace matd {

namespace {

constexpr std::uint64_t kFeatureSeedTag = 0xFEA7;

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

}  // namespace

Instance build_instance(const InstanceSpec& spec, const std::filesystem::path& base_dir) {
  Instance instance;
  if (spec.mrp_file) {
    const auto path = base_dir / *spec.mrp_file;
    instance.mrp = mrp_from_json(nlohmann::json::parse(read_text_file(path)));
  } else {
    if (spec.n < 2) throw ConfigError("instance: n must be >= 2");
    instance.mrp =
        generate_ergodic_mrp(spec.n, spec.gamma, spec.reward_bound, spec.smoothing, spec.seed);
  }
  if (spec.features_file) {
    const auto path = base_dir / *spec.features_file;
    instance.phi = features_from_json(nlohmann::json::parse(read_text_file(path)));
  } else if (spec.feature_mode == "identity") {
    instance.phi = identity_features(instance.mrp.num_states());
  } else if (spec.feature_mode == "orthonormal") {
    if (spec.m < 1) throw ConfigError("instance: m must be >= 1");
    instance.phi = build_orthonormal_features(instance.mrp.num_states(), spec.m,
                                              derive_seed(spec.seed, kFeatureSeedTag));
  } else {
    throw ConfigError("instance: unknown feature mode '" + spec.feature_mode + "'");
  }

  const auto mrp_report = validate(instance.mrp);
  if (!mrp_report.ok) throw ConfigError("instance out of contract: " + mrp_report.message);
  if (!is_ergodic(instance.mrp.kernel))
    throw ConfigError("instance out of contract: chain is not ergodic");
  const auto phi_report = validate(instance.phi);
  if (!phi_report.ok) throw ConfigError("instance out of contract: " + phi_report.message);
  if (instance.phi.n() != instance.mrp.num_states())
    throw ConfigError("instance out of contract: feature rows != state count");

  instance.pi = stationary_distribution(instance.mrp.kernel).pi;
  instance.gt = compute_ground_truth(instance.mrp, instance.phi, instance.pi,
                                     Eigen::VectorXd::Zero(instance.phi.m()));
  return instance;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig cfg;
    const auto& inst = j.at("instance");
    if (inst.contains("mrp_file")) cfg.instance.mrp_file = inst.at("mrp_file").get<std::string>();
    if (inst.contains("features_file"))
      cfg.instance.features_file = inst.at("features_file").get<std::string>();
    cfg.instance.n = inst.value("n", 0);
    cfg.instance.m = inst.value("m", 0);
    cfg.instance.gamma = inst.value("gamma", 0.5);
    cfg.instance.reward_bound = inst.value("reward_bound", 1.0);
    cfg.instance.smoothing = inst.value("smoothing", 0.1);
    cfg.instance.feature_mode = inst.value("features", std::string("orthonormal"));
    cfg.instance.seed = inst.value("seed", std::uint64_t{0});

    const auto& run_block = j.at("run");
    cfg.agents = run_block.at("agents").get<std::vector<int>>();
    for (const auto& d : run_block.at("delays")) cfg.delays.push_back(delay_from_json(d));
    cfg.alpha = run_block.at("alpha").get<double>();
    cfg.num_steps = run_block.at("T").get<long>();
    cfg.replications = run_block.value("replications", 1);
    cfg.master_seed = run_block.value("master_seed", std::uint64_t{0});
    cfg.initial_state = run_block.value("initial_state", 0);

    if (j.contains("analysis")) {
      const auto& analysis = j.at("analysis");
      cfg.q = analysis.value("q", 2);
      cfg.tail_fraction = analysis.value("tail_fraction", 0.2);
      cfg.record_full_theta = analysis.value("record_full_theta", false);
    }

    if (cfg.agents.empty() || cfg.delays.empty()) throw ConfigError("config: empty grid");
    for (int n_agents : cfg.agents)
      if (n_agents < 1) throw ConfigError("config: agent counts must be >= 1");
    if (cfg.replications < 1) throw ConfigError("config: replications must be >= 1");
    if (cfg.num_steps < 1) throw ConfigError("config: T must be >= 1");
    if (!(cfg.alpha >= 0.0)) throw ConfigError("config: alpha must be nonnegative");
    if (cfg.q < 1) throw ConfigError("config: q must be >= 1");
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config json: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  auto& inst = j["instance"];
  if (cfg.instance.mrp_file) inst["mrp_file"] = *cfg.instance.mrp_file;
  if (cfg.instance.features_file) inst["features_file"] = *cfg.instance.features_file;
  inst["n"] = cfg.instance.n;
  inst["m"] = cfg.instance.m;
  inst["gamma"] = cfg.instance.gamma;
  inst["reward_bound"] = cfg.instance.reward_bound;
  inst["smoothing"] = cfg.instance.smoothing;
  inst["features"] = cfg.instance.feature_mode;
  inst["seed"] = cfg.instance.seed;
  auto& run_block = j["run"];
  run_block["agents"] = cfg.agents;
  auto delays = nlohmann::ordered_json::array();
  for (const auto& d : cfg.delays) delays.push_back(to_json(d));
  run_block["delays"] = std::move(delays);
  run_block["alpha"] = cfg.alpha;
  run_block["T"] = cfg.num_steps;
  run_block["replications"] = cfg.replications;
  run_block["master_seed"] = cfg.master_seed;
  run_block["initial_state"] = cfg.initial_state;
  auto& analysis = j["analysis"];
  analysis["q"] = cfg.q;
  analysis["tail_fraction"] = cfg.tail_fraction;
  analysis["record_full_theta"] = cfg.record_full_theta;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse (" + path.string() + "): " + e.what());
  }
  return config_from_json(j);
}

std::string GridCell::label() const {
  return fmt("N%d_%s", num_agents, delay.label().c_str());
}

std::uint64_t cell_seed(std::uint64_t master, const GridCell& cell) {
  std::uint64_t fp = derive_seed(static_cast<std::uint64_t>(cell.num_agents),
                                 static_cast<std::uint64_t>(cell.delay.kind));
  fp = derive_seed(fp, static_cast<std::uint64_t>(cell.delay.constant));
  fp = derive_seed(fp, static_cast<std::uint64_t>(cell.delay.lo));
  fp = derive_seed(fp, static_cast<std::uint64_t>(cell.delay.hi));
  fp = derive_seed(fp, static_cast<std::uint64_t>(cell.delay.tau_max));
  for (const auto& row : cell.delay.table)
    for (int tau : row) fp = derive_seed(fp, static_cast<std::uint64_t>(tau));
  return derive_seed(derive_seed(master, seed_tag::cell), fp);
}

std::uint64_t replication_seed(std::uint64_t cell_seed_value, int replication) {
  return derive_seed(derive_seed(cell_seed_value, seed_tag::replication),
                     static_cast<std::uint64_t>(replication));
}

namespace {

// Runs a batch of independent jobs on up to `threads` workers. The first
// worker exception, if any, is rethrown after the join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

AggregateTrajectory aggregate_runs(const std::vector<RunRecord>& runs) {
  AggregateTrajectory agg;
  const long length = runs.front().delta_sq.size();
  const double r = static_cast<double>(runs.size());
  agg.k.resize(length);
  agg.mean.resize(length);
  agg.std_error.resize(length);
  for (long k = 0; k < length; ++k) {
    agg.k[k] = k;
    bool constant = true;
    for (const auto& rec : runs) constant = constant && rec.delta_sq(k) == runs.front().delta_sq(k);
    if (constant) {
      // Shared-theta0 columns (k = 0, or alpha = 0 runs) stay exact.
      agg.mean[k] = runs.front().delta_sq(k);
      agg.std_error[k] = 0.0;
      continue;
    }
    double sum = 0.0;
    for (const auto& rec : runs) sum += rec.delta_sq(k);
    const double mean = sum / r;
    double ss = 0.0;
    for (const auto& rec : runs) ss += (rec.delta_sq(k) - mean) * (rec.delta_sq(k) - mean);
    agg.mean[k] = mean;
    agg.std_error[k] = runs.size() > 1 ? std::sqrt(ss / (r * (r - 1.0))) : 0.0;
  }
  return agg;
}

}  // namespace

std::vector<RunRecord> run_ensemble(const Instance& instance, const RunConfig& base,
                                    int replications, int threads) {
  std::vector<RunRecord> records(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    RunConfig cfg = base;
    cfg.master_seed = replication_seed(base.master_seed, static_cast<int>(r));
    records[r] = run(instance.mrp, instance.phi, instance.gt.theta_star, cfg);
  });
  return records;
}

std::vector<CellResult> run_grid(const Instance& instance, const ExperimentConfig& cfg,
                                 int threads) {
  {
    const long length = cfg.num_steps + 1;
    const long window = length - static_cast<long>((1.0 - cfg.tail_fraction) * length);
    if (window < 100)
      throw ConfigError(
          "T too short for the tail window: tail_fraction * (T+1) must be >= 100 points");
  }
  std::vector<GridCell> cells;
  for (int n_agents : cfg.agents)
    for (const auto& delay : cfg.delays) cells.push_back({n_agents, delay});

  struct Task {
    int cell;
    int rep;
  };
  std::vector<Task> tasks;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c)
    for (int r = 0; r < cfg.replications; ++r) tasks.push_back({c, r});

  std::vector<CellResult> results(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    results[c].cell = cells[c];
    results[c].runs.resize(cfg.replications);
  }

  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const auto [c, r] = tasks[i];
    RunConfig run_cfg;
    run_cfg.num_agents = cells[c].num_agents;
    run_cfg.num_steps = cfg.num_steps;
    run_cfg.alpha = cfg.alpha;
    run_cfg.delay = cells[c].delay;
    run_cfg.initial_state = cfg.initial_state;
    run_cfg.record_theta = cfg.record_full_theta;
    run_cfg.master_seed = replication_seed(cell_seed(cfg.master_seed, cells[c]), r);
    results[c].runs[r] = run(instance.mrp, instance.phi, instance.gt.theta_star, run_cfg);
  });

  for (auto& result : results) {
    result.aggregate = aggregate_runs(result.runs);
    result.ball = empirical_ball(result.runs, cfg.tail_fraction);
  }
  return results;
}

void write_cell_results(const std::filesystem::path& out_dir,
                        const std::vector<CellResult>& results) {
  std::error_code ec;
  for (const auto& result : results) {
    const auto cell_dir = out_dir / "cells" / result.cell.label();
    std::filesystem::create_directories(cell_dir, ec);
    if (ec) throw IoError("cannot create " + cell_dir.string() + ": " + ec.message());
    for (std::size_t r = 0; r < result.runs.size(); ++r) {
      const auto& rec = result.runs[r];
      const std::vector<double> traj(rec.delta_sq.begin(), rec.delta_sq.end());
      write_text_file(cell_dir / fmt("run_%03zu.csv", r), run_trajectory_csv(traj));
      write_text_file(cell_dir / fmt("run_%03zu.json", r), record_to_json(rec).dump(2) + "\n");
    }
    write_text_file(cell_dir / "aggregate.csv", aggregate_csv(result.aggregate));
  }
}

SweepReport sweep_report(const std::vector<CellResult>& results) {
  SweepReport report;
  for (const auto& result : results) {
    report.cells.push_back({result.cell.label(), result.cell.num_agents,
                            result.cell.delay.tau_max, result.ball.mean,
                            result.ball.std_error});
  }

  // Slope groups: same delay model, >= 3 distinct agent counts.
  std::vector<std::string> delay_labels;
  for (const auto& result : results) {
    const auto label = result.cell.delay.label();
    if (std::find(delay_labels.begin(), delay_labels.end(), label) == delay_labels.end())
      delay_labels.push_back(label);
  }
  for (const auto& label : delay_labels) {
    std::vector<const CellResult*> group;
    for (const auto& result : results)
      if (result.cell.delay.label() == label) group.push_back(&result);
    std::sort(group.begin(), group.end(), [](const CellResult* a, const CellResult* b) {
      return a->cell.num_agents < b->cell.num_agents;
    });
    std::vector<int> distinct;
    for (const auto* cell : group)
      if (distinct.empty() || distinct.back() != cell->cell.num_agents)
        distinct.push_back(cell->cell.num_agents);
    if (distinct.size() < 3) continue;

    SweepReport::SlopeFit fit;
    fit.delay_label = label;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto* cell : group) {
      const double x = std::log(static_cast<double>(cell->cell.num_agents));
      const double y = std::log(cell->ball.mean);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double count = static_cast<double>(group.size());
    fit.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    const double base_ball = group.front()->ball.mean;
    for (const auto* cell : group) fit.speedup_vs_single.push_back(base_ball / cell->ball.mean);
    report.slopes.push_back(std::move(fit));
  }

  // Delay-ordering groups: same agent count, >= 3 delay models.
  std::vector<int> agent_counts;
  for (const auto& result : results)
    if (std::find(agent_counts.begin(), agent_counts.end(), result.cell.num_agents) ==
        agent_counts.end())
      agent_counts.push_back(result.cell.num_agents);
  for (int n_agents : agent_counts) {
    std::vector<const CellResult*> group;
    for (const auto& result : results)
      if (result.cell.num_agents == n_agents) group.push_back(&result);
    if (group.size() < 3) continue;
    std::sort(group.begin(), group.end(), [](const CellResult* a, const CellResult* b) {
      return a->cell.delay.tau_max < b->cell.delay.tau_max;
    });

    SweepReport::DelayOrdering ordering;
    ordering.num_agents = n_agents;
    ordering.nondecreasing_within_3se = true;
    for (std::size_t i = 0; i + 1 < group.size(); ++i) {
      const double combined = std::sqrt(group[i]->ball.std_error * group[i]->ball.std_error +
                                        group[i + 1]->ball.std_error * group[i + 1]->ball.std_error);
      if (group[i + 1]->ball.mean < group[i]->ball.mean - 3.0 * combined)
        ordering.nondecreasing_within_3se = false;
    }
    const auto* first = group.front();
    const auto* last = group.back();
    const double combined = std::sqrt(first->ball.std_error * first->ball.std_error +
                                      last->ball.std_error * last->ball.std_error);
    ordering.largest_gap_in_se =
        combined > 0.0 ? (last->ball.mean - first->ball.mean) / combined
                       : std::numeric_limits<double>::infinity();
    report.orderings.push_back(ordering);
  }

  if (report.slopes.empty() && report.orderings.empty())
    throw PreconditionViolation(
        "sweep: insufficient grid (need >= 3 agent counts per delay model or >= 3 delay "
        "models per agent count)");
  return report;
}

nlohmann::ordered_json to_json(const SweepReport& report) {
  nlohmann::ordered_json j;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& cell : report.cells) {
    nlohmann::ordered_json c;
    c["label"] = cell.label;
    c["agents"] = cell.num_agents;
    c["tau_max"] = cell.tau_max;
    c["ball"] = cell.ball;
    c["stderr"] = cell.std_error;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  auto slopes = nlohmann::ordered_json::array();
  for (const auto& fit : report.slopes) {
    nlohmann::ordered_json s;
    s["delay"] = fit.delay_label;
    s["loglog_slope_vs_N"] = fit.slope;
    s["speedup_vs_single"] = fit.speedup_vs_single;
    slopes.push_back(std::move(s));
  }
  j["slopes"] = std::move(slopes);
  auto orderings = nlohmann::ordered_json::array();
  for (const auto& ordering : report.orderings) {
    nlohmann::ordered_json o;
    o["agents"] = ordering.num_agents;
    o["nondecreasing_within_3se"] = ordering.nondecreasing_within_3se;
    o["largest_gap_in_se"] = ordering.largest_gap_in_se;
    orderings.push_back(std::move(o));
  }
  j["delay_orderings"] = std::move(orderings);
  return j;
}

std::string sweep_csv(const SweepReport& report) {
  std::string out = "label,agents,tau_max,ball,stderr\n";
  for (const auto& cell : report.cells)
    out += fmt("%s,%d,%d,%.17g,%.17g\n", cell.label.c_str(), cell.num_agents, cell.tau_max,
               cell.ball, cell.std_error);
  return out;
}

CappedStepSize theorem_capped_alpha(const Instance& instance, const MixingAnalysis& mixing,
                                    int q, long tau_max, const BoundConstants& constants) {
  // Same expression shape as the bound's own hypothesis check, so the
  // returned alpha compares <= the cap bit-for-bit.
  const auto cap_at = [&](long tau) {
    return instance.gt.omega * (1.0 - instance.mrp.gamma) /
           (constants.c0 * static_cast<double>(tau + tau_max));
  };
  double alpha = cap_at(1);
  long tau = 1;
  // Shrinking alpha can only enlarge tau, so this descends to a consistent pair.
  for (int iteration = 0; iteration < 64; ++iteration) {
    tau = mixing.mixing_time(std::pow(alpha, q));
    const double cap = cap_at(tau);
    if (alpha <= cap) return {alpha, tau};
    alpha = cap;
  }
  throw PreconditionViolation("theorem_capped_alpha: step-size fixed point did not settle");
}

nlohmann::ordered_json ground_truth_report(const Instance& instance,
                                           const ExperimentConfig& cfg) {
  nlohmann::ordered_json j = to_json(instance.gt);
  MixingAnalysis mixing(instance.mrp, instance.phi, instance.pi);
  const double epsilon = std::pow(cfg.alpha, cfg.q);
  const long tau = mixing.mixing_time(epsilon);
  j["epsilon"] = epsilon;
  j["tau_eps"] = tau;
  j["empirical_K"] = static_cast<double>(tau) / std::log(1.0 / epsilon);
  return j;
}

}  // namespace matd
