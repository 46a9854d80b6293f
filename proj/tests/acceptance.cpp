// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "matd/bounds.hpp"
#include "matd/csv.hpp"
#include "matd/experiment.hpp"
#include "matd/ground_truth.hpp"
#include "matd/mc_oracle.hpp"
#include "matd/mixing.hpp"

using namespace matd;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Criterion> g_results;

// Worst excursion of every ensemble run, kept for the no-divergence guard
// (delta_k^2 must never exceed 1e3 sigma^2 for its instance).
struct RunPeak {
  std::string tag;
  double max_delta_sq;
  double sigma_sq;
};
std::vector<RunPeak> g_peaks;

void track_runs(const std::string& tag, double sigma, const std::vector<RunRecord>& runs) {
  for (const auto& rec : runs)
    g_peaks.push_back({tag, rec.delta_sq.maxCoeff(), sigma * sigma});
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

Instance paper_scale_instance() {
  InstanceSpec spec;
  spec.n = 100;
  spec.m = 10;
  spec.gamma = 0.5;
  spec.reward_bound = 1.0;
  spec.smoothing = 0.1;
  spec.seed = 20240601;
  return build_instance(spec);
}

Instance desk_scale_instance() {
  InstanceSpec spec;
  spec.n = 20;
  spec.m = 5;
  spec.gamma = 0.5;
  spec.reward_bound = 1.0;
  spec.smoothing = 0.1;
  spec.seed = 20240602;
  return build_instance(spec);
}

Instance desk_two_state_instance() {
  Instance instance;
  instance.mrp = testing::desk_mrp();
  instance.phi = identity_features(2);
  instance.pi = stationary_distribution(instance.mrp.kernel).pi;
  instance.gt = compute_ground_truth(instance.mrp, instance.phi, instance.pi,
                                     Eigen::VectorXd::Zero(2));
  return instance;
}

double speedup_ratio(const Instance& instance, const std::string& tag, std::uint64_t seed,
                     long horizon, double alpha, int replications, double tail_fraction) {
  RunConfig base;
  base.alpha = alpha;
  base.num_steps = horizon;
  base.delay = DelayModel::uniform_bounded(1, 100);

  base.num_agents = 1;
  base.master_seed = derive_seed(seed, 1);
  const auto single = run_ensemble(instance, base, replications);
  track_runs(tag + "/N1", instance.gt.sigma_const, single);

  base.num_agents = 20;
  base.master_seed = derive_seed(seed, 20);
  const auto multi = run_ensemble(instance, base, replications);
  track_runs(tag + "/N20", instance.gt.sigma_const, multi);

  return empirical_ball(single, tail_fraction).mean / empirical_ball(multi, tail_fraction).mean;
}

// --- criterion 1: linear speedup at paper scale and desk scale ---
void criterion_linear_speedup() {
  Timer paper_timer;
  const auto paper = paper_scale_instance();
  const double paper_ratio = speedup_ratio(paper, "c1/paper", 910001, 5000, 0.05, 20, 0.2);
  const double paper_seconds = paper_timer.seconds();

  Timer desk_timer;
  const auto desk = desk_scale_instance();
  const double desk_ratio = speedup_ratio(desk, "c1/desk", 910002, 20000, 0.05, 20, 0.2);
  const double desk_seconds = desk_timer.seconds();

  const bool pass =
      paper_ratio >= 5.0 && desk_ratio >= 5.0 && paper_seconds < 300.0 && desk_seconds < 30.0;
  g_results.push_back({1, "linear speedup (N=20 vs N=1)", pass,
                       fmt("paper-scale ratio %.1fx in %.1fs, desk-scale ratio %.1fx in %.1fs",
                           paper_ratio, paper_seconds, desk_ratio, desk_seconds)});
}

// --- criterion 2: 1/N scaling law ---
void criterion_scaling_law() {
  const auto desk = desk_scale_instance();
  ExperimentConfig cfg;
  cfg.agents = {1, 2, 4, 8, 16};
  cfg.delays = {DelayModel::none()};
  cfg.alpha = 0.01;
  cfg.num_steps = 30000;
  cfg.replications = 20;
  cfg.master_seed = 777001;
  cfg.tail_fraction = 0.25;
  const auto results = run_grid(desk, cfg, 1);
  for (const auto& cell : results)
    track_runs("c2/" + cell.cell.label(), desk.gt.sigma_const, cell.runs);
  const auto report = sweep_report(results);
  const double slope = report.slopes.at(0).slope;
  const bool pass = slope >= -1.3 && slope <= -0.7;
  g_results.push_back({2, "1/N scaling law", pass,
                       fmt("log-log slope of tail ball vs N = %.3f (target [-1.3, -0.7])",
                           slope)});
}

// --- criterion 3: delay effect ---
void criterion_delay_effect() {
  const auto desk = desk_scale_instance();
  ExperimentConfig cfg;
  cfg.agents = {8};
  cfg.delays = {DelayModel::none(), DelayModel::uniform_bounded(1, 25),
                DelayModel::uniform_bounded(1, 50), DelayModel::uniform_bounded(1, 100)};
  cfg.alpha = 0.02;
  cfg.num_steps = 60000;
  cfg.replications = 20;
  cfg.master_seed = 777002;
  cfg.tail_fraction = 0.5;
  const auto results = run_grid(desk, cfg, 1);
  for (const auto& cell : results)
    track_runs("c3/" + cell.cell.label(), desk.gt.sigma_const, cell.runs);
  const auto report = sweep_report(results);
  const auto& ordering = report.orderings.at(0);
  const bool pass = ordering.nondecreasing_within_3se && ordering.largest_gap_in_se >= 3.0;
  g_results.push_back(
      {3, "delay effect on the noise ball", pass,
       fmt("nondecreasing within 3se: %s; ball(tau_max=100) - ball(0) = %.1f se",
           ordering.nondecreasing_within_3se ? "yes" : "no", ordering.largest_gap_in_se)});
}

// --- criterion 4: stability under the bound's hypotheses ---
void criterion_stability() {
  const auto desk = desk_two_state_instance();
  MixingAnalysis mixing(desk.mrp, desk.phi, desk.pi);
  const BoundConstants constants;
  std::string detail;
  bool pass = true;

  for (long tau_max : {0L, 2L, 5L}) {
    const auto capped = theorem_capped_alpha(desk, mixing, 2, tau_max, constants);
    RunConfig cfg;
    cfg.num_agents = 4;
    cfg.alpha = capped.alpha;
    cfg.delay = tau_max == 0 ? DelayModel::none()
                             : DelayModel::uniform_bounded(0, static_cast<int>(tau_max));
    cfg.num_steps = std::max<long>(capped.tau + 2 * tau_max, 2000);
    cfg.master_seed = derive_seed(777003, tau_max);
    const auto runs = run_ensemble(desk, cfg, 10);
    track_runs(fmt("c4/taumax%ld", tau_max), desk.gt.sigma_const, runs);
    const auto cmp = compare_bound_to_empirical(constants, runs, desk.gt.omega,
                                                desk.mrp.gamma, capped.tau,
                                                desk.gt.sigma_const, 0.5);
    const bool cell_ok = cmp.hypotheses_ok && cmp.inflation <= 10.0;
    pass = pass && cell_ok;
    detail += fmt("taumax=%ld: ball %.3g vs bound %.3g (inflation %.2f); ", tau_max,
                  cmp.ball.mean, cmp.bound_value, cmp.inflation);
  }
  g_results.push_back({4, "stability under the bound hypotheses", pass, detail});
}

// --- criterion 5: ground-truth oracle equivalence on the 2-state desk MRP ---
void criterion_ground_truth() {
  const auto desk = desk_two_state_instance();
  const double e_theta =
      (desk.gt.theta_star - testing::desk_theta_star()).cwiseAbs().maxCoeff();
  const double e_pi = (desk.pi - testing::desk_pi()).cwiseAbs().maxCoeff();
  const double e_omega = std::abs(desk.gt.omega - 1.0 / 3.0);
  const double e_root =
      steady_state_direction(desk.mrp, desk.phi, desk.pi, desk.gt.theta_star).norm();
  const bool pass = e_theta <= 1e-10 && e_pi <= 1e-10 && e_omega <= 1e-12 && e_root <= 1e-10;
  g_results.push_back({5, "ground-truth oracle equivalence", pass,
                       fmt("theta* err %.1e, pi err %.1e, omega err %.1e, root residual %.1e",
                           e_theta, e_pi, e_omega, e_root)});
}

// --- criterion 6: inequality battery on random instances ---
void criterion_inequalities() {
  int violations = 0;
  long checks = 0;
  Rng rng(424242);
  for (int inst = 0; inst < 10; ++inst) {
    const auto mrp = generate_ergodic_mrp(12 + inst, 0.5 + 0.04 * inst, 1.0, 0.1, 5000 + inst);
    const auto pi = stationary_distribution(mrp.kernel).pi;
    const auto phi =
        build_orthonormal_features(mrp.num_states(), 3 + inst % 4, 6000 + inst);
    const auto gt = compute_ground_truth(mrp, phi, pi, Eigen::VectorXd::Zero(phi.m()));

    for (int i = 0; i < 1000; ++i) {
      const double scale = std::pow(10.0, -2.0 + 4.0 * rng.uniform01());
      const Eigen::VectorXd theta = testing::random_theta(phi.m(), scale, rng);
      const Eigen::VectorXd other = testing::random_theta(phi.m(), scale, rng);
      const Observation obs = sample_step(mrp, rng.uniform_int(0, mrp.num_states() - 1), rng);

      // Strong monotonicity.
      const Eigen::VectorXd gap = gt.theta_star - theta;
      const Eigen::VectorXd direction = steady_state_direction(mrp, phi, pi, theta);
      if (gap.dot(direction) <
          gt.omega * (1.0 - mrp.gamma) * gap.squaredNorm() - 1e-9 * (1.0 + theta.squaredNorm()))
        ++violations;

      // 2-Lipschitz for the random and steady-state directions.
      const double dist = (theta - other).norm();
      if ((td_direction(phi, mrp.gamma, theta, obs) - td_direction(phi, mrp.gamma, other, obs))
              .norm() > 2.0 * dist + 1e-9)
        ++violations;
      if ((direction - steady_state_direction(mrp, phi, pi, other)).norm() >
          2.0 * dist + 1e-9)
        ++violations;

      // Norm bounds, linear and squared.
      const double g_norm = td_direction(phi, mrp.gamma, theta, obs).norm();
      if (g_norm > 2.0 * theta.norm() + 2.0 * mrp.reward_bound + 1e-9) ++violations;
      if (g_norm * g_norm >
          8.0 * (theta.squaredNorm() + gt.sigma_const * gt.sigma_const) + 1e-9)
        ++violations;

      checks += 5;
    }
  }
  g_results.push_back({6, "inequality battery", violations == 0,
                       fmt("%d violations over %ld checks on 10 instances", violations, checks)});
}

// --- criterion 7: mixing analysis vs Monte Carlo and spectral oracles ---
void criterion_mixing() {
  bool pass = true;
  std::string detail;

  // Conditional expectations vs 1e5-restart Monte Carlo, desk + random instance.
  {
    std::vector<Instance> instances;
    instances.push_back(desk_two_state_instance());
    InstanceSpec spec;
    spec.n = 12;
    spec.m = 4;
    spec.seed = 90901;
    instances.push_back(build_instance(spec));
    double worst = 0.0;
    Rng rng(555);
    for (const auto& instance : instances) {
      MixingAnalysis mixing(instance.mrp, instance.phi, instance.pi);
      for (int probe = 0; probe < 2; ++probe) {
        const int u = rng.uniform_int(0, instance.mrp.num_states() - 1);
        const int tau = 1 + probe;
        const Eigen::VectorXd theta = testing::random_theta(instance.phi.m(), 1.0, rng);
        const auto mc = monte_carlo_conditional_direction(
            instance.mrp, instance.phi, theta, u, tau, 100000, derive_seed(97, probe));
        const auto exact = mixing.conditional_expected_direction(theta, u, tau);
        worst = std::max(worst, (mc.mean - exact).norm() / mc.std_error.norm());
      }
    }
    pass = pass && worst <= 3.0;
    detail += fmt("MC deviation %.2f se; ", worst);
  }

  // Fitted rho in (0,1) on every ergodic instance we touch.
  {
    bool rho_ok = true;
    for (std::uint64_t seed : {11u, 22u, 33u}) {
      const auto mrp = generate_ergodic_mrp(10, 0.5, 1.0, 0.1, seed);
      MixingAnalysis mixing(mrp, identity_features(10),
                            stationary_distribution(mrp.kernel).pi);
      const auto profile = mixing.profile(1, 12);
      rho_ok = rho_ok && !profile.degenerate && profile.fitted_rho > 0.0 &&
               profile.fitted_rho < 1.0;
    }
    pass = pass && rho_ok;
    detail += fmt("rho in (0,1): %s; ", rho_ok ? "yes" : "no");
  }

  // Rank-1 kernel: tau_eps = 1 for every epsilon.
  {
    MarkovRewardProcess flat;
    Eigen::VectorXd q(3);
    q << 0.6, 0.3, 0.1;
    flat.kernel.p = Eigen::VectorXd::Ones(3) * q.transpose();
    flat.rewards.resize(3);
    flat.rewards << 0.2, 0.9, 0.4;
    flat.gamma = 0.5;
    flat.reward_bound = 1.0;
    MixingAnalysis mixing(flat, identity_features(3),
                          stationary_distribution(flat.kernel).pi);
    bool rank1_ok = true;
    for (double eps : {0.5, 1e-2, 1e-6, 1e-9}) rank1_ok = rank1_ok && mixing.mixing_time(eps) == 1;
    pass = pass && rank1_ok;
    detail += fmt("rank-1 tau_eps=1: %s; ", rank1_ok ? "yes" : "no");
  }

  // Desk MRP: fitted rho = 0.70 +- 0.02.
  {
    MixingAnalysis mixing(testing::desk_mrp(), identity_features(2), testing::desk_pi());
    const auto profile = mixing.profile(1, 25);
    const bool desk_ok = std::abs(profile.fitted_rho - 0.70) <= 0.02;
    pass = pass && desk_ok;
    detail += fmt("desk rho %.4f", profile.fitted_rho);
  }

  g_results.push_back({7, "mixing coefficients and times", pass, detail});
}

// --- criterion 8: delayed-recursion envelope dominance ---
void criterion_envelope() {
  Rng rng(313131);
  int failures = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    RecursionSpec spec;
    spec.p = 0.9 * rng.uniform01();
    spec.q = (1.0 - spec.p) * 0.95 * rng.uniform01();
    spec.beta = rng.uniform01();
    spec.d_max = rng.uniform_int(0, 40);
    const double v0 = 10.0 * rng.uniform01();
    std::vector<int> delays(10000);
    for (auto& d : delays) d = rng.uniform_int(0, spec.d_max);
    std::vector<double> shrink;
    if (trial % 3 == 2) {
      shrink.resize(32);
      for (auto& s : shrink) s = 0.85 + 0.15 * rng.uniform01();
    }
    const auto envelope = recursion_envelope(spec, v0);
    const auto values = simulate_recursion(spec, v0, delays, shrink);
    bool failed = false;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double excess = values[k] - envelope(static_cast<long>(k)) - 1e-12;
      worst_excess = std::max(worst_excess, excess);
      failed = failed || excess > 0.0;
    }
    failures += failed;
  }
  g_results.push_back({8, "delayed-recursion envelope", failures == 0,
                       fmt("%d failing specs of 100 (k <= 1e4), worst excess %.2e", failures,
                           worst_excess)});
}

// --- criterion 9: reduction and byte-level determinism ---
void criterion_determinism() {
  bool pass = true;
  std::string detail;

  // Engine reduces bit-exactly to the reference TD(0) loop.
  {
    const auto desk = desk_two_state_instance();
    RunConfig cfg;
    cfg.num_agents = 1;
    cfg.num_steps = 5000;
    cfg.alpha = 0.03;
    cfg.master_seed = 909090;
    cfg.record_theta = true;
    const auto rec = run(desk.mrp, desk.phi, desk.gt.theta_star, cfg);
    const auto reference =
        testing::reference_td0(desk.mrp, desk.phi, Eigen::VectorXd::Zero(2), cfg.alpha,
                               cfg.num_steps, cfg.initial_state, cfg.master_seed);
    bool bit_equal = true;
    for (long k = 0; k <= cfg.num_steps && bit_equal; ++k)
      bit_equal = rec.theta_traj(k, 0) == reference[k](0) &&
                  rec.theta_traj(k, 1) == reference[k](1);
    pass = pass && bit_equal;
    detail += fmt("NoDelay/N=1 bit-equal to reference: %s; ", bit_equal ? "yes" : "no");
  }

  // Repeated grid execution: byte-identical CSVs for any thread count.
  {
    const auto desk = desk_scale_instance();
    ExperimentConfig cfg;
    cfg.agents = {1, 3};
    cfg.delays = {DelayModel::none(), DelayModel::uniform_bounded(1, 10)};
    cfg.alpha = 0.02;
    cfg.num_steps = 800;
    cfg.replications = 4;
    cfg.master_seed = 123123;
    cfg.tail_fraction = 0.5;

    const auto dir_a = fs::temp_directory_path() / "matd_accept_a";
    const auto dir_b = fs::temp_directory_path() / "matd_accept_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    write_cell_results(dir_a, run_grid(desk, cfg, 1));
    write_cell_results(dir_b, run_grid(desk, cfg, 5));

    bool identical = true;
    std::size_t csv_files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir_a)) {
      if (!entry.is_regular_file()) continue;
      const auto relative = fs::relative(entry.path(), dir_a);
      if (!fs::exists(dir_b / relative)) {
        identical = false;
        continue;
      }
      if (entry.path().extension() == ".csv") {
        ++csv_files;
        identical = identical &&
                    read_text_file(entry.path()) == read_text_file(dir_b / relative);
      } else if (entry.path().extension() == ".json") {
        // Run records match up to the measured wall time.
        auto a = nlohmann::json::parse(read_text_file(entry.path()));
        auto b = nlohmann::json::parse(read_text_file(dir_b / relative));
        a["summary"].erase("wall_seconds");
        b["summary"].erase("wall_seconds");
        identical = identical && a == b;
      }
    }
    pass = pass && identical && csv_files > 0;
    detail += fmt("%zu CSVs byte-identical across thread counts: %s", csv_files,
                  identical ? "yes" : "no");
  }

  g_results.push_back({9, "reduction + determinism", pass, detail});
}

bool check_no_divergence() {
  bool ok = true;
  for (const auto& peak : g_peaks)
    if (peak.max_delta_sq > 1000.0 * peak.sigma_sq) {
      std::printf("  divergence in %s: max delta^2 %.3g > 1e3 sigma^2 %.3g\n",
                  peak.tag.c_str(), peak.max_delta_sq, 1000.0 * peak.sigma_sq);
      ok = false;
    }
  return ok;
}

}  // namespace

int main() {
  Timer total;
  criterion_ground_truth();  // cheap oracles first
  criterion_inequalities();
  criterion_mixing();
  criterion_envelope();
  criterion_stability();
  criterion_linear_speedup();
  criterion_scaling_law();
  criterion_delay_effect();
  criterion_determinism();

  // The no-divergence guard is part of criterion 4's statement.
  if (!check_no_divergence())
    for (auto& criterion : g_results)
      if (criterion.id == 4) {
        criterion.pass = false;
        criterion.detail += " DIVERGENCE DETECTED";
      }

  std::sort(g_results.begin(), g_results.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  bool all = true;
  for (const auto& criterion : g_results) {
    std::printf("[%s] criterion %d (%s): %s\n", criterion.pass ? "PASS" : "FAIL",
                criterion.id, criterion.name.c_str(), criterion.detail.c_str());
    all = all && criterion.pass;
  }
  std::printf("acceptance suite %s in %.1f s (%zu ensemble runs checked for divergence)\n",
              all ? "PASSED" : "FAILED", total.seconds(), g_peaks.size());
  return all ? 0 : 1;
}
