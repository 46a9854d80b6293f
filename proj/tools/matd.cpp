// Command-line entry point for the policy-evaluation laboratory: exact ground
// truth, asynchronous multi-agent TD runs, sweeps, the property battery, and
// plot-data emission.
//
// Exit codes: 0 success, 1 verification failure, 2 config error, 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "matd/csv.hpp"
#include "matd/errors.hpp"
#include "matd/experiment.hpp"
#include "matd/mixing.hpp"
#include "matd/plot.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required) {
  auto* config = cmd->add_option("--config", opts.config_path, "experiment config JSON");
  if (config_required) config->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "override the config's master seed")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

matd::ExperimentConfig load(const CommonOptions& opts) {
  auto cfg = matd::load_config(opts.config_path);
  if (opts.seed_set) cfg.master_seed = opts.seed;
  return cfg;
}

fs::path ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw matd::ConfigError("--out is required for this command");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw matd::IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

int cmd_ground_truth(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto instance = matd::build_instance(cfg.instance, fs::path(opts.config_path).parent_path());
  const auto report = matd::ground_truth_report(instance, cfg);
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (!opts.out_dir.empty()) {
    const auto out = ensure_out_dir(opts.out_dir);
    matd::write_text_file(out / "ground_truth.json", text);
    matd::MixingAnalysis mixing(instance.mrp, instance.phi, instance.pi);
    const long tau_hi = std::max<long>(12, 2 * report.at("tau_eps").get<long>());
    const auto profile = mixing.profile(1, static_cast<int>(tau_hi));
    matd::write_text_file(out / "mixing_profile.csv", matd::profile_to_csv(profile));
    matd::write_text_file(out / "mixing_profile.json", matd::to_json(profile).dump(2) + "\n");
  }
  return 0;
}

int cmd_run(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto out = ensure_out_dir(opts.out_dir);
  const auto instance = matd::build_instance(cfg.instance, fs::path(opts.config_path).parent_path());
  const auto results = matd::run_grid(instance, cfg, resolve_threads(opts.threads));
  matd::write_cell_results(out, results);
  for (const auto& result : results)
    std::printf("%-24s ball %.6g +- %.2g (%d runs)\n", result.cell.label().c_str(),
                result.ball.mean, result.ball.std_error, result.ball.replications);
  return 0;
}

int cmd_sweep(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto out = ensure_out_dir(opts.out_dir);
  const auto instance = matd::build_instance(cfg.instance, fs::path(opts.config_path).parent_path());
  const auto results = matd::run_grid(instance, cfg, resolve_threads(opts.threads));
  matd::write_cell_results(out, results);
  matd::SweepReport report;
  try {
    report = matd::sweep_report(results);
  } catch (const matd::PreconditionViolation& e) {
    throw matd::ConfigError(e.what());
  }
  matd::write_text_file(out / "sweep.json", matd::to_json(report).dump(2) + "\n");
  matd::write_text_file(out / "sweep.csv", matd::sweep_csv(report));
  for (const auto& slope : report.slopes)
    std::printf("delay %-12s log-log slope vs N: %.3f\n", slope.delay_label.c_str(),
                slope.slope);
  for (const auto& ordering : report.orderings)
    std::printf("N=%-3d ball nondecreasing in tau_max: %s (top-vs-bottom gap %.2f se)\n",
                ordering.num_agents, ordering.nondecreasing_within_3se ? "yes" : "no",
                ordering.largest_gap_in_se);
  return 0;
}

int cmd_verify(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto instance = matd::build_instance(cfg.instance, fs::path(opts.config_path).parent_path());
  const auto verdicts = matd::run_verify(instance, cfg);
  const auto report = matd::verdicts_to_json(verdicts);
  bool all = true;
  for (const auto& verdict : verdicts) {
    std::printf("[%s] %-32s %s\n", verdict.pass ? "PASS" : "FAIL", verdict.name.c_str(),
                verdict.detail.c_str());
    all = all && verdict.pass;
  }
  if (!opts.out_dir.empty())
    matd::write_text_file(ensure_out_dir(opts.out_dir) / "verify.json", report.dump(2) + "\n");
  return all ? 0 : 1;
}

int cmd_plot_data(const CommonOptions& opts, std::vector<std::string> inputs) {
  const auto out = ensure_out_dir(opts.out_dir);
  if (inputs.empty()) {
    const auto cells = out / "cells";
    if (fs::is_directory(cells)) {
      std::vector<fs::path> dirs;
      for (const auto& entry : fs::directory_iterator(cells))
        if (entry.is_directory() && fs::exists(entry.path() / "aggregate.csv"))
          dirs.push_back(entry.path());
      std::sort(dirs.begin(), dirs.end());
      for (const auto& dir : dirs) inputs.push_back((dir / "aggregate.csv").string());
    }
  }
  if (inputs.empty()) throw matd::IoError("plot-data: no aggregate CSV inputs found");

  std::vector<matd::PlotSeries> series;
  for (const auto& input : inputs) {
    matd::PlotSeries s;
    const fs::path path(input);
    s.label = path.parent_path().filename().string();
    if (s.label.empty()) s.label = path.stem().string();
    s.data = matd::parse_aggregate_csv(matd::read_text_file(path));
    series.push_back(std::move(s));
  }
  matd::write_text_file(out / "plot.svg", matd::render_plot_svg(series));
  matd::write_text_file(out / "plot_data.csv", matd::plot_data_csv(series));
  std::printf("wrote %s with %zu series\n", (out / "plot.svg").string().c_str(), series.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asynchronous multi-agent TD policy-evaluation laboratory"};
  app.require_subcommand(1);

  CommonOptions gt_opts, run_opts, sweep_opts, verify_opts, plot_opts;
  std::vector<std::string> plot_inputs;

  auto* ground_truth = app.add_subcommand("ground-truth", "exact solver report for an instance");
  add_common(ground_truth, gt_opts, true);
  auto* run = app.add_subcommand("run", "execute the config's run grid");
  add_common(run, run_opts, true);
  auto* sweep = app.add_subcommand("sweep", "run grid + speedup/delay analysis");
  add_common(sweep, sweep_opts, true);
  auto* verify = app.add_subcommand("verify", "run the property battery");
  add_common(verify, verify_opts, true);
  auto* plot = app.add_subcommand("plot-data", "emit SVG + tidy CSV from aggregates");
  add_common(plot, plot_opts, false);
  plot->add_option("inputs", plot_inputs, "aggregate CSV files (default: scan <out>/cells)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (ground_truth->parsed()) return cmd_ground_truth(gt_opts);
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (verify->parsed()) return cmd_verify(verify_opts);
    if (plot->parsed()) return cmd_plot_data(plot_opts, plot_inputs);
  } catch (const matd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const matd::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const matd::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
