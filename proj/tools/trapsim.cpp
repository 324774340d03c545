// trapsim: run one experiment from a config file.
//
//   trapsim aging_curve --config run.cfg --seed 7 --workers 4 --out results/
//
// Writes results.csv (streamed, one row per estimate), summary.json and
// config.txt into the output directory. Exit status: 0 when every declared
// tolerance passes, 1 when one fails, 2 on usage or config errors, 130 when
// interrupted.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "trap/config.hpp"
#include "trap/experiments.hpp"

namespace {

void on_signal(int) { trap::stop_requested().store(true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trap-model aging simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, profile;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  bool print_config = false;
  for (auto e : {trap::Experiment::aging_curve, trap::Experiment::clock_marginal, trap::Experiment::hitting_law,
                 trap::Experiment::potential_report, trap::Experiment::diagnostics}) {
    CLI::App* sub = app.add_subcommand(trap::name(e), std::string("run the ") + trap::name(e) + " experiment");
    sub->add_option("--config", config_path, "config file (key = value lines)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads, 0 = all cores (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--tolerance-profile", profile, "ci or paper (overrides the config)")
        ->check(CLI::IsMember({"ci", "paper"}));
    sub->add_flag("--print-config", print_config, "print the effective config and exit");
  }
  CLI11_PARSE(app, argc, argv);

  const CLI::App* sub = app.get_subcommands().front();
  trap::ExperimentConfig config;
  try {
    if (!config_path.empty()) config = trap::load_config(config_path);
    config.experiment = trap::parse_experiment(sub->get_name());
    if (sub->count("--seed")) config.seed = seed;
    if (sub->count("--workers")) config.workers = workers;
    if (sub->count("--out")) config.output = out_dir;
    if (!profile.empty()) config.profile = trap::parse_tolerance_profile(profile);
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "trapsim: " << e.what() << "\n";
    return 2;
  }
  if (print_config) {
    std::cout << trap::to_text(config);
    return 0;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  namespace fs = std::filesystem;
  fs::create_directories(config.output);
  std::ofstream csv(fs::path(config.output) / "results.csv");
  csv << trap::csv_header() << std::flush;
  const std::string exp = trap::name(config.experiment);
  trap::ExperimentReport report;
  try {
    report = trap::run(config, [&](const trap::ReportRow& row) {
      csv << trap::csv_line(exp, row) << std::flush;
      if (row.scope == "pooled") {
        std::cerr << row.quantity << " " << row.x << ": " << row.estimate << " +- " << row.stderr_;
        if (row.target) std::cerr << " (target " << *row.target << ")";
        if (row.pass) std::cerr << (*row.pass ? " PASS" : " FAIL");
        std::cerr << "\n";
      }
    });
  } catch (const std::exception& e) {
    std::cerr << "trapsim: " << e.what() << "\n";
    return 2;
  }
  trap::write_summary(report, config.output);
  if (report.interrupted) {
    std::cerr << "trapsim: interrupted, partial results in " << config.output << "\n";
    return 130;
  }
  std::cerr << (report.all_pass() ? "all tolerances pass" : "some tolerances fail") << " (" << report.wall_clock
            << " s)\n";
  return report.all_pass() ? 0 : 1;
}
