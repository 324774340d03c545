#pragma once

// Config-driven experiments and their reports.
//
// Every experiment produces a list of rows. A row is one estimate with its
// standard error and replica count, and optionally a target computed at run
// time, the routine that produced it, a tolerance and a pass flag. Rows are
// emitted in a fixed order and formatted with shortest round-trip decimals,
// so results.csv is byte-identical for the same (config, seed) whatever the
// worker count.

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trap/config.hpp"
#include "trap/graph.hpp"
#include "trap/landscape.hpp"

namespace trap {

struct ReportRow {
  std::string quantity;
  std::string scope = "pooled";  // "pooled" or "env=<index>"
  std::string x;                 // point on the experiment grid, e.g. "theta=1"
  double estimate = 0;
  double stderr_ = 0;
  std::uint64_t reps = 0;
  std::optional<double> target;
  std::string target_source;
  std::optional<double> tolerance;
  std::optional<bool> pass;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  ScaleSet scales;
  bool interrupted = false;
  double wall_clock = 0;  // seconds
  std::string backend;

  /// True when no gated row failed and the run was not interrupted.
  bool all_pass() const;
};

using RowSink = std::function<void(const ReportRow&)>;

/// Set from a signal handler to stop between grid points; rows already
/// emitted stay in the report.
std::atomic<bool>& stop_requested();

/// Runs the configured experiment. Rows are passed to `sink` as soon as they
/// are computed and also collected into the report.
ExperimentReport run(const ExperimentConfig& config, const RowSink& sink = {});

struct AgingPoint {
  double theta = 0;
  double estimate = 0;    // pooled over all replicas
  double stderr_ = 0;     // from the spread of environment means
  double target = 0;      // Asl_alpha(1 / (1 + theta))
  double env_sd = 0;      // spread of the per-environment estimates
  std::vector<double> per_environment;
  std::uint64_t reps = 0;
  std::uint64_t timeouts = 0;
};

struct AgingCurve {
  double alpha = 0;
  double t_w = 0;
  ScaleSet scales;
  std::vector<AgingPoint> points;
};

/// R(t_w, (1+theta) t_w) at t_w = t(n) for every theta in the config.
AgingCurve estimate_aging_curve(const ExperimentConfig& config);

/// Model resolution shared by the experiments.
struct Model {
  Topology topology;
  Landscape law;
  double alpha = 0;
  ScaleSet scales;
};
/// Resolves topology, landscape, aging exponent and scales (with the
/// horizon multiplier fixed and overrides applied).
Model resolve_model(const ExperimentConfig& config);

/// Standard error of the pooled mean of `samples`, laid out environment-major
/// with `per_env` values each: the spread of environment means when there are
/// several environments, the plain sample spread otherwise.
double grouped_stderr(const std::vector<double>& samples, std::uint64_t per_env);

/// Kolmogorov-Smirnov distance of a sample to Exp(1).
double ks_exponential(std::vector<double> sample);

/// Writes results.csv, summary.json and config.txt into `dir`.
void write_report(const ExperimentReport& report, const std::string& dir);
/// summary.json and config.txt only, for callers that stream the CSV.
void write_summary(const ExperimentReport& report, const std::string& dir);

/// CSV header and row text.
std::string csv_header();
std::string csv_line(const std::string& experiment, const ReportRow& row);

}  // namespace trap
