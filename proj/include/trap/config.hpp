#pragma once

// Experiment configuration: a flat "key = value" text format.
//
//   # comment                 blank lines and comments are ignored
//   experiment = aging_curve  one key per line, each at most once
//   theta = 0.5, 1, 2         lists are comma separated
//   tol.gap = 0.05            tolerance overrides use the tol. prefix
//
// Unknown keys, duplicates and malformed values are rejected with the line
// number and key. to_text() writes every field, and parsing it gives back
// an equal config.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trap {

enum class Experiment { aging_curve, clock_marginal, hitting_law, potential_report, diagnostics };

const char* name(Experiment e);
Experiment parse_experiment(std::string_view text);

enum class ToleranceProfile { ci, paper };

const char* name(ToleranceProfile p);
ToleranceProfile parse_tolerance_profile(std::string_view text);

struct ExperimentConfig {
  Experiment experiment = Experiment::aging_curve;
  std::string topology = "complete:100000";
  std::string landscape = "pareto:alpha=0.6";
  double alpha = 0;       // aging exponent; 0 takes it from a Pareto landscape
  double gamma = 0.1;     // torus / hypercube scale exponent
  double cloud_rho = 1;   // hitting_law: cloud density factor
  double eps = 0.01;
  double M = 100;
  std::vector<double> theta{1};
  std::vector<double> lambda{0.5, 1, 2};
  std::vector<double> t0{0.5, 1};
  std::vector<double> s{0.5, 1, 2, 4};
  std::vector<unsigned> sizes{8, 9, 10, 11};
  std::uint64_t environments = 20;
  std::uint64_t trajectories = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string output = "out";
  double m = 0;                              // horizon multiplier; 0 = automatic
  std::optional<double> scale_t, scale_g, scale_rho, scale_r;
  std::optional<std::uint64_t> step_cap;     // unset: 100 xi; 0: no cap
  double lambda_d = 0;                       // Condition (D) lambda; 0 = model default
  bool fresh_site = false;                   // aging_curve: also estimate R_A
  ToleranceProfile profile = ToleranceProfile::paper;
  std::map<std::string, double> tolerances;  // overrides, without the "tol." prefix

  /// Override if present, else the profile default. Throws for unknown names.
  double tolerance(const std::string& key) const;
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Tolerance names and their defaults under a profile.
const std::map<std::string, double>& tolerance_defaults(ToleranceProfile profile);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string key, const std::string& message);
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Parses config text. `origin` prefixes diagnostics ("run.cfg:12: ...").
ExperimentConfig parse_config(std::string_view text, std::string_view origin = "config");
ExperimentConfig load_config(const std::string& path);
std::string to_text(const ExperimentConfig& config);

}  // namespace trap
