#include <doctest.h>

#include <string>

#include "trap/config.hpp"

using namespace trap;

namespace {

int error_line(const std::string& text) {
  try {
    (void)parse_config(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    (void)parse_config(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("default config round-trips") {
  const ExperimentConfig c;
  CHECK(parse_config(to_text(c)) == c);
}

TEST_CASE("every field round-trips losslessly") {
  ExperimentConfig c;
  c.experiment = Experiment::clock_marginal;
  c.topology = "torus2d:9";
  c.landscape = "rem:beta=1.3163844238670797,n=20";
  c.alpha = 0.8;
  c.gamma = 1.0 / 3.0;
  c.cloud_rho = 10;
  c.eps = 1e-3;
  c.M = 1e3;
  c.theta = {0.25, 0.1, 4};
  c.lambda = {0.5};
  c.t0 = {};
  c.s = {1e-300, 2.5};
  c.sizes = {8, 11};
  c.environments = 22500;
  c.trajectories = 1;
  c.seed = 18446744073709551615ull;
  c.workers = 3;
  c.output = "out/run 1";
  c.m = 16;
  c.scale_t = 123.456;
  c.scale_r = 0.1 + 0.2;
  c.step_cap = 0;
  c.lambda_d = 4.47213595499958;
  c.fresh_site = true;
  c.profile = ToleranceProfile::ci;
  c.tolerances["gap"] = 0.05;
  c.tolerances["hit_ks"] = 0.031;
  const ExperimentConfig back = parse_config(to_text(c));
  CHECK(back == c);
  CHECK(to_text(back) == to_text(c));
}

TEST_CASE("comments, blank lines and spacing are ignored") {
  const auto c = parse_config(
      "# aging on the complete graph\n"
      "\n"
      "experiment=aging_curve   # trailing comment\n"
      "   theta =  0.5 ,1,  2\n"
      "environments = 7\r\n");
  CHECK(c.experiment == Experiment::aging_curve);
  CHECK(c.theta == std::vector<double>{0.5, 1, 2});
  CHECK(c.environments == 7);
}

TEST_CASE("parse errors name the line and the field") {
  CHECK(error_line("seed = 1\nbogus = 3\n") == 2);
  CHECK(error_text("seed = 1\nbogus = 3\n").find("t.cfg:2: field 'bogus': unknown key") == 0);
  CHECK(error_line("theta = 1, x\n") == 1);
  CHECK(error_text("theta = 1, x\n").find("expected a number, got 'x'") != std::string::npos);
  CHECK(error_line("\n\nseed = -4\n") == 3);
  CHECK(error_line("seed = 1\nseed = 2\n") == 2);
  CHECK(error_text("seed = 1\nseed = 2\n").find("first set on line 1") != std::string::npos);
  CHECK(error_line("just words\n") == 1);
  CHECK(error_line("experiment = plotting\n") == 1);
  CHECK(error_line("topology = hypercube:x\n") == 1);
  CHECK(error_line("landscape = pareto:alpha=1.5\n") == 1);
  CHECK(error_line("fresh_site = yes\n") == 1);
  CHECK(error_line("tol.nonsense = 1\n") == 1);
  CHECK(error_line("tolerance_profile = strict\n") == 1);
}

TEST_CASE("validation errors point at the offending key") {
  CHECK(error_line("seed = 2\nenvironments = 0\n") == 2);
  CHECK(error_line("trajectories = 0\n") == 1);
  CHECK(error_line("experiment = aging_curve\ntheta =\n") == 2);
  CHECK(error_line("theta = -1\n") == 1);
  CHECK(error_line("eps = 2\n") == 1);
}

TEST_CASE("tolerances: profile defaults and overrides") {
  ExperimentConfig c;
  CHECK(c.tolerance("gap") == 0.02);
  CHECK(c.tolerance("hit_ks") == 0.03);
  c.profile = ToleranceProfile::ci;
  CHECK(c.tolerance("gap") > 0.02);
  c.tolerances["gap"] = 0.07;
  CHECK(c.tolerance("gap") == 0.07);
  CHECK_THROWS_AS(c.tolerance("nope"), std::out_of_range);
  for (const auto& [k, v] : tolerance_defaults(ToleranceProfile::paper)) {
    CHECK(tolerance_defaults(ToleranceProfile::ci).contains(k));
  }
}

TEST_CASE("experiment and profile names round-trip") {
  for (auto e : {Experiment::aging_curve, Experiment::clock_marginal, Experiment::hitting_law,
                 Experiment::potential_report, Experiment::diagnostics}) {
    CHECK(parse_experiment(name(e)) == e);
  }
  CHECK(parse_tolerance_profile("ci") == ToleranceProfile::ci);
  CHECK_THROWS(parse_experiment("x"));
}
