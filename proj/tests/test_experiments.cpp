#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trap/experiments.hpp"
#include "trap/levy.hpp"

using namespace trap;

namespace {

ExperimentConfig small_aging() {
  ExperimentConfig c;
  c.experiment = Experiment::aging_curve;
  c.topology = "complete:100000";
  c.landscape = "pareto:alpha=0.6";
  c.environments = 3;
  c.trajectories = 300;
  c.seed = 11;
  c.workers = 1;
  return c;
}

std::string csv_of(const ExperimentReport& rep) {
  std::string out = csv_header();
  for (const auto& r : rep.rows) out += csv_line(name(rep.config.experiment), r);
  return out;
}

std::vector<ReportRow> pooled(const ExperimentReport& rep, const std::string& quantity) {
  std::vector<ReportRow> out;
  for (const auto& r : rep.rows) {
    if (r.scope == "pooled" && r.quantity == quantity) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("aging_curve emits one pooled row per theta with asl targets") {
  ExperimentConfig c = small_aging();
  c.theta = {0.25, 0.5, 1, 2, 4};
  const auto rep = run(c);
  const auto rows = pooled(rep, "R");
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].x.starts_with("theta="));
    CHECK(*rows[i].target == doctest::Approx(asl(0.6, 1 / (1 + c.theta[i]))).epsilon(1e-15));
    CHECK(rows[i].reps == 900);
    CHECK(rows[i].stderr_ > 0);
    CHECK(rows[i].pass.has_value());
    CHECK(rows[i].target_source == "levy::asl(alpha, 1/(1+theta))");
  }
  // Per-environment rows: 3 environments for each theta.
  std::size_t env_rows = 0;
  for (const auto& r : rep.rows) env_rows += r.scope != "pooled";
  CHECK(env_rows == 15);
}

TEST_CASE("aging targets at alpha = 1/2") {
  ExperimentConfig c = small_aging();
  c.landscape = "pareto:alpha=0.5";
  c.theta = {1, 3};
  c.environments = 1;
  c.trajectories = 10;
  const auto rows = pooled(run(c), "R");
  CHECK(*rows[0].target == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(*rows[1].target == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("REM window check is reported and the curve emitted") {
  ExperimentConfig c = small_aging();
  c.topology = "hypercube:20";
  c.landscape = "rem:beta=" + std::to_string(rem_beta_for_ratio(0.8, 0.8)) + ",n=20";
  c.alpha = 0.8;
  c.environments = 2;
  c.trajectories = 10;
  const auto rep = run(c);
  const auto window = pooled(rep, "rem_window_ratio");
  REQUIRE(window.size() == 1);
  CHECK(window[0].estimate == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(*window[0].pass);
  CHECK(pooled(rep, "R").size() == 1);
}

TEST_CASE("model resolution") {
  ExperimentConfig c = small_aging();
  c.m = 4;
  const Model m = resolve_model(c);
  CHECK(m.alpha == 0.6);
  CHECK(m.scales.f == doctest::Approx(m.scales.t / m.scales.g).epsilon(1e-15));
  CHECK(m.scales.xi == doctest::Approx(4 * m.scales.r));
  c.scale_t = 5.0;
  CHECK(resolve_model(c).scales.t == 5.0);
  c.landscape = "rem:beta=1,n=10";
  CHECK_THROWS(resolve_model(c));  // rem needs alpha and a hypercube
  c.topology = "hypercube:12";
  c.alpha = 0.8;
  CHECK_THROWS(resolve_model(c));  // rem n differs from the cube
  c.m = 0;
  c.topology = "complete:1000";
  c.landscape = "pareto:alpha=0.5";
  c.alpha = 0;
  const double m_auto = resolve_model(c).scales.m;
  CHECK(m_auto >= 1);
  CHECK(std::exp2(std::round(std::log2(m_auto))) == m_auto);
}

TEST_CASE("CSV bytes do not depend on the worker count") {
  for (Experiment e : {Experiment::aging_curve, Experiment::clock_marginal, Experiment::hitting_law,
                       Experiment::diagnostics}) {
    CAPTURE(name(e));
    ExperimentConfig c = small_aging();
    c.experiment = e;
    c.environments = 3;
    c.trajectories = 40;
    c.m = 2;
    if (e == Experiment::hitting_law) {
      c.topology = "hypercube:10";
      c.gamma = 0.85;
    }
    c.workers = 1;
    const std::string one = csv_of(run(c));
    c.workers = 4;
    const std::string four = csv_of(run(c));
    CHECK(one == four);
    c.seed += 1;
    CHECK(csv_of(run(c)) != one);
  }
}

TEST_CASE("doubling the replicas shrinks the reported stderr by sqrt 2") {
  ExperimentConfig c = small_aging();
  c.environments = 8000;
  c.trajectories = 1;
  const double se1 = pooled(run(c), "R")[0].stderr_;
  c.environments = 16000;
  const double se2 = pooled(run(c), "R")[0].stderr_;
  CHECK(se1 / se2 == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("grouped_stderr") {
  // One environment: plain standard error of the mean.
  const std::vector<double> xs{1, 2, 3, 4};
  CHECK(grouped_stderr(xs, 4) == doctest::Approx(std::sqrt(5.0 / 3.0) / 2));
  // Two environments with means 1.5 and 3.5: sd sqrt(2), over sqrt(2).
  CHECK(grouped_stderr(xs, 2) == doctest::Approx(1.0));
  CHECK(grouped_stderr({}, 1) == 0);
}

TEST_CASE("ks_exponential") {
  CHECK(ks_exponential({std::log(2.0)}) == doctest::Approx(0.5));
  // Midpoint quantiles of Exp(1): distance exactly 1 / (2n).
  std::vector<double> q;
  for (int i = 0; i < 100; ++i) q.push_back(-std::log1p(-(i + 0.5) / 100));
  CHECK(ks_exponential(q) == doctest::Approx(0.005).epsilon(1e-9));
}

TEST_CASE("csv_line quotes fields with commas") {
  ReportRow r;
  r.quantity = "R";
  r.x = "a,b";
  r.estimate = 0.1;
  r.target_source = "f(\"x\", y)";
  const std::string line = csv_line("aging_curve", r);
  CHECK(line == "aging_curve,R,pooled,\"a,b\",0.1,0,0,,\"f(\"\"x\"\", y)\",,\n");
}

TEST_CASE("hitting_law on a small cube") {
  ExperimentConfig c = small_aging();
  c.experiment = Experiment::hitting_law;
  c.topology = "hypercube:12";
  c.gamma = 0.85;
  c.environments = 50;
  c.trajectories = 4;
  const auto rep = run(c);
  const auto mean = pooled(rep, "H_mean");
  REQUIRE(mean.size() == 1);
  CHECK(*mean[0].target == 1.0);
  CHECK(mean[0].reps == 200);
  CHECK(pooled(rep, "H_ks").size() == 1);
  CHECK(pooled(rep, "cloud_size_mean")[0].estimate > 0);
}

TEST_CASE("potential_report rows") {
  ExperimentConfig c = small_aging();
  c.experiment = Experiment::potential_report;
  c.topology = "hypercube:16";
  c.gamma = 0.85;
  c.sizes = {16, 20};
  c.s = {1};
  const auto rep = run(c);
  CHECK(pooled(rep, "antipodal_ratio").size() == 2);
  for (const auto& r : pooled(rep, "matthews_lower")) CHECK(*r.target == doctest::Approx(0.5));
  CHECK(rep.all_pass());

  c.topology = "torus2d:6";
  c.gamma = 0.1;
  c.sizes = {5, 6};
  c.s = {0.5, 1, 2, 4};
  c.cloud_rho = 10;
  const auto torus = run(c);
  CHECK(pooled(torus, "G0_ratio").size() == 2);
  CHECK(pooled(torus, "K_r_minus").size() == 2);
  CHECK(pooled(torus, "G0_ratio_monotone").size() == 1);
}

TEST_CASE("diagnostics rows") {
  ExperimentConfig c = small_aging();
  c.experiment = Experiment::diagnostics;
  c.topology = "complete:10000";
  c.landscape = "pareto:alpha=0.5";
  c.environments = 4;
  c.trajectories = 50;
  c.m = 8;
  const auto rep = run(c);
  for (const char* q : {"shallow_fraction", "very_deep_hit", "coverage", "repetition", "condition_d_ratio"}) {
    CAPTURE(q);
    CHECK(pooled(rep, q).size() == 1);
  }
  CHECK(pooled(rep, "post_probe").size() == 2);
  CHECK(rep.scales.m == 8);
}

TEST_CASE("a stop request ends the run early and marks it interrupted") {
  stop_requested().store(true);
  const auto rep = run(small_aging());
  stop_requested().store(false);
  CHECK(rep.interrupted);
  CHECK(pooled(rep, "R").empty());
  CHECK_FALSE(rep.all_pass());
}

TEST_CASE("write_report produces csv, summary and config echo") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "trap_report_test";
  fs::remove_all(dir);
  ExperimentConfig c = small_aging();
  c.theta = {1};
  const auto rep = run(c);
  write_report(rep, dir.string());
  std::ifstream csv(dir / "results.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header + "\n" == csv_header());
  std::ifstream js(dir / "summary.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j["experiment"] == "aging_curve");
  CHECK(j["all_pass"] == rep.all_pass());
  CHECK(j["seed"] == 11);
  CHECK(parse_config(j["config"].get<std::string>()) == c);
  std::ifstream echo(dir / "config.txt");
  std::stringstream text;
  text << echo.rdbuf();
  CHECK(parse_config(text.str()) == c);
  fs::remove_all(dir);
}
