// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance C6 [--out DIR]      one criterion
//   acceptance all [--out DIR]     all of them in order
//
// The Monte Carlo criteria (C3, C6-C9) run the same experiments as trapsim
// and keep their CSVs under DIR/<run>/workers=<w>/ so that C10 can compare
// them byte for byte against a rerun with a different worker count.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "trap/config.hpp"
#include "trap/dense_oracle.hpp"
#include "trap/experiments.hpp"
#include "trap/format.hpp"
#include "trap/graph.hpp"
#include "trap/landscape.hpp"
#include "trap/levy.hpp"
#include "trap/potential.hpp"

namespace fs = std::filesystem;
using namespace trap;

namespace {

fs::path g_out = "acceptance_out";
constexpr unsigned kBaseWorkers = 1;
constexpr unsigned kRerunWorkers = 3;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

const ReportRow* find_row(const ExperimentReport& rep, const std::string& quantity, const std::string& x = "") {
  for (const ReportRow& r : rep.rows) {
    if (r.scope == "pooled" && r.quantity == quantity && (x.empty() || r.x == x)) return &r;
  }
  return nullptr;
}

// ---- Run definitions shared by C3, C6-C9 and C10 ----

struct NamedRun {
  std::string name;
  ExperimentConfig config;
};

ExperimentConfig base(Experiment e, const std::string& topology, const std::string& landscape) {
  ExperimentConfig c;
  c.experiment = e;
  c.topology = topology;
  c.landscape = landscape;
  return c;
}

std::vector<NamedRun> c6_runs() {
  ExperimentConfig c = base(Experiment::aging_curve, "complete:100000", "pareto:alpha=0.6");
  c.theta = {0.5, 1, 2};
  c.environments = 20;
  c.trajectories = 5000;
  c.seed = 6;
  c.tolerances["gap"] = 0.02;
  return {{"c6_complete", c}};
}

std::vector<NamedRun> c7_runs() {
  std::vector<NamedRun> runs;
  for (unsigned n : {6u, 8u, 10u}) {
    ExperimentConfig c = base(Experiment::aging_curve, "torus2d:" + std::to_string(n), "pareto:alpha=0.5");
    c.gamma = 0.1;
    c.theta = {1};
    // One walk per environment: the binomial error is then exact, and
    // 22500 replicas put 3 sigma below 0.01.
    c.environments = 22500;
    c.trajectories = 1;
    c.seed = 7;
    c.tolerances["gap"] = 0.05;
    runs.push_back({"c7_torus_n" + std::to_string(n), c});
  }
  return runs;
}

double rem_beta() { return rem_beta_for_ratio(0.8, 0.8); }

std::vector<NamedRun> c8_runs() {
  std::vector<NamedRun> runs;
  for (unsigned n : {12u, 16u, 20u}) {
    ExperimentConfig c = base(Experiment::aging_curve, "hypercube:" + std::to_string(n),
                              "rem:beta=" + format_double(rem_beta()) + ",n=" + std::to_string(n));
    c.alpha = 0.8;
    c.theta = {1};
    c.environments = 20;
    c.trajectories = 2000;
    c.seed = 8;
    c.tolerances["gap"] = 0.07;
    runs.push_back({"c8_rem_n" + std::to_string(n), c});
  }
  ExperimentConfig d = base(Experiment::diagnostics, "hypercube:20", "rem:beta=" + format_double(rem_beta()) + ",n=20");
  d.alpha = 0.8;
  d.theta = {1};
  d.eps = 0.01;
  d.M = 100;
  d.environments = 20;
  d.trajectories = 50;
  d.seed = 8;
  runs.push_back({"c8_rem_diagnostics", d});
  return runs;
}

std::vector<NamedRun> c9_runs() {
  ExperimentConfig c = base(Experiment::clock_marginal, "complete:100000", "pareto:alpha=0.6");
  c.eps = 1e-3;
  c.M = 1e3;
  c.lambda = {0.5, 1, 2};
  c.t0 = {0.5, 1};
  c.environments = 20;
  c.trajectories = 5000;
  c.seed = 9;
  return {{"c9_clock", c}};
}

fs::path run_dir(const std::string& name, unsigned workers) {
  return g_out / name / ("workers=" + std::to_string(workers));
}

ExperimentReport execute(const NamedRun& run, unsigned workers) {
  ExperimentConfig c = run.config;
  c.workers = workers;
  c.output = run_dir(run.name, workers).string();
  ExperimentReport rep = trap::run(c);
  write_report(rep, c.output);
  std::cerr << "  " << run.name << " (workers " << workers << "): " << fmt(rep.wall_clock, 3) << " s\n";
  return rep;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---- C1: arcsine closed form ----

Verdict c1() {
  double worst_closed = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double z = i / 10000.0;
    const double exact = 2 / std::numbers::pi * std::asin(std::sqrt(z));
    worst_closed = std::max(worst_closed, std::abs(asl(0.5, z) - exact));
  }
  // Independent oracle: tanh-sinh quadrature of the density, which copes
  // with the singularity at 0. z <= 0.99 keeps away from the one at 1.
  boost::math::quadrature::tanh_sinh<double> quad;
  double worst_quad = 0;
  for (double a : {0.3, 0.6, 0.9}) {
    const double c = std::sin(a * std::numbers::pi) / std::numbers::pi;
    for (int i = 1; i < 100; ++i) {
      const double z = i / 100.0;
      auto density = [&](double u) { return c * std::pow(u, a - 1) * std::pow(1 - u, -a); };
      const double ref = quad.integrate(density, 0.0, z, 1e-14);
      worst_quad = std::max(worst_quad, std::abs(asl(a, z) - ref));
    }
  }
  return {worst_closed < 1e-10 && worst_quad < 1e-8,
          "closed form max err " + fmt(worst_closed, 3) + " (< 1e-10), quadrature max err " + fmt(worst_quad, 3) +
              " (< 1e-8)"};
}

// ---- C2: alternating harmonic identity ----

Verdict c2() {
  double worst_direct = 0, worst_integral = 0;
  long double h = 0;
  for (unsigned n = 1; n <= 1000; ++n) {
    h += 1.0L / n;
    if (n <= 25) worst_direct = std::max(worst_direct, std::abs(static_cast<double>(alternating_harmonic_direct(n) + h)));
    worst_integral = std::max(worst_integral, std::abs(static_cast<double>(alternating_harmonic(n) + h)));
  }
  return {worst_direct < 1e-9 && worst_integral < 1e-9,
          "direct n<=25 max err " + fmt(worst_direct, 3) + ", integral n<=1000 max err " + fmt(worst_integral, 3) +
              " (< 1e-9)"};
}

// ---- C3: hypercube hitting law ----

std::vector<NamedRun> c3_runs() {
  ExperimentConfig c = base(Experiment::hitting_law, "hypercube:16", "pareto:alpha=0.5");
  c.gamma = 0.85;
  c.cloud_rho = 1;
  // A fresh cloud for every walk.
  c.environments = 10000;
  c.trajectories = 1;
  c.seed = 3;
  return {{"c3_hypercube_hitting", c}};
}

Verdict c3() {
  const ExperimentReport rep = execute(c3_runs()[0], kBaseWorkers);
  const ReportRow* mean = find_row(rep, "H_mean");
  const ReportRow* ks = find_row(rep, "H_ks");
  const ReportRow* mean_r = find_row(rep, "H_mean_realised");
  const ReportRow* ks_r = find_row(rep, "H_ks_realised");
  const bool pass = mean->pass.value() && ks->pass.value();
  return {pass, "mean H/2^(gamma n) " + fmt(mean->estimate) + " +- " + fmt(mean->stderr_, 2) + " (1 +- 10%), KS " +
                    fmt(ks->estimate) + " (< 0.03); against realised density: mean " + fmt(mean_r->estimate) +
                    ", KS " + fmt(ks_r->estimate)};
}

// ---- C4: exact routines against dense / path-sum oracles ----

// G(x; s) on the L = 2^n torus as the truncated path sum
// sum_k e^{-sk/h} (q_k + q_{k+1}) / 2, q_k the k-step law from the origin.
std::vector<double> torus_path_sum(unsigned n, double s, double gamma) {
  const Topology torus = Topology::torus2d(n);
  const std::size_t V = torus.vertex_count();
  const double decay = std::exp(-s / torus_time_scale(n, gamma));
  std::vector<double> q(V, 0.0), next(V), green(V, 0.0);
  q[0] = 1;
  double weight = 1;
  const double tail_stop = 1e-14 * (1 - decay);
  while (weight > tail_stop) {
    std::fill(next.begin(), next.end(), 0.0);
    for (VertexId v = 0; v < V; ++v) {
      for (unsigned dir = 0; dir < 4; ++dir) next[torus.torus_step(v, dir)] += 0.25 * q[v];
    }
    for (std::size_t v = 0; v < V; ++v) green[v] += weight * 0.5 * (q[v] + next[v]);
    q.swap(next);
    weight *= decay;
  }
  return green;
}

Verdict c4() {
  const double gamma = 0.85;
  double worst_cube = 0;
  for (unsigned n : {6u, 8u, 10u}) {
    const Topology cube = Topology::hypercube(n);
    DenseChain chain(cube, std::vector<double>(cube.vertex_count(), 1.0));
    for (double s : {0.5, 1.0, 2.0}) {
      const auto exact = chain.hitting_transform({Topology::origin()}, s * std::exp2(-gamma * n));
      for (unsigned k = 1; k <= n; ++k) {
        const double lt = hypercube_hitting_lt(n, k, s, gamma);
        worst_cube = std::max(worst_cube, std::abs(lt - exact(static_cast<Eigen::Index>(Topology::flipped_prefix(k)))));
      }
    }
  }
  double worst_torus = 0;
  const unsigned n = 3;  // L = 8
  for (double s : {0.5, 1.0, 2.0}) {
    const auto ref = torus_path_sum(n, s, 0.1);
    const Topology torus = Topology::torus2d(n);
    for (VertexId v = 0; v < torus.vertex_count(); ++v) {
      const auto [x1, x2] = torus.unpack(v);
      worst_torus = std::max(worst_torus, std::abs(torus_green(n, x1, x2, s, 0.1) - ref[v]));
    }
  }
  return {worst_cube < 1e-10 && worst_torus < 1e-10,
          "hypercube n=6,8,10 max err " + fmt(worst_cube, 3) + ", torus L=8 max err " + fmt(worst_torus, 3) +
              " (< 1e-10)"};
}

// ---- C5: torus constants ----

Verdict c5() {
  ExperimentConfig c = base(Experiment::potential_report, "torus2d:11", "pareto:alpha=0.5");
  c.gamma = 0.1;
  c.sizes = {8, 9, 10, 11};
  c.s = {0.5, 1, 2, 4};
  c.cloud_rho = 10;
  const ExperimentReport rep = execute({"c5_torus_constants", c}, kBaseWorkers);
  std::string ratios;
  for (unsigned n : c.sizes) ratios += (ratios.empty() ? "" : "/") + fmt(find_row(rep, "G0_ratio", "n=" + std::to_string(n) + ";s=1")->estimate);
  const ReportRow* mono = find_row(rep, "G0_ratio_monotone");
  const ReportRow* kp = find_row(rep, "K_r_plus", "n=11");
  const ReportRow* km = find_row(rep, "K_r_minus", "n=11");
  return {rep.all_pass(), "G(0;1) pi/(2n log 2) n=8..11: " + ratios + " (n=11 in [0.95, 1.05], monotone " +
                              (mono->pass.value() ? "yes" : "no") + "); K_r+ " + fmt(kp->estimate) + ", K_r- " +
                              fmt(km->estimate) + " vs " + fmt(kp->target.value()) + " +- 10%"};
}

// ---- C6-C9: Monte Carlo experiments ----

Verdict c6() {
  const ExperimentReport rep = execute(c6_runs()[0], kBaseWorkers);
  std::string gaps;
  for (const ReportRow& r : rep.rows) {
    if (r.scope == "pooled" && r.quantity == "R") {
      gaps += (gaps.empty() ? "" : ", ") + r.x + " gap " + fmt(std::abs(r.estimate - *r.target), 3);
    }
  }
  return {rep.all_pass(), gaps + " (< 0.02)"};
}

struct GapSeries {
  std::vector<double> gaps, stderrs;
  bool decreasing() const {
    for (std::size_t i = 1; i < gaps.size(); ++i) {
      if (!(gaps[i] < gaps[i - 1])) return false;
    }
    return true;
  }
  std::string text() const {
    std::string s;
    for (std::size_t i = 0; i < gaps.size(); ++i) s += (i ? " / " : "") + fmt(gaps[i], 3) + " +- " + fmt(stderrs[i], 2);
    return s;
  }
};

GapSeries gap_series(const std::vector<NamedRun>& runs, std::size_t count) {
  GapSeries g;
  for (std::size_t i = 0; i < count; ++i) {
    const ExperimentReport rep = execute(runs[i], kBaseWorkers);
    const ReportRow* r = find_row(rep, "R", "theta=1");
    g.gaps.push_back(std::abs(r->estimate - *r->target));
    g.stderrs.push_back(r->stderr_);
  }
  return g;
}

Verdict c7() {
  const GapSeries g = gap_series(c7_runs(), 3);
  const bool pass = g.decreasing() && g.gaps[2] < 0.05 && 3 * g.stderrs[2] < 0.01;
  return {pass, "gap n=6/8/10: " + g.text() + "; decreasing " + (g.decreasing() ? "yes" : "no") +
                    ", n=10 gap < 0.05, 3 sigma " + fmt(3 * g.stderrs[2], 3) + " < 0.01"};
}

Verdict c8() {
  const auto runs = c8_runs();
  const GapSeries g = gap_series(runs, 3);
  const ExperimentReport diag = execute(runs[3], kBaseWorkers);
  const bool diag_ok = diag.all_pass();
  const ReportRow* sh = find_row(diag, "shallow_fraction");
  const ReportRow* vd = find_row(diag, "very_deep_hit");
  const ReportRow* cov = find_row(diag, "coverage");
  const bool pass = g.decreasing() && g.gaps[2] < 0.07 && diag_ok;
  return {pass, "gap n=12/16/20: " + g.text() + "; decreasing " + (g.decreasing() ? "yes" : "no") +
                    ", n=20 gap < 0.07; diagnostics at n=20 (m=" + fmt(diag.scales.m) + "): shallow " +
                    fmt(sh->estimate, 3) + " <= " + fmt(sh->tolerance.value() * sh->target.value(), 3) +
                    ", very deep " + fmt(vd->estimate, 3) + " <= " + fmt(vd->tolerance.value() * vd->target.value(), 3) +
                    ", coverage " + fmt(cov->estimate, 3) + " >= " + fmt(cov->tolerance.value(), 3) +
                    (diag_ok ? " (pass)" : " (fail)")};
}

Verdict c9() {
  const ExperimentReport rep = execute(c9_runs()[0], kBaseWorkers);
  double worst_deep = 0, worst_full = 0;
  for (const ReportRow& r : rep.rows) {
    if (r.quantity == "laplace_deep") worst_deep = std::max(worst_deep, std::abs(r.estimate - *r.target));
    if (r.quantity == "laplace_full") worst_full = std::max(worst_full, std::abs(r.estimate - *r.target));
  }
  const ReportRow* k = find_row(rep, "K_fit");
  return {rep.all_pass(), "truncated max |diff| " + fmt(worst_deep, 3) + " (within 3 sigma and 0.02), stable max |diff| " +
                              fmt(worst_full, 3) + " (< 0.03), fitted K " + fmt(k->estimate)};
}

// ---- C10: determinism across worker counts ----

Verdict c10() {
  std::vector<NamedRun> runs;
  for (auto* list : {&c6_runs, &c7_runs, &c8_runs, &c9_runs}) {
    for (auto& r : (*list)()) runs.push_back(r);
  }
  std::size_t same = 0;
  std::string differing;
  for (const NamedRun& run : runs) {
    const fs::path base_csv = run_dir(run.name, kBaseWorkers) / "results.csv";
    if (!fs::exists(base_csv)) execute(run, kBaseWorkers);
    execute(run, kRerunWorkers);
    const std::string a = read_file(base_csv);
    const std::string b = read_file(run_dir(run.name, kRerunWorkers) / "results.csv");
    if (!a.empty() && a == b) ++same;
    else differing += " " + run.name;
  }
  return {same == runs.size(), std::to_string(same) + "/" + std::to_string(runs.size()) +
                                   " CSVs byte-identical between " + std::to_string(kBaseWorkers) + " and " +
                                   std::to_string(kRerunWorkers) + " workers" +
                                   (differing.empty() ? "" : "; differ:" + differing)};
}

const std::map<std::string, std::function<Verdict()>>& criteria() {
  static const std::map<std::string, std::function<Verdict()>> table = {
      {"C1", c1}, {"C2", c2}, {"C3", c3}, {"C4", c4}, {"C5", c5},
      {"C6", c6}, {"C7", c7}, {"C8", c8}, {"C9", c9}, {"C10", c10},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out" && i + 1 < argc) {
      g_out = argv[++i];
    } else if (arg == "all") {
      for (int k = 1; k <= 10; ++k) ids.push_back("C" + std::to_string(k));
    } else if (criteria().contains(arg)) {
      ids.push_back(arg);
    } else {
      std::cerr << "usage: acceptance (C1 .. C10 | all)... [--out DIR]\n";
      return 2;
    }
  }
  if (ids.empty()) {
    std::cerr << "usage: acceptance (C1 .. C10 | all)... [--out DIR]\n";
    return 2;
  }
  bool all = true;
  for (const std::string& id : ids) {
    Verdict v;
    try {
      v = criteria().at(id)();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::cout << id << " " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
