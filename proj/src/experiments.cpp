#include "trap/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <json.hpp>

#include "trap/dynamics.hpp"
#include "trap/format.hpp"
#include "trap/levy.hpp"
#include "trap/parallel.hpp"
#include "trap/potential.hpp"
#include "trap/simd/dispatch.hpp"

namespace trap {

namespace {

constexpr double kKr = std::numbers::pi / (2 * std::numbers::ln2);
constexpr std::uint64_t kBlock = 256;

std::string point(const char* name, double v) { return std::string(name) + "=" + format_double(v); }

double max_theta(const ExperimentConfig& c) {
  return c.theta.empty() ? 1.0 : *std::max_element(c.theta.begin(), c.theta.end());
}

std::uint64_t default_cap(const ExperimentConfig& c, double xi) {
  if (c.step_cap) return *c.step_cap;
  const double cap = std::ceil(100 * xi);
  return cap >= 1.8e19 ? 0 : static_cast<std::uint64_t>(cap);
}

EnsemblePlan plan_of(const ExperimentConfig& c, std::uint64_t cap) {
  EnsemblePlan plan;
  plan.environments = c.environments;
  plan.trajectories = c.trajectories;
  plan.seed = c.seed;
  plan.workers = c.workers;
  plan.step_cap = cap;
  return plan;
}

// Runs task(e, j) for every replica; blocks of trajectories are the unit of
// work, and results are written by index.
template <class Task>
void for_each_replica(const ExperimentConfig& c, Task&& task) {
  const std::uint64_t per_env = (c.trajectories + kBlock - 1) / kBlock;
  parallel_for(c.environments * per_env, c.workers, [&](std::size_t b) {
    const std::uint64_t e = b / per_env;
    const std::uint64_t begin = (b % per_env) * kBlock;
    const std::uint64_t end = std::min(c.trajectories, begin + kBlock);
    for (std::uint64_t j = begin; j < end; ++j) task(e, j);
  });
}

double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0;
  const double mu = mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<double> group_means(const std::vector<double>& samples, std::uint64_t per_env) {
  std::vector<double> means(samples.size() / per_env);
  for (std::size_t e = 0; e < means.size(); ++e) {
    double s = 0;
    for (std::uint64_t j = 0; j < per_env; ++j) s += samples[e * per_env + j];
    means[e] = s / static_cast<double>(per_env);
  }
  return means;
}

ReportRow gated(std::string quantity, std::string x, double estimate, double stderr_, std::uint64_t reps,
                double target, std::string source, double tolerance, bool pass) {
  ReportRow r;
  r.quantity = std::move(quantity);
  r.x = std::move(x);
  r.estimate = estimate;
  r.stderr_ = stderr_;
  r.reps = reps;
  r.target = target;
  r.target_source = std::move(source);
  r.tolerance = tolerance;
  r.pass = pass;
  return r;
}

ReportRow info(std::string quantity, std::string x, double estimate, double stderr_ = 0,
               std::uint64_t reps = 0) {
  ReportRow r;
  r.quantity = std::move(quantity);
  r.x = std::move(x);
  r.estimate = estimate;
  r.stderr_ = stderr_;
  r.reps = reps;
  return r;
}

ScaleSet base_scales(const Topology& topo, const Landscape& law, double alpha, double gamma) {
  switch (topo.family()) {
    case Family::complete:
      return complete_scales(topo.size(), alpha, 1);
    case Family::torus2d:
      if (law.law() != DepthLaw::pareto) throw std::invalid_argument("torus2d needs a pareto landscape");
      return torus_scales(static_cast<unsigned>(topo.size()), alpha, gamma, 1);
    case Family::hypercube:
      if (law.law() != DepthLaw::rem) throw std::invalid_argument("hypercube scales need a rem landscape");
      if (law.rem_n() != topo.size()) throw std::invalid_argument("rem n must equal the hypercube dimension");
      return rem_scales(static_cast<unsigned>(topo.size()), alpha, law.beta(), 1);
  }
  throw std::invalid_argument("unknown family");
}

class Runner {
 public:
  Runner(const ExperimentConfig& c, ExperimentReport& report, const RowSink& sink)
      : c_(c), report_(report), sink_(sink) {}

  void emit(ReportRow row) {
    if (sink_) sink_(row);
    report_.rows.push_back(std::move(row));
  }
  bool stopping() {
    if (stop_requested().load()) report_.interrupted = true;
    return report_.interrupted;
  }

  void aging_curve();
  void clock_marginal();
  void hitting_law();
  void potential_report();
  void diagnostics();

 private:
  void model_checks(const Model& model);

  const ExperimentConfig& c_;
  ExperimentReport& report_;
  const RowSink& sink_;
};

void Runner::model_checks(const Model& model) {
  if (model.topology.family() == Family::hypercube && model.law.law() == DepthLaw::rem) {
    const double ratio = rem_window_ratio(model.alpha, model.law.beta());
    ReportRow r = info("rem_window_ratio", "", ratio);
    r.pass = rem_window_ok(model.alpha, model.law.beta());
    r.target_source = "alpha^2 beta^2 / (2 log 2) in (3/4, 1)";
    emit(r);
  }
  if (model.topology.family() == Family::torus2d) {
    ReportRow r = info("torus_gamma", "", c_.gamma);
    r.pass = torus_gamma_ok(c_.gamma);
    r.target_source = "gamma in (0, 1/6)";
    emit(r);
  }
}

AgingPoint aging_point(const ExperimentConfig& c, const Model& model, double theta) {
  const std::uint64_t cap = default_cap(c, model.scales.xi);
  const auto records = two_time_records(model.topology, model.law, model.scales.t, theta, plan_of(c, cap));
  AgingPoint p;
  p.theta = theta;
  p.reps = records.size();
  std::vector<double> hits(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    hits[k] = records[k].same ? 1.0 : 0.0;
    p.timeouts += records[k].timed_out;
  }
  p.estimate = mean(hits);
  p.stderr_ = grouped_stderr(hits, c.trajectories);
  p.per_environment = group_means(hits, c.trajectories);
  p.env_sd = sample_sd(p.per_environment);
  p.target = asl(model.alpha, 1 / (1 + theta));
  return p;
}

void Runner::aging_curve() {
  const Model model = resolve_model(c_);
  report_.scales = model.scales;
  model_checks(model);
  const double tol = c_.tolerance("gap");
  for (double theta : c_.theta) {
    if (stopping()) return;
    const AgingPoint p = aging_point(c_, model, theta);
    const std::string x = point("theta", theta);
    emit(gated("R", x, p.estimate, p.stderr_, p.reps, p.target, "levy::asl(alpha, 1/(1+theta))", tol,
               std::abs(p.estimate - p.target) < tol));
    if (c_.trajectories > 1) {
      for (std::size_t e = 0; e < p.per_environment.size(); ++e) {
        const double v = p.per_environment[e];
        ReportRow r = info("R", x, v, std::sqrt(v * (1 - v) / static_cast<double>(c_.trajectories)),
                           c_.trajectories);
        r.scope = "env=" + std::to_string(e);
        r.target = p.target;
        r.target_source = "levy::asl(alpha, 1/(1+theta))";
        emit(r);
      }
    }
    emit(info("R_env_sd", x, p.env_sd, 0, c_.environments));
    emit(info("timeout_fraction", x, static_cast<double>(p.timeouts) / static_cast<double>(p.reps), 0, p.reps));
    if (c_.fresh_site) {
      const TrapWindow window{c_.eps, c_.M};
      const double g = model.scales.g;
      const auto est = estimate_R_A(
          model.topology, model.law,
          [&](const Landscape& env) { return VertexSet::deep(DeepSet{env, window, g}); }, model.scales.t,
          theta, plan_of(c_, default_cap(c_, model.scales.xi)));
      ReportRow r = info("R_A", x, est.fresh.pooled.estimate, est.fresh.pooled.stderr_, est.fresh.pooled.reps);
      r.target = p.target;
      r.target_source = "levy::asl(alpha, 1/(1+theta))";
      emit(r);
      emit(info("R_A_minus_R", x, est.fresh.pooled.estimate - est.same.pooled.estimate, 0, est.fresh.pooled.reps));
    }
  }
}

void Runner::clock_marginal() {
  const Model model = resolve_model(c_);
  report_.scales = model.scales;
  model_checks(model);
  const ScaleSet& sc = model.scales;
  const TrapWindow window{c_.eps, c_.M};
  validate(window);
  const LevyParams levy{model.alpha, c_.eps, c_.M};
  std::vector<std::uint64_t> marks;
  for (double t0 : c_.t0) {
    if (!(t0 > 0)) throw std::invalid_argument("t0 values must be positive");
    marks.push_back(static_cast<std::uint64_t>(std::floor(sc.r * t0)));
  }
  const std::uint64_t last = *std::max_element(marks.begin(), marks.end());
  const std::uint64_t total = c_.environments * c_.trajectories;
  const std::size_t nt = marks.size();
  // full[k * nt + i], deep[...]: S(floor(r t0_i)) / t for replica k.
  std::vector<double> full(total * nt), deep(total * nt);
  for_each_replica(c_, [&](std::uint64_t e, std::uint64_t j) {
    const Landscape env = model.law.with_seed(environment_seed(c_.seed, e));
    const std::uint64_t key = trajectory_key(c_.seed, e, j);
    const std::uint64_t k = e * c_.trajectories + j;
    VertexId v = Topology::origin();
    double s_full = 0, s_deep = 0;
    for (std::uint64_t i = 0; i <= last; ++i) {
      for (std::size_t m = 0; m < nt; ++m) {
        if (marks[m] == i) {
          full[k * nt + m] = s_full / sc.t;
          deep[k * nt + m] = s_deep / sc.t;
        }
      }
      if (i == last) break;
      const double tau = env.tau(v);
      const double hold = holding_exponential(key, i) * tau;
      s_full += hold;
      if (classify(tau, window, sc.g) == TrapClass::deep) s_deep += hold;
      v = model.topology.neighbor(v, jump_bits(key, i));
    }
  });

  const double sigma_k = c_.tolerance("laplace_sigma");
  const double abs_deep = c_.tolerance("laplace_abs");
  const double abs_full = c_.tolerance("stable_abs");
  std::vector<std::tuple<double, double, double>> fit_points;  // (t0, lambda, empirical deep LT)
  for (std::size_t m = 0; m < nt; ++m) {
    for (double lambda : c_.lambda) {
      if (stopping()) return;
      if (!(lambda > 0)) throw std::invalid_argument("lambda values must be positive");
      const double t0 = c_.t0[m];
      std::vector<double> ld(total), lf(total);
      for (std::uint64_t k = 0; k < total; ++k) {
        ld[k] = std::exp(-lambda * deep[k * nt + m]);
        lf[k] = std::exp(-lambda * full[k * nt + m]);
      }
      const std::string x = point("t0", t0) + ";" + point("lambda", lambda);
      const double est_d = mean(ld), se_d = grouped_stderr(ld, c_.trajectories);
      const double tgt_d = std::exp(-t0 * laplace_exponent(levy, lambda));
      const double dd = std::abs(est_d - tgt_d);
      emit(gated("laplace_deep", x, est_d, se_d, total, tgt_d, "exp(-t0 levy::laplace_exponent(lambda))", abs_deep,
                 dd <= sigma_k * se_d && dd <= abs_deep));
      const double est_f = mean(lf), se_f = grouped_stderr(lf, c_.trajectories);
      const double tgt_f = std::exp(-t0 * stable_exponent(model.alpha, lambda));
      emit(gated("laplace_full", x, est_f, se_f, total, tgt_f, "exp(-t0 levy::stable_exponent(alpha, lambda))",
                 abs_full, std::abs(est_f - tgt_f) <= abs_full));
      fit_points.emplace_back(t0, lambda, est_d);
    }
  }
  // Scale K in Y_n -> K Y: E exp(-lambda Y_n(t0)) ~ exp(-t0 psi(K lambda)).
  auto loss = [&](double log_k) {
    const double k = std::exp(log_k);
    double sum = 0;
    for (const auto& [t0, lambda, emp] : fit_points) {
      const double d = emp - std::exp(-t0 * laplace_exponent(levy, k * lambda));
      sum += d * d;
    }
    return sum;
  };
  const auto best = boost::math::tools::brent_find_minima(loss, std::log(0.1), std::log(10.0), 40);
  ReportRow r = info("K_fit", "", std::exp(best.first), 0, total);
  if (model.topology.family() == Family::complete) {
    r.target = 1.0;
    r.target_source = "complete graph: K_G = 1";
  }
  emit(r);
}

void Runner::hitting_law() {
  const Topology topo = Topology::parse(c_.topology);
  const auto n = static_cast<unsigned>(topo.size());
  double density = 0, scale = 0, target_mean = 0;
  std::string source;
  if (topo.family() == Family::hypercube) {
    scale = std::exp2(c_.gamma * n);
    density = c_.cloud_rho / scale;
    target_mean = 1 / c_.cloud_rho;
    source = "1 / rho";
  } else if (topo.family() == Family::torus2d) {
    scale = torus_time_scale(n, c_.gamma);
    density = c_.cloud_rho * std::pow(static_cast<double>(n), c_.gamma) / static_cast<double>(topo.vertex_count());
    target_mean = 1 / (kKr * c_.cloud_rho);
    source = "1 / (K_r rho), K_r = pi / (2 log 2)";
  } else {
    throw std::invalid_argument("hitting_law needs a hypercube or torus2d topology");
  }
  if (!(density < 1)) throw std::invalid_argument("hitting_law: cloud density must be below 1");
  const std::uint64_t cap = c_.step_cap ? *c_.step_cap : static_cast<std::uint64_t>(std::ceil(100 * scale * target_mean));
  const std::uint64_t total = c_.environments * c_.trajectories;
  std::vector<double> h(total);
  std::vector<char> timed_out(total);
  for_each_replica(c_, [&](std::uint64_t e, std::uint64_t j) {
    const PoissonCloud cloud{environment_key(environment_seed(c_.seed, e)), density};
    const VertexSet A = VertexSet::cloud(cloud).without(Topology::origin());
    const auto hit = hitting_time(topo, A, Topology::origin(), cap, trajectory_key(c_.seed, e, j));
    h[e * c_.trajectories + j] = static_cast<double>(hit.steps) / scale;
    timed_out[e * c_.trajectories + j] = hit.timed_out;
  });
  if (stopping()) return;
  const double est = mean(h);
  const double se = grouped_stderr(h, c_.trajectories);
  const double rel = c_.tolerance("hit_mean_rel");
  emit(gated("H_mean", "", est, se, total, target_mean, source, rel, std::abs(est / target_mean - 1) <= rel));
  std::vector<double> scaled(h);
  for (double& v : scaled) v /= target_mean;
  const double ks = ks_exponential(scaled);
  const double ks_tol = c_.tolerance("hit_ks");
  emit(gated("H_ks", "", ks, 0, total, 0, "Kolmogorov-Smirnov distance to Exp(1)", ks_tol, ks < ks_tol));
  const auto timeouts = static_cast<double>(std::count(timed_out.begin(), timed_out.end(), 1));
  emit(info("timeout_fraction", "", timeouts / static_cast<double>(total), 0, total));

  // Realised cloud geometry, when the cube is small enough to scan. The
  // realised density |A| / 2^{(1-gamma) n} fluctuates strongly at small n,
  // so the hitting law is also reported against it.
  if (topo.family() == Family::hypercube && n <= 20) {
    const double omega = omega_root((2 * c_.gamma - 1) * std::numbers::ln2);
    const double bound = (omega + 0.05) * n;
    std::vector<double> sizes(c_.environments), ok(c_.environments);
    parallel_for(c_.environments, c_.workers, [&](std::size_t e) {
      const PoissonCloud cloud{environment_key(environment_seed(c_.seed, e)), density};
      auto members = cloud_members(topo, cloud);
      ok[e] = min_distance_audit(topo, members, bound).pass ? 1.0 : 0.0;
      std::erase(members, Topology::origin());
      sizes[e] = static_cast<double>(members.size());
    });
    emit(info("cloud_size_mean", "", mean(sizes), grouped_stderr(sizes, 1), c_.environments));
    emit(info("min_distance_pass_fraction", point("bound", bound), mean(ok), 0, c_.environments));
    std::vector<double> realised;
    for (std::uint64_t k = 0; k < total; ++k) {
      const double size = sizes[k / c_.trajectories];
      if (size > 0) realised.push_back(h[k] * size / std::exp2((1 - c_.gamma) * n));
    }
    ReportRow r = info("H_mean_realised", "", mean(realised), 0, realised.size());
    r.target = 1.0;
    r.target_source = "1 / realised rho";
    emit(r);
    r = info("H_ks_realised", "", ks_exponential(realised), 0, realised.size());
    r.target = 0.0;
    r.target_source = "Kolmogorov-Smirnov distance to Exp(1)";
    emit(r);
  }
}

void Runner::potential_report() {
  const Topology topo = Topology::parse(c_.topology);
  if (c_.sizes.empty()) throw std::invalid_argument("potential_report needs sizes");
  const unsigned n_max = *std::max_element(c_.sizes.begin(), c_.sizes.end());
  if (topo.family() == Family::torus2d) {
    const double band = c_.tolerance("g0_band");
    const double kr_tol = c_.tolerance("kr_rel");
    std::vector<double> ratios;
    for (unsigned n : c_.sizes) {
      if (stopping()) return;
      const double g0 = torus_green(n, 0, 0, 1.0, c_.gamma);
      const double ratio = g0 * std::numbers::pi / (2 * n * std::numbers::ln2);
      ratios.push_back(ratio);
      const std::string x = "n=" + std::to_string(n) + ";s=1";
      ReportRow r = info("G0_ratio", x, ratio);
      r.target = 1.0;
      r.target_source = "G(0;s) / ((2n/pi) log 2)";
      if (n == n_max) {
        r.tolerance = band;
        r.pass = std::abs(ratio - 1) <= band;
      }
      emit(r);
      const auto fit = fit_torus_constant(n, c_.gamma, c_.s, c_.cloud_rho);
      for (auto [q, v] : {std::pair{"K_r_plus", fit.k_r_plus}, std::pair{"K_r_minus", fit.k_r_minus}}) {
        ReportRow k = info(q, "n=" + std::to_string(n), v);
        k.target = kKr;
        k.target_source = "pi / (2 log 2)";
        if (n == n_max) {
          k.tolerance = kr_tol;
          k.pass = std::abs(v / kKr - 1) <= kr_tol;
        }
        emit(k);
      }
      ReportRow k = info("K_r_sandwich", "n=" + std::to_string(n), fit.k_r_sandwich);
      k.target = kKr;
      k.target_source = "pi / (2 log 2)";
      emit(k);
    }
    // The ratios must approach 1 monotonically in n.
    std::vector<std::pair<unsigned, double>> by_n;
    for (std::size_t i = 0; i < ratios.size(); ++i) by_n.emplace_back(c_.sizes[i], ratios[i]);
    std::sort(by_n.begin(), by_n.end());
    bool monotone = true;
    for (std::size_t i = 1; i < by_n.size(); ++i) {
      monotone = monotone && std::abs(by_n[i].second - 1) < std::abs(by_n[i - 1].second - 1);
    }
    ReportRow mono = info("G0_ratio_monotone", "", monotone ? 1.0 : 0.0);
    mono.pass = monotone;
    emit(mono);
  } else if (topo.family() == Family::hypercube) {
    const double omega = omega_root((2 * c_.gamma - 1) * std::numbers::ln2);
    for (unsigned n : c_.sizes) {
      if (stopping()) return;
      for (double s : c_.s) {
        const std::string x = "n=" + std::to_string(n) + ";" + point("s", s);
        const double f_anti = hypercube_hitting_lt(n, n, s, c_.gamma);
        ReportRow a = info("antipodal_ratio", x, f_anti * s * std::exp2((1 - c_.gamma) * n));
        a.target = 1.0;
        a.target_source = "f_n(n,s) s 2^((1-gamma) n)";
        emit(a);
        const auto k = static_cast<unsigned>(std::ceil((omega + 0.05) * n));
        const double f_plus = hypercube_hitting_lt(n, std::min(k, n), s, c_.gamma);
        const double size = c_.cloud_rho * std::exp2((1 - c_.gamma) * n);
        const auto b = matthews_bounds(f_plus, f_anti, std::max(2.0, size));
        const double tgt = c_.cloud_rho / (s + c_.cloud_rho);
        for (auto [q, v] : {std::pair{"matthews_lower", b.lower}, std::pair{"matthews_upper", b.upper}}) {
          ReportRow r = info(q, x, v);
          r.target = tgt;
          r.target_source = "rho / (s + rho)";
          emit(r);
        }
      }
    }
  } else {
    throw std::invalid_argument("potential_report needs a hypercube or torus2d topology");
  }
}

void Runner::diagnostics() {
  const Model model = resolve_model(c_);
  report_.scales = model.scales;
  model_checks(model);
  const TrapWindow window{c_.eps, c_.M};
  const double theta = max_theta(c_);
  double lambda = c_.lambda_d;
  if (lambda == 0) {
    const double n = static_cast<double>(model.topology.size());
    switch (model.topology.family()) {
      case Family::hypercube: lambda = std::sqrt(n); break;
      case Family::torus2d: lambda = 1 / std::sqrt(n); break;
      case Family::complete: lambda = 1; break;
    }
  }
  const double cov = c_.tolerance("coverage");
  ScaleSet sc = model.scales;
  ConditionReport rep;
  // With m = 0 the horizon starts at the limit-process choice and doubles
  // until the empirical coverage reaches the tolerance.
  for (;;) {
    if (stopping()) return;
    rep = condition_diagnostics(model.topology, model.law, window, sc, theta, lambda, plan_of(c_, 0));
    if (c_.m != 0 || rep.coverage >= cov || sc.m >= 1024) break;
    emit(info("horizon_search", point("m", sc.m), rep.coverage, 0, rep.reps));
    sc.m *= 2;
    sc.xi = sc.m * sc.r;
  }
  report_.scales = sc;
  const double a = model.alpha;
  const double m = sc.m;
  const double h1 = m * a * std::pow(c_.eps, 1 - a) / (1 - a);
  const double k_hit = model.topology.family() == Family::torus2d ? kKr : 1.0;
  const double h2 = -std::expm1(-m * k_hit * std::pow(c_.M, -a));
  const double f1 = c_.tolerance("shallow_factor");
  const double f2 = c_.tolerance("very_deep_factor");
  const std::string x = point("theta", theta);
  emit(gated("shallow_fraction", x, rep.shallow_fraction, rep.shallow_fraction_stderr, rep.reps, h1,
             "m alpha eps^(1-alpha) / (1-alpha)", f1, rep.shallow_fraction <= f1 * h1));
  emit(gated("very_deep_hit", x, rep.very_deep_hit, rep.very_deep_hit_stderr, rep.reps, h2,
             "1 - exp(-m K M^-alpha)", f2, rep.very_deep_hit <= f2 * h2));
  emit(gated("coverage", x, rep.coverage, std::sqrt(rep.coverage * (1 - rep.coverage) / rep.reps), rep.reps, 1.0,
             "probability one", cov, rep.coverage >= cov));
  emit(info("repetition", x, rep.repetition, 0, rep.reps));
  emit(info("condition_d_ratio", point("lambda", lambda), rep.condition_d_ratio));
  emit(info("post_probe", "delta=0.1", rep.post_probe[0], 0, rep.post_events[0]));
  emit(info("post_probe", "delta=0.05", rep.post_probe[1], 0, rep.post_events[1]));
}

}  // namespace

bool ExperimentReport::all_pass() const {
  if (interrupted) return false;
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass.value_or(true); });
}

std::atomic<bool>& stop_requested() {
  static std::atomic<bool> flag{false};
  return flag;
}

Model resolve_model(const ExperimentConfig& c) {
  const Topology topo = Topology::parse(c.topology);
  const Landscape law = Landscape::parse(c.landscape, c.seed);
  double alpha = c.alpha;
  if (alpha == 0) {
    if (law.law() != DepthLaw::pareto) throw std::invalid_argument("alpha is required for a rem landscape");
    alpha = law.alpha();
  }
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
  ScaleSet sc = base_scales(topo, law, alpha, c.gamma);
  double m = c.m;
  if (m == 0) {
    m = horizon_multiplier(LevyParams{alpha, c.eps, c.M}, max_theta(c), 0.99, 20000, derive_key(c.seed, 0x6d));
  }
  if (c.scale_t) sc.t = *c.scale_t;
  if (c.scale_g) sc.g = *c.scale_g;
  if (c.scale_rho) sc.rho = *c.scale_rho;
  if (c.scale_r) sc.r = *c.scale_r;
  sc.m = m;
  sc.f = sc.t / sc.g;
  sc.xi = m * sc.r;
  return Model{topo, law, alpha, sc};
}

AgingCurve estimate_aging_curve(const ExperimentConfig& config) {
  config.validate();
  const Model model = resolve_model(config);
  AgingCurve curve;
  curve.alpha = model.alpha;
  curve.t_w = model.scales.t;
  curve.scales = model.scales;
  for (double theta : config.theta) curve.points.push_back(aging_point(config, model, theta));
  return curve;
}

double grouped_stderr(const std::vector<double>& samples, std::uint64_t per_env) {
  if (samples.empty() || per_env == 0) return 0;
  const auto means = group_means(samples, per_env);
  if (means.size() >= 2) return sample_sd(means) / std::sqrt(static_cast<double>(means.size()));
  return sample_sd(samples) / std::sqrt(static_cast<double>(samples.size()));
}

double ks_exponential(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = -std::expm1(-sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

ExperimentReport run(const ExperimentConfig& config, const RowSink& sink) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = config;
  report.backend = simd::name(simd::active_backend());
  Runner runner(config, report, sink);
  switch (config.experiment) {
    case Experiment::aging_curve: runner.aging_curve(); break;
    case Experiment::clock_marginal: runner.clock_marginal(); break;
    case Experiment::hitting_law: runner.hitting_law(); break;
    case Experiment::potential_report: runner.potential_report(); break;
    case Experiment::diagnostics: runner.diagnostics(); break;
  }
  report.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string csv_header() {
  return "experiment,quantity,scope,x,estimate,stderr,reps,target,target_source,tolerance,pass\n";
}

std::string csv_line(const std::string& experiment, const ReportRow& r) {
  auto quoted = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::string line = experiment + "," + r.quantity + "," + r.scope + "," + quoted(r.x) + "," +
                     format_double(r.estimate) + "," + format_double(r.stderr_) + "," + std::to_string(r.reps) + ",";
  line += r.target ? format_double(*r.target) : "";
  line += "," + quoted(r.target_source) + ",";
  line += r.tolerance ? format_double(*r.tolerance) : "";
  line += ",";
  line += r.pass ? (*r.pass ? "true" : "false") : "";
  return line + "\n";
}

void write_summary(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const ExperimentConfig& c = report.config;
  nlohmann::ordered_json j;
  j["experiment"] = name(c.experiment);
  j["seed"] = c.seed;
  j["workers"] = resolve_workers(c.workers);
  j["backend"] = report.backend;
  j["wall_clock_s"] = report.wall_clock;
  j["interrupted"] = report.interrupted;
  j["all_pass"] = report.all_pass();
  const ScaleSet& s = report.scales;
  j["scales"] = {{"t", s.t}, {"g", s.g}, {"rho", s.rho}, {"r", s.r}, {"f", s.f}, {"xi", s.xi}, {"m", s.m}};
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  std::size_t gated_rows = 0, failed = 0;
  for (const ReportRow& r : report.rows) {
    if (r.scope != "pooled") continue;
    nlohmann::ordered_json o{{"quantity", r.quantity}, {"x", r.x}, {"estimate", r.estimate},
                             {"stderr", r.stderr_}, {"reps", r.reps}};
    if (r.target) o["target"] = *r.target;
    if (!r.target_source.empty()) o["target_source"] = r.target_source;
    if (r.tolerance) o["tolerance"] = *r.tolerance;
    if (r.pass) {
      o["pass"] = *r.pass;
      ++gated_rows;
      failed += !*r.pass;
    }
    rows.push_back(std::move(o));
  }
  j["gated_rows"] = gated_rows;
  j["failed_rows"] = failed;
  j["config"] = to_text(c);
  std::ofstream(fs::path(dir) / "summary.json") << j.dump(2) << "\n";
  std::ofstream(fs::path(dir) / "config.txt") << to_text(c);
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream csv(fs::path(dir) / "results.csv");
  csv << csv_header();
  const std::string exp = name(report.config.experiment);
  for (const ReportRow& r : report.rows) csv << csv_line(exp, r);
  write_summary(report, dir);
}

}  // namespace trap
