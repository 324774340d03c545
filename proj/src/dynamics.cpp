#include "trap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "trap/parallel.hpp"
#include "trap/simd/dispatch.hpp"

namespace trap {

namespace {

constexpr std::uint64_t kTrajectorySalt = 0x7472616A6563746Full;
constexpr std::uint64_t kBlock = 256;

std::uint64_t effective_cap(std::uint64_t cap) {
  return cap == 0 ? std::numeric_limits<std::uint64_t>::max() : cap;
}

void check_plan(const EnsemblePlan& plan) {
  if (plan.environments < 1 || plan.trajectories < 1) {
    throw std::invalid_argument("ensemble plan needs at least one environment and one trajectory");
  }
}

void check_times(double t_w, double theta) {
  if (!(t_w > 0) || !(theta >= 0) || !std::isfinite(t_w * (1 + theta))) {
    throw std::invalid_argument("two-time estimate needs t_w > 0 and theta >= 0");
  }
}

/// (environment, block) work items in a fixed order.
struct BlockGrid {
  std::uint64_t environments;
  std::uint64_t trajectories;
  std::uint64_t blocks_per_env() const { return (trajectories + kBlock - 1) / kBlock; }
  std::uint64_t count() const { return environments * blocks_per_env(); }
  std::uint64_t env(std::uint64_t task) const { return task / blocks_per_env(); }
  std::uint64_t begin(std::uint64_t task) const { return (task % blocks_per_env()) * kBlock; }
  std::uint64_t end(std::uint64_t task) const {
    const std::uint64_t b = begin(task) + kBlock;
    return b < trajectories ? b : trajectories;
  }
};

template <class Work>
void for_each_block(const EnsemblePlan& plan, Work&& work) {
  const BlockGrid grid{plan.environments, plan.trajectories};
  parallel_for(grid.count(), plan.workers, [&](std::size_t task) {
    work(grid.env(task), grid.begin(task), grid.end(task));
  });
}

EnsembleEstimate summarize(double t_w, double theta, std::uint64_t environments,
                           std::uint64_t trajectories, const std::vector<char>& hit,
                           const std::vector<char>& timeout) {
  EnsembleEstimate out;
  std::uint64_t total_hits = 0, total_timeouts = 0;
  for (std::uint64_t e = 0; e < environments; ++e) {
    std::uint64_t h = 0, to = 0;
    for (std::uint64_t j = 0; j < trajectories; ++j) {
      h += hit[e * trajectories + j];
      to += timeout[e * trajectories + j];
    }
    out.per_environment.push_back(make_estimate(t_w, theta, h, trajectories, to));
    total_hits += h;
    total_timeouts += to;
  }
  out.pooled = make_estimate(t_w, theta, total_hits, environments * trajectories, total_timeouts);
  return out;
}

}  // namespace

TrajectoryState step(TrajectoryState state, const Topology& topology, const Landscape& landscape) {
  const double hold = holding_exponential(state.key, state.steps) * landscape.tau(state.vertex);
  state.clock += hold;
  if (!std::isfinite(state.clock)) throw std::overflow_error("clock overflow");
  state.vertex = topology.neighbor(state.vertex, jump_bits(state.key, state.steps));
  ++state.steps;
  return state;
}

VertexId state_at(const Topology& topology, const Landscape& landscape, double t, std::uint64_t key) {
  if (!(t >= 0)) throw std::invalid_argument("state_at needs t >= 0");
  TrajectoryState s = start_state(key);
  for (;;) {
    const TrajectoryState next = step(s, topology, landscape);
    if (next.clock > t) return s.vertex;
    s = next;
  }
}

VertexSet VertexSet::deep(DeepSet set) {
  VertexSet s(Kind::deep);
  s.deep_ = std::move(set);
  return s;
}

VertexSet VertexSet::cloud(PoissonCloud cloud) {
  VertexSet s(Kind::cloud);
  s.cloud_ = cloud;
  return s;
}

VertexSet VertexSet::listed(std::vector<VertexId> members) {
  VertexSet s(Kind::listed);
  s.listed_.insert(members.begin(), members.end());
  return s;
}

std::uint64_t environment_seed(std::uint64_t master, std::uint64_t e) { return derive_key(master, e); }

std::uint64_t trajectory_key(std::uint64_t master, std::uint64_t e, std::uint64_t j) {
  return derive_key(derive_key(master ^ kTrajectorySalt, e), j);
}

TwoTimeEstimate make_estimate(double t_w, double theta, std::uint64_t hits, std::uint64_t reps,
                              std::uint64_t timeouts) {
  TwoTimeEstimate est;
  est.t_w = t_w;
  est.theta = theta;
  est.reps = reps;
  est.hits = hits;
  est.timeouts = timeouts;
  if (reps > 0) {
    est.estimate = static_cast<double>(hits) / static_cast<double>(reps);
    est.stderr_ = std::sqrt(est.estimate * (1 - est.estimate) / static_cast<double>(reps));
  }
  return est;
}

std::vector<TwoTimeRecord> two_time_records(const Topology& topology, const Landscape& law,
                                            double t_w, double theta, const EnsemblePlan& plan) {
  check_plan(plan);
  check_times(t_w, theta);
  const double t2 = t_w * (1 + theta);
  const std::uint64_t cap = effective_cap(plan.step_cap);
  const simd::Backend backend = simd::active_backend();
  const std::uint64_t total = plan.environments * plan.trajectories;
  std::vector<TwoTimeRecord> records(total);
  const simd::WalkModel model = simd::make_walk_model(topology, law);
  // Blocks run over the flattened (environment, trajectory) index so that a
  // vector batch stays full even with one trajectory per environment.
  const std::uint64_t blocks = (total + kBlock - 1) / kBlock;
  parallel_for(blocks, plan.workers, [&](std::size_t b) {
    const std::uint64_t begin = b * kBlock;
    const std::uint64_t end = std::min(total, begin + kBlock);
    std::vector<std::uint64_t> keys, envs;
    for (std::uint64_t k = begin; k < end; ++k) {
      const std::uint64_t e = k / plan.trajectories;
      keys.push_back(trajectory_key(plan.seed, e, k % plan.trajectories));
      envs.push_back(environment_key(environment_seed(plan.seed, e)));
    }
    std::vector<simd::TwoTimeResult> res(keys.size());
    simd::two_time_batch(backend, model, keys, envs, t_w, t2, cap, res);
    for (std::uint64_t k = begin; k < end; ++k) {
      const auto& r = res[k - begin];
      TwoTimeRecord& rec = records[k];
      rec.environment = k / plan.trajectories;
      rec.trajectory = k % plan.trajectories;
      rec.timed_out = r.timed_out;
      rec.same = !r.timed_out && r.at_first == r.at_second;
      rec.steps = r.steps;
    }
  });
  return records;
}

EnsembleEstimate estimate_R(const Topology& topology, const Landscape& law, double t_w,
                            double theta, const EnsemblePlan& plan) {
  const auto records = two_time_records(topology, law, t_w, theta, plan);
  std::vector<char> hit(records.size()), timeout(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    hit[k] = records[k].same;
    timeout[k] = records[k].timed_out;
  }
  return summarize(t_w, theta, plan.environments, plan.trajectories, hit, timeout);
}

FreshSiteEstimate estimate_R_A(const Topology& topology, const Landscape& law,
                               const SetFactory& make_set, double t_w, double theta,
                               const EnsemblePlan& plan) {
  check_plan(plan);
  check_times(t_w, theta);
  const double t2 = t_w * (1 + theta);
  const std::uint64_t cap = effective_cap(plan.step_cap);
  const std::size_t total = plan.environments * plan.trajectories;
  std::vector<char> fresh(total), same(total), timeout(total);
  for_each_block(plan, [&](std::uint64_t e, std::uint64_t begin, std::uint64_t end) {
    const Landscape env = law.with_seed(environment_seed(plan.seed, e));
    const VertexSet A = make_set(env);
    for (std::uint64_t j = begin; j < end; ++j) {
      const std::uint64_t key = trajectory_key(plan.seed, e, j);
      VertexId v = Topology::origin();
      double clock = 0;
      std::optional<VertexId> last_a;
      bool is_fresh = true;
      bool have_first = false;
      VertexId at_first = 0;
      bool done = false;
      std::uint64_t i = 0;
      for (; i < cap; ++i) {
        // Y(i) is entered at time S(i) = clock.
        if (A.contains(v)) {
          if (clock <= t_w) last_a = v;
          else if (!last_a || *last_a != v) is_fresh = false;
        }
        const double next = clock + holding_exponential(key, i) * env.tau(v);
        if (!std::isfinite(next)) throw std::overflow_error("clock overflow");
        if (!have_first && next > t_w) {
          have_first = true;
          at_first = v;
        }
        if (next > t2) {
          done = true;
          same[e * plan.trajectories + j] = at_first == v;
          break;
        }
        clock = next;
        v = topology.neighbor(v, jump_bits(key, i));
      }
      const std::size_t k = e * plan.trajectories + j;
      timeout[k] = !done;
      fresh[k] = done && is_fresh;
    }
  });
  FreshSiteEstimate out;
  out.fresh = summarize(t_w, theta, plan.environments, plan.trajectories, fresh, timeout);
  out.same = summarize(t_w, theta, plan.environments, plan.trajectories, same, timeout);
  return out;
}

DeepTrapRecord record_deep(const Topology& topology, const Landscape& landscape,
                           const TrapWindow& window, const ScaleSet& scales, std::uint64_t key,
                           std::optional<double> probe) {
  validate(window);
  if (!(scales.xi >= 0) || !std::isfinite(scales.xi)) throw std::invalid_argument("record_deep: bad horizon");
  const auto steps = static_cast<std::uint64_t>(std::floor(scales.xi));
  DeepTrapRecord rec;
  rec.steps = steps;
  rec.entries.push_back(DeepEntry{0, Topology::origin(), 0.0, 0.0});
  VertexId v = Topology::origin();
  double clock = 0;
  for (std::uint64_t i = 0; i <= steps; ++i) {
    const double tau = landscape.tau(v);
    const TrapClass cls = classify(tau, window, scales.g);
    if (i > 0 && cls == TrapClass::deep && v != rec.entries.back().U) {
      rec.entries.push_back(DeepEntry{i, v, 0.0, clock});
    }
    const double hold = holding_exponential(key, i) * tau;
    if (v == rec.entries.back().U) rec.entries.back().s += hold;
    if (cls == TrapClass::shallow) rec.shallow_time += hold;
    if (cls == TrapClass::very_deep) rec.hit_very_deep = true;
    if (probe && !rec.probe_state && clock + hold > *probe) rec.probe_state = v;
    clock += hold;
    if (!std::isfinite(clock)) throw std::overflow_error("clock overflow");
    if (i < steps) v = topology.neighbor(v, jump_bits(key, i));
  }
  rec.total_clock = clock;
  rec.zeta = rec.entries.size() - 1;
  return rec;
}

HitResult hitting_time(const Topology& topology, const VertexSet& A, VertexId start,
                       std::uint64_t cap, std::uint64_t key) {
  cap = effective_cap(cap);
  VertexId v = start;
  for (std::uint64_t i = 0;; ++i) {
    if (A.contains(v)) return {i, false};
    if (i == cap) return {cap, true};
    v = topology.neighbor(v, jump_bits(key, i));
  }
}

GreenEstimate empirical_green(const Topology& topology, const VertexSet& A, VertexId x,
                              std::uint64_t reps, std::uint64_t seed, std::uint64_t cap,
                              unsigned workers) {
  if (reps < 1) throw std::invalid_argument("empirical_green needs reps >= 1");
  cap = effective_cap(cap);
  std::vector<char> escaped(reps), timed_out(reps);
  std::vector<double> visits(reps);
  const std::uint64_t blocks = (reps + kBlock - 1) / kBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    const std::uint64_t end = std::min<std::uint64_t>(reps, (b + 1) * kBlock);
    for (std::uint64_t k = b * kBlock; k < end; ++k) {
      const std::uint64_t key = derive_key(seed, k);
      VertexId v = x;
      std::uint64_t count = 1;
      bool returned = false;
      bool hit = false;
      for (std::uint64_t i = 0; i < cap; ++i) {
        v = topology.neighbor(v, jump_bits(key, i));
        if (v == x) {
          ++count;
          returned = true;
        } else if (A.contains(v)) {
          hit = true;
          break;
        }
      }
      timed_out[k] = !hit;
      escaped[k] = hit && !returned;
      visits[k] = static_cast<double>(count);
    }
  });
  GreenEstimate g;
  g.reps = reps;
  double esc = 0, sum = 0, sum2 = 0;
  for (std::uint64_t k = 0; k < reps; ++k) {
    esc += escaped[k];
    g.timeouts += timed_out[k];
    sum += visits[k];
    sum2 += visits[k] * visits[k];
  }
  const double n = static_cast<double>(reps);
  g.escape = esc / n;
  g.escape_stderr = std::sqrt(g.escape * (1 - g.escape) / n);
  g.visits = sum / n;
  g.visits_stderr = reps > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / n) / (n - 1)) / n) : 0.0;
  g.degenerate = esc == 0;
  g.green = g.degenerate ? std::numeric_limits<double>::infinity() : 1.0 / g.escape;
  return g;
}

ConditionReport condition_diagnostics(const Topology& topology, const Landscape& law,
                                      const TrapWindow& window, const ScaleSet& scales,
                                      double theta, double lambda, const EnsemblePlan& plan,
                                      std::uint64_t green_walks) {
  check_plan(plan);
  validate(window);
  const std::size_t total = plan.environments * plan.trajectories;
  const double probe = scales.t;
  const double deltas[2] = {0.1, 0.05};
  struct Row {
    double shallow = 0;
    bool very_deep = false;
    bool covered = false;
    bool repeated = false;
    bool event[2] = {false, false};
    bool at_u[2] = {false, false};
  };
  std::vector<Row> rows(total);
  for_each_block(plan, [&](std::uint64_t e, std::uint64_t begin, std::uint64_t end) {
    const Landscape env = law.with_seed(environment_seed(plan.seed, e));
    for (std::uint64_t j = begin; j < end; ++j) {
      const auto rec = record_deep(topology, env, window, scales, trajectory_key(plan.seed, e, j), probe);
      Row& row = rows[e * plan.trajectories + j];
      row.shallow = rec.shallow_time / scales.t;
      row.very_deep = rec.hit_very_deep;
      double sum = 0;
      for (std::uint64_t i = 1; i < rec.zeta; ++i) sum += rec.entries[i].s;
      row.covered = sum >= (1 + theta) * scales.t;
      std::unordered_set<VertexId> seen;
      for (std::uint64_t i = 1; i <= rec.zeta; ++i) {
        if (!seen.insert(rec.entries[i].U).second) row.repeated = true;
      }
      for (int d = 0; d < 2; ++d) {
        // j_n: S(r_j) <= t' <= S(r_{j+1}) - delta t, required 0 < j_n < zeta.
        for (std::uint64_t i = 1; i < rec.zeta; ++i) {
          if (rec.entries[i].clock <= probe && probe <= rec.entries[i + 1].clock - deltas[d] * scales.t) {
            row.event[d] = true;
            row.at_u[d] = rec.probe_state && *rec.probe_state == rec.entries[i].U;
            break;
          }
        }
      }
    }
  });

  ConditionReport rep;
  rep.reps = total;
  const double n = static_cast<double>(total);
  double sh = 0, sh2 = 0, vd = 0, cov = 0, repn = 0;
  std::uint64_t ev[2] = {0, 0}, ok[2] = {0, 0};
  for (const Row& r : rows) {
    sh += r.shallow;
    sh2 += r.shallow * r.shallow;
    vd += r.very_deep;
    cov += r.covered;
    repn += r.repeated;
    for (int d = 0; d < 2; ++d) {
      ev[d] += r.event[d];
      ok[d] += r.event[d] && r.at_u[d];
    }
  }
  rep.shallow_fraction = sh / n;
  rep.shallow_fraction_stderr =
      total > 1 ? std::sqrt(std::max(0.0, (sh2 - sh * sh / n) / (n - 1)) / n) : 0.0;
  rep.very_deep_hit = vd / n;
  rep.very_deep_hit_stderr = std::sqrt(rep.very_deep_hit * (1 - rep.very_deep_hit) / n);
  rep.coverage = cov / n;
  rep.repetition = repn / n;
  for (int d = 0; d < 2; ++d) {
    rep.post_events[d] = ev[d];
    rep.post_probe[d] = ev[d] ? static_cast<double>(ok[d]) / static_cast<double>(ev[d]) : 0.0;
  }

  // Truncated Green function G_{xi}(0, x): mean visits within floor(xi) jumps.
  if (green_walks > 0 && lambda > 0) {
    const auto steps = static_cast<std::uint64_t>(std::floor(scales.xi));
    std::unordered_map<VertexId, std::uint64_t> visits;
    for (std::uint64_t w = 0; w < green_walks; ++w) {
      const std::uint64_t key = derive_key(plan.seed ^ 0x677265656Eull, w);
      VertexId v = Topology::origin();
      ++visits[v];
      for (std::uint64_t i = 0; i < steps; ++i) {
        v = topology.neighbor(v, jump_bits(key, i));
        ++visits[v];
      }
    }
    // Sum in label order so the result does not depend on hash-table layout.
    std::vector<std::pair<VertexId, std::uint64_t>> sorted(visits.begin(), visits.end());
    std::sort(sorted.begin(), sorted.end());
    double acc = 0;
    for (const auto& [v, c] : sorted) {
      acc += std::expm1(lambda * static_cast<double>(c) / static_cast<double>(green_walks));
    }
    rep.condition_d_lambda = lambda;
    rep.condition_d_ratio = acc / (lambda * scales.m * scales.r);
  }
  return rep;
}

}  // namespace trap
