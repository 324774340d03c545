#pragma once

// Trap-model trajectories.
//
// A trajectory is a pure function of (topology, landscape, key). At step i the
// walk sits at Y(i), holds for e_i * tau(Y(i)) with e_i = -log U built from
// draw(key, 2i), and then jumps to the neighbor selected by draw(key, 2i+1).
// The clock is S(0) = 0, S(i+1) = S(i) + e_i tau(Y(i)), and the
// continuous-time process is X(t) = Y(j) for S(j) <= t < S(j+1).

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_set>
#include <vector>

#include "trap/graph.hpp"
#include "trap/landscape.hpp"
#include "trap/rng.hpp"

namespace trap {

inline double holding_exponential(std::uint64_t key, std::uint64_t i) {
  return -simd::ref::log(unit_open(draw(key, 2 * i)));
}
inline std::uint64_t jump_bits(std::uint64_t key, std::uint64_t i) { return draw(key, 2 * i + 1); }

struct TrajectoryState {
  VertexId vertex = Topology::origin();
  std::uint64_t steps = 0;  // i: jumps performed so far
  double clock = 0;         // S(i)
  std::uint64_t key = 0;    // stream key; the stream position is 2 * steps
};

inline TrajectoryState start_state(std::uint64_t key, VertexId at = Topology::origin()) {
  return TrajectoryState{at, 0, 0.0, key};
}

/// One holding period followed by one jump. Throws std::overflow_error if the
/// clock stops being finite.
TrajectoryState step(TrajectoryState state, const Topology& topology, const Landscape& landscape);

/// X(t) for the trajectory with the given key, started at the origin.
VertexId state_at(const Topology& topology, const Landscape& landscape, double t, std::uint64_t key);

/// Membership predicate for a set of vertices.
class VertexSet {
 public:
  static VertexSet none() { return VertexSet(Kind::none); }
  static VertexSet everything() { return VertexSet(Kind::all); }
  static VertexSet deep(DeepSet set);
  static VertexSet cloud(PoissonCloud cloud);
  static VertexSet listed(std::vector<VertexId> members);

  /// The same set with one vertex removed, e.g. A \ {x}.
  VertexSet without(VertexId x) const {
    VertexSet s = *this;
    s.excluded_ = x;
    return s;
  }

  bool contains(VertexId v) const {
    if (excluded_ && *excluded_ == v) return false;
    switch (kind_) {
      case Kind::none: return false;
      case Kind::all: return true;
      case Kind::deep: return deep_.contains(v);
      case Kind::cloud: return cloud_.contains(v);
      case Kind::listed: return listed_.count(v) != 0;
    }
    return false;
  }
  bool is_empty_set() const { return kind_ == Kind::none; }

 private:
  enum class Kind { none, all, deep, cloud, listed };
  explicit VertexSet(Kind k) : kind_(k) {}
  Kind kind_;
  DeepSet deep_{Landscape::pareto(0.5, 0), {}, 1.0};
  PoissonCloud cloud_{};
  std::unordered_set<VertexId> listed_;
  std::optional<VertexId> excluded_;
};

/// How replicas are laid out: `environments` depth fields, each explored by
/// `trajectories` walks. Seeds of both are derived from `seed`.
struct EnsemblePlan {
  std::uint64_t environments = 20;
  std::uint64_t trajectories = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::uint64_t step_cap = 0;  // 0: no cap
};

/// Seed of environment e and key of trajectory j in it.
std::uint64_t environment_seed(std::uint64_t master, std::uint64_t e);
std::uint64_t trajectory_key(std::uint64_t master, std::uint64_t e, std::uint64_t j);

struct TwoTimeEstimate {
  double t_w = 0;
  double theta = 0;
  std::uint64_t reps = 0;
  std::uint64_t hits = 0;
  std::uint64_t timeouts = 0;
  double estimate = 0;
  double stderr_ = 0;  // sqrt(p (1-p) / reps)
};

TwoTimeEstimate make_estimate(double t_w, double theta, std::uint64_t hits, std::uint64_t reps,
                              std::uint64_t timeouts = 0);

/// Pooled estimate plus one estimate per environment.
struct EnsembleEstimate {
  TwoTimeEstimate pooled;
  std::vector<TwoTimeEstimate> per_environment;
};

/// R(t_w, t_w (1+theta)) = P[X(t_w (1+theta)) = X(t_w)]. Each trajectory
/// runs once until its clock passes t_w (1+theta). Timed-out trajectories
/// count as misses and are reported.
EnsembleEstimate estimate_R(const Topology& topology, const Landscape& law, double t_w,
                            double theta, const EnsemblePlan& plan);

/// Per-trajectory outcomes in replica order (environment-major), for
/// reproducibility checks and CSV output.
struct TwoTimeRecord {
  std::uint64_t environment = 0;
  std::uint64_t trajectory = 0;
  bool same = false;
  bool timed_out = false;
  std::uint64_t steps = 0;
};
std::vector<TwoTimeRecord> two_time_records(const Topology& topology, const Landscape& law,
                                            double t_w, double theta, const EnsemblePlan& plan);

/// Builds the set A for one environment.
using SetFactory = std::function<VertexSet(const Landscape&)>;

struct FreshSiteEstimate {
  EnsembleEstimate fresh;  // R_A: no A-vertex other than the last one visited
                           // at or before t_w is entered in (t_w, t_w (1+theta)]
  EnsembleEstimate same;   // R for the same trajectories
};

FreshSiteEstimate estimate_R_A(const Topology& topology, const Landscape& law,
                               const SetFactory& make_set, double t_w, double theta,
                               const EnsemblePlan& plan);

struct DeepEntry {
  std::uint64_t r = 0;   // step index of the entry
  VertexId U = 0;        // vertex entered
  double s = 0;          // time spent at U between r_j and r_{j+1}
  double clock = 0;      // S(r_j)
};

/// Deep-trap record of one walk of floor(xi) jumps. Entry 0 is the start
/// (r_0 = 0, U_0 = origin); entries j >= 1 are successive entries into the
/// deep set, each different from the previous one. zeta is the index of the
/// last entry; its s is cut at the end of the walk.
struct DeepTrapRecord {
  std::vector<DeepEntry> entries;
  std::uint64_t zeta = 0;
  std::uint64_t steps = 0;     // jumps performed
  double total_clock = 0;      // S(steps + 1): includes the final holding time
  double shallow_time = 0;     // time spent at shallow vertices
  bool hit_very_deep = false;  // some visited vertex is very deep
  std::optional<VertexId> probe_state;  // X(probe) if probe < total_clock
};

DeepTrapRecord record_deep(const Topology& topology, const Landscape& landscape,
                           const TrapWindow& window, const ScaleSet& scales, std::uint64_t key,
                           std::optional<double> probe = std::nullopt);

struct HitResult {
  std::uint64_t steps = 0;
  bool timed_out = false;
};

/// H(A) = inf{i >= 0 : Y(i) in A}, or a timeout after `cap` jumps (0: no cap).
HitResult hitting_time(const Topology& topology, const VertexSet& A, VertexId start,
                       std::uint64_t cap, std::uint64_t key);

struct GreenEstimate {
  double green = 0;            // 1 / escape probability (inf if no escapes)
  double escape = 0;           // P_x[H(A \ {x}) < H'(x)]
  double escape_stderr = 0;
  double visits = 0;           // mean visits to x before H(A \ {x}), direct estimator
  double visits_stderr = 0;
  std::uint64_t reps = 0;
  std::uint64_t timeouts = 0;
  bool degenerate = false;     // no escape observed
};

/// Green function G_{A \ {x}}(x, x) by Monte Carlo. Every replica walks from x
/// until it enters A \ {x}; the first-return indicator gives the escape
/// estimator and the visit count the direct one.
GreenEstimate empirical_green(const Topology& topology, const VertexSet& A, VertexId x,
                              std::uint64_t reps, std::uint64_t seed, std::uint64_t cap,
                              unsigned workers = 0);

struct ConditionReport {
  double shallow_fraction = 0;        // E[time at shallow sites during xi steps] / t
  double shallow_fraction_stderr = 0;
  double very_deep_hit = 0;           // P[a very deep site is visited within xi steps]
  double very_deep_hit_stderr = 0;
  double coverage = 0;                // P[sum_{1 <= i < zeta} s_i >= (1+theta) t]
  double repetition = 0;              // P[U_i = U_j for some 0 < i < j <= zeta]
  double condition_d_ratio = 0;       // sum_x (e^{lambda G(x)} - 1) / (lambda m r)
  double condition_d_lambda = 0;
  double post_probe[2] = {0, 0};      // P[X(t') = U(j_n) | A_n(delta)], delta = 0.1, 0.05
  std::uint64_t post_events[2] = {0, 0};
  std::uint64_t reps = 0;
};

/// Empirical proxies for the conditions used in the aging argument.
/// Replicas are split over `environments` depth fields drawn from `law`.
ConditionReport condition_diagnostics(const Topology& topology, const Landscape& law,
                                      const TrapWindow& window, const ScaleSet& scales,
                                      double theta, double lambda, const EnsemblePlan& plan,
                                      std::uint64_t green_walks = 32);

}  // namespace trap
