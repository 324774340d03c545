#pragma once

// Batched walk kernels. Each kernel has a scalar reference implementation
// and, where the CPU supports it, a vector implementation that produces
// bit-identical output. The backend is picked at runtime (see dispatch.hpp).

#include <cstdint>
#include <span>
#include <string_view>

#include "trap/graph.hpp"
#include "trap/landscape.hpp"
#include "trap/rng.hpp"

namespace trap::simd {

enum class Backend { scalar, avx2 };

/// Flat description of (topology, landscape) consumed by the kernels.
struct WalkModel {
  Family family = Family::complete;
  std::uint64_t size = 2;
  DepthLaw law = DepthLaw::pareto;
  bool alpha_half = false;
  double neg_inv_alpha = -2.0;
  double rem_sigma = 0.0;
  double tau_scale = 1.0;
  std::uint64_t env_key = 0;
};

WalkModel make_walk_model(const Topology& topology, const Landscape& landscape);

/// Scalar depth of v in the field with hash key env_key.
inline double model_tau(const WalkModel& m, std::uint64_t env_key, VertexId v) {
  const double u = unit_open(draw(env_key, v));
  double depth;
  if (m.law == DepthLaw::pareto) {
    depth = m.alpha_half ? 1.0 / (u * u) : ref::exp(ref::log(u) * m.neg_inv_alpha);
  } else {
    depth = ref::exp(m.rem_sigma * ref::normal_quantile(u));
  }
  return m.tau_scale * depth;
}

/// Scalar depth of v; matches Landscape::tau bit for bit.
inline double model_tau(const WalkModel& m, VertexId v) { return model_tau(m, m.env_key, v); }

inline VertexId model_neighbor(const WalkModel& m, VertexId v, std::uint64_t bits) {
  switch (m.family) {
    case Family::complete: {
      const std::uint64_t u = scale_to(bits, m.size - 1);
      return u < v ? u : u + 1;
    }
    case Family::hypercube:
      return v ^ (std::uint64_t{1} << scale_to(bits, m.size));
    case Family::torus2d: {
      const std::uint64_t mask = (std::uint64_t{1} << m.size) - 1;
      std::uint64_t x = v & mask;
      std::uint64_t y = v >> m.size;
      switch (bits >> 62) {
        case 0: x = (x + 1) & mask; break;
        case 1: x = (x - 1) & mask; break;
        case 2: y = (y + 1) & mask; break;
        default: y = (y - 1) & mask; break;
      }
      return x | (y << m.size);
    }
  }
  return v;
}

/// Outcome of one trajectory started at the origin and run until its clock
/// first exceeds `second`.
struct TwoTimeResult {
  VertexId at_first = 0;   // X(first)
  VertexId at_second = 0;  // X(second)
  std::uint64_t steps = 0; // jumps performed
  double clock = 0;        // S(steps)
  bool timed_out = false;  // step cap reached first
};

/// One trajectory per key. env_keys is either empty (every walk uses
/// model.env_key) or holds the depth-field key of each walk, so one batch can
/// span many environments. Requires 0 <= first <= second; step_cap 0 means no cap.
void two_time_batch(Backend backend, const WalkModel& model, std::span<const std::uint64_t> keys,
                    std::span<const std::uint64_t> env_keys, double first, double second,
                    std::uint64_t step_cap, std::span<TwoTimeResult> out);

/// Depths of many vertices.
void tau_batch(Backend backend, const WalkModel& model, std::span<const VertexId> vertices,
               std::span<double> out);

namespace detail {
void two_time_scalar(const WalkModel& model, std::span<const std::uint64_t> keys,
                     std::span<const std::uint64_t> env_keys, double first, double second,
                     std::uint64_t step_cap, std::span<TwoTimeResult> out);
void tau_scalar(const WalkModel& model, std::span<const VertexId> vertices, std::span<double> out);
#if TRAP_HAVE_AVX2
void two_time_avx2(const WalkModel& model, std::span<const std::uint64_t> keys,
                   std::span<const std::uint64_t> env_keys, double first, double second,
                   std::uint64_t step_cap, std::span<TwoTimeResult> out);
void tau_avx2(const WalkModel& model, std::span<const VertexId> vertices, std::span<double> out);
#endif
}  // namespace detail

}  // namespace trap::simd
