#include "trap/simd/dispatch.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace trap::simd {

bool available(Backend backend) {
  switch (backend) {
    case Backend::scalar: return true;
    case Backend::avx2:
#if TRAP_HAVE_AVX2
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const char* name(Backend backend) {
  switch (backend) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "?";
}

Backend parse_backend(std::string_view text) {
  if (text == "scalar") return Backend::scalar;
  if (text == "avx2") return Backend::avx2;
  throw std::invalid_argument("unknown SIMD backend '" + std::string(text) + "'");
}

Backend active_backend() {
  static const Backend chosen = [] {
    if (const char* forced = std::getenv("TRAP_SIMD"); forced && *forced) {
      const Backend b = parse_backend(forced);
      if (!available(b)) throw std::runtime_error(std::string("TRAP_SIMD=") + forced + " is not available");
      return b;
    }
    return available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
  }();
  return chosen;
}

WalkModel make_walk_model(const Topology& topology, const Landscape& landscape) {
  WalkModel m;
  m.family = topology.family();
  m.size = topology.size();
  m.law = landscape.law();
  m.alpha_half = landscape.law() == DepthLaw::pareto && landscape.alpha_is_half();
  m.neg_inv_alpha = landscape.neg_inv_alpha();
  m.rem_sigma = landscape.rem_sigma();
  m.tau_scale = landscape.scale();
  m.env_key = landscape.key();
  return m;
}

void two_time_batch(Backend backend, const WalkModel& model, std::span<const std::uint64_t> keys,
                    std::span<const std::uint64_t> env_keys, double first, double second,
                    std::uint64_t step_cap, std::span<TwoTimeResult> out) {
  if (out.size() < keys.size()) throw std::invalid_argument("two_time_batch: output too small");
  if (!env_keys.empty() && env_keys.size() != keys.size()) {
    throw std::invalid_argument("two_time_batch: need one environment key per walk");
  }
  if (!(first >= 0 && second >= first)) throw std::invalid_argument("two_time_batch: need 0 <= first <= second");
#if TRAP_HAVE_AVX2
  if (backend == Backend::avx2) {
    if (!available(backend)) throw std::runtime_error("avx2 backend not available on this CPU");
    detail::two_time_avx2(model, keys, env_keys, first, second, step_cap, out);
    return;
  }
#endif
  if (backend != Backend::scalar) throw std::runtime_error("backend not compiled in");
  detail::two_time_scalar(model, keys, env_keys, first, second, step_cap, out);
}

void tau_batch(Backend backend, const WalkModel& model, std::span<const VertexId> vertices,
               std::span<double> out) {
  if (out.size() < vertices.size()) throw std::invalid_argument("tau_batch: output too small");
#if TRAP_HAVE_AVX2
  if (backend == Backend::avx2) {
    if (!available(backend)) throw std::runtime_error("avx2 backend not available on this CPU");
    detail::tau_avx2(model, vertices, out);
    return;
  }
#endif
  if (backend != Backend::scalar) throw std::runtime_error("backend not compiled in");
  detail::tau_scalar(model, vertices, out);
}

}  // namespace trap::simd
