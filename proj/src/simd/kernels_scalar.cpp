#include <cmath>
#include <limits>
#include <stdexcept>

#include "trap/simd/kernels.hpp"

namespace trap::simd::detail {

void two_time_scalar(const WalkModel& model, std::span<const std::uint64_t> keys,
                     std::span<const std::uint64_t> env_keys, double first, double second,
                     std::uint64_t step_cap, std::span<TwoTimeResult> out) {
  const std::uint64_t cap = step_cap == 0 ? std::numeric_limits<std::uint64_t>::max() : step_cap;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const std::uint64_t key = keys[k];
    const std::uint64_t env = env_keys.empty() ? model.env_key : env_keys[k];
    TwoTimeResult res;
    VertexId v = Topology::origin();
    double clock = 0.0;
    bool have_first = false;
    std::uint64_t i = 0;
    for (;; ++i) {
      if (i == cap) {
        res.timed_out = true;
        break;
      }
      const double e = -ref::log(unit_open(draw(key, 2 * i)));
      const double next = clock + e * model_tau(model, env, v);
      if (!have_first && next > first) {
        res.at_first = v;
        have_first = true;
      }
      if (next > second) {
        res.at_second = v;
        clock = next;
        ++i;
        break;
      }
      clock = next;
      v = model_neighbor(model, v, draw(key, 2 * i + 1));
    }
    if (!std::isfinite(clock)) throw std::overflow_error("clock overflow");
    res.steps = i;
    res.clock = clock;
    out[k] = res;
  }
}

void tau_scalar(const WalkModel& model, std::span<const VertexId> vertices, std::span<double> out) {
  for (std::size_t k = 0; k < vertices.size(); ++k) out[k] = model_tau(model, vertices[k]);
}

}  // namespace trap::simd::detail
