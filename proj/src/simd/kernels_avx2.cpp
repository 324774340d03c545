// AVX2 kernels: four trajectories (or four depths) per register. Every
// floating-point operation mirrors the scalar reference in simd/math.hpp one
// for one, and the build disables FMA contraction, so results match the
// scalar kernels bit for bit.

#include <immintrin.h>

#include <cmath>
#include <stdexcept>

#include "trap/simd/kernels.hpp"

namespace trap::simd::detail {

namespace {

struct U64Const {
  __m256i lo;  // full value; mul_epu32 reads the low halves
  __m256i hi;  // value >> 32
};

inline U64Const make_const(std::uint64_t c) {
  return {_mm256_set1_epi64x(static_cast<long long>(c)),
          _mm256_set1_epi64x(static_cast<long long>(c >> 32))};
}

inline __m256i set1(std::uint64_t x) { return _mm256_set1_epi64x(static_cast<long long>(x)); }

/// Low 64 bits of a * c for every lane.
inline __m256i mullo(__m256i a, const U64Const& c) {
  const __m256i lo_lo = _mm256_mul_epu32(a, c.lo);
  const __m256i hi_lo = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), c.lo);
  const __m256i lo_hi = _mm256_mul_epu32(a, c.hi);
  return _mm256_add_epi64(lo_lo, _mm256_slli_epi64(_mm256_add_epi64(hi_lo, lo_hi), 32));
}

struct Mixer {
  U64Const m1 = make_const(0xBF58476D1CE4E5B9ull);
  U64Const m2 = make_const(0x94D049BB133111EBull);
  U64Const golden = make_const(kGolden);

  __m256i fmix(__m256i z) const {
    z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 30));
    z = mullo(z, m1);
    z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 27));
    z = mullo(z, m2);
    return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
  }
};

inline __m256d unit_open(__m256i bits) {
  const __m256i spliced = _mm256_or_si256(_mm256_srli_epi64(bits, 12), set1(0x3FF0000000000000ull));
  return _mm256_sub_pd(_mm256_castsi256_pd(spliced), _mm256_set1_pd(1.0 - 0x1p-53));
}

inline __m256d mul(__m256d a, __m256d b) { return _mm256_mul_pd(a, b); }
inline __m256d add(__m256d a, __m256d b) { return _mm256_add_pd(a, b); }
inline __m256d sub(__m256d a, __m256d b) { return _mm256_sub_pd(a, b); }
inline __m256d cst(double x) { return _mm256_set1_pd(x); }
inline __m256d neg(__m256d a) { return _mm256_xor_pd(a, _mm256_set1_pd(-0.0)); }

__m256d log_pd(__m256d x) {
  using namespace coef;
  __m256i bits = _mm256_castpd_si256(x);
  bits = _mm256_add_epi64(bits, set1(std::uint64_t{0x3ff00000 - 0x3fe6a09e} << 32));
  const __m256i biased = _mm256_srli_epi64(bits, 52);
  bits = _mm256_add_epi64(_mm256_and_si256(bits, set1(0x000fffffffffffffull)),
                          set1(std::uint64_t{0x3fe6a09e} << 32));
  // biased < 2^11, so splicing it into 2^52 converts it to double exactly.
  const __m256d kbig = _mm256_castsi256_pd(_mm256_or_si256(biased, set1(0x4330000000000000ull)));
  const __m256d k = sub(sub(kbig, cst(0x1p52)), cst(1023.0));
  const __m256d f = sub(_mm256_castsi256_pd(bits), cst(1.0));
  const __m256d hfsq = mul(mul(cst(0.5), f), f);
  const __m256d s = _mm256_div_pd(f, add(cst(2.0), f));
  const __m256d z = mul(s, s);
  const __m256d w = mul(z, z);
  const __m256d t1 = mul(w, add(cst(kLg2), mul(w, add(cst(kLg4), mul(w, cst(kLg6))))));
  const __m256d t2 =
      mul(z, add(cst(kLg1), mul(w, add(cst(kLg3), mul(w, add(cst(kLg5), mul(w, cst(kLg7))))))));
  const __m256d r = add(t2, t1);
  return sub(mul(k, cst(kLn2Hi)),
             sub(sub(hfsq, add(mul(s, add(hfsq, r)), mul(k, cst(kLn2Lo)))), f));
}

__m256d exp_pd(__m256d x) {
  using namespace coef;
  x = _mm256_min_pd(x, cst(kExpMax));
  x = _mm256_max_pd(x, cst(kExpMin));
  const __m256d k = _mm256_round_pd(mul(cst(kInvLn2), x), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d hi = sub(x, mul(k, cst(kLn2Hi)));
  const __m256d lo = mul(k, cst(kLn2Lo));
  const __m256d r = sub(hi, lo);
  const __m256d rr = mul(r, r);
  const __m256d poly =
      add(cst(kP1), mul(rr, add(cst(kP2), mul(rr, add(cst(kP3), mul(rr, add(cst(kP4), mul(rr, cst(kP5)))))))));
  const __m256d c = sub(r, mul(rr, poly));
  const __m256d y = add(cst(1.0), add(sub(_mm256_div_pd(mul(r, c), sub(cst(2.0), c)), lo), hi));
  // k + 1023 lies in [3, 2046]; splice it into 2^52 and shift it into the exponent field.
  const __m256i kb = _mm256_castpd_si256(add(k, cst(0x1p52 + 1023.0)));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(kb, 52));
  return mul(y, scale);
}

inline __m256d horner7(const double (&c)[8], __m256d x) {
  __m256d acc = cst(c[7]);
  for (int i = 6; i >= 0; --i) acc = add(mul(acc, x), cst(c[i]));
  return acc;
}

__m256d normal_quantile_pd(__m256d p) {
  using namespace coef;
  const __m256d q = sub(p, cst(0.5));
  const __m256d absq = _mm256_andnot_pd(cst(-0.0), q);
  const __m256d central = _mm256_cmp_pd(absq, cst(0.425), _CMP_LE_OQ);
  const __m256d rc = sub(cst(0.180625), mul(q, q));
  const __m256d vc = _mm256_div_pd(mul(q, horner7(kA, rc)), horner7(kB, rc));

  const __m256d negative = _mm256_cmp_pd(q, cst(0.0), _CMP_LT_OQ);
  const __m256d tail_p = _mm256_blendv_pd(sub(cst(1.0), p), p, negative);
  const __m256d r = _mm256_sqrt_pd(neg(log_pd(tail_p)));
  const __m256d near = _mm256_cmp_pd(r, cst(5.0), _CMP_LE_OQ);
  const __m256d rn = sub(r, cst(1.6));
  const __m256d rf = sub(r, cst(5.0));
  const __m256d vn = _mm256_div_pd(horner7(kC, rn), horner7(kD, rn));
  const __m256d vf = _mm256_div_pd(horner7(kE, rf), horner7(kF, rf));
  __m256d vt = _mm256_blendv_pd(vf, vn, near);
  vt = _mm256_blendv_pd(vt, neg(vt), negative);
  return _mm256_blendv_pd(vt, vc, central);
}

struct DepthEval {
  explicit DepthEval(const WalkModel& model) : m(model), env_key(set1(model.env_key)) {}

  const WalkModel& m;
  Mixer mix;
  __m256i env_key;

  __m256d operator()(__m256i v) const { return (*this)(v, env_key); }

  __m256d operator()(__m256i v, __m256i env) const {
    const __m256i ctr = mullo(_mm256_add_epi64(v, set1(1)), mix.golden);
    const __m256d u = unit_open(mix.fmix(_mm256_add_epi64(env, ctr)));
    __m256d depth;
    if (m.law == DepthLaw::pareto) {
      depth = m.alpha_half ? _mm256_div_pd(cst(1.0), mul(u, u))
                           : exp_pd(mul(log_pd(u), cst(m.neg_inv_alpha)));
    } else {
      depth = exp_pd(mul(cst(m.rem_sigma), normal_quantile_pd(u)));
    }
    return mul(cst(m.tau_scale), depth);
  }
};

/// floor(bits * n / 2^64) for n < 2^32.
inline __m256i scale_to32(__m256i bits, __m256i n) {
  const __m256i lo = _mm256_mul_epu32(bits, n);
  const __m256i hi = _mm256_mul_epu32(_mm256_srli_epi64(bits, 32), n);
  return _mm256_srli_epi64(_mm256_add_epi64(hi, _mm256_srli_epi64(lo, 32)), 32);
}

struct NeighborEval {
  explicit NeighborEval(const WalkModel& model)
      : m(model),
        n(set1(model.family == Family::complete ? model.size - 1 : model.size)),
        mask(set1((std::uint64_t{1} << (model.family == Family::torus2d ? model.size : 0)) - 1)),
        shift(_mm_cvtsi64_si128(static_cast<long long>(model.size))) {}

  const WalkModel& m;
  __m256i one = set1(1);
  __m256i n;
  __m256i mask;
  __m128i shift;

  __m256i operator()(__m256i v, __m256i bits) const {
    switch (m.family) {
      case Family::complete: {
        const __m256i u = scale_to32(bits, n);
        // Labels are below 2^32, so the signed compare is exact.
        const __m256i below = _mm256_cmpgt_epi64(v, u);
        return _mm256_add_epi64(u, _mm256_add_epi64(one, below));
      }
      case Family::hypercube:
        return _mm256_xor_si256(v, _mm256_sllv_epi64(one, scale_to32(bits, n)));
      case Family::torus2d: {
        const __m256i dir = _mm256_srli_epi64(bits, 62);
        const __m256i x = _mm256_and_si256(v, mask);
        const __m256i y = _mm256_srl_epi64(v, shift);
        const __m256i d0 = _mm256_cmpeq_epi64(dir, _mm256_setzero_si256());
        const __m256i d1 = _mm256_cmpeq_epi64(dir, one);
        const __m256i d2 = _mm256_cmpeq_epi64(dir, set1(2));
        const __m256i d3 = _mm256_cmpeq_epi64(dir, set1(3));
        const __m256i xp = _mm256_and_si256(_mm256_add_epi64(x, one), mask);
        const __m256i xm = _mm256_and_si256(_mm256_sub_epi64(x, one), mask);
        const __m256i yp = _mm256_and_si256(_mm256_add_epi64(y, one), mask);
        const __m256i ym = _mm256_and_si256(_mm256_sub_epi64(y, one), mask);
        __m256i nx = _mm256_blendv_epi8(x, xp, d0);
        nx = _mm256_blendv_epi8(nx, xm, d1);
        __m256i ny = _mm256_blendv_epi8(y, yp, d2);
        ny = _mm256_blendv_epi8(ny, ym, d3);
        return _mm256_or_si256(nx, _mm256_sll_epi64(ny, shift));
      }
    }
    return v;
  }
};

}  // namespace

void tau_avx2(const WalkModel& model, std::span<const VertexId> vertices, std::span<double> out) {
  const DepthEval depth(model);
  std::size_t k = 0;
  for (; k + 4 <= vertices.size(); k += 4) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(vertices.data() + k));
    _mm256_storeu_pd(out.data() + k, depth(v));
  }
  for (; k < vertices.size(); ++k) out[k] = model_tau(model, vertices[k]);
}

void two_time_avx2(const WalkModel& model, std::span<const std::uint64_t> keys,
                   std::span<const std::uint64_t> env_keys, double first, double second,
                   std::uint64_t step_cap, std::span<TwoTimeResult> out) {
  const bool narrow = model.family != Family::complete || model.size - 1 < (std::uint64_t{1} << 32);
  if (!narrow || keys.size() < 4) {
    two_time_scalar(model, keys, env_keys, first, second, step_cap, out);
    return;
  }
  const DepthEval depth(model);
  const NeighborEval neighbor(model);
  const Mixer& mix = depth.mix;
  const __m256i two_golden = set1(2 * kGolden);
  const __m256d first_v = cst(first);
  const __m256d second_v = cst(second);
  const __m256i cap_v = set1(step_cap == 0 ? ~std::uint64_t{0} : step_cap);

  constexpr int kLanes = 4;
  alignas(32) std::uint64_t lane_v[kLanes] = {};
  alignas(32) double lane_clock[kLanes] = {};
  alignas(32) std::uint64_t lane_ce[kLanes] = {};
  alignas(32) std::uint64_t lane_cn[kLanes] = {};
  alignas(32) std::uint64_t lane_have[kLanes] = {};
  alignas(32) std::uint64_t lane_first[kLanes] = {};
  alignas(32) std::uint64_t lane_steps[kLanes] = {};
  alignas(32) std::uint64_t lane_env[kLanes] = {};
  std::int64_t lane_task[kLanes];

  std::size_t next_task = 0;
  int active = 0;
  auto load = [&](int lane) {
    if (next_task < keys.size()) {
      const std::uint64_t key = keys[next_task];
      lane_task[lane] = static_cast<std::int64_t>(next_task++);
      lane_v[lane] = Topology::origin();
      lane_clock[lane] = 0.0;
      lane_ce[lane] = key + kGolden;       // counter 2i
      lane_cn[lane] = key + 2 * kGolden;   // counter 2i + 1
      lane_have[lane] = 0;
      lane_first[lane] = 0;
      lane_steps[lane] = 0;
      lane_env[lane] = env_keys.empty() ? model.env_key : env_keys[next_task - 1];
      ++active;
    } else {
      // Idle lane: a clock of -inf never crosses a query time.
      lane_task[lane] = -1;
      lane_v[lane] = Topology::origin();
      lane_clock[lane] = -INFINITY;
      lane_steps[lane] = 0;
    }
  };
  for (int l = 0; l < kLanes; ++l) load(l);

  auto ld = [](const std::uint64_t* p) { return _mm256_load_si256(reinterpret_cast<const __m256i*>(p)); };
  auto st = [](std::uint64_t* p, __m256i x) { _mm256_store_si256(reinterpret_cast<__m256i*>(p), x); };

  __m256i v = ld(lane_v);
  __m256d clock = _mm256_load_pd(lane_clock);
  __m256i ce = ld(lane_ce);
  __m256i cn = ld(lane_cn);
  __m256i have = ld(lane_have);
  __m256i at_first = ld(lane_first);
  __m256i steps = ld(lane_steps);
  __m256i env = ld(lane_env);

  while (active > 0) {
    const __m256d tau = depth(v, env);
    const __m256d e = neg(log_pd(unit_open(mix.fmix(ce))));
    const __m256d next = add(clock, mul(e, tau));
    const __m256i past_first = _mm256_castpd_si256(_mm256_cmp_pd(next, first_v, _CMP_GT_OQ));
    const __m256i new_first = _mm256_andnot_si256(have, past_first);
    at_first = _mm256_blendv_epi8(at_first, v, new_first);
    have = _mm256_or_si256(have, new_first);
    const __m256i done = _mm256_castpd_si256(_mm256_cmp_pd(next, second_v, _CMP_GT_OQ));
    steps = _mm256_add_epi64(steps, _mm256_set1_epi64x(1));
    const __m256i capped = _mm256_cmpeq_epi64(steps, cap_v);
    clock = next;
    const __m256i moved = neighbor(v, mix.fmix(cn));
    ce = _mm256_add_epi64(ce, two_golden);
    cn = _mm256_add_epi64(cn, two_golden);

    const int finished = _mm256_movemask_pd(_mm256_castsi256_pd(_mm256_or_si256(done, capped)));
    if (finished == 0) {
      v = moved;
      continue;
    }
    // Some lanes ended: spill, record, refill.
    alignas(32) std::uint64_t done_mask[kLanes];
    st(lane_v, v);
    st(done_mask, done);
    _mm256_store_pd(lane_clock, clock);
    st(lane_ce, ce);
    st(lane_cn, cn);
    st(lane_have, have);
    st(lane_first, at_first);
    st(lane_steps, steps);
    alignas(32) std::uint64_t lane_moved[kLanes];
    st(lane_moved, moved);
    for (int l = 0; l < kLanes; ++l) {
      if (!((finished >> l) & 1)) {
        lane_v[l] = lane_moved[l];
        continue;
      }
      if (lane_task[l] < 0) {
        load(l);
        continue;
      }
      TwoTimeResult res;
      res.at_first = lane_first[l];
      res.steps = lane_steps[l];
      res.clock = lane_clock[l];
      if (done_mask[l]) {
        res.at_second = lane_v[l];
      } else {
        res.timed_out = true;
      }
      if (!std::isfinite(res.clock)) throw std::overflow_error("clock overflow");
      out[static_cast<std::size_t>(lane_task[l])] = res;
      --active;
      load(l);
    }
    v = ld(lane_v);
    clock = _mm256_load_pd(lane_clock);
    ce = ld(lane_ce);
    cn = ld(lane_cn);
    have = ld(lane_have);
    at_first = ld(lane_first);
    steps = ld(lane_steps);
    env = ld(lane_env);
  }
}

}  // namespace trap::simd::detail
