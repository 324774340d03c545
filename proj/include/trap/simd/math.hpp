#pragma once

// Scalar reference versions of the elementary functions used inside the walk
// kernels. The vector variants in kernels_avx2.cpp perform the same IEEE
// operations in the same order, so scalar and vector results are bit-identical.
// That is what lets a trajectory reproduce exactly whichever kernel ran it.
//
// log and exp follow the fdlibm/musl reductions (< 1 ulp); the normal quantile
// is Wichura's AS 241 (PPND16, relative accuracy about 1e-16).

#include <bit>
#include <cmath>
#include <cstdint>

namespace trap::simd {

namespace coef {
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kInvLn2 = 1.44269504088896338700e+00;

inline constexpr double kLg1 = 6.666666666666735130e-01;
inline constexpr double kLg2 = 3.999999999940941908e-01;
inline constexpr double kLg3 = 2.857142874366239149e-01;
inline constexpr double kLg4 = 2.222219843214978396e-01;
inline constexpr double kLg5 = 1.818357216161805012e-01;
inline constexpr double kLg6 = 1.531383769920937332e-01;
inline constexpr double kLg7 = 1.479819860511658591e-01;

inline constexpr double kP1 = 1.66666666666666019037e-01;
inline constexpr double kP2 = -2.77777777770155933842e-03;
inline constexpr double kP3 = 6.61375632143793436117e-05;
inline constexpr double kP4 = -1.65339022054652515390e-06;
inline constexpr double kP5 = 4.13813679705723846039e-08;

// exp() argument clamp: keeps the scale factor 2^k a normal double.
inline constexpr double kExpMax = 709.0;
inline constexpr double kExpMin = -707.0;

// AS 241, central region |p - 0.5| <= 0.425.
inline constexpr double kA[8] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                                 1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
inline constexpr double kB[8] = {1.0,
                                 4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                 3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                 5.2264952788528545610e+3};
// Intermediate tail, r = sqrt(-log(min(p, 1-p))) <= 5.
inline constexpr double kC[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                                 5.76949722146069140550e0,  3.64784832476320460504e0,
                                 1.27045825245236838258e0,  2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
inline constexpr double kD[8] = {1.0,
                                 2.05319162663775882187e0,  1.67638483018380384940e0,
                                 6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
// Far tail, r > 5.
inline constexpr double kE[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                                 1.78482653991729133580e0,  2.96560571828504891230e-1,
                                 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
inline constexpr double kF[8] = {1.0,
                                 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};
}  // namespace coef

namespace ref {

/// Horner evaluation, highest coefficient first; one mul and one add per step.
inline double horner7(const double (&c)[8], double x) {
  double acc = c[7];
  for (int i = 6; i >= 0; --i) acc = acc * x + c[i];
  return acc;
}

/// Natural log for positive normal finite x.
inline double log(double x) {
  using namespace coef;
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  bits += std::uint64_t{0x3ff00000 - 0x3fe6a09e} << 32;
  const std::uint64_t biased = bits >> 52;
  bits = (bits & 0x000fffffffffffffull) + (std::uint64_t{0x3fe6a09e} << 32);
  const double k = static_cast<double>(biased) - 1023.0;
  const double f = std::bit_cast<double>(bits) - 1.0;
  const double hfsq = 0.5 * f * f;
  const double s = f / (2.0 + f);
  const double z = s * s;
  const double w = z * z;
  const double t1 = w * (kLg2 + w * (kLg4 + w * kLg6));
  const double t2 = z * (kLg1 + w * (kLg3 + w * (kLg5 + w * kLg7)));
  const double r = t2 + t1;
  return k * kLn2Hi - ((hfsq - (s * (hfsq + r) + k * kLn2Lo)) - f);
}

/// exp(x); arguments are clamped to [-707, 709].
inline double exp(double x) {
  using namespace coef;
  x = x > kExpMax ? kExpMax : x;
  x = x < kExpMin ? kExpMin : x;
  const double k = std::nearbyint(kInvLn2 * x);
  const double hi = x - k * kLn2Hi;
  const double lo = k * kLn2Lo;
  const double r = hi - lo;
  const double rr = r * r;
  const double c = r - rr * (kP1 + rr * (kP2 + rr * (kP3 + rr * (kP4 + rr * kP5))));
  const double y = 1.0 + ((r * c / (2.0 - c) - lo) + hi);
  const std::uint64_t scale = static_cast<std::uint64_t>(static_cast<std::int64_t>(k) + 1023) << 52;
  return y * std::bit_cast<double>(scale);
}

/// Standard normal quantile for p in (0, 1).
inline double normal_quantile(double p) {
  using namespace coef;
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner7(kA, r) / horner7(kB, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-log(r));
  double v;
  if (r <= 5.0) {
    r = r - 1.6;
    v = horner7(kC, r) / horner7(kD, r);
  } else {
    r = r - 5.0;
    v = horner7(kE, r) / horner7(kF, r);
  }
  return q < 0.0 ? -v : v;
}

}  // namespace ref
}  // namespace trap::simd
