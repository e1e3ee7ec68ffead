#pragma once

// Shared constants for the vectorized tanh. Both the scalar and the AVX2
// variant evaluate exactly the same operation sequence:
//
//   t   = |x|,  y = -2t
//   k   = rint(y * log2e)
//   r   = y - k*ln2_hi - k*ln2_lo                  (|r| <= ln2/2)
//   p   = r * P(r)                                  ~ expm1(r)
//   e   = 2^k * p + (2^k - 1)                       ~ expm1(y) in [-1, 0]
//   res = copysign(-e / (e + 2), x)                 tanh identity
//
// with |x| >= kTanhSaturate short-circuited to +-1. P is the degree-12
// Horner form of sum_{j>=0} r^j/(j+1)!; its truncation error is below one
// ulp on the reduced range.

#include <bit>
#include <cmath>
#include <cstdint>

namespace sideslip::kernels::detail {

inline constexpr double kLog2E = 1.4426950408889634074;       // 1/ln 2
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;  // high split
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;  // low split
inline constexpr double kTanhSaturate = 20.0;  // tanh(20) rounds to 1.0

// 1/(j+1)! for j = 0..12, highest degree first for Horner evaluation.
inline constexpr double kExpm1Poly[13] = {
    1.0 / 6227020800.0,  // 1/13!
    1.0 / 479001600.0,   // 1/12!
    1.0 / 39916800.0,    // 1/11!
    1.0 / 3628800.0,     // 1/10!
    1.0 / 362880.0,      // 1/9!
    1.0 / 40320.0,       // 1/8!
    1.0 / 5040.0,        // 1/7!
    1.0 / 720.0,         // 1/6!
    1.0 / 120.0,         // 1/5!
    1.0 / 24.0,          // 1/4!
    1.0 / 6.0,           // 1/3!
    1.0 / 2.0,           // 1/2!
    1.0,                 // 1/1!
};

// Scalar element of the pipeline; also used for vector remainder elements.
// Saturated, infinite and NaN inputs are branched out so the integer cast of
// k stays defined; for |x| < kTanhSaturate the sequence matches the AVX2
// lanes operation for operation.
inline double tanh_one(double x) {
  const double t = std::fabs(x);
  if (!(t < kTanhSaturate)) {
    if (std::isnan(x)) return x;
    return std::copysign(1.0, x);
  }
  const double y = -2.0 * t;
  const double kd = std::rint(y * kLog2E);
  double r = std::fma(kd, -kLn2Hi, y);
  r = std::fma(kd, -kLn2Lo, r);
  double q = kExpm1Poly[0];
  for (int i = 1; i < 13; ++i) q = std::fma(q, r, kExpm1Poly[i]);
  const double p = q * r;  // expm1(r)
  const int k = static_cast<int>(kd);
  const double two_k =
      std::bit_cast<double>(static_cast<std::uint64_t>(1023 + k) << 52);
  const double em1 = std::fma(two_k, p, two_k - 1.0);  // expm1(-2t)
  const double res = (-em1) / (em1 + 2.0);
  return std::copysign(res, x);
}

}  // namespace sideslip::kernels::detail
