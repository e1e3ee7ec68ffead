// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after a runtime CPU check
// (kernels::avx2_supported).

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "sideslip/kernels/kernels.hpp"
#include "tanh_constants.hpp"

namespace sideslip::kernels {

namespace {

using detail::kExpm1Poly;
using detail::kLn2Hi;
using detail::kLn2Lo;
using detail::kLog2E;
using detail::kTanhSaturate;

const __m256d kSignMask = _mm256_set1_pd(-0.0);

// Four-lane tanh; same operation sequence as detail::tanh_one. Saturated
// lanes are blended to 1, NaN lanes fall through the arithmetic as NaN.
inline __m256d tanh4(__m256d x) {
  const __m256d t = _mm256_andnot_pd(kSignMask, x);
  const __m256d y = _mm256_mul_pd(_mm256_set1_pd(-2.0), t);
  const __m256d kd =
      _mm256_round_pd(_mm256_mul_pd(y, _mm256_set1_pd(kLog2E)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fmadd_pd(kd, _mm256_set1_pd(-kLn2Hi), y);
  r = _mm256_fmadd_pd(kd, _mm256_set1_pd(-kLn2Lo), r);
  __m256d q = _mm256_set1_pd(kExpm1Poly[0]);
  for (int i = 1; i < 13; ++i) {
    q = _mm256_fmadd_pd(q, r, _mm256_set1_pd(kExpm1Poly[i]));
  }
  const __m256d p = _mm256_mul_pd(q, r);
  // 2^k through exponent bits; k is integral and in [-58, 0] for live lanes.
  const __m256i k64 = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(kd));
  const __m256d two_k = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52));
  const __m256d em1 =
      _mm256_fmadd_pd(two_k, p, _mm256_sub_pd(two_k, _mm256_set1_pd(1.0)));
  __m256d res = _mm256_div_pd(_mm256_xor_pd(em1, kSignMask),
                              _mm256_add_pd(em1, _mm256_set1_pd(2.0)));
  const __m256d sat =
      _mm256_cmp_pd(t, _mm256_set1_pd(kTanhSaturate), _CMP_GE_OQ);
  res = _mm256_blendv_pd(res, _mm256_set1_pd(1.0), sat);
  return _mm256_or_pd(res, _mm256_and_pd(x, kSignMask));
}

void vtanh_avx2(double* dst, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, tanh4(_mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) dst[i] = detail::tanh_one(x[i]);
}

void tanh_grad_mul_avx2(double* dst, const double* grad, const double* act,
                        std::size_t n) {
  std::size_t i = 0;
  const __m256d one = _mm256_set1_pd(1.0);
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(act + i);
    const __m256d d = _mm256_fnmadd_pd(a, a, one);
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(grad + i), d));
  }
  for (; i < n; ++i) {
    const double d = std::fma(-act[i], act[i], 1.0);
    dst[i] = grad[i] * d;
  }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yi =
        _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, yi);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scale_avx2(double a, double* x, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void add_rowvec_avx2(double* m, const double* v, std::size_t rows,
                     std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = m + r * cols;
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      _mm256_storeu_pd(
          row + c, _mm256_add_pd(_mm256_loadu_pd(row + c),
                                 _mm256_loadu_pd(v + c)));
    }
    for (; c < cols; ++c) row[c] += v[c];
  }
}

// Rank-1 accumulation of av * brow into crow; per element this is the same
// fma chain as the scalar kernel, so results are bit-identical.
inline void accum_row(double* crow, const double* brow, double av,
                      std::size_t n) {
  const __m256d a4 = _mm256_set1_pd(av);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m256d c0 = _mm256_fmadd_pd(a4, _mm256_loadu_pd(brow + j),
                                       _mm256_loadu_pd(crow + j));
    const __m256d c1 = _mm256_fmadd_pd(a4, _mm256_loadu_pd(brow + j + 4),
                                       _mm256_loadu_pd(crow + j + 4));
    _mm256_storeu_pd(crow + j, c0);
    _mm256_storeu_pd(crow + j + 4, c1);
  }
  for (; j + 4 <= n; j += 4) {
    const __m256d c0 = _mm256_fmadd_pd(a4, _mm256_loadu_pd(brow + j),
                                       _mm256_loadu_pd(crow + j));
    _mm256_storeu_pd(crow + j, c0);
  }
  for (; j < n; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
}

void matmul_nn_avx2(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    std::memset(crow, 0, n * sizeof(double));
    for (std::size_t p = 0; p < k; ++p) {
      accum_row(crow, b + p * n, a[i * k + p], n);
    }
  }
}

void matmul_tn_avx2(double* c, const double* a, const double* b, std::size_t s,
                    std::size_t m, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t row = 0; row < s; ++row) {
    const double* arow = a + row * m;
    const double* brow = b + row * n;
    for (std::size_t o = 0; o < m; ++o) {
      accum_row(c + o * n, brow, arow[o], n);
    }
  }
}

void adam_update_avx2(double* w, const double* g, double* m, double* v,
                      std::size_t n, const AdamConsts& k) {
  const double om_b1 = 1.0 - k.beta1;
  const double om_b2 = 1.0 - k.beta2;
  const __m256d b1 = _mm256_set1_pd(k.beta1);
  const __m256d b2 = _mm256_set1_pd(k.beta2);
  const __m256d ob1 = _mm256_set1_pd(om_b1);
  const __m256d ob2 = _mm256_set1_pd(om_b2);
  const __m256d bias1 = _mm256_set1_pd(k.bias1);
  const __m256d bias2 = _mm256_set1_pd(k.bias2);
  const __m256d lr = _mm256_set1_pd(k.lr);
  const __m256d eps = _mm256_set1_pd(k.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_loadu_pd(m + i);
    __m256d vi = _mm256_loadu_pd(v + i);
    mi = _mm256_fmadd_pd(b1, mi, _mm256_mul_pd(ob1, gi));
    vi = _mm256_fmadd_pd(b2, vi, _mm256_mul_pd(ob2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, bias1);
    const __m256d vhat = _mm256_div_pd(vi, bias2);
    const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(vhat), eps);
    const __m256d wi = _mm256_sub_pd(
        _mm256_loadu_pd(w + i), _mm256_div_pd(_mm256_mul_pd(lr, mhat), den));
    _mm256_storeu_pd(w + i, wi);
  }
  for (; i < n; ++i) {
    m[i] = std::fma(k.beta1, m[i], om_b1 * g[i]);
    v[i] = std::fma(k.beta2, v[i], om_b2 * (g[i] * g[i]));
    const double mhat = m[i] / k.bias1;
    const double vhat = v[i] / k.bias2;
    const double den = std::sqrt(vhat) + k.eps;
    w[i] = w[i] - (k.lr * mhat) / den;
  }
}

inline double hsum4(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s2 = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum4(acc);
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double sum_sq_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xi = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(xi, xi, acc);
  }
  double s = hsum4(acc);
  for (; i < n; ++i) s = std::fma(x[i], x[i], s);
  return s;
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(kSignMask, d));
  }
  double s = hsum4(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

constexpr Ops kAvx2Ops = {
    vtanh_avx2,     tanh_grad_mul_avx2, axpy_avx2,
    scale_avx2,     add_rowvec_avx2,    matmul_nn_avx2,
    matmul_tn_avx2, adam_update_avx2,   dot_avx2,
    sum_sq_avx2,    sum_abs_diff_avx2,  "avx2",
};

}  // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

}  // namespace sideslip::kernels

#endif  // x86-64
