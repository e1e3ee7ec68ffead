#include "sideslip/kernels/kernels.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "tanh_constants.hpp"

namespace sideslip::kernels {

namespace {

void vtanh_scalar(double* dst, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = detail::tanh_one(x[i]);
}

void tanh_grad_mul_scalar(double* dst, const double* grad, const double* act,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fma(-act[i], act[i], 1.0);
    dst[i] = grad[i] * d;
  }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void add_rowvec_scalar(double* m, const double* v, std::size_t rows,
                       std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = m + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += v[c];
  }
}

void matmul_nn_scalar(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    std::memset(crow, 0, n * sizeof(double));
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] = std::fma(av, brow[j], crow[j]);
      }
    }
  }
}

void matmul_tn_scalar(double* c, const double* a, const double* b,
                      std::size_t s, std::size_t m, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t row = 0; row < s; ++row) {
    const double* arow = a + row * m;
    const double* brow = b + row * n;
    for (std::size_t o = 0; o < m; ++o) {
      const double av = arow[o];
      double* crow = c + o * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] = std::fma(av, brow[j], crow[j]);
      }
    }
  }
}

void adam_update_scalar(double* w, const double* g, double* m, double* v,
                        std::size_t n, const AdamConsts& k) {
  const double om_b1 = 1.0 - k.beta1;
  const double om_b2 = 1.0 - k.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = std::fma(k.beta1, m[i], om_b1 * g[i]);
    v[i] = std::fma(k.beta2, v[i], om_b2 * (g[i] * g[i]));
    const double mhat = m[i] / k.bias1;
    const double vhat = v[i] / k.bias2;
    const double den = std::sqrt(vhat) + k.eps;
    w[i] = w[i] - (k.lr * mhat) / den;
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc = std::fma(a[i], b[i], acc);
  return acc;
}

double sum_sq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc = std::fma(x[i], x[i], acc);
  return acc;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
  return acc;
}

constexpr Ops kScalarOps = {
    vtanh_scalar,     tanh_grad_mul_scalar, axpy_scalar,
    scale_scalar,     add_rowvec_scalar,    matmul_nn_scalar,
    matmul_tn_scalar, adam_update_scalar,   dot_scalar,
    sum_sq_scalar,    sum_abs_diff_scalar,  "scalar",
};

std::atomic<const Ops*> g_active{nullptr};

const Ops* detect() {
  if (const char* env = std::getenv("SIDESLIP_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &kScalarOps;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return &avx2_ops();
  }
  return avx2_supported() ? &avx2_ops() : &kScalarOps;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#if !(defined(__x86_64__) || defined(_M_X64))
const Ops& avx2_ops() { return kScalarOps; }
#endif

const Ops& active() {
  const Ops* ops = g_active.load(std::memory_order_acquire);
  if (!ops) {
    ops = detect();
    g_active.store(ops, std::memory_order_release);
  }
  return *ops;
}

void select(const std::string& name) {
  if (name == "auto") {
    g_active.store(detect(), std::memory_order_release);
  } else if (name == "scalar") {
    g_active.store(&kScalarOps, std::memory_order_release);
  } else if (name == "avx2") {
    if (!avx2_supported())
      throw std::runtime_error("kernels: avx2 not supported on this CPU");
    g_active.store(&avx2_ops(), std::memory_order_release);
  } else {
    throw std::runtime_error("kernels: unknown implementation '" + name + "'");
  }
}

}  // namespace sideslip::kernels
