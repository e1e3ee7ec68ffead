#pragma once

#include <cstddef>
#include <string>

namespace sideslip::kernels {

/// Per-step Adam constants. bias1/bias2 are the bias-correction denominators
/// (1 - beta1^t) and (1 - beta2^t), computed once per step by the caller.
struct AdamConsts {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias1;
  double bias2;
};

/// Table of the data-parallel inner-loop kernels. Two implementations exist:
/// a scalar reference and an AVX2 variant; they are selected at runtime and
/// equivalence-tested against each other.
///
/// Semantics (all matrices row-major, double precision):
///   vtanh          dst[i] = tanh(x[i])
///   tanh_grad_mul  dst[i] = grad[i] * (1 - act[i]^2)
///   axpy           y[i] += a * x[i]
///   scale          x[i] *= a
///   add_rowvec     m[r, c] += v[c]           (rows x cols)
///   matmul_nn      c = a(m,k) * b(k,n)
///   matmul_tn      c = a(s,m)^T * b(s,n)     (contraction over rows of a, b)
///   adam_update    standard Adam step on one parameter tensor
///   dot            sum_i a[i] * b[i]
///   sum_sq         sum_i x[i]^2
///   sum_abs_diff   sum_i |a[i] - b[i]|
///
/// Array-writing kernels (vtanh..adam_update) are bit-identical between the
/// scalar and AVX2 variants: each output element is produced by the same
/// sequence of correctly rounded operations (fma included) in both. The three
/// reductions accumulate in a different order under AVX2 and agree only up to
/// rounding, so their equivalence tests carry a tolerance.
struct Ops {
  void (*vtanh)(double* dst, const double* x, std::size_t n);
  void (*tanh_grad_mul)(double* dst, const double* grad, const double* act,
                        std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);
  void (*add_rowvec)(double* m, const double* v, std::size_t rows,
                     std::size_t cols);
  void (*matmul_nn)(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n);
  void (*matmul_tn)(double* c, const double* a, const double* b, std::size_t s,
                    std::size_t m, std::size_t n);
  void (*adam_update)(double* w, const double* g, double* m, double* v,
                      std::size_t n, const AdamConsts& k);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
  const char* name;
};

const Ops& scalar_ops();

/// True when the running CPU supports the AVX2+FMA variant.
bool avx2_supported();

/// AVX2 table; call only when avx2_supported(). On non-x86 builds the
/// pointers alias the scalar table.
const Ops& avx2_ops();

/// Active table: AVX2 when supported, scalar otherwise. The choice is made
/// once per process, so results are reproducible on a given machine. The
/// environment variable SIDESLIP_KERNELS=scalar|avx2 overrides detection.
const Ops& active();

/// Force a specific implementation ("auto", "scalar", "avx2"); used by
/// equivalence tests and diagnostics.
void select(const std::string& name);

}  // namespace sideslip::kernels
