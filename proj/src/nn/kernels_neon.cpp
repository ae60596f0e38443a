// SPDX-License-Identifier: Apache-2.0
#include "templink/nn/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

#include <cmath>

namespace templink::kernels::detail {

namespace {

void axpy_neon(std::size_t n, double alpha, const double* x, double* y) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), a, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

double dot_neon(std::size_t n, const double* x, const double* y) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc = std::fma(x[i], y[i], acc);
  return acc;
}

void gemm_neon(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t c0 = vld1q_f64(ci + j);
      float64x2_t c1 = vld1q_f64(ci + j + 2);
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t av = vdupq_n_f64(ai[p]);
        c0 = vfmaq_f64(c0, av, vld1q_f64(b + p * n + j));
        c1 = vfmaq_f64(c1, av, vld1q_f64(b + p * n + j + 2));
      }
      vst1q_f64(ci + j, c0);
      vst1q_f64(ci + j + 2, c1);
    }
    for (; j < n; ++j) {
      double acc = ci[j];
      for (std::size_t p = 0; p < k; ++p) acc = std::fma(ai[p], b[p * n + j], acc);
      ci[j] = acc;
    }
  }
}

void gemm_tn_neon(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* g, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip != 0.0) axpy_neon(n, aip, g + i * n, c + p * n);
    }
  }
}

void gemm_nt_neon(std::size_t m, std::size_t n, std::size_t k, const double* g, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) c[i * k + p] += dot_neon(n, g + i * n, b + p * n);
  }
}

const KernelTable neon{Isa::neon, gemm_neon, gemm_tn_neon, gemm_nt_neon, axpy_neon, dot_neon};

}  // namespace

const KernelTable* neon_table() { return &neon; }

}  // namespace templink::kernels::detail

#else

namespace templink::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace templink::kernels::detail

#endif
