// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>

// Dense f64 inner loops used by the tensor engine. Each entry point has a
// scalar reference implementation and optional SIMD variants; the active table
// is chosen once at startup from the running CPU (override: TEMPLINK_ISA=
// scalar|avx2|neon). Every variant computes output row i from input row i
// alone, so results never depend on where a row sits inside a matrix.

namespace templink::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  /// c[m,n] += a[m,k] * b[k,n]
  void (*gemm)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
  /// c[k,n] += a[m,k]^T * g[m,n]
  void (*gemm_tn)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* g, double* c);
  /// c[m,k] += g[m,n] * b[k,n]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* g, const double* b, double* c);
  /// y[i] += alpha * x[i]
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);
};

bool supported(Isa isa);
/// Table for one ISA; throws if the CPU or build lacks it.
const KernelTable& table(Isa isa);
/// Table currently used by the tensor engine.
const KernelTable& active();
/// Switches the active table (tests and the TEMPLINK_ISA override use this).
void select(Isa isa);

namespace detail {
extern const KernelTable scalar_table;
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();
}  // namespace detail

}  // namespace templink::kernels
