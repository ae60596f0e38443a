// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string>

#include "templink/error.hpp"
#include "templink/nn/kernels.hpp"

namespace templink::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  if (const char* forced = std::getenv("TEMPLINK_ISA")) {
    const std::string s(forced);
    if (s == "scalar") return &detail::scalar_table;
    if (s == "avx2" && supported(Isa::avx2)) return detail::avx2_table();
    if (s == "neon" && supported(Isa::neon)) return detail::neon_table();
  }
  if (supported(Isa::avx2)) return detail::avx2_table();
  if (supported(Isa::neon)) return detail::neon_table();
  return &detail::scalar_table;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return detail::avx2_table() != nullptr && cpu_has_avx2();
    case Isa::neon: return detail::neon_table() != nullptr;
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    fail(ErrorCode::invalid_argument, "kernel ISA " + std::string(to_string(isa)) + " unavailable");
  }
  switch (isa) {
    case Isa::avx2: return *detail::avx2_table();
    case Isa::neon: return *detail::neon_table();
    case Isa::scalar: break;
  }
  return detail::scalar_table;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) { current().store(&table(isa)); }

}  // namespace templink::kernels
