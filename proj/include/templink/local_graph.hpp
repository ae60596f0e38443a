// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace templink {

/// Compressed adjacency over local node indices 0..n-1. For an undirected
/// graph each edge occupies two slots, one in each endpoint's row.
struct LocalCsr {
  std::vector<std::uint32_t> offsets{0};  // n + 1
  std::vector<std::uint32_t> targets;

  std::size_t node_count() const noexcept { return offsets.size() - 1; }
  std::size_t slot_count() const noexcept { return targets.size(); }
  std::size_t degree(std::size_t i) const noexcept { return offsets[i + 1] - offsets[i]; }
};

}  // namespace templink
