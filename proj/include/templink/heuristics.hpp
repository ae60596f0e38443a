// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "templink/graph_store.hpp"

namespace templink {

enum class HeuristicKind { cn, aa, ra, jaccard, pa };

inline constexpr HeuristicKind kAllHeuristics[] = {HeuristicKind::cn, HeuristicKind::aa, HeuristicKind::ra,
                                                   HeuristicKind::jaccard, HeuristicKind::pa};

/// Accepts CN, AA, RA, Jaccard, PA (case-insensitive).
HeuristicKind parse_heuristic(std::string_view name);
std::string_view to_string(HeuristicKind kind);

/// Similarity of u and v over the neighbor sets Γ of the view. With
/// `hide_uv` the u-v edge (if any) is treated as absent, so Γ(u) loses v and
/// Γ(v) loses u; degrees of common neighbors are unaffected.
double heuristic_score(HeuristicKind kind, const GraphView& view, NodeId u, NodeId v, bool hide_uv = false);

}  // namespace templink
