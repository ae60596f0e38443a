// SPDX-License-Identifier: Apache-2.0
#include "templink/heuristics.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "templink/error.hpp"

namespace templink {

HeuristicKind parse_heuristic(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "cn") return HeuristicKind::cn;
  if (lower == "aa") return HeuristicKind::aa;
  if (lower == "ra") return HeuristicKind::ra;
  if (lower == "jaccard") return HeuristicKind::jaccard;
  if (lower == "pa") return HeuristicKind::pa;
  fail(ErrorCode::invalid_argument, "unknown heuristic '" + std::string(name) + "' (expected CN, AA, RA, Jaccard, PA)");
}

std::string_view to_string(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::cn: return "CN";
    case HeuristicKind::aa: return "AA";
    case HeuristicKind::ra: return "RA";
    case HeuristicKind::jaccard: return "Jaccard";
    case HeuristicKind::pa: return "PA";
  }
  return "CN";
}

double heuristic_score(HeuristicKind kind, const GraphView& view, NodeId u, NodeId v, bool hide_uv) {
  if (u == v) fail(ErrorCode::invalid_argument, "heuristic_score: u == v");
  if (u >= view.node_count() || v >= view.node_count()) {
    fail(ErrorCode::invalid_argument, "heuristic_score: node id out of range");
  }
  std::vector<NodeId> gu, gv;
  view.for_each_neighbor(u, [&](NodeId w, EdgeId) {
    if (!(hide_uv && w == v)) gu.push_back(w);
  });
  view.for_each_neighbor(v, [&](NodeId w, EdgeId) {
    if (!(hide_uv && w == u)) gv.push_back(w);
  });
  if (kind == HeuristicKind::pa) return static_cast<double>(gu.size()) * static_cast<double>(gv.size());

  std::vector<NodeId> common;
  std::set_intersection(gu.begin(), gu.end(), gv.begin(), gv.end(), std::back_inserter(common));
  switch (kind) {
    case HeuristicKind::cn:
      return static_cast<double>(common.size());
    case HeuristicKind::jaccard: {
      const std::size_t uni = gu.size() + gv.size() - common.size();
      return uni == 0 ? 0.0 : static_cast<double>(common.size()) / static_cast<double>(uni);
    }
    case HeuristicKind::aa:
    case HeuristicKind::ra: {
      double s = 0.0;
      for (NodeId z : common) {
        const auto dz = view.degree(z);
        assert(dz >= 2);  // z is adjacent to both u and v
        s += kind == HeuristicKind::aa ? 1.0 / std::log(static_cast<double>(dz)) : 1.0 / static_cast<double>(dz);
      }
      return s;
    }
    case HeuristicKind::pa:
      break;
  }
  return 0.0;
}

}  // namespace templink
