#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "ydim/grid.hpp"
#include "ydim/skeleton.hpp"
#include "ydim/ytree.hpp"

namespace ydim {

enum class TopologyClass { Circle, Arc, ContainsY, Other };

inline const char* to_string(TopologyClass c) {
  switch (c) {
    case TopologyClass::Circle: return "Circle";
    case TopologyClass::Arc: return "Arc";
    case TopologyClass::ContainsY: return "ContainsY";
    case TopologyClass::Other: return "Other";
  }
  return "Other";
}

struct TopologyReport {
  TopologyClass cls = TopologyClass::Other;
  std::optional<YTree> ytree_witness;     // set when cls == ContainsY
  std::optional<Polyline> cycle_witness;  // set when cls == Circle
  SkeletonGraph skeleton;
};

namespace detail {

// incident arcs at a vertex, oriented to start there; loops are split in half
inline std::vector<Polyline> incident_arcs(const SkeletonGraph& g, int v) {
  std::vector<Polyline> arcs;
  for (const auto& e : g.edges) {
    if (e.a == v && e.b == v) {
      const Polyline half1 = e.geometry.trimmed_to_length(0.5 * e.length);
      const Polyline half2 = e.geometry.reversed().trimmed_to_length(0.5 * e.length);
      arcs.push_back(half1);
      arcs.push_back(half2);
    } else if (e.a == v) {
      arcs.push_back(e.geometry);
    } else if (e.b == v) {
      arcs.push_back(e.geometry.reversed());
    }
  }
  std::sort(arcs.begin(), arcs.end(),
            [](const Polyline& x, const Polyline& y) { return x.length() > y.length(); });
  return arcs;
}

inline std::optional<YTree> ytree_at_vertex(const SkeletonGraph& g, int v,
                                            double tol_geom) {
  const auto arcs = incident_arcs(g, v);
  if (arcs.size() < 3) return std::nullopt;
  // the three longest incident arcs, trimmed to a common arc length
  for (std::size_t skip = 0; skip + 3 <= arcs.size(); ++skip) {
    const Polyline& a0 = arcs[skip];
    const Polyline& a1 = arcs[skip + 1];
    const Polyline& a2 = arcs[skip + 2];
    const double L = std::min({a0.length(), a1.length(), a2.length()});
    if (L <= tol_geom) break;
    YTree y;
    y.center = g.vertices[v];
    y.legs[0] = a0.trimmed_to_length(L);
    y.legs[1] = a1.trimmed_to_length(L);
    y.legs[2] = a2.trimmed_to_length(L);
    for (auto& leg : y.legs) leg.pts.front() = y.center;
    if (y.is_valid(tol_geom)) return y;
  }
  return std::nullopt;
}

}  // namespace detail

/// Y-tree witness from the skeleton: at a branch vertex, the three longest
/// incident arcs trimmed to equal arc length. Branch vertices are tried in
/// decreasing order of their third-longest arc.
inline std::optional<YTree> extract_ytree(const SkeletonGraph& g, double tol_geom) {
  std::vector<std::pair<double, int>> candidates;
  const auto deg = g.vertex_degrees();
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    if (deg[v] < 3) continue;
    const auto arcs = detail::incident_arcs(g, static_cast<int>(v));
    if (arcs.size() < 3) continue;
    candidates.emplace_back(arcs[2].length(), static_cast<int>(v));
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& x, const auto& y) { return x.first > y.first; });
  for (const auto& [len, v] : candidates) {
    auto y = detail::ytree_at_vertex(g, v, tol_geom);
    if (y) return y;
  }
  return std::nullopt;
}

inline std::optional<YTree> extract_ytree(const GridContinuum& s, double prune_len) {
  const SkeletonGraph g = skeletonize(s, prune_len);
  return extract_ytree(g, s.cell_width);
}

inline double default_prune_len(const GridContinuum& s) { return 4.0 * s.cell_width; }

/// Circle / Arc / ContainsY trichotomy of a connected continuum, read off
/// the pruned skeleton. Anything else (multiple cycles, isolated point
/// skeletons, ...) lands in Other.
inline TopologyReport classify(const GridContinuum& s, double prune_len) {
  TopologyReport report;
  report.skeleton = skeletonize(s, prune_len);
  const SkeletonGraph& g = report.skeleton;
  const auto deg = g.vertex_degrees();
  const int max_deg = g.max_degree();
  const int rank = g.cycle_rank();
  const int leaves = static_cast<int>(std::count(deg.begin(), deg.end(), 1));

  if (max_deg >= 3) {
    report.cls = TopologyClass::ContainsY;
    report.ytree_witness = extract_ytree(g, s.cell_width);
    if (!report.ytree_witness) report.cls = TopologyClass::Other;
    return report;
  }
  if (rank == 1 && leaves == 0 && g.edges.size() == 1 &&
      g.edges.front().a == g.edges.front().b) {
    report.cls = TopologyClass::Circle;
    report.cycle_witness = g.edges.front().geometry;
    return report;
  }
  if (rank == 0 && leaves == 2 && g.component_count() == 1) {
    report.cls = TopologyClass::Arc;
    return report;
  }
  report.cls = TopologyClass::Other;
  return report;
}

inline TopologyReport classify(const GridContinuum& s) {
  return classify(s, default_prune_len(s));
}

}  // namespace ydim
