#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ydim/grid.hpp"
#include "ydim/ytree.hpp"

namespace ydim {

/// One-cell-wide skeleton of a GridContinuum as an embedded graph.
/// Vertices sit at junctions (degree >= 3) and endpoints (degree 1);
/// a pure cycle is held as a single anchor vertex with a loop edge.
struct SkeletonGraph {
  struct Edge {
    int a = 0;
    int b = 0;
    Polyline geometry;  // starts at vertices[a], ends at vertices[b]
    double length = 0.0;
  };

  std::vector<Complex> vertices;
  std::vector<Edge> edges;

  std::vector<int> vertex_degrees() const {
    std::vector<int> deg(vertices.size(), 0);
    for (const Edge& e : edges) {
      deg[e.a] += 1;
      deg[e.b] += 1;  // a loop contributes 2 to its anchor
    }
    return deg;
  }

  int component_count() const {
    if (vertices.empty()) return 0;
    std::vector<int> parent(vertices.size());
    for (std::size_t k = 0; k < parent.size(); ++k) parent[k] = static_cast<int>(k);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const Edge& e : edges) parent[find(e.a)] = find(e.b);
    std::set<int> roots;
    for (std::size_t k = 0; k < parent.size(); ++k) roots.insert(find(static_cast<int>(k)));
    return static_cast<int>(roots.size());
  }

  int cycle_rank() const {
    return static_cast<int>(edges.size()) - static_cast<int>(vertices.size()) +
           component_count();
  }

  int max_degree() const {
    const auto deg = vertex_degrees();
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  }
};

namespace detail {

// Zhang-Suen thinning; preserves 8-connectivity of the set and
// 4-connectivity of its complement.
inline CellSet zhang_suen(const CellSet& cells) {
  if (cells.empty()) return cells;
  CellBounds b = bounds_of(cells);
  const int w = b.width() + 2, h = b.height() + 2;
  std::vector<std::uint8_t> img(static_cast<std::size_t>(w) * h, 0);
  auto idx = [&](int i, int j) { return static_cast<std::size_t>(j) * w + i; };
  for (const Cell& c : cells) img[idx(c.i - b.i0 + 1, c.j - b.j0 + 1)] = 1;

  auto p = [&](int i, int j) -> int {
    if (i < 0 || j < 0 || i >= w || j >= h) return 0;
    return img[idx(i, j)];
  };

  std::vector<std::pair<int, int>> kill;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      kill.clear();
      for (int j = 1; j + 1 < h; ++j) {
        for (int i = 1; i + 1 < w; ++i) {
          if (!p(i, j)) continue;
          // neighbors clockwise from north
          const int n[8] = {p(i, j + 1), p(i + 1, j + 1), p(i + 1, j), p(i + 1, j - 1),
                            p(i, j - 1), p(i - 1, j - 1), p(i - 1, j), p(i - 1, j + 1)};
          int bsum = 0;
          for (int k = 0; k < 8; ++k) bsum += n[k];
          if (bsum < 2 || bsum > 6) continue;
          int transitions = 0;
          for (int k = 0; k < 8; ++k)
            if (n[k] == 0 && n[(k + 1) % 8] == 1) ++transitions;
          if (transitions != 1) continue;
          if (pass == 0) {
            if (n[0] * n[2] * n[4] != 0) continue;
            if (n[2] * n[4] * n[6] != 0) continue;
          } else {
            if (n[0] * n[2] * n[6] != 0) continue;
            if (n[0] * n[4] * n[6] != 0) continue;
          }
          kill.emplace_back(i, j);
        }
      }
      if (!kill.empty()) changed = true;
      for (const auto& [i, j] : kill) img[idx(i, j)] = 0;
    }
  }

  CellSet out;
  for (int j = 1; j + 1 < h; ++j)
    for (int i = 1; i + 1 < w; ++i)
      if (img[idx(i, j)]) out.insert({i + b.i0 - 1, j + b.j0 - 1});
  return out;
}

struct PixelGraph {
  std::vector<std::vector<Cell>> vertex_clusters;  // node-pixel clusters
  std::vector<std::vector<Cell>> arcs;             // pixel chains between clusters
  std::vector<std::pair<int, int>> arc_ends;       // cluster indices
};

inline int skeleton_degree(const CellSet& skel, Cell c) {
  int d = 0;
  for (const Cell& o : neighbor_offsets8())
    if (skel.count({c.i + o.i, c.j + o.j})) ++d;
  return d;
}

inline PixelGraph trace_pixel_graph(const CellSet& skel) {
  PixelGraph g;
  if (skel.empty()) return g;

  std::vector<Cell> all(skel.begin(), skel.end());
  std::sort(all.begin(), all.end());

  std::map<Cell, int> cluster_of;
  for (const Cell& c : all)
    if (skeleton_degree(skel, c) != 2) cluster_of[c] = -1;
  // cluster 8-adjacent node pixels
  for (const Cell& c : all) {
    if (!cluster_of.count(c) || cluster_of[c] != -1) continue;
    const int id = static_cast<int>(g.vertex_clusters.size());
    std::vector<Cell> cluster;
    std::vector<Cell> stack{c};
    cluster_of[c] = id;
    while (!stack.empty()) {
      Cell cur = stack.back();
      stack.pop_back();
      cluster.push_back(cur);
      for (const Cell& o : neighbor_offsets8()) {
        Cell n{cur.i + o.i, cur.j + o.j};
        auto it = cluster_of.find(n);
        if (it != cluster_of.end() && it->second == -1) {
          it->second = id;
          stack.push_back(n);
        }
      }
    }
    std::sort(cluster.begin(), cluster.end());
    g.vertex_clusters.push_back(std::move(cluster));
  }

  auto is_node = [&](Cell c) { return cluster_of.count(c) > 0; };

  std::set<std::pair<Cell, Cell>> used;  // canonical undirected steps
  auto mark = [&](Cell a, Cell b) {
    used.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
  };
  auto step_used = [&](Cell a, Cell b) {
    return used.count(a < b ? std::make_pair(a, b) : std::make_pair(b, a)) > 0;
  };

  // arcs out of node clusters
  for (const auto& cluster : g.vertex_clusters) {
    const int cid = cluster_of.at(cluster.front());
    for (const Cell& start : cluster) {
      std::vector<Cell> nbrs;
      for (const Cell& o : neighbor_offsets8()) {
        Cell n{start.i + o.i, start.j + o.j};
        if (skel.count(n)) nbrs.push_back(n);
      }
      std::sort(nbrs.begin(), nbrs.end());
      for (const Cell& first : nbrs) {
        if (is_node(first) && cluster_of.at(first) == cid) continue;  // internal
        if (step_used(start, first)) continue;
        std::vector<Cell> chain{start, first};
        mark(start, first);
        Cell prev = start, cur = first;
        while (!is_node(cur)) {
          Cell next{};
          bool found = false;
          for (const Cell& o : neighbor_offsets8()) {
            Cell n{cur.i + o.i, cur.j + o.j};
            if (!skel.count(n) || n == prev) continue;
            if (step_used(cur, n)) continue;
            next = n;
            found = true;
            break;
          }
          if (!found) break;  // dead end inside a chain (shouldn't happen)
          mark(cur, next);
          chain.push_back(next);
          prev = cur;
          cur = next;
        }
        if (!is_node(cur)) continue;
        g.arcs.push_back(chain);
        g.arc_ends.emplace_back(cid, cluster_of.at(cur));
      }
    }
  }

  // pure cycles: components with no node pixels at all
  CellSet covered;
  for (const auto& cluster : g.vertex_clusters)
    for (const Cell& c : cluster) covered.insert(c);
  for (const auto& arc : g.arcs)
    for (const Cell& c : arc) covered.insert(c);
  CellSet rest;
  for (const Cell& c : all)
    if (!covered.count(c)) rest.insert(c);
  for (const auto& comp : components8(rest)) {
    const Cell anchor = *std::min_element(comp.begin(), comp.end());
    const int cid = static_cast<int>(g.vertex_clusters.size());
    g.vertex_clusters.push_back({anchor});
    std::vector<Cell> chain{anchor};
    Cell prev = anchor, cur = anchor;
    // pick the smallest neighbor to start, then walk the loop
    std::vector<Cell> nbrs;
    for (const Cell& o : neighbor_offsets8()) {
      Cell n{anchor.i + o.i, anchor.j + o.j};
      if (rest.count(n)) nbrs.push_back(n);
    }
    if (nbrs.empty()) {  // isolated pixel
      continue;
    }
    std::sort(nbrs.begin(), nbrs.end());
    cur = nbrs.front();
    chain.push_back(cur);
    while (cur != anchor) {
      Cell next{};
      bool found = false;
      for (const Cell& o : neighbor_offsets8()) {
        Cell n{cur.i + o.i, cur.j + o.j};
        if (!rest.count(n) || n == prev) continue;
        next = n;
        found = true;
        break;
      }
      if (!found) break;
      prev = cur;
      cur = next;
      chain.push_back(cur);
    }
    g.arcs.push_back(chain);
    g.arc_ends.emplace_back(cid, cid);
  }

  return g;
}

}  // namespace detail

/// Thin to a one-cell-wide subset, lift to a graph, and prune spur edges
/// shorter than prune_len. Cycle rank of the pixel set is preserved.
inline SkeletonGraph skeletonize(const GridContinuum& s, double prune_len) {
  if (s.cells.empty()) throw std::invalid_argument("skeletonize: empty continuum");
  const CellSet skel = detail::zhang_suen(s.cells);
  if (skel.empty()) throw ResolutionError("skeletonize: empty skeleton");

  const detail::PixelGraph pg = detail::trace_pixel_graph(skel);

  SkeletonGraph graph;
  graph.vertices.reserve(pg.vertex_clusters.size());
  for (const auto& cluster : pg.vertex_clusters)
    graph.vertices.push_back(s.center(cluster.front()));
  for (std::size_t k = 0; k < pg.arcs.size(); ++k) {
    SkeletonGraph::Edge e;
    e.a = pg.arc_ends[k].first;
    e.b = pg.arc_ends[k].second;
    Polyline poly;
    poly.pts.push_back(graph.vertices[e.a]);
    for (const Cell& c : pg.arcs[k]) {
      const Complex p = s.center(c);
      if (std::abs(p - poly.pts.back()) > 0) poly.pts.push_back(p);
    }
    if (std::abs(graph.vertices[e.b] - poly.pts.back()) > 0)
      poly.pts.push_back(graph.vertices[e.b]);
    if (poly.pts.size() < 2) poly.pts.push_back(poly.pts.back() + Complex(1e-12, 0));
    e.geometry = std::move(poly);
    e.length = e.geometry.length();
    graph.edges.push_back(std::move(e));
  }

  // spur pruning + degree-2 vertex merging, iterated to a fixed point
  bool changed = true;
  while (changed) {
    changed = false;
    auto deg = graph.vertex_degrees();

    if (graph.edges.size() > 1) {
      int victim = -1;
      double victim_len = prune_len;
      for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const auto& e = graph.edges[k];
        if (e.a == e.b) continue;  // loops carry topology
        const bool leaf = (deg[e.a] == 1) || (deg[e.b] == 1);
        if (leaf && e.length < victim_len) {
          victim_len = e.length;
          victim = static_cast<int>(k);
        }
      }
      if (victim >= 0) {
        graph.edges.erase(graph.edges.begin() + victim);
        changed = true;
        continue;
      }
    }

    // merge a through-vertex (degree exactly 2, two distinct non-loop edges)
    for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
      if (deg[v] != 2) continue;
      int e1 = -1, e2 = -1;
      for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        if (graph.edges[k].a == graph.edges[k].b) {
          if (graph.edges[k].a == static_cast<int>(v)) { e1 = -2; break; }
          continue;
        }
        if (graph.edges[k].a == static_cast<int>(v) ||
            graph.edges[k].b == static_cast<int>(v)) {
          if (e1 < 0) e1 = static_cast<int>(k);
          else e2 = static_cast<int>(k);
        }
      }
      if (e1 < 0 || e2 < 0) continue;
      auto oriented = [&](const SkeletonGraph::Edge& e, bool to_v) {
        // polyline running toward / away from v
        const bool v_is_b = (e.b == static_cast<int>(v));
        Polyline p = e.geometry;
        if (to_v != v_is_b) p = p.reversed();
        return p;
      };
      SkeletonGraph::Edge merged;
      const auto& ea = graph.edges[e1];
      const auto& eb = graph.edges[e2];
      merged.a = (ea.a == static_cast<int>(v)) ? ea.b : ea.a;
      merged.b = (eb.a == static_cast<int>(v)) ? eb.b : eb.a;
      Polyline p1 = oriented(ea, true);
      Polyline p2 = oriented(eb, false);
      merged.geometry = p1;
      for (std::size_t k = 1; k < p2.pts.size(); ++k) {
        if (std::abs(p2.pts[k] - merged.geometry.pts.back()) > 0)
          merged.geometry.pts.push_back(p2.pts[k]);
      }
      merged.length = merged.geometry.length();
      const int hi = std::max(e1, e2), lo = std::min(e1, e2);
      graph.edges.erase(graph.edges.begin() + hi);
      graph.edges.erase(graph.edges.begin() + lo);
      graph.edges.push_back(std::move(merged));
      changed = true;
      break;
    }
  }

  // drop isolated vertices (unless the graph would become empty)
  {
    auto deg = graph.vertex_degrees();
    std::vector<int> remap(graph.vertices.size(), -1);
    SkeletonGraph compact;
    for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
      if (deg[v] == 0 && !graph.edges.empty()) continue;
      remap[v] = static_cast<int>(compact.vertices.size());
      compact.vertices.push_back(graph.vertices[v]);
    }
    if (compact.vertices.empty() && !graph.vertices.empty()) {
      compact.vertices.push_back(graph.vertices.front());
      remap[0] = 0;
    }
    for (auto& e : graph.edges) {
      e.a = remap[e.a];
      e.b = remap[e.b];
      compact.edges.push_back(std::move(e));
    }
    graph = std::move(compact);
  }

  if (graph.vertices.empty()) throw ResolutionError("skeletonize: empty skeleton graph");
  return graph;
}

}  // namespace ydim
