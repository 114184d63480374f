#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ydim/complex_poly.hpp"
#include "ydim/fit.hpp"
#include "ydim/grid.hpp"
#include "ydim/random.hpp"

namespace ydim {

/// Distance on continuum cells; pluggable so checks can run in the
/// estimated visual metric, Euclidean distance, or an exact test metric.
struct MetricView {
  std::string name;
  std::function<double(Cell, Cell)> dist;
};

inline MetricView euclidean_metric(const GridContinuum& s) {
  return {"euclidean",
          [&s](Cell a, Cell b) { return std::abs(s.center(a) - s.center(b)); }};
}

struct CoverElement {
  int level = 0;
  int id = 0;
  std::vector<Cell> cells;  // sorted
  int image_id = -1;        // element of the previous level; -1 at level 0
  int mapping_degree = 1;   // degree of f: element -> image element
};

struct CoverHierarchy {
  PolynomialMap map;
  GridContinuum grid;
  std::vector<std::vector<CoverElement>> levels;
  // per level: cell -> ids of elements containing it
  std::vector<std::unordered_map<Cell, std::vector<int>, CellHash>> membership;

  int depth() const { return static_cast<int>(levels.size()) - 1; }

  const CoverElement& element(int id) const {
    for (const auto& level : levels)
      for (const auto& e : level)
        if (e.id == id) return e;
    throw std::invalid_argument("CoverHierarchy: unknown element id");
  }

  /// Degree of f^level : element -> its level-0 ancestor.
  long long chain_degree(const CoverElement& e) const {
    long long acc = e.mapping_degree;
    const CoverElement* cur = &e;
    while (cur->image_id >= 0) {
      cur = &element(cur->image_id);
      if (cur->image_id >= 0) acc *= cur->mapping_degree;
    }
    return std::max(1LL, acc);
  }
};

namespace detail {

// image point of a cell and the matching tolerance radius: the image of a
// half-cell neighborhood has size ~ |f'| * h
struct CellImage {
  Complex point;
  double radius = 0.0;
};

inline CellImage cell_image(const PolynomialMap& f, const GridContinuum& s, Cell c) {
  const Complex z = s.center(c);
  const double grad = std::abs(derivative_at(f, z));
  return {evaluate(f, z), (0.75 + 0.8 * grad) * s.cell_width};
}

// cells of s within `radius` of a point
inline std::vector<Cell> cells_near(const GridContinuum& s, Complex p, double radius) {
  std::vector<Cell> out;
  const Cell base = s.cell_at(p);
  const int k = static_cast<int>(std::ceil(radius / s.cell_width)) + 1;
  for (int dj = -k; dj <= k; ++dj)
    for (int di = -k; di <= k; ++di) {
      Cell c{base.i + di, base.j + dj};
      if (s.contains(c) && std::abs(s.center(c) - p) <= radius) out.push_back(c);
    }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::optional<Cell> nearest_cell(const GridContinuum& s, Complex p,
                                        int max_rings = 12) {
  const Cell base = s.cell_at(p);
  std::optional<Cell> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int ring = 0; ring <= max_rings; ++ring) {
    for (int dj = -ring; dj <= ring; ++dj)
      for (int di = -ring; di <= ring; ++di) {
        if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
        Cell c{base.i + di, base.j + dj};
        if (!s.contains(c)) continue;
        const double d = std::abs(s.center(c) - p);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
    if (best && best_d <= (ring - 0.5) * s.cell_width) break;
  }
  return best;
}

}  // namespace detail

/// Default base cover: connected components of the intersections of s with
/// four overlapping half-plane bands (left/right/bottom/top, 60% deep each).
inline std::vector<std::vector<Cell>> default_base_cover(const GridContinuum& s) {
  const CellBounds b = bounds_of(s.cells);
  const double x0 = s.origin.real() + (b.i0 + 0.5) * s.cell_width;
  const double x1 = s.origin.real() + (b.i1 + 0.5) * s.cell_width;
  const double y0 = s.origin.imag() + (b.j0 + 0.5) * s.cell_width;
  const double y1 = s.origin.imag() + (b.j1 + 0.5) * s.cell_width;
  const double w = x1 - x0, h = y1 - y0;

  std::vector<std::function<bool(Complex)>> bands = {
      [=](Complex z) { return z.real() <= x0 + 0.6 * w; },
      [=](Complex z) { return z.real() >= x1 - 0.6 * w; },
      [=](Complex z) { return z.imag() <= y0 + 0.6 * h; },
      [=](Complex z) { return z.imag() >= y1 - 0.6 * h; },
  };

  std::vector<std::vector<Cell>> cover;
  for (const auto& band : bands) {
    CellSet in;
    for (const Cell& c : s.cells)
      if (band(s.center(c))) in.insert(c);
    for (auto& comp : components8(in))
      if (comp.size() >= 2) cover.push_back(std::move(comp));
  }
  return cover;
}

struct HierarchyOptions {
  std::size_t min_element_cells = 1;
  int degree_samples = 5;
};

/// U_{n+1} = connected components of the f-preimages of level-n elements,
/// with the single-step mapping degree of each component recorded (counted
/// by solving f = w at sample points of the image element).
inline CoverHierarchy build_hierarchy(const PolynomialMap& map, const GridContinuum& s,
                                      const std::vector<std::vector<Cell>>& u0, int depth,
                                      const HierarchyOptions& opt = {}) {
  if (depth < 0) throw std::invalid_argument("build_hierarchy: depth must be >= 0");
  if (u0.empty()) throw std::invalid_argument("build_hierarchy: empty base cover");

  CoverHierarchy h;
  h.map = map;
  h.grid = s;

  // base cover: connected, covering
  CellSet covered;
  int next_id = 0;
  h.levels.emplace_back();
  h.membership.emplace_back();
  for (const auto& cells : u0) {
    if (cells.empty()) throw std::invalid_argument("build_hierarchy: empty base element");
    CellSet cs(cells.begin(), cells.end());
    if (components8(cs).size() != 1)
      throw std::invalid_argument("build_hierarchy: base element not connected");
    CoverElement e;
    e.level = 0;
    e.id = next_id++;
    e.cells = std::vector<Cell>(cells.begin(), cells.end());
    std::sort(e.cells.begin(), e.cells.end());
    for (const Cell& c : e.cells) {
      covered.insert(c);
      h.membership[0][c].push_back(e.id);
    }
    h.levels[0].push_back(std::move(e));
  }
  for (const Cell& c : s.cells)
    if (!covered.count(c))
      throw std::invalid_argument("build_hierarchy: base cover misses part of the continuum");

  // image cell neighborhoods, shared by every level
  const auto cells_sorted = s.sorted_cells();
  std::unordered_map<Cell, std::vector<Cell>, CellHash> image_nbhd;
  image_nbhd.reserve(cells_sorted.size());
  for (const Cell& c : cells_sorted) {
    const auto im = detail::cell_image(map, s, c);
    auto near = detail::cells_near(s, im.point, im.radius);
    if (near.empty()) {
      // band-edge cells image slightly farther out; snap to the closest cell
      const auto snapped = detail::nearest_cell(s, im.point, 8);
      if (!snapped)
        throw ResolutionError(
            "build_hierarchy: a cell image lands outside the continuum (resolution fault)");
      near.push_back(*snapped);
    }
    image_nbhd.emplace(c, std::move(near));
  }

  for (int level = 0; level < depth; ++level) {
    h.levels.emplace_back();
    h.membership.emplace_back();
    auto& this_membership = h.membership[level + 1];
    const auto& prev_membership = h.membership[level];

    // one pass over the cells fills every parent's preimage set
    std::unordered_map<int, CellSet> pre_by_parent;
    {
      std::vector<int> ids;
      for (const Cell& c : cells_sorted) {
        ids.clear();
        for (const Cell& n : image_nbhd.at(c)) {
          const auto it = prev_membership.find(n);
          if (it == prev_membership.end()) continue;
          for (int id : it->second)
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        }
        for (int id : ids) pre_by_parent[id].insert(c);
      }
    }

    for (const auto& parent : h.levels[level]) {
      const CellSet& pre = pre_by_parent[parent.id];
      auto comps = components8(pre);

      // assign fiber points of sampled targets to the nearest component
      std::vector<int> degrees(comps.size(), 0);
      {
        std::vector<int> per_sample(comps.size(), 0);
        const int n_samples = std::min<int>(opt.degree_samples,
                                            static_cast<int>(parent.cells.size()));
        for (int si = 0; si < n_samples; ++si) {
          const std::size_t idx = (parent.cells.size() - 1) * si /
                                  std::max(1, n_samples - 1);
          const Complex w = s.center(parent.cells[idx]);
          std::vector<ClusteredRoot> fiber;
          try {
            fiber = preimages(map, w);
          } catch (const RootFindingError&) {
            continue;
          }
          std::fill(per_sample.begin(), per_sample.end(), 0);
          for (const auto& root : fiber) {
            double best_d = std::numeric_limits<double>::infinity();
            int best_comp = -1;
            for (std::size_t ci = 0; ci < comps.size(); ++ci) {
              for (const Cell& c : comps[ci]) {
                const double d = std::abs(s.center(c) - root.point);
                if (d < best_d) {
                  best_d = d;
                  best_comp = static_cast<int>(ci);
                }
              }
            }
            if (best_comp >= 0 && best_d <= 4.0 * s.cell_width *
                                               (1.0 + std::abs(derivative_at(map, root.point))))
              per_sample[best_comp] += root.multiplicity;
          }
          for (std::size_t ci = 0; ci < comps.size(); ++ci)
            degrees[ci] = std::max(degrees[ci], per_sample[ci]);
        }
      }

      for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        if (comps[ci].size() < opt.min_element_cells) continue;
        CoverElement e;
        e.level = level + 1;
        e.id = next_id++;
        e.cells = std::move(comps[ci]);
        e.image_id = parent.id;
        e.mapping_degree = std::max(1, degrees[ci]);
        for (const Cell& c : e.cells) this_membership[c].push_back(e.id);
        h.levels[level + 1].push_back(std::move(e));
      }
    }
  }
  return h;
}

// --- topological cxc axiom checks ------------------------------------------

struct ExpansionReport {
  std::vector<double> mesh;  // max element diameter per level
  std::string verdict;       // PASS / FAIL / insufficient depth
};

inline ExpansionReport check_expansion(const CoverHierarchy& h,
                                       const MetricView* metric = nullptr) {
  ExpansionReport report;
  for (const auto& level : h.levels) {
    double mesh = 0.0;
    for (const auto& e : level) {
      double d = 0.0;
      if (metric) {
        const auto& cells = e.cells;
        const std::size_t stride = std::max<std::size_t>(1, cells.size() / 200);
        for (std::size_t a = 0; a < cells.size(); a += stride)
          for (std::size_t b = a + stride; b < cells.size(); b += stride)
            d = std::max(d, metric->dist(cells[a], cells[b]));
      } else {
        d = diameter_of_cells(h.grid, e.cells);
      }
      mesh = std::max(mesh, d);
    }
    report.mesh.push_back(mesh);
  }
  if (report.mesh.size() < 3) {
    report.verdict = "insufficient depth";
    return report;
  }
  bool decreasing = true;
  for (std::size_t k = 2; k < report.mesh.size(); ++k)
    if (report.mesh[k] > 1.05 * report.mesh[k - 1]) decreasing = false;
  const bool halved = report.mesh.back() < 0.5 * report.mesh.front();
  report.verdict = (decreasing && halved) ? "PASS" : "FAIL";
  return report;
}

struct DegreeReport {
  std::vector<long long> per_level_max;  // max chain degree per level
  long long overall_max = 1;
  std::string verdict;  // PASS when stable across the deepest 3 levels
};

inline DegreeReport check_degree(const CoverHierarchy& h) {
  DegreeReport report;
  for (const auto& level : h.levels) {
    long long mx = 1;
    for (const auto& e : level) mx = std::max(mx, h.chain_degree(e));
    report.per_level_max.push_back(mx);
    report.overall_max = std::max(report.overall_max, mx);
  }
  const std::size_t n = report.per_level_max.size();
  if (n < 3) {
    report.verdict = "insufficient depth";
    return report;
  }
  report.verdict = (report.per_level_max[n - 1] == report.per_level_max[n - 2] &&
                    report.per_level_max[n - 2] == report.per_level_max[n - 3])
                       ? "PASS"
                       : "FAIL";
  return report;
}

/// Smallest n with the grid forward image of w covering all of s, or
/// nullopt when max_n is exhausted.
inline std::optional<int> check_irreducibility(const PolynomialMap& map,
                                               const GridContinuum& s,
                                               const std::vector<Cell>& w,
                                               int max_n = 64) {
  if (w.empty()) throw std::invalid_argument("check_irreducibility: empty start set");
  CellSet cur(w.begin(), w.end());
  for (int n = 0; n <= max_n; ++n) {
    if (cur.size() == s.cells.size()) return n;
    CellSet next;
    for (const Cell& c : cur) {
      const auto im = detail::cell_image(map, s, c);
      for (const Cell& t : detail::cells_near(s, im.point, im.radius)) next.insert(t);
    }
    if (next == cur && next.size() != s.cells.size()) return std::nullopt;  // stalled
    cur = std::move(next);
  }
  return std::nullopt;
}

// --- visual metric estimate --------------------------------------------------

/// Level-based metric estimate: m(x,y) is the deepest level with a cover
/// element containing both cells, and the distance is e^{-eps m}. Pairs
/// sharing no base element get m = -1 (documented cap), never an error;
/// the error case is a sample cell lying in no base element at all.
struct VisualMetricEstimate {
  double epsilon = 0.0;
  int depth = 0;
  std::vector<Cell> samples;
  std::vector<std::vector<int>> level_matrix;  // m(x,y) over the samples
  double C = 1.0;        // nearly-balls-I constant over the samples
  double r1 = 0.0;       // nearly-balls-II radius scale
  double r0 = 0.0;       // sandwich radius from the nearly-balls-III probe
  int max_level_gap = 0; // observed |W| - |W'| over sandwich pairs
  double max_sandwich_roundness = 1.0;
  double triangle_constant = 1.0;  // quasi-metric constant over sampled triples

  const CoverHierarchy* hierarchy = nullptr;
  std::unordered_map<Cell, std::size_t, CellHash> sample_index;

  int common_level(Cell a, Cell b) const {
    if (a == b) return depth;
    const auto ia = sample_index.find(a);
    const auto ib = sample_index.find(b);
    if (ia != sample_index.end() && ib != sample_index.end())
      return level_matrix[ia->second][ib->second];
    for (int n = depth; n >= 0; --n) {
      const auto& mem = hierarchy->membership[n];
      const auto ma = mem.find(a);
      const auto mb = mem.find(b);
      if (ma == mem.end() || mb == mem.end()) continue;
      for (int id : ma->second)
        if (std::find(mb->second.begin(), mb->second.end(), id) != mb->second.end())
          return n;
    }
    return -1;
  }

  double dist(Cell a, Cell b) const {
    if (a == b) return std::exp(-epsilon * depth);
    return std::exp(-epsilon * common_level(a, b));
  }

  MetricView metric_view() const {
    return {"visual-estimate", [this](Cell a, Cell b) { return dist(a, b); }};
  }
};

struct VisualMetricOptions {
  int n_samples = 160;
  int n_triples = 2000;
  std::uint64_t seed = 0x5eed;
};

inline VisualMetricEstimate visual_metric_estimate(const CoverHierarchy& h, double epsilon,
                                                   const VisualMetricOptions& opt = {}) {
  if (h.depth() < 4)
    throw std::invalid_argument("visual_metric_estimate: needs hierarchy depth >= 4");
  if (epsilon <= 0) throw std::invalid_argument("visual_metric_estimate: epsilon > 0");

  VisualMetricEstimate vm;
  vm.epsilon = epsilon;
  vm.depth = h.depth();
  vm.hierarchy = &h;

  const auto cells = h.grid.sorted_cells();
  std::vector<Complex> pts;
  for (const Cell& c : cells) pts.push_back(h.grid.center(c));
  Rng rng(opt.seed);
  for (std::size_t idx : farthest_point_sample(pts, opt.n_samples, rng))
    vm.samples.push_back(cells[idx]);

  for (const Cell& c : vm.samples)
    if (!h.membership[0].count(c))
      throw std::invalid_argument("visual_metric_estimate: base cover misses a sample");

  for (std::size_t k = 0; k < vm.samples.size(); ++k) vm.sample_index[vm.samples[k]] = k;
  {
    // deepest common level for every sample pair, straight from membership
    const std::size_t n = vm.samples.size();
    vm.level_matrix.assign(n, std::vector<int>(n, -1));
    for (std::size_t a = 0; a < n; ++a) vm.level_matrix[a][a] = vm.depth;
    for (int lvl = vm.depth; lvl >= 0; --lvl) {
      std::unordered_map<int, std::vector<std::size_t>> members;  // element -> samples
      const auto& mem = h.membership[lvl];
      for (std::size_t k = 0; k < n; ++k) {
        const auto it = mem.find(vm.samples[k]);
        if (it == mem.end()) continue;
        for (int id : it->second) members[id].push_back(k);
      }
      for (const auto& [id, group] : members)
        for (std::size_t a = 0; a < group.size(); ++a)
          for (std::size_t b = a + 1; b < group.size(); ++b) {
            auto& cell = vm.level_matrix[group[a]][group[b]];
            if (cell < lvl) {
              cell = lvl;
              vm.level_matrix[group[b]][group[a]] = lvl;
            }
          }
    }
  }

  // nearly-balls I: smallest C with B(x, e^{-eps|W|}/C) subset W subset B(x, C e^{-eps|W|})
  double C = 1.0;
  for (int n = 0; n <= vm.depth; ++n) {
    for (const auto& e : h.levels[n]) {
      const CellSet in(e.cells.begin(), e.cells.end());
      double best_for_elt = std::numeric_limits<double>::infinity();
      bool has_sample = false;
      for (const Cell& x : vm.samples) {
        if (!in.count(x)) continue;
        has_sample = true;
        double out_r = 0.0;
        double in_r = std::numeric_limits<double>::infinity();
        for (const Cell& y : vm.samples) {
          if (y == x) continue;  // the level cap gives x a positive self-distance
          const double d = vm.dist(x, y);
          if (in.count(y)) out_r = std::max(out_r, d);
          else in_r = std::min(in_r, d);
        }
        const double scale = std::exp(-epsilon * n);
        double cx = std::max(out_r / scale, 1.0);
        if (std::isfinite(in_r) && in_r > 0) cx = std::max(cx, scale / in_r);
        best_for_elt = std::min(best_for_elt, cx);
      }
      if (has_sample) C = std::max(C, best_for_elt);
    }
  }
  vm.C = C;

  // nearly-balls II: largest r1 with some level-n element swallowing
  // B(x, r1 e^{-eps n}) for every sample and level
  double r1 = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= vm.depth; ++n) {
    const auto& mem = h.membership[n];
    for (const Cell& x : vm.samples) {
      const auto it = mem.find(x);
      double best = 0.0;
      if (it != mem.end()) {
        for (int id : it->second) {
          const auto& e = h.element(id);
          const CellSet in(e.cells.begin(), e.cells.end());
          double in_r = std::numeric_limits<double>::infinity();
          for (const Cell& y : vm.samples)
            if (!in.count(y)) in_r = std::min(in_r, vm.dist(x, y));
          if (!std::isfinite(in_r)) in_r = std::exp(-epsilon * 0.0);
          best = std::max(best, in_r);
        }
      }
      r1 = std::min(r1, best * std::exp(epsilon * n));
    }
  }
  vm.r1 = std::isfinite(r1) ? r1 : 0.0;

  // nearly-balls III probe: sandwich W' subset B(x,r) subset W on a radius
  // grid, walked from small radii upward; r0 is the last radius below which
  // every smaller probe still found a sandwich at every sample. The grid
  // bottoms out at the sampled metric's resolution e^{-eps depth}.
  {
    double r0 = 0.0;
    const double r_max = std::exp(-epsilon * 0.0);
    const double r_floor = 1.9 * std::exp(-epsilon * vm.depth);
    int gi_hi = 1;
    while (r_max * std::pow(0.5, gi_hi + 1) >= r_floor && gi_hi < 40) ++gi_hi;
    bool all_ok = true;
    for (int gi = gi_hi; gi >= 1 && all_ok; --gi) {
      const double r = r_max * std::pow(0.5, gi);
      for (const Cell& x : vm.samples) {
        const CoverElement* inner = nullptr;
        const CoverElement* outer = nullptr;
        for (int n = vm.depth; n >= 0 && !inner; --n) {
          const auto it = h.membership[n].find(x);
          if (it == h.membership[n].end()) continue;
          for (int id : it->second) {
            const auto& e = h.element(id);
            const CellSet in(e.cells.begin(), e.cells.end());
            double out_r = 0.0;
            for (const Cell& y : vm.samples)
              if (y != x && in.count(y)) out_r = std::max(out_r, vm.dist(x, y));
            if (out_r <= r) {
              inner = &e;
              break;
            }
          }
        }
        for (int n = 0; n <= vm.depth && !outer; ++n) {
          const auto it = h.membership[n].find(x);
          if (it == h.membership[n].end()) continue;
          for (int id : it->second) {
            const auto& e = h.element(id);
            const CellSet in(e.cells.begin(), e.cells.end());
            bool swallows = true;
            for (const Cell& y : vm.samples)
              if (vm.dist(x, y) <= r && !in.count(y)) swallows = false;
            if (swallows) {
              outer = &e;
              break;
            }
          }
        }
        if (!inner || !outer) {
          all_ok = false;
          break;
        }
        vm.max_level_gap = std::max(vm.max_level_gap, outer->level - inner->level);
        // roundness of the sandwich elements about x in the estimate metric
        for (const CoverElement* e : {inner, outer}) {
          const CellSet in(e->cells.begin(), e->cells.end());
          double circ = 0.0, inr = std::numeric_limits<double>::infinity();
          for (const Cell& y : vm.samples) {
            if (y == x) continue;
            const double d = vm.dist(x, y);
            if (in.count(y)) circ = std::max(circ, d);
            else inr = std::min(inr, d);
          }
          if (std::isfinite(inr) && inr > 0)
            vm.max_sandwich_roundness =
                std::max(vm.max_sandwich_roundness, std::max(1.0, circ / inr));
        }
      }
      if (all_ok) r0 = r;
    }
    vm.r0 = r0;
  }

  // quasi-metric triangle constant over sampled triples
  double K = 1.0;
  for (int t = 0; t < opt.n_triples; ++t) {
    const Cell x = vm.samples[rng.index(vm.samples.size())];
    const Cell y = vm.samples[rng.index(vm.samples.size())];
    const Cell z = vm.samples[rng.index(vm.samples.size())];
    if (x == y || y == z || x == z) continue;
    const double d = vm.dist(x, z);
    const double via = vm.dist(x, y) + vm.dist(y, z);
    if (via > 0) K = std::max(K, d / via);
  }
  vm.triangle_constant = K;
  return vm;
}

// --- distortion statistics ---------------------------------------------------

inline double roundness_in_metric(const CoverHierarchy& h, const CoverElement& e, Cell a,
                                  const MetricView& metric) {
  const CellSet in(e.cells.begin(), e.cells.end());
  double circ = 0.0;
  for (const Cell& c : e.cells) circ = std::max(circ, metric.dist(a, c));
  double inr = std::numeric_limits<double>::infinity();
  const std::size_t stride =
      std::max<std::size_t>(1, h.grid.cells.size() / 4000);
  const auto cells = h.grid.sorted_cells();
  for (std::size_t k = 0; k < cells.size(); k += stride)
    if (!in.count(cells[k])) inr = std::min(inr, metric.dist(a, cells[k]));
  if (!std::isfinite(inr) || inr <= 0) return 1.0;
  inr = std::min(inr, std::max(circ, 1e-300));
  return std::max(1.0, circ / inr);
}

struct DistortionStats {
  // (round(U, y), round(U~, y~)) pairs, with U~ -> U under f^k
  std::vector<std::pair<double, double>> roundness_pairs;
  // (diam U'/diam U, diam U~'/diam U~) for nested pairs carried by f^k
  std::vector<std::pair<double, double>> diameter_pairs;
  MonotoneEnvelope rho_minus;    // backward roundness envelope
  MonotoneEnvelope rho_plus;     // forward roundness envelope
  MonotoneEnvelope delta_minus;  // backward relative-diameter envelope
  MonotoneEnvelope delta_plus;   // forward relative-diameter envelope
  std::string verdict;           // PASS when envelopes stabilize across depth
};

struct DistortionOptions {
  int max_tuples = 400;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

inline std::optional<Cell> image_cell_k(const CoverHierarchy& h, Cell c, int k) {
  Complex z = h.grid.center(c);
  for (int it = 0; it < k; ++it) z = evaluate(h.map, z);
  return nearest_cell(h.grid, z, 16);
}

inline double metric_diameter(const CoverElement& e, const MetricView& metric) {
  const auto& cells = e.cells;
  const std::size_t stride = std::max<std::size_t>(1, cells.size() / 150);
  double d = 0.0;
  for (std::size_t a = 0; a < cells.size(); a += stride)
    for (std::size_t b = a + stride; b < cells.size(); b += stride)
      d = std::max(d, metric.dist(cells[a], cells[b]));
  return d;
}

inline bool subset_with_slack(const CoverElement& inner, const CoverElement& outer) {
  const CellSet out = dilate(CellSet(outer.cells.begin(), outer.cells.end()), 1);
  for (const Cell& c : inner.cells)
    if (!out.count(c)) return false;
  return true;
}

}  // namespace detail

inline DistortionStats check_distortion(const CoverHierarchy& h, const MetricView& metric,
                                        const DistortionOptions& opt = {}) {
  if (h.depth() < 4)
    throw std::invalid_argument("check_distortion: insufficient nesting (depth < 4)");
  DistortionStats stats;
  Rng rng(opt.seed);

  // roundness pairs along image chains
  std::vector<std::pair<double, int>> level_split;  // (round base, level) for verdict
  for (int tuple = 0; tuple < opt.max_tuples; ++tuple) {
    const int lvl = 1 + static_cast<int>(rng.index(h.depth()));
    if (h.levels[lvl].empty()) continue;
    const auto& telt = h.levels[lvl][rng.index(h.levels[lvl].size())];
    const int k = lvl;  // chain all the way to level 0
    const Cell ty = telt.cells[rng.index(telt.cells.size())];
    const auto y = detail::image_cell_k(h, ty, k);
    if (!y) continue;
    // find the chain ancestor at level 0
    const CoverElement* base = &telt;
    while (base->image_id >= 0) base = &h.element(base->image_id);
    const CellSet base_cells(base->cells.begin(), base->cells.end());
    if (!base_cells.count(*y)) continue;  // image fell into overlap slack; skip
    const double r_base = roundness_in_metric(h, *base, *y, metric);
    const double r_tilde = roundness_in_metric(h, telt, ty, metric);
    stats.roundness_pairs.emplace_back(r_base, r_tilde);
    level_split.emplace_back(r_base, lvl);
  }

  // nested diameter pairs carried by f^k: tilde pair at levels (n0+k, n1+k)
  // with image pair at levels (n0, n1), n0 < n1
  for (int tuple = 0; tuple < opt.max_tuples; ++tuple) {
    if (h.depth() < 3) break;
    const int k = 1 + static_cast<int>(rng.index(h.depth() - 2));
    const int min_l1 = k + 1;
    if (min_l1 > h.depth()) continue;
    const int l1 = min_l1 + static_cast<int>(rng.index(h.depth() - min_l1 + 1));
    const int n1 = l1 - k;
    const int n0 = static_cast<int>(rng.index(n1));  // 0 .. n1-1
    const int l0 = n0 + k;
    if (h.levels[l1].empty()) continue;
    const auto& tilde_inner = h.levels[l1][rng.index(h.levels[l1].size())];
    // outer tilde element at level l0 containing the inner one
    const CoverElement* tilde_outer = nullptr;
    const auto it = h.membership[l0].find(tilde_inner.cells.front());
    if (it == h.membership[l0].end()) continue;
    for (int id : it->second) {
      const auto& cand = h.element(id);
      if (detail::subset_with_slack(tilde_inner, cand)) {
        tilde_outer = &cand;
        break;
      }
    }
    if (!tilde_outer) continue;
    // push both through k chain steps
    const CoverElement* inner_img = &tilde_inner;
    const CoverElement* outer_img = tilde_outer;
    bool broke = false;
    for (int step = 0; step < k; ++step) {
      if (inner_img->image_id < 0 || outer_img->image_id < 0) {
        broke = true;
        break;
      }
      inner_img = &h.element(inner_img->image_id);
      outer_img = &h.element(outer_img->image_id);
    }
    if (broke) continue;
    if (!detail::subset_with_slack(*inner_img, *outer_img)) continue;
    const double dti = detail::metric_diameter(tilde_inner, metric);
    const double dto = detail::metric_diameter(*tilde_outer, metric);
    const double dbi = detail::metric_diameter(*inner_img, metric);
    const double dbo = detail::metric_diameter(*outer_img, metric);
    if (dto <= 0 || dbo <= 0) continue;
    stats.diameter_pairs.emplace_back(std::min(1.0, dbi / dbo), std::min(1.0, dti / dto));
  }

  stats.rho_minus = upper_envelope(stats.roundness_pairs);
  {
    std::vector<std::pair<double, double>> swapped;
    for (auto [a, b] : stats.roundness_pairs) swapped.emplace_back(b, a);
    stats.rho_plus = upper_envelope(swapped);
  }
  stats.delta_minus = upper_envelope(stats.diameter_pairs);
  {
    std::vector<std::pair<double, double>> swapped;
    for (auto [a, b] : stats.diameter_pairs) swapped.emplace_back(b, a);
    stats.delta_plus = upper_envelope(swapped);
  }

  // stability: envelope from the shallow half vs everything
  if (stats.roundness_pairs.size() < 8) {
    stats.verdict = "insufficient data";
    return stats;
  }
  std::vector<std::pair<double, double>> shallow;
  for (std::size_t k = 0; k < stats.roundness_pairs.size(); ++k)
    if (level_split[k].second <= h.depth() / 2) shallow.push_back(stats.roundness_pairs[k]);
  if (shallow.size() < 4) {
    stats.verdict = "insufficient data";
    return stats;
  }
  const MonotoneEnvelope env_shallow = upper_envelope(shallow);
  double worst_ratio = 1.0;
  for (const auto& [x, y] : stats.rho_minus.breakpoints) {
    const double s = env_shallow.eval(x);
    if (s > 0) worst_ratio = std::max(worst_ratio, y / s);
  }
  stats.verdict = (worst_ratio <= 1.6) ? "PASS" : "UNSTABLE";
  return stats;
}

// --- homothety and quasi-symmetry modulus ------------------------------------

struct HomothetyOptions {
  int n_pairs = 400;
  std::optional<double> expected_kappa;  // count violations against this bound
  double min_distance = 0.0;  // skip pairs below metric resolution
  std::uint64_t seed = 0x5eed;
};

struct HomothetyReport {
  double kappa = 0.0;      // estimated largest k with d(x,y) >= k d(f x, f y)
  int violations = 0;      // pairs violating the expected bound, when given
  int pairs_used = 0;
};

inline HomothetyReport homothety_check(const PolynomialMap& map, const GridContinuum& s,
                                       const MetricView& metric,
                                       const HomothetyOptions& opt = {}) {
  const auto cells = s.sorted_cells();
  Rng rng(opt.seed);
  HomothetyReport report;
  report.kappa = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opt.n_pairs; ++k) {
    const Cell x = cells[rng.index(cells.size())];
    const Cell y = cells[rng.index(cells.size())];
    if (x == y) continue;
    const auto fx = detail::nearest_cell(s, evaluate(map, s.center(x)), 16);
    const auto fy = detail::nearest_cell(s, evaluate(map, s.center(y)), 16);
    if (!fx || !fy || *fx == *fy) continue;
    const double d = metric.dist(x, y);
    const double df = metric.dist(*fx, *fy);
    if (df <= 0 || d <= 0) continue;
    if (d < opt.min_distance || df < opt.min_distance) continue;
    ++report.pairs_used;
    report.kappa = std::min(report.kappa, d / df);
    if (opt.expected_kappa && d < (*opt.expected_kappa) * df * (1.0 - 0.05))
      ++report.violations;
  }
  if (!std::isfinite(report.kappa)) report.kappa = 0.0;
  return report;
}

struct QsModulusEstimate {
  std::vector<std::pair<double, double>> scatter;  // (ratio_A, ratio_B)
  MonotoneEnvelope envelope;
  int skipped = 0;  // zero-denominator triples
  PowerFit envelope_power;
  bool qs_consistent = false;
};

/// Empirical quasi-symmetry modulus between two metrics on shared sample
/// points: scatter of distance-ratio pairs with its monotone upper envelope.
template <typename DistA, typename DistB>
inline QsModulusEstimate qs_modulus_estimate(std::size_t n_points, DistA&& dA, DistB&& dB,
                                             int n_triples = 4000,
                                             std::uint64_t seed = 0x5eed) {
  if (n_points < 3) throw std::invalid_argument("qs_modulus_estimate: need >= 3 points");
  Rng rng(seed);
  QsModulusEstimate out;
  for (int t = 0; t < n_triples; ++t) {
    const std::size_t x = rng.index(n_points);
    const std::size_t y = rng.index(n_points);
    const std::size_t z = rng.index(n_points);
    if (x == z || x == y || y == z) continue;
    const double axy = dA(x, y), axz = dA(x, z);
    const double bxy = dB(x, y), bxz = dB(x, z);
    if (axz <= 0 || bxz <= 0) {
      ++out.skipped;
      continue;
    }
    out.scatter.emplace_back(axy / axz, bxy / bxz);
  }
  out.envelope = upper_envelope(out.scatter);
  if (out.envelope.breakpoints.size() >= 2) {
    try {
      out.envelope_power = power_fit(out.envelope.breakpoints);
    } catch (const std::invalid_argument&) {
    }
  }
  // consistency: envelope over a half-sample agrees with the full envelope
  // at moderate ratio probes
  if (out.scatter.size() >= 16) {
    std::vector<std::pair<double, double>> half(out.scatter.begin(),
                                                out.scatter.begin() + out.scatter.size() / 2);
    const MonotoneEnvelope env_half = upper_envelope(half);
    bool ok = true;
    for (double probe : {0.5, 1.0, 2.0}) {
      const double a = env_half.eval(probe), b = out.envelope.eval(probe);
      if (a <= 0 || b / a > 2.0) ok = false;
    }
    out.qs_consistent = ok;
  }
  return out;
}

}  // namespace ydim
