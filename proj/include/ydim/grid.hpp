#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace ydim {

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Cell {
  int i = 0;
  int j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct CellHash {
  std::size_t operator()(const Cell& c) const noexcept {
    std::uint64_t v = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.i)) << 32) |
                      static_cast<std::uint32_t>(c.j);
    v ^= v >> 33;
    v *= 0xff51afd7ed558ccdULL;
    v ^= v >> 33;
    v *= 0xc4ceb9fe1a85ec53ULL;
    v ^= v >> 33;
    return static_cast<std::size_t>(v);
  }
};

using CellSet = std::unordered_set<Cell, CellHash>;

struct CellBounds {
  int i0 = 0, j0 = 0, i1 = -1, j1 = -1;  // inclusive; empty when i1 < i0
  int width() const { return i1 - i0 + 1; }
  int height() const { return j1 - j0 + 1; }
};

inline CellBounds bounds_of(const CellSet& cells) {
  CellBounds b;
  bool first = true;
  for (const Cell& c : cells) {
    if (first) {
      b = {c.i, c.j, c.i, c.j};
      first = false;
    } else {
      b.i0 = std::min(b.i0, c.i);
      b.j0 = std::min(b.j0, c.j);
      b.i1 = std::max(b.i1, c.i);
      b.j1 = std::max(b.j1, c.j);
    }
  }
  return b;
}

/// Connected pixel discretization of a compact planar continuum.
/// The set is 8-connected; its complement is read with 4-connectivity.
/// World center of cell (i,j) is origin + cell_width*((i+.5) + (j+.5) i).
struct GridContinuum {
  std::complex<double> origin{0.0, 0.0};
  double cell_width = 1.0;
  CellSet cells;

  std::complex<double> center(Cell c) const {
    return origin + std::complex<double>((c.i + 0.5) * cell_width, (c.j + 0.5) * cell_width);
  }

  Cell cell_at(std::complex<double> p) const {
    return {static_cast<int>(std::floor((p.real() - origin.real()) / cell_width)),
            static_cast<int>(std::floor((p.imag() - origin.imag()) / cell_width))};
  }

  bool contains(Cell c) const { return cells.count(c) > 0; }

  std::vector<Cell> sorted_cells() const {
    std::vector<Cell> v(cells.begin(), cells.end());
    std::sort(v.begin(), v.end());
    return v;
  }

  void validate() const;
};

inline const std::array<Cell, 8>& neighbor_offsets8() {
  static const std::array<Cell, 8> off = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                           {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
  return off;
}

inline const std::array<Cell, 4>& neighbor_offsets4() {
  static const std::array<Cell, 4> off = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  return off;
}

/// 8-connected components, deterministic order (seeded from sorted cells).
inline std::vector<std::vector<Cell>> components8(const CellSet& cells) {
  std::vector<std::vector<Cell>> comps;
  CellSet seen;
  std::vector<Cell> all(cells.begin(), cells.end());
  std::sort(all.begin(), all.end());
  for (const Cell& root : all) {
    if (seen.count(root)) continue;
    std::vector<Cell> comp;
    std::deque<Cell> queue{root};
    seen.insert(root);
    while (!queue.empty()) {
      Cell c = queue.front();
      queue.pop_front();
      comp.push_back(c);
      for (const Cell& d : neighbor_offsets8()) {
        Cell n{c.i + d.i, c.j + d.j};
        if (cells.count(n) && !seen.count(n)) {
          seen.insert(n);
          queue.push_back(n);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

inline void GridContinuum::validate() const {
  if (cells.size() < 2) throw std::invalid_argument("GridContinuum: needs >= 2 cells");
  if (components8(cells).size() != 1)
    throw std::invalid_argument("GridContinuum: cells are not 8-connected");
}

inline CellSet dilate(const CellSet& cells, int rounds = 1) {
  CellSet out = cells;
  for (int r = 0; r < rounds; ++r) {
    CellSet next = out;
    for (const Cell& c : out)
      for (const Cell& d : neighbor_offsets8()) next.insert({c.i + d.i, c.j + d.j});
    out = std::move(next);
  }
  return out;
}

// --- diameter via convex hull + rotating calipers -------------------------

namespace detail {

inline double cross(std::complex<double> o, std::complex<double> a, std::complex<double> b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) -
         (a.imag() - o.imag()) * (b.real() - o.real());
}

inline std::vector<std::complex<double>> convex_hull(std::vector<std::complex<double>> pts) {
  std::sort(pts.begin(), pts.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<std::complex<double>> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace detail

inline double diameter_of_points(const std::vector<std::complex<double>>& pts) {
  if (pts.empty()) return 0.0;
  const auto hull = detail::convex_hull(pts);
  if (hull.size() == 1) return 0.0;
  double best = 0.0;
  std::size_t j = 1;
  const std::size_t m = hull.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto edge = hull[(i + 1) % m] - hull[i];
    while (std::abs(detail::cross({0, 0}, edge, hull[(j + 1) % m] - hull[i])) >
           std::abs(detail::cross({0, 0}, edge, hull[j] - hull[i])))
      j = (j + 1) % m;
    best = std::max(best, std::abs(hull[i] - hull[j]));
    best = std::max(best, std::abs(hull[(i + 1) % m] - hull[j]));
  }
  return best;
}

inline double diameter_of_cells(const GridContinuum& s, const std::vector<Cell>& cells) {
  std::vector<std::complex<double>> pts;
  pts.reserve(cells.size());
  for (const Cell& c : cells) pts.push_back(s.center(c));
  return diameter_of_points(pts);
}

/// Max pairwise Euclidean distance between cell centers.
inline double diameter(const GridContinuum& s) {
  return diameter_of_cells(s, std::vector<Cell>(s.cells.begin(), s.cells.end()));
}

/// Cells of s whose centers lie within Euclidean distance r of x.
inline std::vector<Cell> ball(const GridContinuum& s, std::complex<double> x, double r) {
  if (r <= 0) throw std::invalid_argument("ball: radius must be positive");
  std::vector<Cell> out;
  for (const Cell& c : s.cells)
    if (std::abs(s.center(c) - x) <= r) out.push_back(c);
  if (out.empty()) throw std::invalid_argument("ball: empty intersection with continuum");
  std::sort(out.begin(), out.end());
  return out;
}

/// Circumradius-to-inradius ratio of `region` about point a, measured within
/// the continuum: the inradius is the distance from a to the nearest cell of
/// s outside the region, clamped to the circumradius so the ratio is >= 1.
inline double roundness(const GridContinuum& s, const CellSet& region,
                        std::complex<double> a) {
  if (region.empty()) throw std::invalid_argument("roundness: empty region");
  if (!region.count(s.cell_at(a)))
    throw std::invalid_argument("roundness: point is not inside the region");
  double circum = 0.0;
  for (const Cell& c : region) circum = std::max(circum, std::abs(s.center(c) - a));
  double inradius = std::numeric_limits<double>::infinity();
  for (const Cell& c : s.cells)
    if (!region.count(c)) inradius = std::min(inradius, std::abs(s.center(c) - a));
  inradius = std::min(inradius, std::max(circum, s.cell_width));
  if (inradius < s.cell_width)
    throw ResolutionError("roundness: inradius below one cell width (resolution-limited)");
  return std::max(1.0, circum / inradius);
}

inline double roundness(const GridContinuum& s, const std::vector<Cell>& region,
                        std::complex<double> a) {
  return roundness(s, CellSet(region.begin(), region.end()), a);
}

/// Number of 8-connected components after removing a small disk about x.
/// Degree-3 branching shows up as >= 3 remaining components.
inline int cut_components(const GridContinuum& s, std::complex<double> x,
                          double removal_radius) {
  CellSet remaining = s.cells;
  for (const Cell& c : s.cells)
    if (std::abs(s.center(c) - x) <= removal_radius) remaining.erase(c);
  if (remaining.empty()) return 0;
  return static_cast<int>(components8(remaining).size());
}

/// First Betti number of the union of closed cells, via the Euler
/// characteristic of the square complex: rank = #components - (V - E + F).
inline int cycle_rank(const CellSet& cells) {
  struct PairHash {
    std::size_t operator()(const std::pair<long long, long long>& p) const noexcept {
      CellHash h;
      return h(Cell{static_cast<int>(p.first), static_cast<int>(p.second)});
    }
  };
  std::unordered_set<std::pair<long long, long long>, PairHash> verts, hedges, vedges;
  for (const Cell& c : cells) {
    verts.insert({c.i, c.j});
    verts.insert({c.i + 1, c.j});
    verts.insert({c.i, c.j + 1});
    verts.insert({c.i + 1, c.j + 1});
    hedges.insert({2LL * c.i + 1, 2LL * c.j});      // bottom
    hedges.insert({2LL * c.i + 1, 2LL * c.j + 2});  // top
    vedges.insert({2LL * c.i, 2LL * c.j + 1});      // left
    vedges.insert({2LL * c.i + 2, 2LL * c.j + 1});  // right
  }
  const long long V = static_cast<long long>(verts.size());
  const long long E = static_cast<long long>(hedges.size() + vedges.size());
  const long long F = static_cast<long long>(cells.size());
  const long long chi = V - E + F;
  const long long comps = static_cast<long long>(components8(cells).size());
  return static_cast<int>(comps - chi);
}

/// Fill 4-connected holes of the set whose area is below `max_cells`.
/// Used to clean pinholes out of rasterized curves before thinning.
inline CellSet fill_small_holes(const CellSet& cells, std::size_t max_cells) {
  if (cells.empty()) return cells;
  CellBounds b = bounds_of(cells);
  b.i0 -= 1; b.j0 -= 1; b.i1 += 1; b.j1 += 1;
  CellSet visited;
  CellSet out = cells;
  for (int j = b.j0; j <= b.j1; ++j) {
    for (int i = b.i0; i <= b.i1; ++i) {
      Cell start{i, j};
      if (cells.count(start) || visited.count(start)) continue;
      std::vector<Cell> comp;
      std::deque<Cell> queue{start};
      visited.insert(start);
      bool touches_border = false;
      while (!queue.empty()) {
        Cell c = queue.front();
        queue.pop_front();
        comp.push_back(c);
        if (c.i == b.i0 || c.i == b.i1 || c.j == b.j0 || c.j == b.j1) touches_border = true;
        for (const Cell& d : neighbor_offsets4()) {
          Cell n{c.i + d.i, c.j + d.j};
          if (n.i < b.i0 || n.i > b.i1 || n.j < b.j0 || n.j > b.j1) continue;
          if (!cells.count(n) && !visited.count(n)) {
            visited.insert(n);
            queue.push_back(n);
          }
        }
      }
      if (!touches_border && comp.size() <= max_cells)
        for (const Cell& c : comp) out.insert(c);
    }
  }
  return out;
}

}  // namespace ydim
