#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ydim/fit.hpp"
#include "ydim/grid.hpp"
#include "ydim/random.hpp"
#include "ydim/skeleton.hpp"
#include "ydim/topology.hpp"
#include "ydim/ytree.hpp"

namespace ydim {

/// Achieved antenna constant of a Y inside a region of the given diameter:
/// the smallest tip-to-other-legs distance, divided by the diameter.
inline double antenna_constant(const YTree& y, double region_diameter) {
  if (region_diameter <= 0)
    throw std::invalid_argument("antenna_constant: region diameter must be positive");
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const Complex tip = y.legs[i].end();
    double d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      d = std::min(d, point_polyline_distance(tip, y.legs[j]));
    }
    worst = std::min(worst, d);
  }
  return worst / region_diameter;
}

/// A ball, a Y inside it, and the constant the pair achieves.
struct AntennaCertificate {
  Complex ball_center;
  double ball_radius = 0.0;
  YTree ytree;
  double c_achieved = 0.0;
};

struct AntennaSearchOptions {
  double prune_factor = 2.0;  // spur pruning in cell widths inside the ball
  std::size_t min_ball_cells = 8;
  std::size_t min_component_cells = 8;
};

/// Best Y-certificate inside ball-intersected cells of s, or nothing when
/// no branch point survives skeletonization at this resolution. The search
/// is greedy over skeleton branch vertices, incident-arc triples, and a few
/// trim lengths.
inline std::optional<AntennaCertificate> find_antenna(
    const GridContinuum& s, const std::vector<Cell>& ball_cells, Complex ball_center,
    double ball_radius, double c_min, const AntennaSearchOptions& opt = {}) {
  if (ball_cells.size() < opt.min_ball_cells)
    throw ResolutionError("find_antenna: ball smaller than the resolution floor");
  const double region_diam = diameter_of_cells(s, ball_cells);
  if (region_diam <= 0) throw ResolutionError("find_antenna: degenerate ball");

  const CellSet ball_set(ball_cells.begin(), ball_cells.end());
  std::optional<AntennaCertificate> best;

  for (const auto& comp : components8(ball_set)) {
    if (comp.size() < opt.min_component_cells) continue;
    GridContinuum patch;
    patch.origin = s.origin;
    patch.cell_width = s.cell_width;
    patch.cells = CellSet(comp.begin(), comp.end());

    SkeletonGraph g;
    try {
      g = skeletonize(patch, opt.prune_factor * s.cell_width);
    } catch (const ResolutionError&) {
      continue;
    }
    const auto deg = g.vertex_degrees();
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
      if (deg[v] < 3) continue;
      const auto arcs = detail::incident_arcs(g, static_cast<int>(v));
      if (arcs.size() < 3) continue;
      const std::size_t n = std::min<std::size_t>(arcs.size(), 5);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          for (std::size_t c = b + 1; c < n; ++c) {
            const double len =
                std::min({arcs[a].length(), arcs[b].length(), arcs[c].length()});
            for (const double frac : {1.0, 0.6, 0.35}) {
              const double L = len * frac;
              if (L < 1.5 * s.cell_width) continue;
              YTree y;
              y.center = g.vertices[v];
              y.legs[0] = arcs[a].trimmed_to_length(L);
              y.legs[1] = arcs[b].trimmed_to_length(L);
              y.legs[2] = arcs[c].trimmed_to_length(L);
              if (!y.is_valid(s.cell_width)) continue;
              const double cval = antenna_constant(y, region_diam);
              if (cval <= 0) continue;
              if (!best || cval > best->c_achieved)
                best = AntennaCertificate{ball_center, ball_radius, y, cval};
            }
          }
        }
      }
    }
  }
  if (best && best->c_achieved >= c_min) return best;
  return std::nullopt;
}

enum class ScanStatus { Ok, NoAntenna, ResolutionLimited };

inline const char* to_string(ScanStatus s) {
  switch (s) {
    case ScanStatus::Ok: return "ok";
    case ScanStatus::NoAntenna: return "no-antenna";
    case ScanStatus::ResolutionLimited: return "resolution-limited";
  }
  return "no-antenna";
}

struct ScanEntry {
  double scale = 0.0;
  Complex center;
  double c = 0.0;  // 0 when no certificate
  ScanStatus status = ScanStatus::NoAntenna;
  std::optional<AntennaCertificate> certificate;
};

/// Multi-scale scan: per-scale worst constants, hard failures (balls with
/// no antenna), and soft resolution-limited balls kept separately.
struct AntennaScanReport {
  std::vector<double> scales;
  std::vector<double> per_scale_worst_c;  // NaN when a scale had no certificate
  double global_inf_c = 0.0;
  std::vector<ScanEntry> entries;
  int hard_failures = 0;
  int resolution_limited = 0;
  bool antenna_like_at_tested_scales = false;  // no hard failures and inf c > 0
};

struct ScanOptions {
  int n_scales = 4;
  int n_centers = 16;
  double c_min = 0.0;
  double r_min = 0.0;  // 0 = resolution floor (8 cell widths)
  double r_max = 0.0;  // 0 = half the diameter
  std::uint64_t seed = 0x5eed;
  AntennaSearchOptions search{};
};

inline AntennaScanReport antenna_scan(const GridContinuum& s, const ScanOptions& opt = {}) {
  if (opt.n_scales < 2) throw std::invalid_argument("antenna_scan: need >= 2 scales");
  if (opt.n_centers < 1) throw std::invalid_argument("antenna_scan: need >= 1 center");
  const double diam = diameter(s);
  const double r_lo = (opt.r_min > 0) ? opt.r_min : 8.0 * s.cell_width;
  const double r_hi = (opt.r_max > 0) ? opt.r_max : 0.5 * diam;
  if (r_lo < 8.0 * s.cell_width)
    throw std::invalid_argument("antenna_scan: radii must stay above 8 cell widths");
  if (r_hi > 0.5 * diam + 1e-12)
    throw std::invalid_argument("antenna_scan: radii must stay below half the diameter");
  if (r_lo >= r_hi)
    throw ResolutionError("antenna_scan: continuum too small for the scale range");

  AntennaScanReport report;
  for (int k = 0; k < opt.n_scales; ++k) {
    const double t = (opt.n_scales == 1) ? 0.0
                                         : static_cast<double>(k) / (opt.n_scales - 1);
    report.scales.push_back(r_lo * std::pow(r_hi / r_lo, t));
  }

  const auto cells = s.sorted_cells();
  std::vector<Complex> pts;
  pts.reserve(cells.size());
  for (const Cell& c : cells) pts.push_back(s.center(c));
  Rng rng(opt.seed);
  const auto chosen = farthest_point_sample(pts, opt.n_centers, rng);

  report.global_inf_c = std::numeric_limits<double>::infinity();
  for (const double r : report.scales) {
    double worst = std::numeric_limits<double>::infinity();
    bool any_ok = false;
    for (const std::size_t idx : chosen) {
      ScanEntry entry;
      entry.scale = r;
      entry.center = pts[idx];
      try {
        const auto cells_in = ball(s, entry.center, r);
        const auto cert =
            find_antenna(s, cells_in, entry.center, r, opt.c_min, opt.search);
        if (cert) {
          entry.status = ScanStatus::Ok;
          entry.c = cert->c_achieved;
          entry.certificate = cert;
          worst = std::min(worst, entry.c);
          any_ok = true;
        } else {
          entry.status = ScanStatus::NoAntenna;
          ++report.hard_failures;
        }
      } catch (const ResolutionError&) {
        entry.status = ScanStatus::ResolutionLimited;
        ++report.resolution_limited;
      }
      report.entries.push_back(std::move(entry));
    }
    report.per_scale_worst_c.push_back(any_ok ? worst
                                              : std::numeric_limits<double>::quiet_NaN());
    if (any_ok) report.global_inf_c = std::min(report.global_inf_c, worst);
  }
  if (!std::isfinite(report.global_inf_c)) report.global_inf_c = 0.0;
  report.antenna_like_at_tested_scales =
      report.hard_failures == 0 && report.global_inf_c > 0.0;
  return report;
}

/// The dimension bound from a c-antenna-like space: hdim > 1 + b c^2 with b
/// an existence constant. The bound stays symbolic unless b is supplied.
struct AzzamBound {
  double c = 0.0;
  std::string bound_form;            // "hdim > 1 + b*c^2" with c^2 substituted
  std::optional<double> numeric_bound;
  bool degenerate = false;           // c so small the bound says only hdim > 1
};

inline AzzamBound azzam_bound(double c, std::optional<double> b = std::nullopt) {
  if (!(c > 0.0 && c < 1.0))
    throw std::invalid_argument("azzam_bound: c must lie in (0,1)");
  AzzamBound out;
  out.c = c;
  out.bound_form = "hdim > 1 + b*" + std::to_string(c * c);
  if (b) {
    if (*b <= 0) throw std::invalid_argument("azzam_bound: b must be positive");
    out.numeric_bound = 1.0 + *b * c * c;
  }
  out.degenerate = c < 1e-6;
  return out;
}

/// Box-counting dimension over dyadic box sizes with a least-squares
/// log-log fit. Box dimension upper-bounds Hausdorff dimension in general;
/// every report carries that caveat.
struct BoxCountingReport {
  double estimate = 0.0;
  double r2 = 0.0;
  std::vector<double> box_sizes;     // in world units
  std::vector<std::size_t> counts;
  std::vector<double> residuals;
  std::string caveat =
      "box-counting dimension is an upper proxy for Hausdorff dimension";
};

inline BoxCountingReport box_counting_dim(const GridContinuum& s,
                                          std::size_t min_boxes = 4,
                                          std::size_t max_boxes = 1u << 22) {
  if (s.cells.empty()) throw std::invalid_argument("box_counting_dim: empty continuum");
  const CellBounds b = bounds_of(s.cells);
  const int extent = std::max(b.width(), b.height());

  BoxCountingReport report;
  std::vector<double> xs, ys;
  // boxes of 2^k cells, starting at 8 cells: smaller boxes measure the
  // raster band thickness rather than the underlying set
  for (int k = 3; (1 << k) <= extent; ++k) {
    CellSet boxes;
    for (const Cell& c : s.cells)
      boxes.insert({(c.i - b.i0) >> k, (c.j - b.j0) >> k});
    const std::size_t n = boxes.size();
    if (n < min_boxes || n > max_boxes) continue;
    const double eps = s.cell_width * (1 << k);
    report.box_sizes.push_back(eps);
    report.counts.push_back(n);
    xs.push_back(std::log(1.0 / eps));
    ys.push_back(std::log(static_cast<double>(n)));
  }
  if (xs.size() < 5)
    throw ResolutionError("box_counting_dim: fewer than 5 usable dyadic scales");
  const LinearFit fit = linear_fit(xs, ys);
  report.estimate = fit.slope;
  report.r2 = fit.r2;
  report.residuals = fit.residuals;
  return report;
}

}  // namespace ydim
