#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ydim/complex_poly.hpp"

namespace ydim {

inline constexpr double kDefaultGeomTol = 1e-6;

inline double point_segment_distance(Complex p, Complex a, Complex b) {
  const Complex ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

struct SegmentDistance {
  double dist = 0.0;
  double s = 0.0;  // parameter on segment (a0,a1)
  double t = 0.0;  // parameter on segment (b0,b1)
};

inline bool segments_properly_cross(Complex a0, Complex a1, Complex b0, Complex b1) {
  auto orient = [](Complex o, Complex p, Complex q) {
    const double v = (p.real() - o.real()) * (q.imag() - o.imag()) -
                     (p.imag() - o.imag()) * (q.real() - o.real());
    return (v > 0) - (v < 0);
  };
  const int o1 = orient(a0, a1, b0), o2 = orient(a0, a1, b1);
  const int o3 = orient(b0, b1, a0), o4 = orient(b0, b1, a1);
  return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

/// Exact: for non-crossing segments the closest pair involves an endpoint,
/// so four endpoint-to-segment projections cover every case.
inline SegmentDistance segment_segment_distance(Complex a0, Complex a1, Complex b0,
                                                Complex b1) {
  if (segments_properly_cross(a0, a1, b0, b1)) {
    const Complex d1 = a1 - a0, d2 = b1 - b0;
    const double denom = d1.real() * d2.imag() - d1.imag() * d2.real();
    double s = 0.5;
    if (denom != 0.0) {
      const Complex w = b0 - a0;
      s = std::clamp((w.real() * d2.imag() - w.imag() * d2.real()) / denom, 0.0, 1.0);
    }
    const Complex p = a0 + s * d1;
    const double len2 = std::norm(d2);
    const double t =
        len2 > 0 ? std::clamp(((p.real() - b0.real()) * d2.real() +
                               (p.imag() - b0.imag()) * d2.imag()) / len2, 0.0, 1.0)
                 : 0.0;
    return {0.0, s, t};
  }
  auto project = [](Complex p, Complex a, Complex b) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return 0.0;
    return std::clamp(((p.real() - a.real()) * ab.real() +
                       (p.imag() - a.imag()) * ab.imag()) / len2, 0.0, 1.0);
  };
  SegmentDistance best;
  best.dist = std::numeric_limits<double>::infinity();
  auto consider = [&](double s, double t) {
    const Complex p = a0 + s * (a1 - a0);
    const Complex q = b0 + t * (b1 - b0);
    const double d = std::abs(p - q);
    if (d < best.dist) best = {d, s, t};
  };
  consider(0.0, project(a0, b0, b1));
  consider(1.0, project(a1, b0, b1));
  consider(project(b0, a0, a1), 0.0);
  consider(project(b1, a0, a1), 1.0);
  return best;
}

/// Open polygonal arc through an ordered vertex list.
struct Polyline {
  std::vector<Complex> pts;

  Polyline() = default;
  explicit Polyline(std::vector<Complex> p) : pts(std::move(p)) {}

  std::size_t size() const { return pts.size(); }
  Complex start() const { return pts.front(); }
  Complex end() const { return pts.back(); }

  double length() const {
    double acc = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) acc += std::abs(pts[k] - pts[k - 1]);
    return acc;
  }

  /// Arc-length position of each vertex, starting at 0.
  std::vector<double> arc_positions() const {
    std::vector<double> s(pts.size(), 0.0);
    for (std::size_t k = 1; k < pts.size(); ++k)
      s[k] = s[k - 1] + std::abs(pts[k] - pts[k - 1]);
    return s;
  }

  /// Prefix of total arc length L (last vertex interpolated).
  Polyline trimmed_to_length(double L) const {
    if (pts.size() < 2 || L <= 0.0) return *this;
    Polyline out;
    out.pts.push_back(pts.front());
    double acc = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const double seg = std::abs(pts[k] - pts[k - 1]);
      if (acc + seg >= L) {
        const double f = seg > 0 ? (L - acc) / seg : 0.0;
        const Complex cut = pts[k - 1] + f * (pts[k] - pts[k - 1]);
        if (std::abs(cut - out.pts.back()) > 0) out.pts.push_back(cut);
        if (out.pts.size() < 2) out.pts.push_back(pts[k]);
        return out;
      }
      acc += seg;
      out.pts.push_back(pts[k]);
    }
    return out;
  }

  Polyline reversed() const {
    Polyline out = *this;
    std::reverse(out.pts.begin(), out.pts.end());
    return out;
  }

  /// Uniform arc-length resampling; smooths pixel staircases.
  Polyline resampled(double spacing) const {
    if (pts.size() < 2 || spacing <= 0) return *this;
    const double total = length();
    const int n = std::max(1, static_cast<int>(std::round(total / spacing)));
    Polyline out;
    out.pts.push_back(pts.front());
    const auto arcs = arc_positions();
    std::size_t seg = 1;
    for (int k = 1; k < n; ++k) {
      const double target = total * k / n;
      while (seg < pts.size() - 1 && arcs[seg] < target) ++seg;
      const double span = arcs[seg] - arcs[seg - 1];
      const double f = span > 0 ? (target - arcs[seg - 1]) / span : 0.0;
      const Complex p = pts[seg - 1] + f * (pts[seg] - pts[seg - 1]);
      if (std::abs(p - out.pts.back()) > 0) out.pts.push_back(p);
    }
    if (std::abs(pts.back() - out.pts.back()) > 0) out.pts.push_back(pts.back());
    return out;
  }

  /// No repeated consecutive vertices and no self-intersection at scale tol.
  bool is_simple(double tol) const {
    if (pts.size() < 2) return false;
    for (std::size_t k = 1; k < pts.size(); ++k)
      if (std::abs(pts[k] - pts[k - 1]) == 0.0) return false;
    for (std::size_t a = 0; a + 1 < pts.size(); ++a) {
      for (std::size_t b = a + 2; b + 1 < pts.size(); ++b) {
        if (segments_properly_cross(pts[a], pts[a + 1], pts[b], pts[b + 1])) return false;
        const auto sd = segment_segment_distance(pts[a], pts[a + 1], pts[b], pts[b + 1]);
        if (sd.dist < 0.45 * tol) return false;
      }
    }
    return true;
  }
};

inline double point_polyline_distance(Complex p, const Polyline& poly) {
  double best = std::numeric_limits<double>::infinity();
  if (poly.pts.size() == 1) return std::abs(p - poly.pts.front());
  for (std::size_t k = 1; k < poly.pts.size(); ++k)
    best = std::min(best, point_segment_distance(p, poly.pts[k - 1], poly.pts[k]));
  return best;
}

/// Embedded "Y": three simple arcs (legs) meeting only at the center.
struct YTree {
  Complex center;
  std::array<Polyline, 3> legs;  // each starts at center

  std::array<Complex, 3> tips() const {
    return {legs[0].end(), legs[1].end(), legs[2].end()};
  }

  double min_leg_length() const {
    return std::min({legs[0].length(), legs[1].length(), legs[2].length()});
  }

  /// Throws std::invalid_argument naming the violated invariant.
  void validate(double tol_geom = kDefaultGeomTol) const {
    for (int i = 0; i < 3; ++i) {
      if (legs[i].size() < 2) throw std::invalid_argument("YTree: leg has < 2 vertices");
      if (std::abs(legs[i].start() - center) > 1e-9 * (1.0 + std::abs(center)))
        throw std::invalid_argument("YTree: leg does not start at center");
      if (!legs[i].is_simple(tol_geom))
        throw std::invalid_argument("YTree: leg is not simple at tolerance");
    }
    const auto t = tips();
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (std::abs(t[i] - t[j]) < tol_geom)
          throw std::invalid_argument("YTree: tips are not pairwise distinct");

    // legs may approach each other only inside a small neighborhood of the
    // center (measured in arc length along each leg)
    const double core = 3.0 * tol_geom;
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const auto si = legs[i].arc_positions();
        const auto sj = legs[j].arc_positions();
        for (std::size_t a = 1; a < legs[i].pts.size(); ++a) {
          for (std::size_t b = 1; b < legs[j].pts.size(); ++b) {
            const auto sd = segment_segment_distance(legs[i].pts[a - 1], legs[i].pts[a],
                                                     legs[j].pts[b - 1], legs[j].pts[b]);
            if (sd.dist < 0.45 * tol_geom) {
              const double arc_i = si[a - 1] + sd.s * (si[a] - si[a - 1]);
              const double arc_j = sj[b - 1] + sd.t * (sj[b] - sj[b - 1]);
              if (arc_i > core || arc_j > core)
                throw std::invalid_argument("YTree: legs intersect away from center");
            }
          }
        }
      }
    }
  }

  bool is_valid(double tol_geom = kDefaultGeomTol) const {
    try {
      validate(tol_geom);
      return true;
    } catch (const std::invalid_argument&) {
      return false;
    }
  }
};

/// Convenience constructor: straight legs from a center at given angles.
inline YTree straight_ytree(Complex center, const std::array<double, 3>& angles,
                            double leg_length, int vertices_per_leg = 8) {
  YTree y;
  y.center = center;
  for (int i = 0; i < 3; ++i) {
    Polyline leg;
    for (int k = 0; k <= vertices_per_leg; ++k) {
      const double t = static_cast<double>(k) / vertices_per_leg;
      leg.pts.push_back(center + std::polar(leg_length * t, angles[i]));
    }
    leg.pts.front() = center;
    y.legs[i] = std::move(leg);
  }
  return y;
}

}  // namespace ydim
