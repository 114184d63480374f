#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ydim/complex_poly.hpp"
#include "ydim/grid.hpp"

namespace ydim {

struct JuliaOptions {
  int resolution = 512;     // cells per axis, power of two
  int max_iter = 256;
  double band_factor = 1.0; // boundary band half-width in cell widths
  int threads = 1;
  std::size_t fill_holes_below = 32;     // pinhole cleanup, in cells
  std::size_t min_component_cells = 8;   // smaller stray components are noise
};

struct JuliaResult {
  GridContinuum continuum;          // largest connected component of the band
  int total_components = 1;         // components seen before post-processing
  int significant_components = 1;   // components above the noise threshold
  std::size_t discarded_cells = 0;
  bool connected() const { return significant_components <= 1; }
};

namespace detail {

// Exterior distance estimate from the escape-time orbit: d ~ |z| log|z| / |dz|.
// Returns nothing when the orbit stays bounded for max_iter steps.
inline std::optional<double> exterior_distance(const PolynomialMap& f, Complex z0,
                                               double escape_radius, int max_iter) {
  const Coeffs dcoeffs = coeff_derivative(f.coeffs);
  Complex z = z0;
  Complex dz{1.0, 0.0};
  bool escaped = false;
  for (int it = 0; it < max_iter; ++it) {
    const double az = std::abs(z);
    if (az > escape_radius) escaped = true;
    if (az > 1e12 || std::abs(dz) > 1e290) break;
    dz = horner(dcoeffs, z) * dz;
    z = evaluate(f, z);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
  }
  const double az = std::abs(z);
  if (az > escape_radius) escaped = true;
  if (!escaped) return std::nullopt;
  const double adz = std::abs(dz);
  if (adz == 0.0 || !std::isfinite(adz)) return 0.0;
  return az * std::log(az) / adz;
}

}  // namespace detail

/// Boundary of the filled Julia set as a pixel band: escaping cells whose
/// estimated distance to the set is below one band width, plus bounded cells
/// adjacent to escaping ones. Post-processed to the largest 8-connected
/// component with small holes filled.
inline JuliaResult julia_set(const PolynomialMap& f, const JuliaOptions& opt = {}) {
  if (opt.resolution < 64) throw std::invalid_argument("julia_set: resolution must be >= 64");
  if (opt.max_iter < 1) throw std::invalid_argument("julia_set: max_iter must be positive");

  const double R = f.escape_radius();
  const int res = opt.resolution;
  const double h = 2.0 * R / res;
  const Complex origin{-R, -R};

  // per-cell state: 0 = bounded, 1 = escaped far, 2 = escaped within band
  std::vector<std::uint8_t> state(static_cast<std::size_t>(res) * res, 0);

  auto work_rows = [&](int j_begin, int j_end) {
    for (int j = j_begin; j < j_end; ++j) {
      for (int i = 0; i < res; ++i) {
        const Complex z0 = origin + Complex((i + 0.5) * h, (j + 0.5) * h);
        const auto dist = detail::exterior_distance(f, z0, R, opt.max_iter);
        std::uint8_t& st = state[static_cast<std::size_t>(j) * res + i];
        if (!dist) {
          st = 0;
        } else {
          st = (*dist < opt.band_factor * h) ? 2 : 1;
        }
      }
    }
  };

  const int threads = std::max(1, opt.threads);
  if (threads == 1) {
    work_rows(0, res);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (res + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int b = t * chunk;
      const int e = std::min(res, b + chunk);
      if (b < e) pool.emplace_back(work_rows, b, e);
    }
    for (auto& th : pool) th.join();
  }

  auto at = [&](int i, int j) -> std::uint8_t {
    if (i < 0 || j < 0 || i >= res || j >= res) return 1;
    return state[static_cast<std::size_t>(j) * res + i];
  };

  CellSet band;
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      const std::uint8_t st = at(i, j);
      if (st == 2) {
        band.insert({i, j});
      } else if (st == 0) {
        for (const Cell& d : neighbor_offsets8()) {
          if (at(i + d.i, j + d.j) != 0) {
            band.insert({i, j});
            break;
          }
        }
      }
    }
  }
  if (band.empty()) throw ResolutionError("julia_set: no boundary band detected");

  band = fill_small_holes(band, opt.fill_holes_below);

  const auto comps = components8(band);
  JuliaResult result;
  result.total_components = static_cast<int>(comps.size());
  result.significant_components = 0;
  for (const auto& comp : comps)
    if (comp.size() >= opt.min_component_cells) ++result.significant_components;
  result.significant_components = std::max(1, result.significant_components);

  const auto& main_comp = comps.front();
  result.discarded_cells = band.size() - main_comp.size();
  result.continuum.origin = origin;
  result.continuum.cell_width = h;
  result.continuum.cells = CellSet(main_comp.begin(), main_comp.end());
  result.continuum.validate();
  return result;
}

// --- critical orbit screening ----------------------------------------------

enum class OrbitClass {
  Periodic,
  Preperiodic,
  AttractedToAttractingCycle,
  Escaping,
  RecurrentSuspect,
  Undetermined,
};

inline const char* to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::Periodic: return "periodic";
    case OrbitClass::Preperiodic: return "preperiodic";
    case OrbitClass::AttractedToAttractingCycle: return "attracted-to-attracting-cycle";
    case OrbitClass::Escaping: return "escaping";
    case OrbitClass::RecurrentSuspect: return "recurrent-suspect";
    case OrbitClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

struct CriticalOrbit {
  Complex critical_point;
  std::vector<Complex> samples;   // truncated orbit
  OrbitClass classification = OrbitClass::Undetermined;
  int preperiod = -1;             // first index on the cycle, when detected
  int period = -1;
  double cycle_multiplier = -1.0; // |(f^p)'| along the detected cycle
  bool parabolic_suspect = false; // multiplier within tolerance of 1
};

struct CriticalOrbitReport {
  std::vector<CriticalOrbit> orbits;
  bool semi_hyperbolic_candidate = false;
  bool parabolic_suspect = false;
  bool recurrent_suspect = false;
};

struct OrbitOptions {
  int max_iter = 2000;
  double tol_orbit = 1e-8;
  double recurrence_radius = 1e-3;
  int recurrence_min_steps = 10;
  double multiplier_tol = 1e-3;
  std::size_t sample_cap = 64;
  RootOptions roots{};
};

/// Iterates every critical orbit and labels it. The recurrence label is a
/// screen (re-entry of a small ball around the critical point), not a proof.
inline CriticalOrbitReport classify_critical_orbits(const PolynomialMap& f,
                                                    const OrbitOptions& opt = {}) {
  CriticalOrbitReport report;
  const Coeffs dcoeffs = coeff_derivative(f.coeffs);
  const std::vector<Complex> craw = polynomial_roots(dcoeffs, opt.roots);
  const std::vector<ClusteredRoot> crit = cluster_roots(craw, dcoeffs, opt.roots.cluster_tol);
  const double R = f.escape_radius();

  for (const ClusteredRoot& c : crit) {
    CriticalOrbit orbit;
    orbit.critical_point = c.point;
    std::vector<Complex> pts{c.point};
    OrbitClass cls = OrbitClass::Undetermined;
    bool recurrent = false;

    for (int it = 0; it < opt.max_iter; ++it) {
      const Complex z = evaluate(f, pts.back());
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > R) {
        cls = OrbitClass::Escaping;
        pts.push_back(z);
        break;
      }
      // exact-return detection against the whole history
      int hit = -1;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (std::abs(z - pts[k]) < opt.tol_orbit) {
          hit = static_cast<int>(k);
          break;
        }
      }
      pts.push_back(z);
      if (static_cast<int>(pts.size()) - 1 >= opt.recurrence_min_steps &&
          std::abs(z - c.point) < opt.recurrence_radius && std::abs(z - c.point) >= 0.0)
        recurrent = true;

      if (hit >= 0) {
        orbit.preperiod = hit;
        orbit.period = static_cast<int>(pts.size()) - 1 - hit;
        cls = (hit == 0) ? OrbitClass::Periodic : OrbitClass::Preperiodic;
        break;
      }
    }

    if (orbit.period > 0) {
      Complex mult{1.0, 0.0};
      Complex z = pts[orbit.preperiod];
      for (int k = 0; k < orbit.period; ++k) {
        mult *= horner(dcoeffs, z);
        z = evaluate(f, z);
      }
      orbit.cycle_multiplier = std::abs(mult);
      orbit.parabolic_suspect = std::abs(orbit.cycle_multiplier - 1.0) < opt.multiplier_tol;
    }

    if (cls == OrbitClass::Undetermined) {
      // look for slow convergence toward a cycle: compare tail separations
      const std::size_t n = pts.size();
      for (int p = 1; p <= 6 && cls == OrbitClass::Undetermined; ++p) {
        if (n < static_cast<std::size_t>(3 * p + 2)) continue;
        const double d1 = std::abs(pts[n - 1] - pts[n - 1 - p]);
        const double d2 = std::abs(pts[n - 1 - p] - pts[n - 1 - 2 * p]);
        if (d2 > 0 && d1 < 1e-4 && d1 <= d2) {
          Complex mult{1.0, 0.0};
          Complex z = pts[n - 1];
          for (int k = 0; k < p; ++k) {
            mult *= horner(dcoeffs, z);
            z = evaluate(f, z);
          }
          orbit.period = p;
          orbit.cycle_multiplier = std::abs(mult);
          orbit.parabolic_suspect = std::abs(orbit.cycle_multiplier - 1.0) < opt.multiplier_tol;
          if (orbit.cycle_multiplier < 1.0 - opt.multiplier_tol)
            cls = OrbitClass::AttractedToAttractingCycle;
        }
      }
    }

    if (cls == OrbitClass::Undetermined && recurrent) cls = OrbitClass::RecurrentSuspect;
    if (cls == OrbitClass::AttractedToAttractingCycle && recurrent)
      cls = OrbitClass::RecurrentSuspect;

    orbit.classification = cls;
    orbit.samples.assign(pts.begin(),
                         pts.begin() + std::min(pts.size(), opt.sample_cap));
    report.parabolic_suspect = report.parabolic_suspect || orbit.parabolic_suspect;
    report.recurrent_suspect =
        report.recurrent_suspect || (cls == OrbitClass::RecurrentSuspect);
    report.orbits.push_back(std::move(orbit));
  }

  bool any_undetermined = false;
  for (const CriticalOrbit& o : report.orbits)
    if (o.classification == OrbitClass::Undetermined) any_undetermined = true;
  report.semi_hyperbolic_candidate =
      !report.recurrent_suspect && !report.parabolic_suspect && !any_undetermined;
  return report;
}

}  // namespace ydim
