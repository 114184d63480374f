#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ydim/complex_poly.hpp"
#include "ydim/ytree.hpp"

namespace ydim {

class LiftError : public std::runtime_error {
 public:
  LiftError(const std::string& msg, int vertex_index, double fraction)
      : std::runtime_error(msg + " (vertex " + std::to_string(vertex_index) +
                           ", local parameter " + std::to_string(fraction) + ")"),
        vertex_index_(vertex_index),
        fraction_(fraction) {}
  int vertex_index() const noexcept { return vertex_index_; }
  double fraction() const noexcept { return fraction_; }

 private:
  int vertex_index_;
  double fraction_;
};

struct LiftOptions {
  double tol = 1e-8;
  double ratio_threshold = 1.0 / 3.0;  // nearest/second-nearest preimage gap
  int max_refine_depth = 28;
  RootOptions roots{};
};

namespace detail {

inline Complex newton_polish(const PolynomialMap& f, Complex target, Complex guess) {
  const Coeffs dcoeffs = coeff_derivative(f.coeffs);
  Complex z = guess;
  for (int k = 0; k < 8; ++k) {
    const Complex d = horner(dcoeffs, z);
    if (std::abs(d) < 1e-300) break;
    const Complex step = (evaluate(f, z) - target) / d;
    z -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
  }
  return z;
}

// One continuation step: move the lift from the fiber over `from` to the
// fiber over `to`. The branch is disambiguated by requiring the nearest
// preimage to dominate the second-nearest; otherwise the step is bisected
// until it does or the refinement budget runs out.
inline Complex continue_branch(const PolynomialMap& f, Complex current, Complex from,
                               Complex to, const LiftOptions& opt, int vertex_index,
                               double frac_lo, double frac_hi, int depth) {
  const auto fiber = preimages(f, to, opt.roots);
  Complex best{};
  int best_mult = 1;
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = std::numeric_limits<double>::infinity();
  for (const ClusteredRoot& r : fiber) {
    const double d = std::abs(r.point - current);
    if (d < d1) {
      d2 = d1;
      d1 = d;
      best = r.point;
      best_mult = r.multiplicity;
    } else if (d < d2) {
      d2 = d;
    }
  }
  // A multiple nearest preimage means the branches collide right here.
  const bool unambiguous =
      best_mult == 1 && (fiber.size() == 1 || d1 <= opt.ratio_threshold * d2);
  if (unambiguous) return newton_polish(f, to, best);

  if (depth >= opt.max_refine_depth)
    throw LiftError("lift_path: ambiguous branch (path too close to a branch value)",
                    vertex_index, 0.5 * (frac_lo + frac_hi));
  const Complex mid = 0.5 * (from + to);
  const double frac_mid = 0.5 * (frac_lo + frac_hi);
  const Complex half = continue_branch(f, current, from, mid, opt, vertex_index,
                                       frac_lo, frac_mid, depth + 1);
  return continue_branch(f, half, mid, to, opt, vertex_index, frac_mid, frac_hi,
                         depth + 1);
}

}  // namespace detail

/// Lift of a path through f starting at x0 in the fiber over its start:
/// the returned polyline has one vertex per input vertex, f maps it back
/// vertexwise within tol, and the branch is tracked by nearest-preimage
/// continuation with adaptive step refinement.
inline Polyline lift_path(const PolynomialMap& f, const Polyline& gamma, Complex x0,
                          const LiftOptions& opt = {}) {
  if (gamma.size() < 2) throw std::invalid_argument("lift_path: path needs >= 2 vertices");
  if (std::abs(evaluate(f, x0) - gamma.start()) >= opt.tol)
    throw std::invalid_argument("lift_path: x0 is not in the fiber over the path start");

  Polyline lift;
  lift.pts.reserve(gamma.size());
  lift.pts.push_back(x0);
  Complex current = x0;
  for (std::size_t k = 1; k < gamma.pts.size(); ++k) {
    current = detail::continue_branch(f, current, gamma.pts[k - 1], gamma.pts[k], opt,
                                      static_cast<int>(k), 0.0, 1.0, 0);
    lift.pts.push_back(current);
  }
  for (std::size_t k = 0; k < gamma.pts.size(); ++k)
    if (std::abs(evaluate(f, lift.pts[k]) - gamma.pts[k]) >= opt.tol)
      throw LiftError("lift_path: projection identity failed", static_cast<int>(k), 0.0);
  return lift;
}

/// Lift of a whole Y-tree from a fiber point over its center.
inline YTree lift_ytree(const PolynomialMap& f, const YTree& y, Complex x0,
                        const LiftOptions& opt = {}, double tol_geom = kDefaultGeomTol) {
  if (std::abs(evaluate(f, x0) - y.center) >= opt.tol)
    throw std::invalid_argument("lift_ytree: x0 is not in the fiber over the center");
  YTree lifted;
  lifted.center = x0;
  for (int i = 0; i < 3; ++i) lifted.legs[i] = lift_path(f, y.legs[i], x0, opt);
  try {
    lifted.validate(tol_geom);
  } catch (const std::invalid_argument& e) {
    throw LiftError(std::string("lift_ytree: lifted tree invalid (tolerance too coarse): ") +
                        e.what(),
                    -1, 0.0);
  }
  return lifted;
}

/// All lifts of y under f^n (or the first `budget` in breadth-first order,
/// fiber points ordered by argument angle). n = 0 returns {y}.
inline std::vector<YTree> iterate_lifts(const PolynomialMap& f, const YTree& y, int n,
                                        std::size_t budget = 0,
                                        const LiftOptions& opt = {},
                                        double tol_geom = kDefaultGeomTol) {
  if (n < 0) throw std::invalid_argument("iterate_lifts: level must be >= 0");
  std::vector<YTree> current{y};
  for (int level = 0; level < n; ++level) {
    std::vector<YTree> next;
    for (const YTree& tree : current) {
      const auto fiber = preimages(f, tree.center, opt.roots);
      for (const ClusteredRoot& r : fiber) {
        if (budget > 0 && next.size() >= budget) break;
        next.push_back(lift_ytree(f, tree, r.point, opt, tol_geom));
      }
      if (budget > 0 && next.size() >= budget) break;
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace ydim
