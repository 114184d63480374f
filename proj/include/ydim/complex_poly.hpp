#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ydim/random.hpp"

namespace ydim {

using Complex = std::complex<double>;
using Coeffs = std::vector<Complex>;  // ascending degree

inline constexpr double kDefaultRootTol = 1e-10;
inline constexpr double kRootClusterTol = 1e-6;

class RootFindingError : public std::runtime_error {
 public:
  RootFindingError(const std::string& msg, std::vector<double> residuals)
      : std::runtime_error(msg), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

inline Complex horner(const Coeffs& c, Complex z) {
  if (c.empty()) return {0.0, 0.0};
  Complex acc = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) acc = acc * z + c[k];
  return acc;
}

inline Coeffs coeff_derivative(const Coeffs& c) {
  Coeffs d;
  if (c.size() <= 1) return d;
  d.resize(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
  return d;
}

/// Backward-error scale: |p(z)| <= tol * coeff_scale(z) is the honest
/// "zero to working precision" test for a polynomial residual.
inline double coeff_scale(const Coeffs& c, Complex z) {
  double s = 1.0;
  double zp = 1.0;
  const double az = std::abs(z);
  for (const Complex& a : c) {
    s += std::abs(a) * zp;
    zp *= std::max(1.0, az);
  }
  return s;
}

/// A polynomial self-map of the plane, coefficients in ascending degree.
struct PolynomialMap {
  Coeffs coeffs;

  PolynomialMap() = default;
  explicit PolynomialMap(Coeffs c) : coeffs(std::move(c)) { validate(); }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  void validate() const {
    if (coeffs.size() < 3)
      throw std::invalid_argument("PolynomialMap: degree must be >= 2");
    if (std::abs(coeffs.back()) == 0.0)
      throw std::invalid_argument("PolynomialMap: leading coefficient is zero");
    for (const Complex& a : coeffs)
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw std::invalid_argument("PolynomialMap: coefficients must be finite");
  }

  double max_coeff_magnitude() const {
    double m = 0.0;
    for (const Complex& a : coeffs) m = std::max(m, std::abs(a));
    return m;
  }

  /// Radius outside which orbits of the maps in scope escape to infinity.
  double escape_radius() const { return std::max(2.0, 2.0 * max_coeff_magnitude()); }
};

inline Complex evaluate(const PolynomialMap& f, Complex z) { return horner(f.coeffs, z); }

inline Complex derivative_at(const PolynomialMap& f, Complex z) {
  return horner(coeff_derivative(f.coeffs), z);
}

struct RootOptions {
  double tol = kDefaultRootTol;
  double cluster_tol = kRootClusterTol;
  int max_iter = 800;
  int max_restarts = 4;
  std::uint64_t seed = 0x5eed;
};

/// All complex roots by simultaneous (Weierstrass/Durand-Kerner) iteration.
/// Deterministic start configuration; seeded jitter on restarts.
inline std::vector<Complex> polynomial_roots(Coeffs poly, const RootOptions& opt = {}) {
  while (!poly.empty() && std::abs(poly.back()) == 0.0) poly.pop_back();
  if (poly.size() <= 1) return {};
  const int deg = static_cast<int>(poly.size()) - 1;

  Coeffs monic(poly.size());
  const Complex lead = poly.back();
  for (std::size_t k = 0; k < poly.size(); ++k) monic[k] = poly[k] / lead;

  double radius = 0.0;
  for (int k = 0; k < deg; ++k) radius = std::max(radius, std::abs(monic[k]));
  radius = 1.0 + radius;  // Cauchy bound

  Rng rng(opt.seed);
  std::vector<Complex> z(deg), step(deg);
  std::vector<double> residual(deg);

  for (int attempt = 0; attempt <= opt.max_restarts; ++attempt) {
    for (int k = 0; k < deg; ++k) {
      double angle = 2.0 * std::numbers::pi * k / deg + 0.41;
      double r = 0.5 * radius;
      if (attempt > 0) {
        angle += rng.uniform(-0.3, 0.3);
        r *= rng.uniform(0.6, 1.4);
      }
      z[k] = std::polar(r, angle);
    }

    bool ok = false;
    for (int it = 0; it < opt.max_iter; ++it) {
      double max_step = 0.0;
      for (int k = 0; k < deg; ++k) {
        Complex denom{1.0, 0.0};
        for (int j = 0; j < deg; ++j)
          if (j != k) denom *= (z[k] - z[j]);
        if (denom == Complex{0.0, 0.0}) {
          z[k] += Complex(1e-8 * radius, 1e-8 * radius);
          denom = Complex(1e-30, 0.0);
        }
        step[k] = horner(monic, z[k]) / denom;
        z[k] -= step[k];
        max_step = std::max(max_step, std::abs(step[k]));
      }
      bool small_residuals = true;
      for (int k = 0; k < deg; ++k) {
        residual[k] = std::abs(horner(monic, z[k])) / coeff_scale(monic, z[k]);
        if (residual[k] > 1e-14 * deg) small_residuals = false;
      }
      if (small_residuals || max_step < 1e-15 * (1.0 + radius)) {
        ok = small_residuals;
        if (ok) break;
      }
    }
    if (ok) {
      std::sort(z.begin(), z.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
      });
      return z;
    }
  }
  throw RootFindingError("polynomial_roots: iteration did not converge", residual);
}

struct ClusteredRoot {
  Complex point;
  int multiplicity = 1;
};

/// Single-linkage clustering of near-coincident roots; cluster size is the
/// reported multiplicity. A multiplicity-aware Newton polish sharpens the
/// representative afterwards.
inline std::vector<ClusteredRoot> cluster_roots(const std::vector<Complex>& roots,
                                                const Coeffs& poly, double cluster_tol) {
  const std::size_t n = roots.size();
  std::vector<int> parent(n);
  for (std::size_t k = 0; k < n; ++k) parent[k] = static_cast<int>(k);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (std::abs(roots[a] - roots[b]) < cluster_tol) parent[find(static_cast<int>(b))] = find(static_cast<int>(a));

  const Coeffs dpoly = coeff_derivative(poly);
  std::vector<ClusteredRoot> out;
  std::vector<bool> done(n, false);
  for (std::size_t a = 0; a < n; ++a) {
    if (done[a]) continue;
    Complex sum{0.0, 0.0};
    int count = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (find(static_cast<int>(b)) == find(static_cast<int>(a))) {
        sum += roots[b];
        ++count;
        done[b] = true;
      }
    }
    Complex rep = sum / static_cast<double>(count);
    for (int it = 0; it < 4; ++it) {
      const Complex pd = horner(dpoly, rep);
      if (std::abs(pd) < 1e-300) break;
      rep -= static_cast<double>(count) * horner(poly, rep) / pd;
    }
    out.push_back({rep, count});
  }
  std::sort(out.begin(), out.end(), [](const ClusteredRoot& a, const ClusteredRoot& b) {
    const double aa = std::arg(a.point), ab = std::arg(b.point);
    if (aa != ab) return aa < ab;
    if (a.point.real() != b.point.real()) return a.point.real() < b.point.real();
    return a.point.imag() < b.point.imag();
  });
  return out;
}

/// Full fiber of w under f: each root of f - w with its multiplicity.
/// Multiplicities always sum to deg(f).
inline std::vector<ClusteredRoot> preimages(const PolynomialMap& f, Complex w,
                                            const RootOptions& opt = {}) {
  Coeffs shifted = f.coeffs;
  shifted[0] -= w;
  const std::vector<Complex> raw = polynomial_roots(shifted, opt);
  std::vector<ClusteredRoot> clustered = cluster_roots(raw, shifted, opt.cluster_tol);

  std::vector<double> bad;
  for (const ClusteredRoot& r : clustered) {
    const double err = std::abs(evaluate(f, r.point) - w);
    if (err > opt.tol * coeff_scale(f.coeffs, r.point)) bad.push_back(err);
  }
  if (!bad.empty())
    throw RootFindingError("preimages: residual above tolerance", bad);
  return clustered;
}

/// Local mapping degree at z: one plus the vanishing order of f' there.
inline int local_degree(const PolynomialMap& f, Complex z, double tol = kDefaultRootTol) {
  Coeffs d = coeff_derivative(f.coeffs);
  int order = 0;
  while (!d.empty()) {
    const double v = std::abs(horner(d, z));
    if (v > tol * coeff_scale(d, z)) break;
    ++order;
    d = coeff_derivative(d);
  }
  return 1 + order;
}

/// Coefficients of the affine conjugate a*f((z-b)/a)+b for A(z)=a*z+b,
/// i.e. A o f o A^{-1}. Used by covariance checks and tests.
inline PolynomialMap affine_conjugate(const PolynomialMap& f, Complex a, Complex b) {
  if (std::abs(a) == 0.0) throw std::invalid_argument("affine_conjugate: a must be nonzero");
  // compose f((z-b)/a) by synthetic substitution, then scale and shift
  const int deg = f.degree();
  Coeffs result(deg + 1, Complex{0.0, 0.0});
  // powers of (z-b)/a expanded via repeated multiplication
  Coeffs power{Complex{1.0, 0.0}};  // ((z-b)/a)^0
  for (int k = 0; k <= deg; ++k) {
    for (std::size_t m = 0; m < power.size(); ++m) result[m] += f.coeffs[k] * power[m];
    if (k < deg) {
      Coeffs next(power.size() + 1, Complex{0.0, 0.0});
      for (std::size_t m = 0; m < power.size(); ++m) {
        next[m] += power[m] * (-b / a);
        next[m + 1] += power[m] / a;
      }
      power = std::move(next);
    }
  }
  for (Complex& c : result) c *= a;
  result[0] += b;
  return PolynomialMap(std::move(result));
}

}  // namespace ydim
