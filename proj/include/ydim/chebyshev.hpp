#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ydim/complex_poly.hpp"

namespace ydim {

class PatternError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kChebCoeffDegreeCap = 16;  // monomial coefficients grow like 2^d

/// Real polynomial self-map of [-1,1]. For Chebyshev-type maps above the
/// coefficient degree cap, evaluation falls back to the cos/arccos form.
struct IntervalMap {
  enum class Kind { Coefficients, Chebyshev, NegatedChebyshev };

  Kind kind = Kind::Coefficients;
  int cheb_degree = 0;          // for the two Chebyshev kinds
  std::vector<double> coeffs;   // ascending; empty above the degree cap

  int degree() const {
    if (kind != Kind::Coefficients) return cheb_degree;
    return static_cast<int>(coeffs.size()) - 1;
  }

  double evaluate(double x) const {
    if (!coeffs.empty()) {
      double acc = coeffs.back();
      for (std::size_t k = coeffs.size() - 1; k-- > 0;) acc = acc * x + coeffs[k];
      return acc;
    }
    const double clamped = std::clamp(x, -1.0, 1.0);
    const double v = std::cos(cheb_degree * std::acos(clamped));
    return (kind == Kind::NegatedChebyshev) ? -v : v;
  }

  double derivative(double x) const {
    if (!coeffs.empty()) {
      double acc = 0.0;
      for (std::size_t k = coeffs.size() - 1; k >= 1; --k)
        acc = acc * x + coeffs[k] * static_cast<double>(k);
      return acc;
    }
    // d/dx cos(d acos x) = d sin(d theta)/sin(theta)
    const double clamped = std::clamp(x, -1.0, 1.0);
    const double theta = std::acos(clamped);
    const double sin_theta = std::sin(theta);
    if (sin_theta < 1e-12) {
      const double v = static_cast<double>(cheb_degree) * cheb_degree;
      const double sign = (kind == Kind::NegatedChebyshev) ? -1.0 : 1.0;
      return sign * ((x > 0) ? v : v * ((cheb_degree % 2 == 0) ? -1.0 : 1.0));
    }
    const double v = cheb_degree * std::sin(cheb_degree * theta) / sin_theta;
    return (kind == Kind::NegatedChebyshev) ? -v : v;
  }

  /// Interior critical points, sorted.
  std::vector<double> turning_points() const {
    std::vector<double> out;
    if (kind != Kind::Coefficients) {
      for (int k = 1; k < cheb_degree; ++k)
        out.push_back(std::cos(std::numbers::pi * k / cheb_degree));
      std::sort(out.begin(), out.end());
      return out;
    }
    Coeffs c(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) c[k] = Complex{coeffs[k], 0.0};
    const Coeffs dc = coeff_derivative(c);
    for (const Complex& r : polynomial_roots(dc)) {
      if (std::abs(r.imag()) < 1e-8 && r.real() > -1.0 + 1e-12 && r.real() < 1.0 - 1e-12)
        out.push_back(r.real());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              out.end());
    return out;
  }

  /// max |f| over [-1,1]; extrema occur at turning points or endpoints.
  double sup_norm_on_interval() const {
    double m = std::max(std::abs(evaluate(-1.0)), std::abs(evaluate(1.0)));
    for (double t : turning_points()) m = std::max(m, std::abs(evaluate(t)));
    return m;
  }

  void validate() const {
    if (degree() < 1) throw std::invalid_argument("IntervalMap: degree must be >= 1");
    if (sup_norm_on_interval() > 1.0 + 1e-12)
      throw std::invalid_argument("IntervalMap: image leaves [-1,1]");
  }
};

/// T_d by the three-term recurrence T_{d+1} = 2x T_d - T_{d-1}.
inline IntervalMap chebyshev(int d) {
  if (d < 1) throw std::invalid_argument("chebyshev: degree must be >= 1");
  IntervalMap map;
  map.kind = IntervalMap::Kind::Chebyshev;
  map.cheb_degree = d;
  if (d <= kChebCoeffDegreeCap) {
    std::vector<double> prev{1.0};        // T_0
    std::vector<double> cur{0.0, 1.0};    // T_1
    if (d == 0) map.coeffs = prev;
    for (int k = 1; k < d; ++k) {
      std::vector<double> next(cur.size() + 1, 0.0);
      for (std::size_t m = 0; m < cur.size(); ++m) next[m + 1] += 2.0 * cur[m];
      for (std::size_t m = 0; m < prev.size(); ++m) next[m] -= prev[m];
      prev = std::move(cur);
      cur = std::move(next);
    }
    map.coeffs = cur;
  }
  return map;
}

inline IntervalMap negated_chebyshev(int d) {
  IntervalMap map = chebyshev(d);
  map.kind = IntervalMap::Kind::NegatedChebyshev;
  for (double& c : map.coeffs) c = -c;
  return map;
}

/// max |T'_d(-x) + T_d(x)| over samples; zero (to rounding) for even d,
/// where negation conjugates the two maps.
inline double negation_conjugacy_error(int d, int samples = 1000) {
  if (d % 2 != 0) throw std::invalid_argument("negation_conjugacy_error: even degree only");
  const IntervalMap t = chebyshev(d);
  const IntervalMap tn = negated_chebyshev(d);
  double worst = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const double x = -1.0 + 2.0 * k / samples;
    worst = std::max(worst, std::abs(tn.evaluate(-x) + t.evaluate(x)));
  }
  return worst;
}

// --- endpoint preimage structure -------------------------------------------

enum class EndpointPattern {
  OddChebyshev,    // fixes both endpoints, interior preimages interleave
  EvenChebyshev,   // both endpoints to +1
  OddNegated,      // swaps the endpoints
  EvenNegated,     // both endpoints to -1
  DegreeOne,
};

inline const char* to_string(EndpointPattern p) {
  switch (p) {
    case EndpointPattern::OddChebyshev: return "odd-chebyshev";
    case EndpointPattern::EvenChebyshev: return "even-chebyshev";
    case EndpointPattern::OddNegated: return "odd-negated";
    case EndpointPattern::EvenNegated: return "even-negated";
    case EndpointPattern::DegreeOne: return "degree-one";
  }
  return "degree-one";
}

struct EndpointPreimage {
  double x = 0.0;
  int target = 1;       // +1 or -1
  int local_degree = 1;
};

struct EndpointStructure {
  std::vector<EndpointPreimage> points;  // sorted by x
  EndpointPattern pattern = EndpointPattern::DegreeOne;
  int n = 0;  // interleaving block count
};

namespace detail {

inline int interval_local_degree(const IntervalMap& f, double x, double tol = 1e-9) {
  // order of vanishing of f' at x, plus one; capped by the degree
  if (std::abs(f.derivative(x)) > tol) return 1;
  return 2;  // interval maps here only branch quadratically at turning points
}

}  // namespace detail

/// Solutions of f = +-1 on [-1,1] with local degrees, sorted, verified
/// against the interleaving pattern forced by the map's parity case.
inline EndpointStructure endpoint_preimage_structure(const IntervalMap& f) {
  const int d = f.degree();
  EndpointStructure out;

  // Newton iteration seeded at Chebyshev nodes (plus the endpoints)
  std::vector<double> seeds;
  const int n_seeds = std::max(8 * d, 32);
  for (int k = 0; k <= n_seeds; ++k)
    seeds.push_back(std::cos(std::numbers::pi * k / n_seeds));
  const std::vector<double> turning = f.turning_points();
  for (int target : {-1, 1}) {
    std::vector<double> roots;
    for (double seed : seeds) {
      double x = seed;
      bool converged = false;
      for (int it = 0; it < 80; ++it) {
        const double fx = f.evaluate(x) - target;
        const double dfx = f.derivative(x);
        if (std::abs(fx) < 1e-12) {
          converged = true;
          break;
        }
        if (std::abs(dfx) < 1e-14) break;
        double step = fx / dfx;
        if (std::abs(step) > 0.5) step = (step > 0) ? 0.5 : -0.5;
        x -= step;
      }
      if (!converged) continue;
      if (x < -1.0 - 1e-9 || x > 1.0 + 1e-9) continue;
      x = std::clamp(x, -1.0, 1.0);
      // Newton stalls just short of fold points; snap onto the exact
      // turning point when one sits in the same fiber
      for (double t : turning)
        if (std::abs(x - t) < 1e-5 && std::abs(f.evaluate(t) - target) < 1e-9) x = t;
      bool dup = false;
      for (double r : roots)
        if (std::abs(r - x) < 1e-6) dup = true;
      if (!dup) roots.push_back(x);
    }
    for (double r : roots)
      out.points.push_back({r, target, detail::interval_local_degree(f, r)});
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const EndpointPreimage& a, const EndpointPreimage& b) { return a.x < b.x; });

  // fiber-degree balance: local degrees over each endpoint sum to deg(f)
  int sum_minus = 0, sum_plus = 0;
  for (const auto& p : out.points) (p.target == -1 ? sum_minus : sum_plus) += p.local_degree;
  if (sum_minus != d || sum_plus != d)
    throw PatternError("endpoint_preimage_structure: fiber degrees do not sum to deg(f)");

  if (d == 1) {
    out.pattern = EndpointPattern::DegreeOne;
    out.n = 0;
    return out;
  }

  const double f_lo = f.evaluate(-1.0), f_hi = f.evaluate(1.0);
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };

  auto interior_targets = [&]() {
    std::vector<int> t;
    for (const auto& p : out.points)
      if (p.x > -1.0 + 1e-9 && p.x < 1.0 - 1e-9) t.push_back(p.target);
    return t;
  };
  const std::vector<int> interior = interior_targets();

  auto check_alternating = [&](int first) {
    int expect = first;
    for (int t : interior) {
      if (t != expect) return false;
      expect = -expect;
    }
    return true;
  };
  auto check_interior_degrees = [&]() {
    for (const auto& p : out.points)
      if (p.x > -1.0 + 1e-9 && p.x < 1.0 - 1e-9 && p.local_degree != 2) return false;
    return true;
  };

  if (!check_interior_degrees())
    throw PatternError("endpoint_preimage_structure: interior preimage without a fold");

  if (d % 2 == 1) {
    if (near(f_lo, -1.0) && near(f_hi, 1.0)) {
      // -1 < y_1 < x_1 < ... < y_n < x_n < 1 with y -> +1, x -> -1
      out.pattern = EndpointPattern::OddChebyshev;
      out.n = (d - 1) / 2;
      if (static_cast<int>(interior.size()) != 2 * out.n || !check_alternating(+1))
        throw PatternError("endpoint_preimage_structure: odd interleaving violated");
    } else if (near(f_lo, 1.0) && near(f_hi, -1.0)) {
      out.pattern = EndpointPattern::OddNegated;
      out.n = (d - 1) / 2;
      if (static_cast<int>(interior.size()) != 2 * out.n || !check_alternating(-1))
        throw PatternError("endpoint_preimage_structure: negated odd interleaving violated");
    } else {
      throw PatternError("endpoint_preimage_structure: odd map must map endpoints to endpoints");
    }
  } else {
    if (near(f_lo, 1.0) && near(f_hi, 1.0)) {
      // -1 < x_1 < y_1 < ... < y_{n-1} < x_n < 1 with x -> -1
      out.pattern = EndpointPattern::EvenChebyshev;
      out.n = d / 2;
      if (static_cast<int>(interior.size()) != 2 * out.n - 1 || !check_alternating(-1))
        throw PatternError("endpoint_preimage_structure: even interleaving violated");
    } else if (near(f_lo, -1.0) && near(f_hi, -1.0)) {
      out.pattern = EndpointPattern::EvenNegated;
      out.n = d / 2;
      if (static_cast<int>(interior.size()) != 2 * out.n - 1 || !check_alternating(+1))
        throw PatternError("endpoint_preimage_structure: negated even interleaving violated");
    } else {
      throw PatternError("endpoint_preimage_structure: even map must send both endpoints to one endpoint");
    }
  }
  return out;
}

// --- Markov partition and growth -------------------------------------------

struct IncidenceMatrix {
  std::vector<std::vector<int>> entries;  // 0/1
  std::vector<double> partition;          // sorted partition points incl. endpoints

  std::size_t size() const { return entries.size(); }

  bool irreducible() const {
    const std::size_t n = size();
    if (n == 0) return false;
    // reachability in both directions from node 0
    auto reach = [&](bool transpose) {
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> stack{0};
      seen[0] = true;
      while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t w = 0; w < n; ++w) {
          const int e = transpose ? entries[w][v] : entries[v][w];
          if (e && !seen[w]) {
            seen[w] = true;
            stack.push_back(w);
          }
        }
      }
      return std::count(seen.begin(), seen.end(), true) == static_cast<long>(n);
    };
    return reach(false) && reach(true);
  }
};

/// Markov partition by the endpoint preimages; entry (i,j) = 1 iff lap i
/// covers interval j. Laps are monotone between consecutive partition points.
inline IncidenceMatrix markov_incidence(const IntervalMap& f) {
  const EndpointStructure structure = endpoint_preimage_structure(f);
  IncidenceMatrix m;
  m.partition = {-1.0, 1.0};
  for (const auto& p : structure.points) m.partition.push_back(p.x);
  std::sort(m.partition.begin(), m.partition.end());
  m.partition.erase(std::unique(m.partition.begin(), m.partition.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                    m.partition.end());

  const std::size_t n = m.partition.size() - 1;
  m.entries.assign(n, std::vector<int>(n, 0));
  constexpr double tol = 1e-9;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = m.partition[i], b = m.partition[i + 1];
    const double mid = 0.5 * (a + b);
    // monotone lap check at interior probes
    const double da = f.derivative(0.75 * a + 0.25 * b);
    const double dm = f.derivative(mid);
    const double db = f.derivative(0.25 * a + 0.75 * b);
    if (da * dm < 0 || dm * db < 0)
      throw PatternError("markov_incidence: partition interval is not a monotone lap");
    double lo = f.evaluate(a), hi = f.evaluate(b);
    if (lo > hi) std::swap(lo, hi);
    auto is_partition_point = [&](double v) {
      for (double p : m.partition)
        if (std::abs(p - v) < tol) return true;
      return false;
    };
    if (!is_partition_point(lo) || !is_partition_point(hi))
      throw PatternError("markov_incidence: lap image boundary is not a partition point");
    for (std::size_t j = 0; j < n; ++j)
      if (m.partition[j] >= lo - tol && m.partition[j + 1] <= hi + tol) m.entries[i][j] = 1;
  }
  return m;
}

/// Perron root by shifted power iteration (A+I keeps periodic structures
/// from stalling the iteration).
inline double growth_number(const IncidenceMatrix& m, double rel_tol = 1e-10,
                            int max_iter = 100000) {
  const std::size_t n = m.size();
  if (n == 0) throw std::invalid_argument("growth_number: empty matrix");
  std::vector<double> v(n, 1.0), w(n, 0.0);
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = v[i];  // + I
      for (std::size_t j = 0; j < n; ++j)
        if (m.entries[i][j]) acc += v[j];
      w[i] = acc;
    }
    double num = 0.0, den = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += w[i] * v[i];
      den += v[i] * v[i];
      norm = std::max(norm, std::abs(w[i]));
    }
    const double next = num / den - 1.0;
    if (norm == 0.0) throw RootFindingError("growth_number: iteration collapsed", {});
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::max(1.0, std::abs(next))) {
      // residual check: ||Av - lambda v|| small relative to lambda
      double resid = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (m.entries[i][j]) acc += v[j];
        resid = std::max(resid, std::abs(acc - next * v[i]));
        scale = std::max(scale, std::abs(v[i]));
      }
      if (resid <= 1e-9 * std::max(1.0, std::abs(next)) * scale) return next;
    }
    lambda = next;
  }
  throw RootFindingError("growth_number: power iteration did not converge", {lambda});
}

/// Conjugacy check against the unique piecewise-linear model of slope +-d:
/// with g the d-lap sawtooth on [0,1] and h(y) = cos(pi y), verifies
/// h(g(y)) = T_d(h(y)) at uniform samples; returns the max absolute error.
inline double pl_model_check(int d, int samples = 10000) {
  if (d < 2) throw std::invalid_argument("pl_model_check: degree must be >= 2");
  const IntervalMap t = chebyshev(d);
  double worst = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const double y = static_cast<double>(k) / samples;
    double s = std::fmod(d * y, 2.0);
    const double g = (s <= 1.0) ? s : 2.0 - s;
    const double lhs = std::cos(std::numbers::pi * g);
    const double rhs = t.evaluate(std::cos(std::numbers::pi * y));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// Circle-projection identities for odd d = 2n+1, checked at random angles:
///  (a) horizontal projection: T_d(cos t) = cos(d t);
///  (b) reflection symmetry: exp(i d (pi - t)) = exp(i (pi - d t));
///  (c) vertical projection: sin(d t) = (-1)^n T_d(sin t), which is the
///      negated Chebyshev model exactly when n is odd.
struct CircleProjectionReport {
  double max_error = 0.0;
  bool vertical_model_is_negated = false;
};

inline CircleProjectionReport circle_projection_check(int d, int samples = 1000,
                                                      std::uint64_t seed = 0x5eed) {
  if (d < 1 || d % 2 == 0)
    throw std::invalid_argument("circle_projection_check: d must be odd");
  const int n = (d - 1) / 2;
  const double sigma = (n % 2 == 0) ? 1.0 : -1.0;
  const IntervalMap t = chebyshev(d);
  Rng rng(seed);
  CircleProjectionReport report;
  report.vertical_model_is_negated = (n % 2 == 1);
  auto probe = [&](double theta) {
    const double e1 = std::abs(t.evaluate(std::cos(theta)) - std::cos(d * theta));
    const Complex lhs = std::polar(1.0, d * (std::numbers::pi - theta));
    const Complex rhs = std::polar(1.0, std::numbers::pi - d * theta);
    const double e2 = std::abs(lhs - rhs);
    const double e3 = std::abs(std::sin(d * theta) - sigma * t.evaluate(std::sin(theta)));
    report.max_error = std::max({report.max_error, e1, e2, e3});
  };
  probe(0.0);
  probe(std::numbers::pi / 2);
  for (int k = 0; k < samples; ++k) probe(rng.uniform(0.0, 2.0 * std::numbers::pi));
  return report;
}

}  // namespace ydim
