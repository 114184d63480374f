#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ydim {

/// Ordinary least-squares line fit with goodness-of-fit diagnostics.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 paired samples");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ymean = sy / n;
  double ss_res = 0, ss_tot = 0;
  fit.residuals.resize(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (fit.slope * xs[k] + fit.intercept);
    fit.residuals[k] = r;
    ss_res += r * r;
    ss_tot += (ys[k] - ymean) * (ys[k] - ymean);
  }
  fit.r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

/// Least monotone-nondecreasing function dominating a scatter of (x, y) points.
/// Stored as breakpoints; eval(t) = max{ y_i : x_i <= t }.
struct MonotoneEnvelope {
  std::vector<std::pair<double, double>> breakpoints;  // sorted by x, y strictly increasing

  double eval(double t) const {
    double best = 0.0;
    bool any = false;
    for (const auto& [x, y] : breakpoints) {
      if (x <= t) {
        best = y;
        any = true;
      } else {
        break;
      }
    }
    if (!any && !breakpoints.empty()) return breakpoints.front().second;
    return best;
  }

  bool empty() const { return breakpoints.empty(); }
  double max_value() const { return breakpoints.empty() ? 0.0 : breakpoints.back().second; }
};

inline MonotoneEnvelope upper_envelope(std::vector<std::pair<double, double>> scatter) {
  MonotoneEnvelope env;
  if (scatter.empty()) return env;
  std::sort(scatter.begin(), scatter.end());
  double running = -std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : scatter) {
    if (y > running) {
      running = y;
      if (!env.breakpoints.empty() && env.breakpoints.back().first == x)
        env.breakpoints.back().second = y;
      else
        env.breakpoints.emplace_back(x, y);
    }
  }
  return env;
}

/// Power-law fit u = a * t^p via log-log regression. Points with
/// non-positive coordinates are skipped.
struct PowerFit {
  double exponent = 0.0;
  double prefactor = 1.0;
  double r2 = 0.0;
  std::size_t used = 0;
};

inline PowerFit power_fit(const std::vector<std::pair<double, double>>& pts) {
  std::vector<double> lx, ly;
  for (const auto& [t, u] : pts) {
    if (t > 0 && u > 0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(u));
    }
  }
  if (lx.size() < 2) throw std::invalid_argument("power_fit: need >= 2 positive samples");
  const LinearFit lf = linear_fit(lx, ly);
  PowerFit pf;
  pf.exponent = lf.slope;
  pf.prefactor = std::exp(lf.intercept);
  pf.r2 = lf.r2;
  pf.used = lx.size();
  return pf;
}

}  // namespace ydim
