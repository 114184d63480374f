#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace ydim {

/// Seeded generator used for every stochastic choice in the library.
/// A fixed seed makes whole runs reproducible byte-for-byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x5eed) : gen_(seed) {}

  double uniform(double a, double b) {
    std::uniform_real_distribution<double> d(a, b);
    return d(gen_);
  }

  std::size_t index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: empty range");
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(gen_);
  }

  std::complex<double> complex_in(double re0, double re1, double im0, double im1) {
    return {uniform(re0, re1), uniform(im0, im1)};
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// Greedy farthest-point subsample: near blue-noise spacing, deterministic
/// for a fixed seed. Returns indices into `points`.
inline std::vector<std::size_t> farthest_point_sample(
    const std::vector<std::complex<double>>& points, std::size_t count, Rng& rng) {
  const std::size_t n = points.size();
  if (n == 0) throw std::invalid_argument("farthest_point_sample: no points");
  if (count >= n) {
    std::vector<std::size_t> all(n);
    for (std::size_t k = 0; k < n; ++k) all[k] = k;
    return all;
  }
  std::vector<std::size_t> chosen;
  chosen.reserve(count);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::size_t cur = rng.index(n);
  chosen.push_back(cur);
  while (chosen.size() < count) {
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = std::abs(points[k] - points[cur]);
      if (d < min_dist[k]) min_dist[k] = d;
      if (min_dist[k] > best) {
        best = min_dist[k];
        best_idx = k;
      }
    }
    cur = best_idx;
    chosen.push_back(cur);
  }
  return chosen;
}

}  // namespace ydim
