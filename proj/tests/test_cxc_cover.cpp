#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ydim/cxc_cover.hpp"
#include "ydim/dynamics.hpp"

using namespace ydim;
using std::numbers::pi;

namespace {

PolynomialMap z_squared() { return PolynomialMap({{0, 0}, {0, 0}, {1, 0}}); }

GridContinuum circle_grid(int resolution = 256) {
  const auto jr = julia_set(z_squared(), {.resolution = resolution, .max_iter = 200});
  REQUIRE(jr.connected());
  return jr.continuum;
}

double angle_of(const GridContinuum& s, Cell c) {
  const auto z = s.center(c);
  return std::atan2(z.imag(), z.real());
}

// exact test metric on the circle: arc-length between cell angles
MetricView arc_metric(const GridContinuum& s) {
  return {"arc-length", [&s](Cell a, Cell b) {
            double d = std::abs(angle_of(s, a) - angle_of(s, b));
            if (d > pi) d = 2 * pi - d;
            return d;
          }};
}

// two overlapping arcs covering the circle
std::vector<std::vector<Cell>> two_arc_cover(const GridContinuum& s) {
  auto in_arc = [&](Cell c, double lo, double hi) {
    double a = angle_of(s, c);
    for (double shift : {-2 * pi, 0.0, 2 * pi})
      if (a + shift > lo && a + shift < hi) return true;
    return false;
  };
  std::vector<Cell> arc1, arc2;
  for (const Cell& c : s.sorted_cells()) {
    if (in_arc(c, -0.55 * pi, 0.55 * pi)) arc1.push_back(c);
    if (in_arc(c, 0.45 * pi, 1.55 * pi)) arc2.push_back(c);
  }
  return {arc1, arc2};
}

double element_angular_width(const GridContinuum& s, const CoverElement& e) {
  // width via extremal angles against the element's mean direction
  double sx = 0, sy = 0;
  for (const Cell& c : e.cells) {
    const double a = angle_of(s, c);
    sx += std::cos(a);
    sy += std::sin(a);
  }
  const double mean = std::atan2(sy, sx);
  double lo = 0, hi = 0;
  for (const Cell& c : e.cells) {
    double d = angle_of(s, c) - mean;
    while (d > pi) d -= 2 * pi;
    while (d < -pi) d += 2 * pi;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("build_hierarchy: angle doubling splits arcs in two" * doctest::timeout(300)) {
  const auto s = circle_grid();
  const auto u0 = two_arc_cover(s);
  const auto h = build_hierarchy(z_squared(), s, u0, 2);

  REQUIRE(h.levels.size() == 3);
  CHECK(h.levels[0].size() == 2);
  CHECK(h.levels[1].size() == 4);
  CHECK(h.levels[2].size() == 8);

  SUBCASE("angular width halves per level") {
    for (const auto& e : h.levels[1]) {
      const auto& parent = h.element(e.image_id);
      const double ratio =
          element_angular_width(s, e) / element_angular_width(s, parent);
      CHECK(ratio == doctest::Approx(0.5).epsilon(0.1));
    }
  }
  SUBCASE("covering at every level") {
    for (std::size_t lvl = 0; lvl < h.levels.size(); ++lvl) {
      for (const Cell& c : s.cells) CHECK(h.membership[lvl].count(c) > 0);
    }
  }
  SUBCASE("mapping degrees are 1 away from the branch point") {
    for (const auto& e : h.levels[1]) CHECK(e.mapping_degree == 1);
    for (const auto& e : h.levels[2]) CHECK(h.chain_degree(e) == 1);
  }
  SUBCASE("image consistency with gradient-scaled slack") {
    double grad_max = 0.0;
    for (const Cell& c : s.cells)
      grad_max = std::max(grad_max, std::abs(derivative_at(z_squared(), s.center(c))));
    const int slack = static_cast<int>(std::ceil(0.75 + 0.8 * grad_max));
    for (std::size_t lvl = 1; lvl < h.levels.size(); ++lvl) {
      for (const auto& e : h.levels[lvl]) {
        const auto& img = h.element(e.image_id);
        CellSet img_cells(img.cells.begin(), img.cells.end());
        for (int d = 0; d < slack; ++d) img_cells = dilate(img_cells, 1);
        for (const Cell& c : e.cells) {
          const Cell ic = s.cell_at(evaluate(z_squared(), s.center(c)));
          CHECK(img_cells.count(ic) > 0);
        }
      }
    }
  }
  SUBCASE("telescoping: chain degree equals a direct fiber count") {
    const auto& e = h.levels[2].front();
    const CoverElement* anc = &h.element(e.image_id);
    anc = &h.element(anc->image_id);
    // generic target in the level-0 ancestor
    const Complex w = s.center(anc->cells[anc->cells.size() / 2]);
    // fiber of f^2 over w: preimages of preimages
    int inside = 0;
    for (const auto& r1 : preimages(z_squared(), w))
      for (const auto& r2 : preimages(z_squared(), r1.point)) {
        double best = 1e9;
        for (const Cell& c : e.cells) best = std::min(best, std::abs(s.center(c) - r2.point));
        if (best <= 2.0 * s.cell_width) inside += r2.multiplicity;
      }
    CHECK(inside == h.chain_degree(e));
  }
}

TEST_CASE("build_hierarchy: depth 0 and input validation") {
  const auto s = circle_grid();
  const auto u0 = two_arc_cover(s);
  const auto h = build_hierarchy(z_squared(), s, u0, 0);
  CHECK(h.levels.size() == 1);
  CHECK(h.levels[0].size() == 2);

  // non-covering base
  std::vector<std::vector<Cell>> partial{u0[0]};
  CHECK_THROWS_AS(build_hierarchy(z_squared(), s, partial, 1), std::invalid_argument);
}

TEST_CASE("build_hierarchy: interval map laps" * doctest::timeout(300)) {
  // T2 = 2x^2 - 1 on [-1,1]: base cover of two overlapping subintervals.
  // Preimage components: f <= 0.1 gives one interval around 0, f >= -0.1
  // gives two; three level-1 elements in total.
  const PolynomialMap t2({{-1, 0}, {0, 0}, {2, 0}});
  const auto jr = julia_set(t2, {.resolution = 256, .max_iter = 200});
  REQUIRE(jr.connected());
  const auto& s = jr.continuum;
  std::vector<Cell> left, right;
  for (const Cell& c : s.sorted_cells()) {
    const double x = s.center(c).real();
    if (x < 0.1) left.push_back(c);
    if (x > -0.1) right.push_back(c);
  }
  const auto h = build_hierarchy(t2, s, {left, right}, 1);
  CHECK(h.levels[1].size() == 3);

  // the two-fold preimage of the right interval has mapping degree 1 per side
  int deg_two_elements = 0;
  for (const auto& e : h.levels[1])
    if (e.mapping_degree >= 2) ++deg_two_elements;
  // only the component through the turning point x=0 covers its image twice
  CHECK(deg_two_elements == 1);
}

TEST_CASE("check_expansion" * doctest::timeout(300)) {
  SUBCASE("angle metric mesh halves; PASS at depth 6") {
    // deep elements are a handful of cells wide at 512, so the halving
    // ratio carries an additive membership-slack term; the band below
    // reflects that (the tight 15% check runs at high resolution in the
    // acceptance suite)
    const auto s = circle_grid(512);
    const auto h = build_hierarchy(z_squared(), s, two_arc_cover(s), 6);
    const auto arc = arc_metric(s);
    const auto report = check_expansion(h, &arc);
    REQUIRE(report.mesh.size() == 7);
    CHECK(report.verdict == "PASS");
    for (std::size_t k = 1; k < report.mesh.size(); ++k) {
      const double ratio = report.mesh[k] / report.mesh[k - 1];
      CHECK(ratio > 0.40);
      CHECK(ratio < 0.68);
    }
    // euclidean chord mesh also certifies expansion
    CHECK(check_expansion(h).verdict == "PASS");
  }
  SUBCASE("insufficient depth") {
    const auto s = circle_grid();
    const auto h = build_hierarchy(z_squared(), s, two_arc_cover(s), 1);
    CHECK(check_expansion(h).verdict == "insufficient depth");
  }
}

TEST_CASE("check_degree: bounded vs degenerate base cover" * doctest::timeout(300)) {
  const auto s = circle_grid();
  SUBCASE("arc cover keeps chain degrees at 1") {
    const auto h = build_hierarchy(z_squared(), s, two_arc_cover(s), 5);
    const auto report = check_degree(h);
    CHECK(report.verdict == "PASS");
    CHECK(report.overall_max == 1);
  }
  SUBCASE("whole-set base cover blows the degree up") {
    std::vector<std::vector<Cell>> whole{s.sorted_cells()};
    const auto h = build_hierarchy(z_squared(), s, whole, 4);
    const auto report = check_degree(h);
    CHECK(report.verdict == "FAIL");
    CHECK(report.overall_max >= 8);
  }
}

TEST_CASE("check_irreducibility" * doctest::timeout(300)) {
  const auto s = circle_grid();
  SUBCASE("pi/8 arc needs exactly 4 doublings") {
    std::vector<Cell> arc;
    for (const Cell& c : s.sorted_cells()) {
      const double a = angle_of(s, c);
      if (a >= 0 && a <= pi / 8) arc.push_back(c);
    }
    REQUIRE(!arc.empty());
    const auto n = check_irreducibility(z_squared(), s, arc);
    REQUIRE(n.has_value());
    CHECK(*n == 4);
  }
  SUBCASE("whole set needs 0 steps") {
    const auto n = check_irreducibility(z_squared(), s, s.sorted_cells());
    REQUIRE(n.has_value());
    CHECK(*n == 0);
  }
}

TEST_CASE("visual_metric_estimate on the circle" * doctest::timeout(300)) {
  const auto s = circle_grid();
  const auto h = build_hierarchy(z_squared(), s, two_arc_cover(s), 6);

  SUBCASE("depth guard") {
    const auto shallow = build_hierarchy(z_squared(), s, two_arc_cover(s), 2);
    CHECK_THROWS_AS(visual_metric_estimate(shallow, std::log(2.0)), std::invalid_argument);
  }

  const auto vm = visual_metric_estimate(h, std::log(2.0));
  CHECK(vm.epsilon == doctest::Approx(std::log(2.0)));

  SUBCASE("same cell has maximal common level") {
    const Cell c = vm.samples.front();
    CHECK(vm.common_level(c, c) == h.depth());
    CHECK(vm.dist(c, c) == doctest::Approx(std::exp(-vm.epsilon * h.depth())));
  }
  SUBCASE("distance is symmetric and positive off the diagonal") {
    for (std::size_t a = 0; a < 12; ++a)
      for (std::size_t b = a + 1; b < 12; ++b) {
        const double d1 = vm.dist(vm.samples[a], vm.samples[b]);
        const double d2 = vm.dist(vm.samples[b], vm.samples[a]);
        CHECK(d1 == doctest::Approx(d2));
        CHECK(d1 > 0);
      }
  }
  SUBCASE("constants: C moderate, r0/r1 positive, triangle constant finite") {
    CHECK(vm.C >= 1.0);
    CHECK(vm.C < 16.0);
    CHECK(vm.r0 > 0.0);
    CHECK(vm.r1 > 0.0);
    CHECK(vm.max_level_gap >= 0);
    CHECK(vm.triangle_constant >= 1.0);
    CHECK(vm.triangle_constant < 32.0);
  }
  SUBCASE("qs modulus of euclidean vs the estimate stays bounded") {
    const auto vmref = vm;  // alias for capture clarity
    auto euclid = [&](std::size_t a, std::size_t b) {
      return std::abs(s.center(vmref.samples[a]) - s.center(vmref.samples[b]));
    };
    auto visual = [&](std::size_t a, std::size_t b) {
      return vmref.dist(vmref.samples[a], vmref.samples[b]);
    };
    const auto est = qs_modulus_estimate(vmref.samples.size(), euclid, visual, 4000);
    // bounded on bounded ratios (the envelope may grow as t -> infinity)
    CHECK(est.envelope.eval(0.5) < 8.0);
    CHECK(est.envelope.eval(1.0) < 16.0);
    CHECK(est.envelope.eval(2.0) < 32.0);
    CHECK(est.qs_consistent);
  }
  SUBCASE("estimate is comparable to arc length") {
    // level-based distance vs arc distance: bounded ratio both ways
    const auto arc = arc_metric(s);
    double lo = 1e18, hi = 0;
    for (std::size_t a = 0; a < vm.samples.size(); a += 5)
      for (std::size_t b = a + 1; b < vm.samples.size(); b += 7) {
        const double dv = vm.dist(vm.samples[a], vm.samples[b]);
        const double da = arc.dist(vm.samples[a], vm.samples[b]);
        if (da < 8 * s.cell_width) continue;  // below metric resolution
        lo = std::min(lo, dv / da);
        hi = std::max(hi, dv / da);
      }
    CHECK(hi / lo < 4.0 * vm.C * vm.C);
  }
}

TEST_CASE("check_distortion on the circle with the exact arc metric" *
          doctest::timeout(300)) {
  const auto s = circle_grid();
  const auto h = build_hierarchy(z_squared(), s, two_arc_cover(s), 6);
  const auto arc = arc_metric(s);

  SUBCASE("single-level hierarchy is rejected") {
    const auto shallow = build_hierarchy(z_squared(), s, two_arc_cover(s), 1);
    CHECK_THROWS_AS(check_distortion(shallow, arc), std::invalid_argument);
  }

  const auto stats = check_distortion(h, arc);
  CHECK(stats.roundness_pairs.size() > 50);
  CHECK(stats.diameter_pairs.size() > 20);
  CHECK(stats.verdict == "PASS");

  // angle doubling is a homothety in arc length: roundness is preserved up
  // to discretization, so the scatter hugs the diagonal
  for (const auto& [base, tilde] : stats.roundness_pairs) {
    CHECK(tilde < 2.5 * base + 1.0);
  }
  // relative diameters preserved within a factor ~2
  for (const auto& [base, tilde] : stats.diameter_pairs) {
    if (base > 0.05) {
      CHECK(tilde / base < 2.0);
      CHECK(tilde / base > 0.5);
    }
  }
  CHECK(stats.rho_minus.breakpoints.size() > 2);
}

TEST_CASE("homothety_check" * doctest::timeout(300)) {
  const auto s = circle_grid();
  SUBCASE("angle doubling contracts arc length by exactly 1/2") {
    HomothetyOptions opt;
    opt.n_pairs = 800;
    opt.expected_kappa = 0.5;
    opt.min_distance = 10.0 * s.cell_width;  // pairs below grid resolution skew ratios
    const auto report = homothety_check(z_squared(), s, arc_metric(s), opt);
    CHECK(report.kappa == doctest::Approx(0.5).epsilon(0.04));
    CHECK(report.violations == 0);
    CHECK(report.pairs_used > 400);
  }
  SUBCASE("discrete metric sees every map as an isometry (kappa 1)") {
    MetricView discrete{"discrete", [](Cell a, Cell b) { return a == b ? 0.0 : 1.0; }};
    HomothetyOptions opt;
    opt.n_pairs = 200;
    opt.expected_kappa = 1.0;
    const auto report = homothety_check(z_squared(), s, discrete, opt);
    CHECK(report.kappa == doctest::Approx(1.0));
    CHECK(report.violations == 0);
  }
  SUBCASE("interval folding still satisfies the bound near the turning point") {
    const PolynomialMap t2({{-1, 0}, {0, 0}, {2, 0}});
    const auto jr = julia_set(t2, {.resolution = 256, .max_iter = 200});
    HomothetyOptions opt;
    opt.n_pairs = 500;
    opt.min_distance = 10.0 * jr.continuum.cell_width;
    const auto report =
        homothety_check(t2, jr.continuum, euclidean_metric(jr.continuum), opt);
    CHECK(report.kappa > 0.0);
  }
}

TEST_CASE("qs_modulus_estimate") {
  // sample points on a circle with exact arc metric
  std::vector<double> angles;
  for (int k = 0; k < 64; ++k) angles.push_back(2 * pi * k / 64);
  auto arc = [&](std::size_t a, std::size_t b) {
    double d = std::abs(angles[a] - angles[b]);
    if (d > pi) d = 2 * pi - d;
    return d;
  };

  SUBCASE("identical metrics give the identity envelope, exactly") {
    const auto est = qs_modulus_estimate(angles.size(), arc, arc);
    for (const auto& [t, u] : est.envelope.breakpoints) CHECK(u == t);
    CHECK(est.qs_consistent);
  }
  SUBCASE("scaling one metric changes nothing") {
    auto scaled = [&](std::size_t a, std::size_t b) { return 2.0 * arc(a, b); };
    const auto est = qs_modulus_estimate(angles.size(), arc, scaled);
    for (const auto& [t, u] : est.envelope.breakpoints)
      CHECK(u == doctest::Approx(t).epsilon(1e-12));
  }
  SUBCASE("snowflake metric shows the square-root envelope") {
    auto snow = [&](std::size_t a, std::size_t b) { return std::sqrt(arc(a, b)); };
    const auto est = qs_modulus_estimate(angles.size(), arc, snow);
    CHECK(est.envelope_power.exponent == doctest::Approx(0.5).epsilon(0.02));
    for (const auto& [t, u] : est.envelope.breakpoints)
      CHECK(u == doctest::Approx(std::sqrt(t)).epsilon(1e-9));
  }
  SUBCASE("degenerate triples are skipped and counted") {
    auto zeroish = [&](std::size_t a, std::size_t b) {
      return (a == 0 || b == 0) ? 0.0 : arc(a, b);
    };
    const auto est = qs_modulus_estimate(angles.size(), zeroish, zeroish, 500);
    CHECK(est.skipped > 0);
  }
}
