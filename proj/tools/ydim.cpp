// ydim: geometry and dynamics toolkit for Julia-set continua.
//
// Subcommands: julia, classify, antenna, dim, cheb, cover. Every run is
// deterministic for a fixed --seed; JSON output carries a config echo.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ydim/antenna.hpp"
#include "ydim/chebyshev.hpp"
#include "ydim/cxc_cover.hpp"
#include "ydim/dynamics.hpp"
#include "ydim/io.hpp"
#include "ydim/lifting.hpp"
#include "ydim/topology.hpp"
#include "ydim/version.hpp"

namespace {

using namespace ydim;

struct RunConfig {
  std::string map_spec = "poly: i, 0, 1";  // z^2 + i
  int resolution = 512;
  int max_iter = 300;
  double band_factor = 1.0;
  int threads = 1;
  std::uint64_t seed = 0x5eed;
  std::string out_dir = "out";

  // antenna scan
  int scales = 4;
  int centers = 16;
  double c_min = 0.0;
  double r_min = 0.0;  // 0 = resolution floor (8 cell widths)
  double r_max = 0.0;  // 0 = half the diameter

  // cover hierarchy
  int depth = 6;
  double epsilon = 0.0;  // 0 = log(deg f)

  // chebyshev table
  int d_min = 2;
  int d_max = 8;

  // topology
  double prune_factor = 4.0;

  void validate() const {
    if (resolution < 64 || (resolution & (resolution - 1)) != 0)
      throw ParseError("resolution must be a power of two >= 64");
    if (max_iter < 1) throw ParseError("max-iter must be positive");
    if (threads < 1) throw ParseError("threads must be positive");
    if (band_factor <= 0) throw ParseError("band-factor must be positive");
    if (prune_factor <= 0) throw ParseError("prune-factor must be positive");
    if (c_min < 0 || c_min >= 1) throw ParseError("c-min must lie in [0,1)");
  }
};

Json config_echo(const RunConfig& cfg) {
  Json j;
  j["map"] = cfg.map_spec;
  j["resolution"] = cfg.resolution;
  j["max_iter"] = cfg.max_iter;
  j["band_factor"] = cfg.band_factor;
  j["threads"] = cfg.threads;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out_dir;
  j["scales"] = cfg.scales;
  j["centers"] = cfg.centers;
  j["c_min"] = cfg.c_min;
  j["r_min"] = cfg.r_min;
  j["r_max"] = cfg.r_max;
  j["depth"] = cfg.depth;
  j["epsilon"] = cfg.epsilon;
  j["d_min"] = cfg.d_min;
  j["d_max"] = cfg.d_max;
  j["prune_factor"] = cfg.prune_factor;
  return j;
}

Json base_json(const RunConfig& cfg) {
  Json j;
  j["version"] = kVersion;
  j["config"] = config_echo(cfg);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::filesystem::path ensure_out(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

JuliaResult render(const RunConfig& cfg, const PolynomialMap& f) {
  JuliaOptions opt;
  opt.resolution = cfg.resolution;
  opt.max_iter = cfg.max_iter;
  opt.band_factor = cfg.band_factor;
  opt.threads = cfg.threads;
  return julia_set(f, opt);
}

int cmd_julia(const RunConfig& cfg) {
  const PolynomialMap f = parse_map_spec(cfg.map_spec);
  const auto dir = ensure_out(cfg);
  const JuliaResult jr = render(cfg, f);
  const auto& s = jr.continuum;

  write_grid_file(s, (dir / "julia.grid").string());
  write_grid_png(s, (dir / "julia.png").string());

  OrbitOptions oopt;
  const auto orbits = classify_critical_orbits(f, oopt);

  Json j = base_json(cfg);
  j["cells"] = s.cells.size();
  j["cell_width"] = s.cell_width;
  j["diameter"] = diameter(s);
  j["total_components"] = jr.total_components;
  j["significant_components"] = jr.significant_components;
  j["discarded_cells"] = jr.discarded_cells;
  j["connected"] = jr.connected();
  j["critical_orbits"] = to_json(orbits);
  write_json((dir / "julia.json").string(), j);

  std::cout << "cells: " << s.cells.size() << "\n"
            << "cell_width: " << s.cell_width << "\n"
            << "diameter: " << diameter(s) << "\n"
            << "components: " << jr.significant_components << " significant of "
            << jr.total_components << " total\n";
  if (!jr.connected()) {
    std::cerr << "error: boundary band is disconnected (" << jr.significant_components
              << " significant components); raise --resolution or --max-iter\n";
    return 1;
  }
  return 0;
}

int cmd_classify(const RunConfig& cfg) {
  const PolynomialMap f = parse_map_spec(cfg.map_spec);
  const auto dir = ensure_out(cfg);
  const JuliaResult jr = render(cfg, f);
  const auto& s = jr.continuum;
  const auto report = classify(s, cfg.prune_factor * s.cell_width);

  Json j = base_json(cfg);
  j["topology"] = to_json(report, s.cell_width);
  j["connected_input"] = jr.connected();
  write_json((dir / "classify.json").string(), j);
  if (report.ytree_witness)
    write_json((dir / "ytree.json").string(), to_json(*report.ytree_witness));

  std::cout << "class: " << to_string(report.cls) << "\n";
  if (!jr.connected()) {
    std::cerr << "error: input band disconnected; classification unreliable\n";
    return 1;
  }
  return 0;
}

int cmd_antenna(const RunConfig& cfg) {
  const PolynomialMap f = parse_map_spec(cfg.map_spec);
  const auto dir = ensure_out(cfg);
  const JuliaResult jr = render(cfg, f);
  const auto& s = jr.continuum;

  ScanOptions sopt;
  sopt.n_scales = cfg.scales;
  sopt.n_centers = cfg.centers;
  sopt.c_min = cfg.c_min;
  sopt.r_min = cfg.r_min;
  sopt.r_max = cfg.r_max;
  sopt.seed = cfg.seed;
  const auto report = antenna_scan(s, sopt);

  Json j = base_json(cfg);
  j["scan"] = to_json(report);
  if (report.global_inf_c > 0.0 && report.global_inf_c < 1.0)
    j["azzam_bound"] = to_json(azzam_bound(report.global_inf_c));
  else
    j["azzam_bound"] = nullptr;
  write_json((dir / "antenna.json").string(), j);
  write_text((dir / "antenna.csv").string(), scan_report_csv(report));

  std::vector<Polyline> overlays;
  for (const auto& e : report.entries)
    if (e.certificate)
      for (const auto& leg : e.certificate->ytree.legs) overlays.push_back(leg);
  write_grid_png(s, (dir / "antenna_overlay.png").string(), overlays);

  if (report.antenna_like_at_tested_scales)
    std::cout << "antenna-like at tested scales: inf c = " << report.global_inf_c << "\n";
  else if (report.hard_failures == static_cast<int>(report.entries.size()))
    std::cout << "no antenna found at any tested ball\n";
  else
    std::cout << "partial: " << report.hard_failures << " balls without antenna, inf c = "
              << report.global_inf_c << "\n";
  return 0;
}

int cmd_dim(const RunConfig& cfg) {
  const PolynomialMap f = parse_map_spec(cfg.map_spec);
  const auto dir = ensure_out(cfg);
  const JuliaResult jr = render(cfg, f);
  const auto report = box_counting_dim(jr.continuum);

  Json j = base_json(cfg);
  j["box_counting"] = to_json(report);
  write_json((dir / "dim.json").string(), j);
  std::cout << "box-counting dimension: " << report.estimate << " (r2 = " << report.r2
            << ")\n";
  return 0;
}

int cmd_cheb(const RunConfig& cfg) {
  if (cfg.d_min < 1 || cfg.d_max < cfg.d_min)
    throw ParseError("cheb: need 1 <= dmin <= dmax");
  const auto dir = ensure_out(cfg);
  Json j = base_json(cfg);
  Json rows = Json::array();
  for (int d = cfg.d_min; d <= cfg.d_max; ++d) rows.push_back(cheb_row_json(d));
  j["rows"] = rows;
  write_json((dir / "cheb.json").string(), j);
  write_text((dir / "cheb.csv").string(), cheb_table_csv(cfg.d_min, cfg.d_max));
  for (const auto& row : rows) {
    std::cout << "d=" << row["d"] << " pattern=" << row["pattern"].get<std::string>()
              << " growth=" << row["growth_number"].get<double>();
    if (!row["expanding"].get<bool>()) std::cout << " [not expanding]";
    std::cout << "\n";
  }
  return 0;
}

int cmd_cover(const RunConfig& cfg) {
  const PolynomialMap f = parse_map_spec(cfg.map_spec);
  const auto dir = ensure_out(cfg);
  const JuliaResult jr = render(cfg, f);
  const auto& s = jr.continuum;

  const auto u0 = default_base_cover(s);
  const auto h = build_hierarchy(f, s, u0, cfg.depth);
  write_json((dir / "hierarchy.json").string(), to_json(h));

  Json j = base_json(cfg);
  const auto expansion = check_expansion(h);
  j["expansion"] = {{"mesh", expansion.mesh}, {"verdict", expansion.verdict}};
  const auto degree = check_degree(h);
  j["degree"] = {{"per_level_max", degree.per_level_max},
                 {"overall_max", degree.overall_max},
                 {"verdict", degree.verdict}};

  // irreducibility probe from a small sampled patch
  {
    Rng rng(cfg.seed);
    const auto cells = s.sorted_cells();
    const Cell c0 = cells[rng.index(cells.size())];
    const auto patch = ball(s, s.center(c0), 8.0 * s.cell_width);
    const auto n = check_irreducibility(f, s, patch);
    j["irreducibility"] = {{"patch_cells", patch.size()},
                           {"n", n ? Json(*n) : Json(nullptr)}};
  }

  if (cfg.depth >= 4) {
    const double eps = cfg.epsilon > 0 ? cfg.epsilon : std::log(double(f.degree()));
    VisualMetricOptions vopt;
    vopt.seed = cfg.seed;
    const auto vm = visual_metric_estimate(h, eps, vopt);
    j["visual_metric"] = {{"epsilon", vm.epsilon},
                          {"C", vm.C},
                          {"r0", vm.r0},
                          {"r1", vm.r1},
                          {"max_level_gap", vm.max_level_gap},
                          {"max_sandwich_roundness", vm.max_sandwich_roundness},
                          {"triangle_constant", vm.triangle_constant},
                          {"samples", vm.samples.size()}};
    const auto metric = vm.metric_view();
    DistortionOptions dopt;
    dopt.seed = cfg.seed;
    const auto stats = check_distortion(h, metric, dopt);
    j["distortion"] = {{"verdict", stats.verdict},
                       {"roundness_pairs", stats.roundness_pairs.size()},
                       {"diameter_pairs", stats.diameter_pairs.size()}};
    write_text((dir / "distortion.csv").string(), distortion_csv(stats));

    HomothetyOptions hopt;
    hopt.seed = cfg.seed;
    hopt.expected_kappa = std::exp(-eps);
    hopt.min_distance = 0.0;
    const auto hom = homothety_check(f, s, metric, hopt);
    j["homothety"] = {{"kappa", hom.kappa},
                      {"violations", hom.violations},
                      {"pairs_used", hom.pairs_used},
                      {"expected_kappa", std::exp(-eps)}};
  } else {
    j["visual_metric"] = "insufficient depth";
  }
  write_json((dir / "cover.json").string(), j);
  std::cout << "expansion: " << expansion.verdict << "\n"
            << "degree: " << degree.verdict << " (max chain degree "
            << degree.overall_max << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometry and dynamics toolkit for Julia-set continua"};
  app.set_config("--config");

  RunConfig cfg;
  app.add_option("--map", cfg.map_spec, "map spec 'poly: c0, c1, ..., cd'");
  app.add_option("--resolution", cfg.resolution, "grid cells per axis (power of two)");
  app.add_option("--max-iter", cfg.max_iter, "escape-time iteration budget");
  app.add_option("--band-factor", cfg.band_factor, "boundary band width in cells");
  app.add_option("--threads", cfg.threads, "row-parallel workers");
  app.add_option("--seed", cfg.seed, "seed for all sampling");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--prune-factor", cfg.prune_factor, "skeleton spur pruning, in cells");

  auto* julia = app.add_subcommand("julia", "render the Julia boundary band");
  auto* classify_cmd = app.add_subcommand("classify", "circle/arc/contains-Y trichotomy");
  auto* antenna = app.add_subcommand("antenna", "multi-scale antenna scan");
  antenna->add_option("--scales", cfg.scales, "number of geometric scales");
  antenna->add_option("--centers", cfg.centers, "ball centers per scale");
  antenna->add_option("--c-min", cfg.c_min, "certificate acceptance threshold");
  antenna->add_option("--r-min", cfg.r_min, "smallest ball radius (0 = 8 cell widths)");
  antenna->add_option("--r-max", cfg.r_max, "largest ball radius (0 = diam/2)");
  auto* dim = app.add_subcommand("dim", "box-counting dimension estimate");
  auto* cheb = app.add_subcommand("cheb", "Chebyshev model suite table");
  cheb->add_option("--dmin", cfg.d_min, "smallest degree");
  cheb->add_option("--dmax", cfg.d_max, "largest degree");
  auto* cover = app.add_subcommand("cover", "cover hierarchy and axiom checks");
  cover->add_option("--depth", cfg.depth, "hierarchy depth");
  cover->add_option("--epsilon", cfg.epsilon, "visual metric rate (0 = log deg)");

  app.require_subcommand(0, 1);
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    cfg.validate();
    if (julia->parsed()) return cmd_julia(cfg);
    if (classify_cmd->parsed()) return cmd_classify(cfg);
    if (antenna->parsed()) return cmd_antenna(cfg);
    if (dim->parsed()) return cmd_dim(cfg);
    if (cheb->parsed()) return cmd_cheb(cfg);
    if (cover->parsed()) return cmd_cover(cfg);
    std::cerr << "error: choose a subcommand (julia, classify, antenna, dim, cheb, cover)\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
