#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ydim/dynamics.hpp"
#include "ydim/io.hpp"
#include "ydim/version.hpp"

using namespace ydim;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(YDIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("parse_complex accepts the documented literal forms") {
  CHECK(parse_complex("1") == Complex{1, 0});
  CHECK(parse_complex("-2.5") == Complex{-2.5, 0});
  CHECK(parse_complex("i") == Complex{0, 1});
  CHECK(parse_complex("-i") == Complex{0, -1});
  CHECK(parse_complex("2i") == Complex{0, 2});
  CHECK(parse_complex("1+2i") == Complex{1, 2});
  CHECK(parse_complex("0.5-0.25i") == Complex{0.5, -0.25});
  CHECK(parse_complex(" 1e-3 + 2.5e-2i ") == Complex{1e-3, 2.5e-2});
  CHECK(parse_complex("-1-2i") == Complex{-1, -2});

  CHECK_THROWS_AS(parse_complex(""), ParseError);
  CHECK_THROWS_AS(parse_complex("1+2"), ParseError);
  CHECK_THROWS_AS(parse_complex("foo"), ParseError);
  CHECK_THROWS_AS(parse_complex("1+2j"), ParseError);
}

TEST_CASE("parse_map_spec") {
  const auto f = parse_map_spec("poly: i, 0, 1");
  REQUIRE(f.degree() == 2);
  CHECK(f.coeffs[0] == Complex{0, 1});
  CHECK(f.coeffs[2] == Complex{1, 0});

  CHECK_THROWS_AS(parse_map_spec("poly 1, 0, 1"), ParseError);
  CHECK_THROWS_AS(parse_map_spec("rational: 1, 0, 1"), ParseError);
  CHECK_THROWS_AS(parse_map_spec("poly: 1, 0"), ParseError);   // degree < 2
  CHECK_THROWS_AS(parse_map_spec("poly: 1, 1, 0"), ParseError);  // zero leading coeff
}

TEST_CASE("complex literals round-trip through format_complex") {
  for (Complex z : {Complex{0.25, -1.5}, Complex{-3, 0}, Complex{0, 2}}) {
    CHECK(parse_complex(format_complex(z)) == z);
  }
}

TEST_CASE("ytree JSON schema round-trips") {
  const YTree y = straight_ytree({0.5, -0.25}, {0.3, 2.2, 4.4}, 0.75, 5);
  const Json j = to_json(y);
  // schema shape: center as [re, im], legs as arrays of pairs
  CHECK(j.at("center").is_array());
  CHECK(j.at("legs").size() == 3);
  CHECK(j.at("legs")[0][0].size() == 2);
  const YTree back = ytree_from_json(j);
  CHECK(std::abs(back.center - y.center) == 0.0);
  for (int leg = 0; leg < 3; ++leg) {
    REQUIRE(back.legs[leg].size() == y.legs[leg].size());
    for (std::size_t k = 0; k < y.legs[leg].pts.size(); ++k)
      CHECK(std::abs(back.legs[leg].pts[k] - y.legs[leg].pts[k]) == 0.0);
  }
}

TEST_CASE("grid binary format round-trips") {
  GridContinuum s;
  s.origin = {-1.25, 0.5};
  s.cell_width = 1.0 / 64;
  for (int k = 0; k < 40; ++k) {
    s.cells.insert({k, k / 3});
    s.cells.insert({k, k / 3 + 1});
  }
  std::stringstream buf;
  write_grid(s, buf);
  const GridContinuum back = read_grid(buf);
  CHECK(back.origin == s.origin);
  CHECK(back.cell_width == s.cell_width);
  CHECK(back.cells == s.cells);
}

TEST_CASE("grid binary format rejects garbage") {
  std::stringstream buf("not a grid file");
  CHECK_THROWS_AS(read_grid(buf), ParseError);
}

TEST_CASE("png writer produces decodable output") {
  GridContinuum s;
  s.cell_width = 1.0 / 16;
  for (int k = 0; k < 24; ++k) s.cells.insert({k, (k * k) % 7});
  const std::string path = "/tmp/ydim_test_grid.png";
  write_grid_png(s, path);
  const std::string data = slurp(path);
  REQUIRE(data.size() > 60);
  const unsigned char sig[8] = {137, 'P', 'N', 'G', 13, 10, 26, 10};
  for (int k = 0; k < 8; ++k) CHECK(static_cast<unsigned char>(data[k]) == sig[k]);
  CHECK(data.find("IHDR") != std::string::npos);
  CHECK(data.find("IDAT") != std::string::npos);
  CHECK(data.find("IEND") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("scan CSV is one data row per entry") {
  AntennaScanReport r;
  r.scales = {0.5};
  ScanEntry e;
  e.scale = 0.5;
  e.center = {1.0, -2.0};
  e.c = 0.25;
  e.status = ScanStatus::Ok;
  r.entries.push_back(e);
  const std::string csv = scan_report_csv(r);
  CHECK(csv.find("scale,center_re,center_im,c,status\r\n") == 0);
  CHECK(csv.find("0.5,1,-2,0.25,ok\r\n") != std::string::npos);
}

TEST_CASE("cli: julia writes artifacts and exits 0" * doctest::timeout(300)) {
  const std::string out = "/tmp/ydim_cli_julia";
  std::filesystem::remove_all(out);
  const int rc = run_cli("julia --map 'poly: i, 0, 1' --resolution 256 --out " + out);
  CHECK(rc == 0);
  CHECK(std::filesystem::exists(out + "/julia.grid"));
  CHECK(std::filesystem::exists(out + "/julia.png"));
  CHECK(std::filesystem::exists(out + "/julia.json"));
  const Json j = Json::parse(slurp(out + "/julia.json"));
  CHECK(j.at("version").get<std::string>() == std::string(kVersion));
  CHECK(j.at("config").at("map").get<std::string>() == "poly: i, 0, 1");
  CHECK(j.at("connected").get<bool>());
  // the grid file loads back into a valid continuum
  const GridContinuum s = read_grid_file(out + "/julia.grid");
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("cli: malformed spec exits 2; bad resolution exits 2") {
  CHECK(run_cli("julia --map 'nonsense' --out /tmp/ydim_cli_bad") == 2);
  CHECK(run_cli("julia --map 'poly: i, 0, 1' --resolution 100 --out /tmp/ydim_cli_bad") ==
        2);
  CHECK(run_cli("julia --map 'poly: i, 0, 1' --resolution 0 --out /tmp/ydim_cli_bad") == 2);
}

TEST_CASE("cli: no subcommand exits 2") { CHECK(run_cli("") == 2); }

TEST_CASE("cli: determinism of JSON/CSV bytes for a fixed seed" *
          doctest::timeout(300)) {
  const std::string out = "/tmp/ydim_cli_det";
  std::filesystem::remove_all(out);
  const std::string args =
      "antenna --map 'poly: i, 0, 1' --resolution 256 --seed 42 --centers 4 --scales 2 "
      "--r-min 0.4 --out " + out;
  CHECK(run_cli(args) == 0);
  const std::string json1 = slurp(out + "/antenna.json");
  const std::string csv1 = slurp(out + "/antenna.csv");
  const std::string png1 = slurp(out + "/antenna_overlay.png");
  CHECK(run_cli(args) == 0);
  CHECK(slurp(out + "/antenna.json") == json1);
  CHECK(slurp(out + "/antenna.csv") == csv1);
  CHECK(slurp(out + "/antenna_overlay.png") == png1);
}

TEST_CASE("cli: dim, cover, cheb subcommands produce their artifacts" *
          doctest::timeout(300)) {
  const std::string out = "/tmp/ydim_cli_misc";
  std::filesystem::remove_all(out);
  CHECK(run_cli("dim --map 'poly: 0, 0, 1' --resolution 512 --out " + out + "/dim") == 0);
  CHECK(std::filesystem::exists(out + "/dim/dim.json"));

  CHECK(run_cli("cover --map 'poly: 0, 0, 1' --resolution 256 --depth 4 --out " + out +
                "/cover") == 0);
  CHECK(std::filesystem::exists(out + "/cover/cover.json"));
  CHECK(std::filesystem::exists(out + "/cover/hierarchy.json"));
  CHECK(std::filesystem::exists(out + "/cover/distortion.csv"));
  {
    const Json j = Json::parse(slurp(out + "/cover/cover.json"));
    CHECK(j.at("expansion").at("verdict").get<std::string>() == "PASS");
    CHECK(j.at("degree").at("verdict").get<std::string>() == "PASS");
  }

  // degree 1 is reported but flagged as not expanding
  CHECK(run_cli("cheb --dmin 1 --dmax 3 --out " + out + "/cheb") == 0);
  {
    const Json j = Json::parse(slurp(out + "/cheb/cheb.json"));
    REQUIRE(j.at("rows").size() == 3);
    CHECK(j.at("rows")[0].at("growth_number").get<double>() == doctest::Approx(1.0));
    CHECK_FALSE(j.at("rows")[0].at("expanding").get<bool>());
    CHECK(j.at("rows")[2].at("growth_number").get<double>() == doctest::Approx(3.0));
  }
}

TEST_CASE("cli: an unreachable c-min just records failures, exit 0" *
          doctest::timeout(300)) {
  const std::string out = "/tmp/ydim_cli_cmin";
  std::filesystem::remove_all(out);
  CHECK(run_cli("antenna --map 'poly: i, 0, 1' --resolution 256 --centers 4 --scales 2 "
                "--c-min 0.99 --out " + out) == 0);
  const Json j = Json::parse(slurp(out + "/antenna.json"));
  CHECK(j.at("scan").at("hard_failures").get<int>() == 8);
  CHECK(j.at("scan").at("global_inf_c").get<double>() == 0.0);
  CHECK(j.at("azzam_bound").is_null());
}

TEST_CASE("cli: config file with flag override" * doctest::timeout(300)) {
  const std::string cfgpath = "/tmp/ydim_cli_cfg.ini";
  {
    std::ofstream cfg(cfgpath);
    cfg << "map=\"poly: 0, 0, 1\"\n";
    cfg << "resolution=128\n";
    cfg << "out=/tmp/ydim_cli_cfgout\n";
  }
  std::filesystem::remove_all("/tmp/ydim_cli_cfgout");
  // flag wins over the config value for resolution
  CHECK(run_cli("julia --config " + cfgpath + " --resolution 256") == 0);
  const Json j = Json::parse(slurp("/tmp/ydim_cli_cfgout/julia.json"));
  CHECK(j.at("config").at("resolution").get<int>() == 256);
  CHECK(j.at("config").at("map").get<std::string>() == "poly: 0, 0, 1");
}
