#pragma once

#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ydim/antenna.hpp"
#include "ydim/chebyshev.hpp"
#include "ydim/complex_poly.hpp"
#include "ydim/cxc_cover.hpp"
#include "ydim/dynamics.hpp"
#include "ydim/grid.hpp"
#include "ydim/topology.hpp"
#include "ydim/ytree.hpp"

namespace ydim {

using Json = nlohmann::ordered_json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- complex literals ---------------------------------------------------------

/// Accepts "1", "-2.5", "i", "-i", "2i", "1+2i", "0.5-0.25i", "1e-3+2e-4i".
inline Complex parse_complex(std::string text) {
  auto strip = [](std::string s) {
    std::string out;
    for (char c : s)
      if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    return out;
  };
  text = strip(text);
  if (text.empty()) throw ParseError("empty complex literal");

  // split at the last +/- that is not part of an exponent and not leading
  std::size_t split = std::string::npos;
  for (std::size_t k = text.size(); k-- > 1;) {
    const char c = text[k];
    if ((c == '+' || c == '-') && text[k - 1] != 'e' && text[k - 1] != 'E') {
      split = k;
      break;
    }
  }

  auto parse_real = [](const std::string& s) -> double {
    if (s.empty()) throw ParseError("empty number in complex literal");
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ParseError("bad number in complex literal: '" + s + "'");
    }
    if (used != s.size()) throw ParseError("trailing junk in complex literal: '" + s + "'");
    return v;
  };
  auto parse_imag_part = [&](std::string s) -> double {
    // "...i" with optional bare sign ("i", "-i", "+i")
    s.pop_back();  // the trailing 'i'
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_real(s);
  };

  if (text.back() == 'i' || text.back() == 'I') {
    if (split == std::string::npos) return {0.0, parse_imag_part(text)};
    return {parse_real(text.substr(0, split)), parse_imag_part(text.substr(split))};
  }
  if (split != std::string::npos) {
    // forms like "1+2" are not complex literals
    throw ParseError("complex literal must end in 'i' when it has two parts: '" + text +
                     "'");
  }
  return {parse_real(text), 0.0};
}

inline std::string format_complex(Complex z) {
  std::ostringstream oss;
  oss.precision(17);
  oss << z.real();
  if (z.imag() >= 0)
    oss << "+" << z.imag() << "i";
  else
    oss << "-" << -z.imag() << "i";
  return oss.str();
}

/// "poly: c0, c1, ..., cd" with complex coefficient literals, ascending degree.
inline PolynomialMap parse_map_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw ParseError("map spec must look like 'poly: c0, c1, ..., cd'");
  std::string head = spec.substr(0, colon);
  head.erase(std::remove_if(head.begin(), head.end(),
                            [](unsigned char c) { return std::isspace(c); }),
             head.end());
  if (head != "poly") throw ParseError("unknown map kind '" + head + "' (expected 'poly')");

  std::vector<Complex> coeffs;
  std::string body = spec.substr(colon + 1);
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t comma = body.find(',', pos);
    const std::string tok =
        body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    coeffs.push_back(parse_complex(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  try {
    return PolynomialMap(std::move(coeffs));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid polynomial: ") + e.what());
  }
}

// --- JSON ----------------------------------------------------------------------

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json to_json(const Polyline& p) {
  Json arr = Json::array();
  for (const Complex& z : p.pts) arr.push_back(to_json(z));
  return arr;
}

inline Json to_json(const YTree& y) {
  Json j;
  j["center"] = to_json(y.center);
  Json legs = Json::array();
  for (const auto& leg : y.legs) legs.push_back(to_json(leg));
  j["legs"] = legs;
  return j;
}

inline YTree ytree_from_json(const Json& j) {
  YTree y;
  y.center = complex_from_json(j.at("center"));
  const auto& legs = j.at("legs");
  if (!legs.is_array() || legs.size() != 3) throw ParseError("ytree needs exactly 3 legs");
  for (int k = 0; k < 3; ++k) {
    Polyline leg;
    for (const auto& pt : legs[k]) leg.pts.push_back(complex_from_json(pt));
    y.legs[k] = std::move(leg);
  }
  return y;
}

inline Json to_json(const CriticalOrbitReport& r) {
  Json j;
  j["semi_hyperbolic_candidate"] = r.semi_hyperbolic_candidate;
  j["parabolic_suspect"] = r.parabolic_suspect;
  j["recurrent_suspect"] = r.recurrent_suspect;
  Json orbits = Json::array();
  for (const auto& o : r.orbits) {
    Json jo;
    jo["critical_point"] = to_json(o.critical_point);
    jo["classification"] = to_string(o.classification);
    jo["preperiod"] = o.preperiod;
    jo["period"] = o.period;
    jo["cycle_multiplier"] = o.cycle_multiplier;
    jo["parabolic_suspect"] = o.parabolic_suspect;
    Json pts = Json::array();
    for (const Complex& z : o.samples) pts.push_back(to_json(z));
    jo["samples"] = pts;
    orbits.push_back(std::move(jo));
  }
  j["orbits"] = orbits;
  return j;
}

inline Json to_json(const AntennaCertificate& c) {
  Json j;
  j["ball_center"] = to_json(c.ball_center);
  j["ball_radius"] = c.ball_radius;
  j["c_achieved"] = c.c_achieved;
  j["ytree"] = to_json(c.ytree);
  return j;
}

inline Json to_json(const AntennaScanReport& r, bool include_trees = false) {
  Json j;
  j["scales"] = r.scales;
  Json worst = Json::array();
  for (double w : r.per_scale_worst_c) {
    if (std::isfinite(w))
      worst.push_back(w);
    else
      worst.push_back(nullptr);
  }
  j["per_scale_worst_c"] = worst;
  j["global_inf_c"] = r.global_inf_c;
  j["hard_failures"] = r.hard_failures;
  j["resolution_limited"] = r.resolution_limited;
  j["antenna_like_at_tested_scales"] = r.antenna_like_at_tested_scales;
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json je;
    je["scale"] = e.scale;
    je["center"] = to_json(e.center);
    je["status"] = to_string(e.status);
    je["c"] = e.c;
    if (include_trees && e.certificate) je["certificate"] = to_json(*e.certificate);
    entries.push_back(std::move(je));
  }
  j["entries"] = entries;
  return j;
}

inline std::string scan_report_csv(const AntennaScanReport& r) {
  std::ostringstream oss;
  oss.precision(12);
  oss << "scale,center_re,center_im,c,status\r\n";
  for (const auto& e : r.entries)
    oss << e.scale << ',' << e.center.real() << ',' << e.center.imag() << ',' << e.c << ','
        << to_string(e.status) << "\r\n";
  return oss.str();
}

inline Json to_json(const AzzamBound& b) {
  Json j;
  j["c"] = b.c;
  j["bound_form"] = b.bound_form;
  if (b.numeric_bound)
    j["numeric_bound"] = *b.numeric_bound;
  else
    j["numeric_bound"] = nullptr;
  j["degenerate"] = b.degenerate;
  return j;
}

inline Json to_json(const BoxCountingReport& r) {
  Json j;
  j["estimate"] = r.estimate;
  j["r2"] = r.r2;
  j["box_sizes"] = r.box_sizes;
  j["counts"] = r.counts;
  j["residuals"] = r.residuals;
  j["caveat"] = r.caveat;
  return j;
}

inline Json to_json(const TopologyReport& r, double cell_width) {
  Json j;
  j["class"] = to_string(r.cls);
  j["skeleton_vertices"] = r.skeleton.vertices.size();
  j["skeleton_edges"] = r.skeleton.edges.size();
  j["skeleton_cycle_rank"] = r.skeleton.cycle_rank();
  j["skeleton_max_degree"] = r.skeleton.max_degree();
  j["cell_width"] = cell_width;
  if (r.ytree_witness) j["ytree_witness"] = to_json(*r.ytree_witness);
  return j;
}

inline Json to_json(const CoverHierarchy& h) {
  Json j;
  j["depth"] = h.depth();
  Json levels = Json::array();
  for (const auto& level : h.levels) {
    Json jl = Json::array();
    for (const auto& e : level) {
      Json je;
      je["id"] = e.id;
      je["level"] = e.level;
      je["image_id"] = e.image_id;
      je["degree"] = e.mapping_degree;
      je["chain_degree"] = h.chain_degree(e);
      je["cells"] = e.cells.size();
      const CellSet cs(e.cells.begin(), e.cells.end());
      const CellBounds bb = bounds_of(cs);
      je["bbox"] = Json::array({bb.i0, bb.j0, bb.i1, bb.j1});
      jl.push_back(std::move(je));
    }
    levels.push_back(std::move(jl));
  }
  j["levels"] = levels;
  return j;
}

inline std::string distortion_csv(const DistortionStats& stats) {
  std::ostringstream oss;
  oss.precision(12);
  oss << "kind,base,tilde\r\n";
  for (const auto& [a, b] : stats.roundness_pairs) oss << "roundness," << a << ',' << b << "\r\n";
  for (const auto& [a, b] : stats.diameter_pairs) oss << "rel_diameter," << a << ',' << b << "\r\n";
  for (const auto& [x, y] : stats.rho_minus.breakpoints)
    oss << "rho_minus_envelope," << x << ',' << y << "\r\n";
  for (const auto& [x, y] : stats.delta_minus.breakpoints)
    oss << "delta_minus_envelope," << x << ',' << y << "\r\n";
  return oss.str();
}

inline Json cheb_row_json(int d) {
  Json row;
  row["d"] = d;
  const IntervalMap t = chebyshev(d);
  const auto st = endpoint_preimage_structure(t);
  row["pattern"] = to_string(st.pattern);
  row["n"] = st.n;
  if (d >= 1) {
    const auto m = markov_incidence(t);
    row["partition_size"] = m.size();
    row["irreducible"] = m.irreducible();
    const double s = growth_number(m);
    row["growth_number"] = s;
    row["expanding"] = s > 1.0 + 1e-9;
    Json mat = Json::array();
    for (const auto& r : m.entries) mat.push_back(r);
    row["incidence"] = mat;
  }
  if (d >= 2) row["pl_model_max_error"] = pl_model_check(d);
  if (d % 2 == 1) {
    const auto proj = circle_projection_check(d);
    row["circle_projection_max_error"] = proj.max_error;
    row["vertical_model_is_negated"] = proj.vertical_model_is_negated;
  }
  if (d % 2 == 0) row["negation_conjugacy_error"] = negation_conjugacy_error(d);
  return row;
}

inline std::string cheb_table_csv(int d_min, int d_max) {
  std::ostringstream oss;
  oss.precision(12);
  oss << "d,pattern,n,growth_number,pl_model_max_error,circle_projection_max_error\r\n";
  for (int d = d_min; d <= d_max; ++d) {
    const Json row = cheb_row_json(d);
    oss << d << ',' << row["pattern"].get<std::string>() << ',' << row["n"].get<int>() << ',';
    oss << row["growth_number"].get<double>() << ',';
    if (row.contains("pl_model_max_error"))
      oss << row["pl_model_max_error"].get<double>();
    oss << ',';
    if (row.contains("circle_projection_max_error"))
      oss << row["circle_projection_max_error"].get<double>();
    oss << "\r\n";
  }
  return oss.str();
}

// --- GridContinuum binary format ----------------------------------------------
//
// magic "YGRD", u32 version, f64 origin_re, f64 origin_im, f64 cell_width,
// i64 i0, j0, width, height, then height rows of ceil(width/8) bitmask bytes.

inline void write_grid(const GridContinuum& s, std::ostream& out) {
  const CellBounds b = bounds_of(s.cells);
  const std::uint32_t version = 1;
  out.write("YGRD", 4);
  auto put = [&out](const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  put(&version, 4);
  const double ore = s.origin.real(), oim = s.origin.imag(), cw = s.cell_width;
  put(&ore, 8);
  put(&oim, 8);
  put(&cw, 8);
  const std::int64_t i0 = b.i0, j0 = b.j0, w = b.width(), h = b.height();
  put(&i0, 8);
  put(&j0, 8);
  put(&w, 8);
  put(&h, 8);
  const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
  std::vector<std::uint8_t> row(row_bytes);
  for (std::int64_t j = 0; j < h; ++j) {
    std::fill(row.begin(), row.end(), 0);
    for (std::int64_t i = 0; i < w; ++i)
      if (s.cells.count({static_cast<int>(i + i0), static_cast<int>(j + j0)}))
        row[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    put(row.data(), row_bytes);
  }
}

inline GridContinuum read_grid(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "YGRD", 4) != 0)
    throw ParseError("read_grid: bad magic");
  auto get = [&in](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw ParseError("read_grid: truncated stream");
  };
  std::uint32_t version = 0;
  get(&version, 4);
  if (version != 1) throw ParseError("read_grid: unsupported version");
  GridContinuum s;
  double ore, oim, cw;
  get(&ore, 8);
  get(&oim, 8);
  get(&cw, 8);
  s.origin = {ore, oim};
  s.cell_width = cw;
  std::int64_t i0, j0, w, h;
  get(&i0, 8);
  get(&j0, 8);
  get(&w, 8);
  get(&h, 8);
  const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
  std::vector<std::uint8_t> row(row_bytes);
  for (std::int64_t j = 0; j < h; ++j) {
    get(row.data(), row_bytes);
    for (std::int64_t i = 0; i < w; ++i)
      if (row[i / 8] & (1u << (i % 8)))
        s.cells.insert({static_cast<int>(i + i0), static_cast<int>(j + j0)});
  }
  return s;
}

inline void write_grid_file(const GridContinuum& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_grid(s, out);
}

inline GridContinuum read_grid_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_grid(in);
}

// --- minimal PNG writer (8-bit grayscale, stored deflate) -----------------------

namespace detail {

inline std::uint32_t crc32_update(std::uint32_t crc, const std::uint8_t* data,
                                  std::size_t n) {
  static std::uint32_t table[256];
  static bool init = false;
  if (!init) {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    init = true;
  }
  crc ^= 0xffffffffu;
  for (std::size_t k = 0; k < n; ++k) crc = table[(crc ^ data[k]) & 0xff] ^ (crc >> 8);
  return crc ^ 0xffffffffu;
}

inline void png_chunk(std::ostream& out, const char type[4],
                      const std::vector<std::uint8_t>& payload) {
  auto be32 = [&out](std::uint32_t v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24),
                               static_cast<std::uint8_t>(v >> 16),
                               static_cast<std::uint8_t>(v >> 8),
                               static_cast<std::uint8_t>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  be32(static_cast<std::uint32_t>(payload.size()));
  out.write(type, 4);
  if (!payload.empty())
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
  std::vector<std::uint8_t> whole(type, type + 4);
  whole.insert(whole.end(), payload.begin(), payload.end());
  be32(crc32_update(0, whole.data(), whole.size()));
}

}  // namespace detail

/// width x height 8-bit grayscale pixels, row-major, top row first.
inline void write_png(std::ostream& out, const std::vector<std::uint8_t>& pixels,
                      std::size_t width, std::size_t height) {
  if (pixels.size() != width * height)
    throw std::invalid_argument("write_png: pixel buffer size mismatch");
  static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  out.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<std::uint8_t> ihdr(13);
  auto be32at = [&](std::vector<std::uint8_t>& v, std::size_t pos, std::uint32_t x) {
    v[pos] = static_cast<std::uint8_t>(x >> 24);
    v[pos + 1] = static_cast<std::uint8_t>(x >> 16);
    v[pos + 2] = static_cast<std::uint8_t>(x >> 8);
    v[pos + 3] = static_cast<std::uint8_t>(x);
  };
  be32at(ihdr, 0, static_cast<std::uint32_t>(width));
  be32at(ihdr, 4, static_cast<std::uint32_t>(height));
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 0;   // grayscale
  ihdr[10] = ihdr[11] = ihdr[12] = 0;
  detail::png_chunk(out, "IHDR", ihdr);

  // raw scanlines with filter byte 0
  std::vector<std::uint8_t> raw;
  raw.reserve((width + 1) * height);
  for (std::size_t j = 0; j < height; ++j) {
    raw.push_back(0);
    raw.insert(raw.end(), pixels.begin() + static_cast<std::ptrdiff_t>(j * width),
               pixels.begin() + static_cast<std::ptrdiff_t>((j + 1) * width));
  }

  // zlib stream with stored deflate blocks
  std::vector<std::uint8_t> z;
  z.push_back(0x78);
  z.push_back(0x01);
  std::size_t pos = 0;
  do {
    const std::size_t n = std::min<std::size_t>(65535, raw.size() - pos);
    const bool final = (pos + n == raw.size());
    z.push_back(final ? 1 : 0);
    z.push_back(static_cast<std::uint8_t>(n & 0xff));
    z.push_back(static_cast<std::uint8_t>(n >> 8));
    z.push_back(static_cast<std::uint8_t>(~n & 0xff));
    z.push_back(static_cast<std::uint8_t>((~n >> 8) & 0xff));
    z.insert(z.end(), raw.begin() + static_cast<std::ptrdiff_t>(pos),
             raw.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  } while (pos < raw.size());
  std::uint32_t a = 1, b = 0;
  for (std::uint8_t byte : raw) {
    a = (a + byte) % 65521;
    b = (b + a) % 65521;
  }
  const std::uint32_t adler = (b << 16) | a;
  z.push_back(static_cast<std::uint8_t>(adler >> 24));
  z.push_back(static_cast<std::uint8_t>(adler >> 16));
  z.push_back(static_cast<std::uint8_t>(adler >> 8));
  z.push_back(static_cast<std::uint8_t>(adler));
  detail::png_chunk(out, "IDAT", z);
  detail::png_chunk(out, "IEND", {});
}

/// Raster of the continuum: set cells black on white; optional polyline
/// overlays drawn in mid-gray.
inline void write_grid_png(const GridContinuum& s, const std::string& path,
                           const std::vector<Polyline>& overlays = {}) {
  const CellBounds b = bounds_of(s.cells);
  const std::size_t w = static_cast<std::size_t>(b.width());
  const std::size_t h = static_cast<std::size_t>(b.height());
  std::vector<std::uint8_t> img(w * h, 255);
  for (const Cell& c : s.cells) {
    const std::size_t x = static_cast<std::size_t>(c.i - b.i0);
    const std::size_t y = static_cast<std::size_t>(b.j1 - c.j);  // top row first
    img[y * w + x] = 0;
  }
  for (const auto& poly : overlays) {
    for (std::size_t k = 1; k < poly.pts.size(); ++k) {
      const Complex p0 = poly.pts[k - 1], p1 = poly.pts[k];
      const double len = std::abs(p1 - p0);
      const int steps = std::max(1, static_cast<int>(std::ceil(2.0 * len / s.cell_width)));
      for (int t = 0; t <= steps; ++t) {
        const Complex p = p0 + (static_cast<double>(t) / steps) * (p1 - p0);
        const Cell c = s.cell_at(p);
        if (c.i < b.i0 || c.i > b.i1 || c.j < b.j0 || c.j > b.j1) continue;
        const std::size_t x = static_cast<std::size_t>(c.i - b.i0);
        const std::size_t y = static_cast<std::size_t>(b.j1 - c.j);
        img[y * w + x] = 128;
      }
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_png(out, img, w, h);
}

}  // namespace ydim
