#include "awp/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "awp/errors.hpp"

namespace awp {

namespace {

void put_f32(std::ostream& os, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
  os.write(reinterpret_cast<const char*>(&u), 4);
}

float get_f32(std::istream& is) {
  std::uint32_t u = 0;
  if (!is.read(reinterpret_cast<char*>(&u), 4)) throw ConfigError("field file: truncated data");
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

}  // namespace

void write_field(std::ostream& os, const SampledField& f) {
  const auto& s = f.spec();
  std::string label = f.plane_label().empty() ? "-" : f.plane_label();
  std::replace_if(label.begin(), label.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }, '_');
  os << fmt::format("AWP1 {} {} {:.17g} {:.17g} {}\n", s.n_x, s.n_y, s.pitch, s.wavelength, label);
  for (const auto& a : f.data()) {
    put_f32(os, a.real());
    put_f32(os, a.imag());
  }
}

SampledField read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("field file: missing header");
  std::istringstream hs(line);
  std::string magic, label;
  int nx = 0, ny = 0;
  double pitch = 0, wl = 0;
  hs >> magic >> nx >> ny >> pitch >> wl >> label;
  if (magic != "AWP1" || hs.fail()) throw ConfigError("field file: bad header '" + line + "'");
  GridSpec spec = make_grid(nx, ny, pitch, wl);
  std::vector<cplx> data(spec.size());
  for (auto& a : data) {
    const float re = get_f32(is);
    const float im = get_f32(is);
    a = {re, im};
  }
  return SampledField(spec, std::move(data), label == "-" ? std::string{} : label);
}

void save_field(const std::string& path, const SampledField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  write_field(os, f);
}

SampledField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path);
  return read_field(is);
}

void write_pgm(std::ostream& os, const std::vector<double>& values, int width, int height) {
  if (width <= 0 || height <= 0 || values.size() != static_cast<std::size_t>(width) * height)
    throw ShapeError("pgm: size does not match values");
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  os << "P5\n" << width << " " << height << "\n255\n";
  for (double v : values) {
    const double t = vmax > 0 ? std::clamp(v / vmax, 0.0, 1.0) : 0.0;
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
  }
}

void save_pgm(const std::string& path, const std::vector<double>& values, int width, int height) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  write_pgm(os, values, width, height);
}

void save_field_pgm(const std::string& path, const SampledField& f) {
  save_pgm(path, f.intensity(), f.spec().n_x, f.spec().n_y);
}

}  // namespace awp
