#include "anisoac/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "anisoac/errors.hpp"

namespace anisoac {

static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");

Grid::Grid(int nx_, int ny_, double h_, Vec2 origin_) : nx(nx_), ny(ny_), h(h_), origin(origin_) {
  if (nx < 8 || ny < 8) throw InvalidInput(fmt::format("grid must be at least 8x8, got {}x{}", nx, ny));
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput(fmt::format("grid spacing must be positive, got {}", h));
  if (!origin.allFinite()) throw InvalidInput("grid origin must be finite");
}

Grid Grid::covering(const Box& box, double h) {
  int nx = static_cast<int>(std::lround((box.hi[0] - box.lo[0]) / h));
  int ny = static_cast<int>(std::lround((box.hi[1] - box.lo[1]) / h));
  return Grid(nx, ny, h, box.lo);
}

bool Grid::operator==(const Grid& o) const {
  return nx == o.nx && ny == o.ny && h == o.h && origin == o.origin;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw InvalidInput(fmt::format("{}: grid mismatch ({}x{} vs {}x{})", what, a.nx, a.ny, b.nx, b.ny));
}

ScalarField::ScalarField(const Grid& g, double fill) : grid_(g), v_(static_cast<std::size_t>(g.size()), fill) {}

ScalarField ScalarField::sample(const Grid& g, const std::function<double(const Vec2&)>& f) {
  ScalarField s(g);
  for (int k = 0; k < g.size(); ++k) s[k] = f(g.center(k));
  return s;
}

double ScalarField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double ScalarField::max() const { return *std::max_element(v_.begin(), v_.end()); }
double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : v_) m = std::max(m, std::abs(v));
  return m;
}
bool ScalarField::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::interpolate(const Vec2& x) const {
  double s = (x[0] - grid_.origin[0]) / grid_.h - 0.5;
  double t = (x[1] - grid_.origin[1]) / grid_.h - 0.5;
  s = std::clamp(s, 0.0, grid_.nx - 1.0);
  t = std::clamp(t, 0.0, grid_.ny - 1.0);
  int i = std::min(static_cast<int>(s), grid_.nx - 2);
  int j = std::min(static_cast<int>(t), grid_.ny - 2);
  double fs = s - i, ft = t - j;
  const auto& f = *this;
  return (1 - fs) * (1 - ft) * f(i, j) + fs * (1 - ft) * f(i + 1, j) + (1 - fs) * ft * f(i, j + 1) +
         fs * ft * f(i + 1, j + 1);
}

void write_binary(const ScalarField& f, const std::string& path) {
  const Grid& g = f.grid();
  if (g.nx > 65535 || g.ny > 65535) throw InvalidInput("grid too large for the binary format");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  char header[32];
  std::memcpy(header, "FFLD", 4);
  std::uint16_t nx = static_cast<std::uint16_t>(g.nx), ny = static_cast<std::uint16_t>(g.ny);
  std::memcpy(header + 4, &nx, 2);
  std::memcpy(header + 6, &ny, 2);
  std::memcpy(header + 8, &g.h, 8);
  std::memcpy(header + 16, &g.origin[0], 8);
  std::memcpy(header + 24, &g.origin[1], 8);
  out.write(header, sizeof header);
  out.write(reinterpret_cast<const char*>(f.values().data()), static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!out) throw InvalidInput("write failed: " + path);
}

ScalarField read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  char header[32];
  in.read(header, sizeof header);
  if (!in || std::memcmp(header, "FFLD", 4) != 0) throw InvalidInput(path + ": not a field file");
  std::uint16_t nx, ny;
  double h, ox, oy;
  std::memcpy(&nx, header + 4, 2);
  std::memcpy(&ny, header + 6, 2);
  std::memcpy(&h, header + 8, 8);
  std::memcpy(&ox, header + 16, 8);
  std::memcpy(&oy, header + 24, 8);
  ScalarField f(Grid(nx, ny, h, Vec2(ox, oy)));
  in.read(reinterpret_cast<char*>(f.values().data()), static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!in) throw InvalidInput(path + ": truncated field data");
  return f;
}

void write_csv(const ScalarField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  out << "x1,x2,value\n";
  const Grid& g = f.grid();
  for (int k = 0; k < g.size(); ++k) {
    Vec2 c = g.center(k);
    out << fmt::format("{:.17g},{:.17g},{:.17g}\n", c[0], c[1], f[k]);
  }
}

}  // namespace anisoac
