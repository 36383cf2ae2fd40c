#pragma once

#include <functional>
#include <string>
#include <vector>

#include "anisoac/anisotropy.hpp"

namespace anisoac {

// Uniform cell-centered grid on [origin, origin + (nx, ny) h].
struct Grid {
  int nx = 0, ny = 0;
  double h = 0.0;
  Vec2 origin = Vec2::Zero();

  Grid() = default;
  Grid(int nx, int ny, double h, Vec2 origin);
  // Square cells covering box; the cell count per axis is round(width / h).
  static Grid covering(const Box& box, double h);

  int size() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  Vec2 center(int i, int j) const { return origin + h * Vec2(i + 0.5, j + 0.5); }
  Vec2 center(int k) const { return center(k % nx, k / nx); }
  Box box() const { return {origin, origin + h * Vec2(nx, ny)}; }
  bool contains_cell(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  bool operator==(const Grid& o) const;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0);
  static ScalarField sample(const Grid& g, const std::function<double(const Vec2&)>& f);

  const Grid& grid() const { return grid_; }
  int nx() const { return grid_.nx; }
  int ny() const { return grid_.ny; }
  double h() const { return grid_.h; }

  double& operator()(int i, int j) { return v_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return v_[grid_.index(i, j)]; }
  double& operator[](int k) { return v_[k]; }
  double operator[](int k) const { return v_[k]; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  double min() const;
  double max() const;
  double max_abs() const;
  bool all_finite() const;
  // Bilinear interpolation between cell centers, clamped at the border.
  double interpolate(const Vec2& x) const;

 private:
  Grid grid_;
  std::vector<double> v_;
};

struct VectorField {
  Grid grid;
  std::vector<Vec2> values;
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);

// Little-endian binary: "FFLD", uint16 nx, uint16 ny, double h, origin x, origin y, then row-major doubles.
void write_binary(const ScalarField& f, const std::string& path);
ScalarField read_binary(const std::string& path);
// Columns x1,x2,value; one row per cell.
void write_csv(const ScalarField& f, const std::string& path);

}  // namespace anisoac
