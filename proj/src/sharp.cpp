#include "anisoac/sharp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "anisoac/errors.hpp"

namespace anisoac {

namespace {

Vec2 central_gradient(const ScalarField& u, int i, int j) {
  const Grid& g = u.grid();
  int il = std::max(i - 1, 0), ir = std::min(i + 1, g.nx - 1);
  int jl = std::max(j - 1, 0), jr = std::min(j + 1, g.ny - 1);
  return Vec2((u(ir, j) - u(il, j)) / ((ir - il) * g.h), (u(i, jr) - u(i, jl)) / ((jr - jl) * g.h));
}

// Upper bound for the phi-length of a unit Euclidean step.
double max_phi_stretch(const Anisotropy& metric) { return DualMetric(metric).phi_max(); }

void rebuild_band(LevelSetState& s) {
  const Grid& g = s.psi.grid();
  s.band_cells.clear();
  s.in_band.assign(g.size(), 0);
  for (int k = 0; k < g.size(); ++k)
    if (std::abs(s.psi[k]) <= s.band) {
      s.band_cells.push_back(k);
      s.in_band[k] = 1;
    }
}

void check_boundary_collar(const ScalarField& psi) {
  const Grid& g = psi.grid();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (i >= 2 && j >= 2 && i < g.nx - 2 && j < g.ny - 2) continue;
      const bool neg = psi(i, j) < 0;
      if ((i + 1 < g.nx && (psi(i + 1, j) < 0) != neg) || (j + 1 < g.ny && (psi(i, j + 1) < 0) != neg))
        throw GeometryError(fmt::format("zero level reaches the boundary collar near cell ({}, {})", i, j));
    }
}

}  // namespace

double sharp_guard(const Anisotropy& metric, const Grid& grid) {
  double Lambda2 = metric.quadratic() ? Eigen::SelfAdjointEigenSolver<Mat2>(metric.matrix()).eigenvalues().maxCoeff()
                                      : estimate_constants(metric, 256, grid.box()).Lambda2;
  return grid.h * grid.h / (6.0 * Lambda2);
}

LevelSetState LevelSetState::create(const Anisotropy& metric, const Front& front, const Grid& grid, double dt,
                                    int reinit_stride, double dt_fraction) {
  if (reinit_stride < 1) throw InvalidInput("reinit_stride must be at least 1");
  LevelSetState s;
  s.metric = metric;
  s.reinit_stride = reinit_stride;
  s.band = 6.0 * grid.h;
  if (dt <= 0.0) {
    if (!(dt_fraction > 0.0 && dt_fraction <= 1.0)) throw InvalidInput("dt_fraction must lie in (0, 1]");
    dt = dt_fraction * sharp_guard(metric, grid);
  }
  s.dt = dt;
  const double reach = s.band + 3.0 * grid.h * max_phi_stretch(metric);
  s.psi = signed_distance(metric, front, grid, reach).base;
  s.curvature_op = std::make_shared<const FluxOperator>(metric, grid, FluxOperator::Law::phi0p, Boundary::extrapolated);
  check_boundary_collar(s.psi);
  rebuild_band(s);
  return s;
}

void reinitialize(LevelSetState& s) {
  extract_front(s.psi);  // topology check
  check_boundary_collar(s.psi);
  const Grid& g = s.psi.grid();
  const double reach = s.band + 3.0 * g.h * max_phi_stretch(s.metric);
  s.psi = redistance(s.metric, s.psi, reach, s.seed_band);
  rebuild_band(s);
}

void sharp_step(LevelSetState& s) {
  if (!(s.dt > 0.0)) throw InvalidInput("time step must be positive");
  const Grid& g = s.psi.grid();
  if (!s.curvature_op) throw InvalidInput("level-set state was not created with LevelSetState::create");
  std::vector<double> kappa;
  s.curvature_op->apply_cells(s.psi, s.band_cells, kappa);
  std::vector<double> next(s.band_cells.size());
  for (std::size_t n = 0; n < s.band_cells.size(); ++n) {
    const int k = s.band_cells[n], i = k % g.nx, j = k / g.nx;
    const Vec2 grad = central_gradient(s.psi, i, j);
    double speed = (grad[0] == 0.0 && grad[1] == 0.0) ? 0.0 : s.metric.phi0(g.center(i, j), grad) * kappa[n];
    next[n] = s.psi[k] + s.dt * speed;
  }
  for (std::size_t n = 0; n < s.band_cells.size(); ++n) {
    const int k = s.band_cells[n];
    const bool flipped = (next[n] < 0) != (s.psi[k] < 0);
    s.psi[k] = next[n];
    if (!flipped) continue;
    const int i = k % g.nx, j = k / g.nx;
    const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& o : nb) {
      int ii = i + o[0], jj = j + o[1];
      if (!g.contains_cell(ii, jj) || !s.in_band[g.index(ii, jj)])
        throw GeometryError(fmt::format("zero level reached the band edge at t = {}", s.t));
    }
  }
  s.t += s.dt;
  ++s.steps;
  if (s.steps % s.reinit_stride == 0) reinitialize(s);
}

void sharp_solve(LevelSetState& s, double t_end) {
  const double tol = 1e-12 * std::max(1.0, std::abs(t_end));
  const double dt = s.dt;
  while (s.t < t_end - tol) {
    s.dt = std::min(dt, t_end - s.t);
    sharp_step(s);
  }
  s.dt = dt;
}

Front extract_front(const ScalarField& psi) {
  const Grid& g = psi.grid();
  const int nx = g.nx, ny = g.ny;
  // Edge ids: horizontal (i,j)-(i+1,j) -> j*nx+i, vertical (i,j)-(i,j+1) -> nx*ny + j*nx+i.
  auto hid = [&](int i, int j) { return j * nx + i; };
  auto vid = [&](int i, int j) { return nx * ny + j * nx + i; };
  auto neg = [&](int i, int j) { return psi(i, j) < 0.0; };
  std::vector<int> next(2 * nx * ny, -1);
  std::vector<Vec2> point(2 * nx * ny);
  auto crossing = [&](int i0, int j0, int i1, int j1) {
    double a = psi(i0, j0), b = psi(i1, j1);
    double t = a / (a - b);
    return Vec2(g.center(i0, j0) + t * (g.center(i1, j1) - g.center(i0, j0)));
  };
  int segments = 0;
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      // Corners counter-clockwise from bottom-left; edge k joins corner k to corner k+1.
      const int ci[4] = {i, i + 1, i + 1, i}, cj[4] = {j, j, j + 1, j + 1};
      const int eid[4] = {hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
      bool s[4];
      for (int c = 0; c < 4; ++c) s[c] = neg(ci[c], cj[c]);
      int exits[2], entries[2], ne = 0, nn = 0;
      for (int e = 0; e < 4; ++e) {
        bool from = s[e], to = s[(e + 1) % 4];
        if (from == to) continue;
        // Crossing coordinates are computed from the lower-index corner so neighbours agree.
        const int a = e < 2 ? e : (e + 1) % 4, b = e < 2 ? e + 1 : e;
        point[eid[e]] = crossing(ci[a], cj[a], ci[b], cj[b]);
        if (from) exits[ne++] = e;
        else entries[nn++] = e;
      }
      if (ne == 0) continue;
      if (ne == 1) {
        next[eid[exits[0]]] = eid[entries[0]];
        ++segments;
        continue;
      }
      // Saddle: the center value decides whether the negative corners connect.
      double center = 0.25 * (psi(i, j) + psi(i + 1, j) + psi(i + 1, j + 1) + psi(i, j + 1));
      for (int q = 0; q < 2; ++q) {
        int e = exits[q];
        int target = center < 0.0 ? (e + 1) % 4 : (e + 3) % 4;
        next[eid[e]] = eid[target];
        ++segments;
      }
    }
  if (segments == 0) throw InvalidFront("psi has no zero level");
  std::vector<char> used(next.size(), 0);
  std::vector<std::vector<Vec2>> loops;
  for (std::size_t start = 0; start < next.size(); ++start) {
    if (next[start] < 0 || used[start]) continue;
    std::vector<Vec2> loop;
    int e = static_cast<int>(start);
    while (!used[e]) {
      used[e] = 1;
      const Vec2& p = point[e];
      if (loop.empty() || (p - loop.back()).norm() > 1e-12 * g.h) loop.push_back(p);
      e = next[e];
      if (e < 0) throw InvalidFront("zero level is open (it reaches the grid boundary)");
    }
    if (e != static_cast<int>(start)) throw InvalidFront("zero level is not a simple closed curve");
    if (loop.size() > 1 && (loop.front() - loop.back()).norm() <= 1e-12 * g.h) loop.pop_back();
    loops.push_back(std::move(loop));
  }
  if (loops.size() > 1)
    throw TopologyChange(fmt::format("zero level has {} components; the flow left the smooth regime", loops.size()));
  if (loops[0].size() < 3) throw InvalidFront("zero level is degenerate");
  Front f;
  f.vertices = std::move(loops[0]);
  return f;
}

Front front_curvature(const Anisotropy& metric, const Front& front, const ScalarField& psi) {
  const Grid& g = psi.grid();
  ScalarField kappa(g);
  FluxOperator(metric, g, FluxOperator::Law::phi0p, Boundary::extrapolated).apply(psi, kappa);
  VectorField euclid{g, std::vector<Vec2>(g.size(), Vec2::Zero())};
  ScalarField gx(g), gy(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.index(i, j);
      Vec2 gr = central_gradient(psi, i, j);
      gx[k] = gr[0];
      gy[k] = gr[1];
      double norm = gr.norm();
      if (norm == 0.0) continue;
      const Vec2 x = g.center(i, j);
      Vec2 n = gr / norm;
      euclid.values[k] = metric.ap(x, n) / metric.phi0(x, n);
    }
  ScalarField euclid_div = m_div(metric, euclid, Boundary::extrapolated);
  Front out = front;
  const std::size_t nv = front.size();
  out.normal.resize(nv);
  out.phi_normal.resize(nv);
  out.curvature.resize(nv);
  out.velocity.resize(nv);
  out.euclid_velocity.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const Vec2& x = front.vertices[v];
    Vec2 gr(gx.interpolate(x), gy.interpolate(x));
    if (gr.norm() < 0.1)
      throw DegenerateNormal(fmt::format("|grad psi| = {} < 0.1 at vertex {} ({}, {})", gr.norm(), v, x[0], x[1]));
    Vec2 n = gr.normalized();
    out.normal[v] = n;
    out.phi_normal[v] = metric.phi0_grad(x, n);
    out.curvature[v] = kappa.interpolate(x);
    out.velocity[v] = -out.curvature[v];
    out.euclid_velocity[v] = -euclid_div.interpolate(x);
  }
  return out;
}

double hausdorff_phi(const Anisotropy& metric, const Front& a, const Front& b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidFront("hausdorff_phi needs two polygons");
  DualMetric phi(metric);
  double h = 0.0;
  for (const auto& x : a.vertices) h = std::max(h, front_phi_distance(phi, x, b));
  for (const auto& x : b.vertices) h = std::max(h, front_phi_distance(phi, x, a));
  return h;
}

}  // namespace anisoac
