#include "anisoac/distance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <unordered_map>

#include <Eigen/LU>
#include <fmt/format.h>

#include "anisoac/errors.hpp"
#include "numeric_util.hpp"

namespace anisoac {

namespace {

constexpr int kOffsets[16][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},  {1, -1}, {-1, 1}, {-1, -1},
                                 {1, 2},  {2, 1},  {-1, 2}, {-2, 1}, {1, -2}, {2, -1}, {-1, -2}, {-2, -1}};

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Length of the straight segment from a to b under phi; Simpson rule in x for x-dependent metrics.
double straight_length(const DualMetric& phi, const Vec2& a, const Vec2& b) {
  Vec2 d = b - a;
  if (phi.field().x_independent()) return phi(a, d);
  return (phi(a, d) + 4.0 * phi(0.5 * (a + b), d) + phi(b, d)) / 6.0;
}

// Catmull-Rom bicubic interpolant of cell-centered data with value, gradient and Hessian.
struct Bicubic {
  const ScalarField& f;
  struct Sample {
    double value;
    Vec2 grad;
    Mat2 hess;
  };
  static void weights(double t, double w[4], double dw[4], double ddw[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
    dw[0] = 0.5 * (-3 * t2 + 4 * t - 1);
    dw[1] = 0.5 * (9 * t2 - 10 * t);
    dw[2] = 0.5 * (-9 * t2 + 8 * t + 1);
    dw[3] = 0.5 * (3 * t2 - 2 * t);
    ddw[0] = 0.5 * (-6 * t + 4);
    ddw[1] = 0.5 * (18 * t - 10);
    ddw[2] = 0.5 * (-18 * t + 8);
    ddw[3] = 0.5 * (6 * t - 2);
  }
  Sample operator()(const Vec2& y) const {
    const Grid& g = f.grid();
    const Box b = g.box();
    const double sx = (y[0] - b.lo[0]) / g.h - 0.5, sy = (y[1] - b.lo[1]) / g.h - 0.5;
    const int i0 = std::clamp(static_cast<int>(std::floor(sx)), 0, g.nx - 2);
    const int j0 = std::clamp(static_cast<int>(std::floor(sy)), 0, g.ny - 2);
    double wx[4], dwx[4], ddwx[4], wy[4], dwy[4], ddwy[4];
    weights(sx - i0, wx, dwx, ddwx);
    weights(sy - j0, wy, dwy, ddwy);
    Sample s{0.0, Vec2::Zero(), Mat2::Zero()};
    for (int b2 = 0; b2 < 4; ++b2) {
      const int j = std::clamp(j0 - 1 + b2, 0, g.ny - 1);
      for (int a2 = 0; a2 < 4; ++a2) {
        const double v = f(std::clamp(i0 - 1 + a2, 0, g.nx - 1), j);
        s.value += wx[a2] * wy[b2] * v;
        s.grad[0] += dwx[a2] * wy[b2] * v;
        s.grad[1] += wx[a2] * dwy[b2] * v;
        s.hess(0, 0) += ddwx[a2] * wy[b2] * v;
        s.hess(0, 1) += dwx[a2] * dwy[b2] * v;
        s.hess(1, 1) += wx[a2] * ddwy[b2] * v;
      }
    }
    const double ih = 1.0 / g.h;
    s.grad *= ih;
    s.hess(0, 0) *= ih * ih;
    s.hess(0, 1) *= ih * ih;
    s.hess(1, 1) *= ih * ih;
    s.hess(1, 0) = s.hess(0, 1);
    return s;
  }
};

double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

// Newton solve for y with psi(y) = 0 and x - y parallel to a_p(y, grad psi(y)),
// started from foot. Returns phi(x, x - y), or +inf without convergence.
double project_to_level(const Anisotropy& metric, const DualMetric& phi, const Bicubic& psi, const Vec2& x,
                        Vec2& foot, double h) {
  Vec2 y = foot;
  const bool quad = metric.quadratic();
  const Mat2& A = metric.matrix();
  for (int it = 0; it < 12; ++it) {
    const auto s = psi(y);
    const double gn = s.grad.norm();
    if (!(gn > 1e-8)) return kUnbounded;
    const Vec2 v = quad ? Vec2(A * s.grad) : metric.ap(y, s.grad);
    const Mat2 dv = quad ? Mat2(A * s.hess) : Mat2(metric.app(y, s.grad) * s.hess);
    const Vec2 r = x - y;
    Vec2 F(s.value, cross(r, v));
    Mat2 J;
    J(0, 0) = s.grad[0];
    J(0, 1) = s.grad[1];
    J(1, 0) = -v[1] + cross(r, dv.col(0));
    J(1, 1) = v[0] + cross(r, dv.col(1));
    const double det = J.determinant();
    if (!(std::abs(det) > 0.0)) return kUnbounded;
    Vec2 delta = J.inverse() * F;
    if (delta.norm() > h) delta *= h / delta.norm();
    y -= delta;
    if ((y - foot).norm() > 3.0 * h) return kUnbounded;
    if (delta.norm() < 1e-12 * h) {
      foot = y;
      return phi(x, x - y);
    }
  }
  return kUnbounded;
}

}  // namespace

ScalarField propagate_distance(const DualMetric& phi, const std::vector<DistanceSeed>& seeds, const Grid& grid,
                               double max_distance, std::vector<Vec2>* feet_out, const FootRefiner& refiner) {
  const int n = grid.size();
  ScalarField dist(grid, kUnbounded);
  std::vector<Vec2> feet(n, Vec2::Zero());
  std::vector<int> tags(n, -1);
  std::vector<char> fixed(n, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (const auto& s : seeds) {
    if (s.cell < 0 || s.cell >= n) throw InvalidInput("distance seed outside the grid");
    if (!(s.value >= 0.0)) throw InvalidInput("distance seed value must be non-negative");
    if (s.value < dist[s.cell]) {
      dist[s.cell] = s.value;
      feet[s.cell] = s.foot;
      tags[s.cell] = s.tag;
    }
    fixed[s.cell] = 1;
  }
  for (int k = 0; k < n; ++k)
    if (fixed[k]) heap.emplace(dist[k], k);

  while (!heap.empty()) {
    auto [d, k] = heap.top();
    heap.pop();
    if (d > dist[k] || d > max_distance) continue;
    const int i = k % grid.nx, j = k / grid.nx;
    const Vec2 xk = grid.center(i, j);
    const Vec2 fk = feet[k];
    const int tk = tags[k];
    for (const auto& o : kOffsets) {
      const int ii = i + o[0], jj = j + o[1];
      if (!grid.contains_cell(ii, jj)) continue;
      const int v = grid.index(ii, jj);
      if (fixed[v]) continue;
      const Vec2 xv = grid.center(ii, jj);
      double c = std::min(d + phi(0.5 * (xk + xv), xv - xk), straight_length(phi, fk, xv));
      if (!(c < dist[v])) continue;
      Vec2 fv = fk;
      int tv = tk;
      if (refiner) c = std::min(c, refiner(xv, fv, tv));
      dist[v] = c;
      feet[v] = fv;
      tags[v] = tv;
      heap.emplace(c, v);
    }
  }
  if (feet_out) *feet_out = std::move(feet);
  return dist;
}

ScalarField integrated_distance(const Anisotropy& metric, const std::vector<int>& sources, const Grid& grid) {
  if (sources.empty()) throw InvalidInput("integrated_distance needs at least one source cell");
  DualMetric phi(metric);
  std::vector<DistanceSeed> seeds;
  seeds.reserve(sources.size());
  for (int k : sources) {
    if (k < 0 || k >= grid.size()) throw InvalidInput("source cell outside the grid");
    seeds.push_back({k, 0.0, grid.center(k)});
  }
  return propagate_distance(phi, seeds, grid);
}

double segment_phi_distance(const DualMetric& phi, const Vec2& x, const Vec2& a, const Vec2& b, Vec2* foot) {
  const Vec2 d = b - a;
  double t = 0.0;
  if (phi.quadratic()) {
    const Mat2& M = phi.inverse_matrix();
    double dd = d.dot(M * d);
    t = dd > 0 ? std::clamp((x - a).dot(M * d) / dd, 0.0, 1.0) : 0.0;
  } else {
    auto f = [&](double s) { return phi(x, x - a - s * d); };
    t = detail::golden_min(f, 0.0, 1.0, 48).first;
    double ft = f(t);
    if (f(0.0) <= ft) t = 0.0;
    else if (f(1.0) <= ft) t = 1.0;
  }
  Vec2 y = a + t * d;
  if (foot) *foot = y;
  return phi(x, x - y);
}

double front_phi_distance(const DualMetric& phi, const Vec2& x, const Front& front, Vec2* foot) {
  const std::size_t n = front.size();
  std::vector<double> e(n);
  std::size_t k_best = 0;
  for (std::size_t k = 0; k < n; ++k) {
    e[k] = segment_distance(x, front.vertex(k), front.vertex(k + 1));
    if (e[k] < e[k_best]) k_best = k;
  }
  Vec2 y;
  double best = segment_phi_distance(phi, x, front.vertex(k_best), front.vertex(k_best + 1), &y);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == k_best || phi.phi_min() * e[k] >= best) continue;
    Vec2 yk;
    double v = segment_phi_distance(phi, x, front.vertex(k), front.vertex(k + 1), &yk);
    if (v < best) best = v, y = yk;
  }
  if (foot) *foot = y;
  return best;
}

SignedDistanceField signed_distance(const Anisotropy& metric, const Front& front, const Grid& grid,
                                    double max_distance) {
  validate_front(front);
  const Box box = grid.box();
  double clear = clearance(front, box);
  if (clear <= 0.0) throw InvalidFront("front leaves the grid interior");

  DualMetric phi(metric);
  const double h = grid.h;
  const double seed_radius = 2.0 * h;
  // Euclidean search radius guaranteeing the phi-closest point is found.
  const double search = seed_radius * phi.phi_max() / phi.phi_min() + h;

  // Spatial hash of segments, bucket size `search`.
  auto key = [](long i, long j) { return (i << 32) ^ (j & 0xffffffffL); };
  std::unordered_map<long, std::vector<int>> buckets;
  const std::size_t nseg = front.size();
  for (std::size_t s = 0; s < nseg; ++s) {
    const Vec2 &a = front.vertex(s), &b = front.vertex(s + 1);
    long i0 = static_cast<long>(std::floor((std::min(a[0], b[0]) - box.lo[0]) / search));
    long i1 = static_cast<long>(std::floor((std::max(a[0], b[0]) - box.lo[0]) / search));
    long j0 = static_cast<long>(std::floor((std::min(a[1], b[1]) - box.lo[1]) / search));
    long j1 = static_cast<long>(std::floor((std::max(a[1], b[1]) - box.lo[1]) / search));
    for (long i = i0; i <= i1; ++i)
      for (long j = j0; j <= j1; ++j) buckets[key(i, j)].push_back(static_cast<int>(s));
  }

  // Seed cells: centers within seed_radius (Euclidean) of the polygon.
  std::vector<char> candidate(grid.size(), 0);
  for (std::size_t s = 0; s < nseg; ++s) {
    const Vec2 &a = front.vertex(s), &b = front.vertex(s + 1);
    int i0 = std::max(0, static_cast<int>(std::floor((std::min(a[0], b[0]) - seed_radius - box.lo[0]) / h - 0.5)));
    int i1 = std::min(grid.nx - 1, static_cast<int>(std::ceil((std::max(a[0], b[0]) + seed_radius - box.lo[0]) / h)));
    int j0 = std::max(0, static_cast<int>(std::floor((std::min(a[1], b[1]) - seed_radius - box.lo[1]) / h - 0.5)));
    int j1 = std::min(grid.ny - 1, static_cast<int>(std::ceil((std::max(a[1], b[1]) + seed_radius - box.lo[1]) / h)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        if (segment_distance(grid.center(i, j), a, b) <= seed_radius) candidate[grid.index(i, j)] = 1;
  }
  std::vector<DistanceSeed> seeds;
  for (int k = 0; k < grid.size(); ++k) {
    if (!candidate[k]) continue;
    Vec2 x = grid.center(k);
    long bi = static_cast<long>(std::floor((x[0] - box.lo[0]) / search));
    long bj = static_cast<long>(std::floor((x[1] - box.lo[1]) / search));
    double best = kUnbounded;
    Vec2 foot = x;
    int tag = -1;
    for (long i = bi - 1; i <= bi + 1; ++i)
      for (long j = bj - 1; j <= bj + 1; ++j) {
        auto it = buckets.find(key(i, j));
        if (it == buckets.end()) continue;
        for (int s : it->second) {
          Vec2 y;
          double v = segment_phi_distance(phi, x, front.vertex(s), front.vertex(s + 1), &y);
          if (v < best) best = v, foot = y, tag = s;
        }
      }
    seeds.push_back({k, best, foot, tag});
  }
  if (seeds.empty()) throw InvalidFront("front does not pass near any cell center");

  // Search segments within a few cells of arc length around the inherited foot.
  std::vector<double> seg_len(nseg);
  for (std::size_t s = 0; s < nseg; ++s) seg_len[s] = (front.vertex(s + 1) - front.vertex(s)).norm();
  const double window = 3.0 * h * phi.phi_max() / phi.phi_min();
  const int ns = static_cast<int>(nseg);
  FootRefiner refine = [&](const Vec2& x, Vec2& foot, int& tag) {
    double best = kUnbounded;
    auto visit = [&](int s) {
      if (phi.phi_min() * segment_distance(x, front.vertex(s), front.vertex(s + 1)) >= best) return;
      Vec2 y;
      double v = segment_phi_distance(phi, x, front.vertex(s), front.vertex(s + 1), &y);
      if (v < best) best = v, foot = y, tag = s;
    };
    const int t0 = tag;
    visit(t0);
    double acc = 0.0;
    for (int step = 1; step < ns / 2 && acc < window; ++step) {
      int s = ((t0 + step) % ns + ns) % ns;
      acc += seg_len[s];
      visit(s);
    }
    acc = 0.0;
    for (int step = 1; step < ns / 2 && acc < window; ++step) {
      int s = ((t0 - step) % ns + ns) % ns;
      acc += seg_len[s];
      visit(s);
    }
    return best;
  };

  SignedDistanceField out;
  out.metric = metric;
  out.boundary_clearance = clear;
  out.base = propagate_distance(phi, seeds, grid, max_distance, nullptr, refine);
  ScalarField& d = out.base;

  // Scanline parity for the sign.
  std::vector<double> xs;
  for (int j = 0; j < grid.ny; ++j) {
    const double y = grid.center(0, j)[1];
    xs.clear();
    for (std::size_t s = 0; s < nseg; ++s) {
      const Vec2 &a = front.vertex(s), &b = front.vertex(s + 1);
      if ((a[1] > y) != (b[1] > y)) xs.push_back(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
    }
    std::sort(xs.begin(), xs.end());
    std::size_t c = 0;
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.center(i, j)[0];
      while (c < xs.size() && xs[c] <= x) ++c;
      double& v = d(i, j);
      if (!std::isfinite(v)) v = max_distance;
      if (c % 2 == 1) v = -v;
    }
  }
  return out;
}

ScalarField redistance(const Anisotropy& metric, const ScalarField& psi, double max_distance, double seed_band) {
  const Grid& g = psi.grid();
  DualMetric phi(metric);
  std::vector<DistanceSeed> seeds;
  const double h = g.h;
  const Bicubic interp{psi};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double v = psi(i, j);
      bool crossing = (v == 0.0) || std::abs(v) < seed_band;
      const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& o : nb) {
        int ii = i + o[0], jj = j + o[1];
        if (g.contains_cell(ii, jj) && ((psi(ii, jj) > 0) != (v > 0))) crossing = true;
      }
      if (!crossing) continue;
      int il = std::max(i - 1, 0), ir = std::min(i + 1, g.nx - 1);
      int jl = std::max(j - 1, 0), jr = std::min(j + 1, g.ny - 1);
      Vec2 grad((psi(ir, j) - psi(il, j)) / ((ir - il) * h), (psi(i, jr) - psi(i, jl)) / ((jr - jl) * h));
      const Vec2 x = g.center(i, j);
      double n0 = metric.phi0(x, grad);
      if (!(n0 > 1e-12)) continue;
      double dist = v / n0;
      Vec2 q = grad / n0;
      Vec2 foot = x - dist * metric.ap(x, q);
      // Normalizing by the gradient alone feeds back through neighbouring cells;
      // projecting onto the interpolated zero level is stable under repetition.
      Vec2 y = foot;
      double projected = project_to_level(metric, phi, interp, x, y, h);
      if (projected < kUnbounded) dist = projected, foot = y;
      seeds.push_back({g.index(i, j), std::abs(dist), foot});
    }
  if (seeds.empty()) throw InvalidFront("redistance: psi has no zero level");
  FootRefiner refine = [&](const Vec2& x, Vec2& foot, int&) {
    Vec2 y = foot;
    double v = project_to_level(metric, phi, interp, x, y, h);
    if (v < kUnbounded) foot = y;
    return v;
  };
  ScalarField d = propagate_distance(phi, seeds, g, max_distance, nullptr, refine);
  for (int k = 0; k < g.size(); ++k) {
    double v = std::isfinite(d[k]) ? std::min(d[k], max_distance) : max_distance;
    d[k] = psi[k] < 0 ? -v : v;
  }
  return d;
}

double zeta(double s, double d0) {
  double a = std::abs(s);
  if (a <= d0) return s;
  if (a >= 2.0 * d0) return sign_of(s) * 2.0 * d0;
  double t = (a - d0) / d0;
  double g = t + t * t * t * (4.0 + t * (-7.0 + 3.0 * t));
  return sign_of(s) * d0 * (1.0 + g);
}

double zeta_prime(double s, double d0) {
  double a = std::abs(s);
  if (a <= d0) return 1.0;
  if (a >= 2.0 * d0) return 0.0;
  double t = (a - d0) / d0;
  return (1.0 - t) * (1.0 - t) * (15.0 * t * t + 2.0 * t + 1.0);
}

double zeta_second(double s, double d0) {
  double a = std::abs(s);
  if (a <= d0 || a >= 2.0 * d0) return 0.0;
  double t = (a - d0) / d0;
  return sign_of(s) * (24.0 * t - 84.0 * t * t + 60.0 * t * t * t) / d0;
}

SignedDistanceField cutoff(const SignedDistanceField& d, double d0) {
  if (!(d0 > 0.0) || !std::isfinite(d0)) throw InvalidInput(fmt::format("cut-off radius must be positive, got {}", d0));
  if (std::isfinite(d.boundary_clearance) && 3.0 * d0 > d.boundary_clearance)
    throw GeometryError(fmt::format("front is {} from the boundary; cut-off radius {} needs at least {}",
                                    d.boundary_clearance, d0, 3.0 * d0));
  SignedDistanceField out = d;
  out.d0 = d0;
  for (auto& v : out.base.values()) v = zeta(v, d0);
  return out;
}

VectorField grad(const ScalarField& u) {
  const Grid& g = u.grid();
  VectorField v{g, std::vector<Vec2>(g.size())};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int il = std::max(i - 1, 0), ir = std::min(i + 1, g.nx - 1);
      int jl = std::max(j - 1, 0), jr = std::min(j + 1, g.ny - 1);
      v.values[g.index(i, j)] =
          Vec2((u(ir, j) - u(il, j)) / ((ir - il) * g.h), (u(i, jr) - u(i, jl)) / ((jr - jl) * g.h));
    }
  return v;
}

VectorField anisotropic_grad(const Anisotropy& metric, const ScalarField& u) {
  VectorField v = grad(u);
  for (int k = 0; k < u.grid().size(); ++k) v.values[k] = metric.T0(u.grid().center(k), v.values[k]);
  return v;
}

ScalarField m_div(const Anisotropy& metric, const VectorField& v, Boundary boundary) {
  const Grid& g = v.grid;
  if (static_cast<int>(v.values.size()) != g.size()) throw InvalidInput("m_div: vector field size mismatch");
  auto m_at = [&](const Vec2& x) { return metric.weight(x); };
  auto at = [&](int i, int j) -> const Vec2& { return v.values[g.index(i, j)]; };
  ScalarField out(g);
  const double h = g.h;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.center(i, j);
      auto face = [&](int ii, int jj, int axis, double side) {
        // Outward flux through the face toward neighbor (ii, jj).
        Vec2 xf = x + 0.5 * h * side * (axis == 0 ? Vec2(1, 0) : Vec2(0, 1));
        if (!g.contains_cell(ii, jj)) {
          if (boundary == Boundary::zero_flux) return 0.0;
          return side * m_at(xf) * at(i, j)[axis];
        }
        double mf = 0.5 * (m_at(x) + m_at(g.center(ii, jj)));
        return side * mf * 0.5 * (at(i, j)[axis] + at(ii, jj)[axis]);
      };
      double s = face(i + 1, j, 0, 1.0) + face(i - 1, j, 0, -1.0) + face(i, j + 1, 1, 1.0) + face(i, j - 1, 1, -1.0);
      out(i, j) = s / (h * m_at(x));
    }
  return out;
}

FluxOperator::FluxOperator(const Anisotropy& metric, const Grid& grid, Law law, Boundary boundary)
    : metric_(metric), grid_(grid), law_(law), boundary_(boundary), quadratic_(metric.quadratic()), A_(metric.matrix()) {
  const int nx = grid.nx, ny = grid.ny;
  mc_.resize(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    mc_[k] = metric.weight(grid.center(k));
    if (!(mc_[k] > 0.0) || !std::isfinite(mc_[k]))
      throw InvalidInput(fmt::format("weight m is not positive at cell {}", k));
  }
  mx_.assign((nx + 1) * ny, 0.0);
  my_.assign(nx * (ny + 1), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      double ml = i > 0 ? mc_[grid.index(i - 1, j)] : mc_[grid.index(i, j)];
      double mr = i < nx ? mc_[grid.index(i, j)] : mc_[grid.index(i - 1, j)];
      mx_[j * (nx + 1) + i] = 0.5 * (ml + mr);
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double mb = j > 0 ? mc_[grid.index(i, j - 1)] : mc_[grid.index(i, j)];
      double mt = j < ny ? mc_[grid.index(i, j)] : mc_[grid.index(i, j - 1)];
      my_[j * nx + i] = 0.5 * (mb + mt);
    }
}

Vec2 FluxOperator::cell_gradient(const ScalarField& u, int i, int j) const {
  int il = std::max(i - 1, 0), ir = std::min(i + 1, grid_.nx - 1);
  int jl = std::max(j - 1, 0), jr = std::min(j + 1, grid_.ny - 1);
  return Vec2((u(ir, j) - u(il, j)) / ((ir - il) * grid_.h), (u(i, jr) - u(i, jl)) / ((jr - jl) * grid_.h));
}

Vec2 FluxOperator::face_gradient_x(const ScalarField& u, int i, int j) const {
  const double h = grid_.h;
  double gx = (u(i, j) - u(i - 1, j)) / h;
  double gy;
  if (j > 0 && j < grid_.ny - 1)
    gy = (u(i, j + 1) + u(i - 1, j + 1) - u(i, j - 1) - u(i - 1, j - 1)) / (4.0 * h);
  else if (j == 0)
    gy = (u(i, 1) + u(i - 1, 1) - u(i, 0) - u(i - 1, 0)) / (2.0 * h);
  else
    gy = (u(i, j) + u(i - 1, j) - u(i, j - 1) - u(i - 1, j - 1)) / (2.0 * h);
  return Vec2(gx, gy);
}

Vec2 FluxOperator::face_gradient_y(const ScalarField& u, int i, int j) const {
  const double h = grid_.h;
  double gy = (u(i, j) - u(i, j - 1)) / h;
  double gx;
  if (i > 0 && i < grid_.nx - 1)
    gx = (u(i + 1, j) + u(i + 1, j - 1) - u(i - 1, j) - u(i - 1, j - 1)) / (4.0 * h);
  else if (i == 0)
    gx = (u(1, j) + u(1, j - 1) - u(0, j) - u(0, j - 1)) / (2.0 * h);
  else
    gx = (u(i, j) + u(i, j - 1) - u(i - 1, j) - u(i - 1, j - 1)) / (2.0 * h);
  return Vec2(gx, gy);
}

Vec2 FluxOperator::law(const Vec2& x, const Vec2& G) const {
  if (G[0] == 0.0 && G[1] == 0.0) return Vec2::Zero();
  if (quadratic_) {
    Vec2 AG = A_ * G;
    if (law_ == Law::ap) return AG;
    return AG / std::sqrt(G.dot(AG));
  }
  if (law_ == Law::ap) return metric_.ap(x, G);
  return metric_.phi0_grad(x, G);
}

double FluxOperator::flux_x(const ScalarField& u, int i, int j) const {
  const int nx = grid_.nx;
  const Vec2 xf = grid_.origin + grid_.h * Vec2(i, j + 0.5);
  const double m = mx_[j * (nx + 1) + i];
  if (i == 0 || i == nx) {
    if (boundary_ == Boundary::zero_flux) return 0.0;
    return m * law(xf, cell_gradient(u, i == 0 ? 0 : nx - 1, j))[0];
  }
  return m * law(xf, face_gradient_x(u, i, j))[0];
}

double FluxOperator::flux_y(const ScalarField& u, int i, int j) const {
  const int ny = grid_.ny;
  const Vec2 xf = grid_.origin + grid_.h * Vec2(i + 0.5, j);
  const double m = my_[j * grid_.nx + i];
  if (j == 0 || j == ny) {
    if (boundary_ == Boundary::zero_flux) return 0.0;
    return m * law(xf, cell_gradient(u, i, j == 0 ? 0 : ny - 1))[1];
  }
  return m * law(xf, face_gradient_y(u, i, j))[1];
}

void FluxOperator::apply(const ScalarField& u, ScalarField& out) const {
  require_same_grid(u.grid(), grid_, "flux operator");
  const int nx = grid_.nx, ny = grid_.ny;
  std::vector<double> fx((nx + 1) * ny), fy(nx * (ny + 1));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) fx[j * (nx + 1) + i] = flux_x(u, i, j);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) fy[j * nx + i] = flux_y(u, i, j);
  if (!(out.grid() == grid_)) out = ScalarField(grid_);
  const double inv_h = 1.0 / grid_.h;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double s = (fx[j * (nx + 1) + i + 1] - fx[j * (nx + 1) + i]) + (fy[(j + 1) * nx + i] - fy[j * nx + i]);
      out(i, j) = s * inv_h / mc_[grid_.index(i, j)];
    }
}

void FluxOperator::apply_masked(const ScalarField& u, const std::vector<char>& mask, ScalarField& out) const {
  require_same_grid(u.grid(), grid_, "flux operator");
  if (!(out.grid() == grid_)) out = ScalarField(grid_);
  const double inv_h = 1.0 / grid_.h;
  for (int j = 0; j < grid_.ny; ++j)
    for (int i = 0; i < grid_.nx; ++i) {
      const int k = grid_.index(i, j);
      if (!mask[k]) continue;
      double s = flux_x(u, i + 1, j) - flux_x(u, i, j) + flux_y(u, i, j + 1) - flux_y(u, i, j);
      out[k] = s * inv_h / mc_[k];
    }
}

void FluxOperator::apply_cells(const ScalarField& u, const std::vector<int>& cells, std::vector<double>& out) const {
  require_same_grid(u.grid(), grid_, "flux operator");
  out.resize(cells.size());
  const double inv_h = 1.0 / grid_.h;
  for (std::size_t n = 0; n < cells.size(); ++n) {
    const int k = cells[n], i = k % grid_.nx, j = k / grid_.nx;
    double s = flux_x(u, i + 1, j) - flux_x(u, i, j) + flux_y(u, i, j + 1) - flux_y(u, i, j);
    out[n] = s * inv_h / mc_[k];
  }
}

double FluxOperator::boundary_flux(const ScalarField& u) const {
  const int nx = grid_.nx, ny = grid_.ny;
  double s = 0.0;
  for (int j = 0; j < ny; ++j) s += flux_x(u, nx, j) - flux_x(u, 0, j);
  for (int i = 0; i < nx; ++i) s += flux_y(u, i, ny) - flux_y(u, i, 0);
  return s * grid_.h;
}

ScalarField anisotropic_laplacian(const Anisotropy& metric, const ScalarField& u, Boundary boundary) {
  FluxOperator op(metric, u.grid(), FluxOperator::Law::ap, boundary);
  ScalarField out(u.grid());
  op.apply(u, out);
  return out;
}

double boundary_flux(const Anisotropy& metric, const ScalarField& u, Boundary boundary) {
  return FluxOperator(metric, u.grid(), FluxOperator::Law::ap, boundary).boundary_flux(u);
}

double eikonal_residual(const Anisotropy& metric, const SignedDistanceField& d, double band) {
  if (band <= 0.0) band = d.d0;
  const ScalarField& f = d.base;
  const Grid& g = f.grid();
  double lambda0 = kUnbounded;
  for (int k = 0; k < 256; ++k) {
    double th = 2.0 * std::numbers::pi * k / 256;
    lambda0 = std::min(lambda0, metric.phi0(g.center(g.size() / 2), Vec2(std::cos(th), std::sin(th))));
  }
  const double collar = 2.0 * g.h / lambda0;
  double r = 0.0;
  bool any = false;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      double v = std::abs(f(i, j));
      if (v >= band || v < collar) continue;
      Vec2 gr((f(i + 1, j) - f(i - 1, j)) / (2 * g.h), (f(i, j + 1) - f(i, j - 1)) / (2 * g.h));
      r = std::max(r, std::abs(metric.phi0(g.center(i, j), gr) - 1.0));
      any = true;
    }
  if (!any) throw InvalidInput("eikonal_residual: empty band");
  return r;
}

}  // namespace anisoac
