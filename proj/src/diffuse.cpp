#include "anisoac/diffuse.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "anisoac/errors.hpp"

namespace anisoac {

namespace {

double largest_second_derivative(const Anisotropy& metric, const Grid& grid) {
  if (metric.quadratic()) return Eigen::SelfAdjointEigenSolver<Mat2>(metric.matrix()).eigenvalues().maxCoeff();
  return estimate_constants(metric, 256, grid.box()).Lambda2;
}

double weight_ratio(const Anisotropy& metric, const Grid& grid) {
  if (metric.weight_constant()) return 1.0;
  double lo = kUnbounded, hi = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    double m = metric.weight(grid.center(k));
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  if (!(lo > 0.0)) throw InvalidInput("weight m must be positive on the grid");
  return hi / lo;
}

double guard_from(double Lambda2, double ratio, const BistableReaction& r, const Grid& g, double eps, double u_lo,
                  double u_hi) {
  double fp = r.max_abs_fprime(std::min(u_lo, 0.0) - 0.05, std::max(u_hi, 1.0) + 0.05);
  double diffusion = g.h * g.h / (4.0 * Lambda2 * ratio);
  double reaction = fp > 0.0 ? eps * eps / (2.0 * fp) : kUnbounded;
  return std::min(diffusion, reaction);
}

}  // namespace

double stability_guard(const Anisotropy& metric, const BistableReaction& reaction, const Grid& grid, double eps,
                       double u_lo, double u_hi) {
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  return guard_from(largest_second_derivative(metric, grid), weight_ratio(metric, grid), reaction, grid, eps, u_lo,
                    u_hi);
}

namespace detail {

DiffuseKernel::DiffuseKernel(const Anisotropy& metric, const BistableReaction& reaction, const Grid& grid, double eps,
                             double u_lo, double u_hi)
    : metric_(metric), reaction_(reaction), grid_(grid), eps_(eps), quadratic_(metric.quadratic()) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput(fmt::format("eps must be positive, got {}", eps));
  const int nx = grid.nx, ny = grid.ny;
  mc_.resize(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    mc_[k] = metric.weight(grid.center(k));
    if (!(mc_[k] > 0.0) || !std::isfinite(mc_[k])) throw InvalidInput("weight m must be positive on the grid");
  }
  const double ratio = *std::max_element(mc_.begin(), mc_.end()) / *std::min_element(mc_.begin(), mc_.end());
  guard_ = guard_from(largest_second_derivative(metric, grid), ratio, reaction, grid, eps, u_lo, u_hi);
  if (quadratic_) {
    const Mat2& A = metric.matrix();
    a11_ = A(0, 0);
    a12_ = A(0, 1);
    a22_ = A(1, 1);
    // Interior faces only: x-face (i+1/2, j) for i < nx-1, y-face (i, j+1/2) for j < ny-1.
    mfx_.assign(nx * ny, 0.0);
    mfy_.assign(nx * ny, 0.0);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        int k = grid.index(i, j);
        if (i + 1 < nx) mfx_[k] = 0.5 * (mc_[k] + mc_[k + 1]);
        if (j + 1 < ny) mfy_[k] = 0.5 * (mc_[k] + mc_[k + nx]);
      }
  } else {
    general_ = std::make_unique<FluxOperator>(metric, grid, FluxOperator::Law::ap, Boundary::zero_flux);
  }
}

// Fluxes of the quadratic scheme are the exact gradient of the quadrant energy:
// normal part m_f A11 Dx, cross part A12 times the m-weighted mean of the four
// one-sided Dy around the face (zero beyond the walls).
void DiffuseKernel::laplacian(const ScalarField& u, ScalarField& out) const {
  require_same_grid(u.grid(), grid_, "diffuse operator");
  if (!(out.grid() == grid_)) out = ScalarField(grid_);
  if (!quadratic_) {
    general_->apply(u, out);
    return;
  }
  const int nx = grid_.nx, ny = grid_.ny;
  const double inv_h = 1.0 / grid_.h, inv_h2 = inv_h * inv_h;
  const double* v = u.values().data();
  double* o = out.values().data();
  if (a12_ == 0.0) {
    const double cx = a11_ * inv_h2, cy = a22_ * inv_h2;
    for (int j = 0; j < ny; ++j) {
      const int row = j * nx;
      for (int i = 0; i < nx; ++i) {
        const int k = row + i;
        const double c = v[k];
        double sx = 0.0, sy = 0.0;
        if (i + 1 < nx) sx += mfx_[k] * (v[k + 1] - c);
        if (i > 0) sx -= mfx_[k - 1] * (c - v[k - 1]);
        if (j + 1 < ny) sy += mfy_[k] * (v[k + nx] - c);
        if (j > 0) sy -= mfy_[k - nx] * (c - v[k - nx]);
        o[k] = (cx * sx + cy * sy) / mc_[k];
      }
    }
    return;
  }
  // dx[k]: (u(i+1,j) - u(i,j)) / h, zero on the last column; dy likewise.
  std::vector<double>& dx = scratch_[0];
  std::vector<double>& dy = scratch_[1];
  std::vector<double>& fx = scratch_[2];
  std::vector<double>& fy = scratch_[3];
  for (auto* b : {&dx, &dy, &fx, &fy}) b->assign(nx * ny, 0.0);
  for (int j = 0; j < ny; ++j) {
    const int row = j * nx;
    for (int i = 0; i + 1 < nx; ++i) dx[row + i] = (v[row + i + 1] - v[row + i]) * inv_h;
    if (j + 1 < ny)
      for (int i = 0; i < nx; ++i) dy[row + i] = (v[row + nx + i] - v[row + i]) * inv_h;
  }
  for (int j = 0; j < ny; ++j) {
    const int row = j * nx;
    for (int i = 0; i + 1 < nx; ++i) {
      const int k = row + i;
      double left = dy[k] + (j > 0 ? dy[k - nx] : 0.0);
      double right = dy[k + 1] + (j > 0 ? dy[k + 1 - nx] : 0.0);
      fx[k] = mfx_[k] * a11_ * dx[k] + a12_ * 0.25 * (mc_[k] * left + mc_[k + 1] * right);
    }
    if (j + 1 < ny)
      for (int i = 0; i < nx; ++i) {
        const int k = row + i;
        double low = dx[k] + (i > 0 ? dx[k - 1] : 0.0);
        double high = dx[k + nx] + (i > 0 ? dx[k + nx - 1] : 0.0);
        fy[k] = mfy_[k] * a22_ * dy[k] + a12_ * 0.25 * (mc_[k] * low + mc_[k + nx] * high);
      }
  }
  for (int j = 0; j < ny; ++j) {
    const int row = j * nx;
    for (int i = 0; i < nx; ++i) {
      const int k = row + i;
      double s = fx[k] - (i > 0 ? fx[k - 1] : 0.0) + fy[k] - (j > 0 ? fy[k - nx] : 0.0);
      o[k] = s * inv_h / mc_[k];
    }
  }
}

double DiffuseKernel::energy(const ScalarField& u) const {
  require_same_grid(u.grid(), grid_, "diffuse energy");
  const int nx = grid_.nx, ny = grid_.ny;
  const double h = grid_.h, inv_h = 1.0 / h;
  const double inv_eps2 = 1.0 / (eps_ * eps_);
  const double* v = u.values().data();
  const bool cubic = reaction_.is_cubic();
  const double ra = reaction_.a();
  double total = 0.0;
  for (int j = 0; j < ny; ++j) {
    double row_sum = 0.0;
    const int row = j * nx;
    for (int i = 0; i < nx; ++i) {
      const int k = row + i;
      const double c = v[k];
      const double east = i + 1 < nx ? (v[k + 1] - c) * inv_h : 0.0;
      const double west = i > 0 ? (c - v[k - 1]) * inv_h : 0.0;
      const double north = j + 1 < ny ? (v[k + nx] - c) * inv_h : 0.0;
      const double south = j > 0 ? (c - v[k - nx]) * inv_h : 0.0;
      double grad_part;
      if (quadratic_) {
        // Mean over the four quadrants of G^T A G / 2.
        grad_part = 0.25 * (a11_ * (east * east + west * west) + a22_ * (north * north + south * south)) +
                    0.25 * a12_ * (east + west) * (north + south);
      } else {
        const Vec2 x = grid_.center(i, j);
        grad_part = 0.25 * (metric_.a(x, Vec2(east, north)) + metric_.a(x, Vec2(east, south)) +
                            metric_.a(x, Vec2(west, north)) + metric_.a(x, Vec2(west, south)));
      }
      double w;
      if (cubic) {
        const double c2 = c * c;
        w = c2 * c2 / 4.0 - (1.0 + ra) * c2 * c / 3.0 + ra * c2 / 2.0;
      } else {
        w = reaction_.W(c);
      }
      row_sum += mc_[k] * (grad_part + inv_eps2 * w);
    }
    total += row_sum;
  }
  return total * h * h;
}

}  // namespace detail

DiffuseState DiffuseState::create(ScalarField u0, double eps, const Anisotropy& metric,
                                  const BistableReaction& reaction, double dt, double dt_fraction) {
  if (!u0.all_finite()) throw InvalidInput("initial data must be finite");
  DiffuseState s;
  s.kernel_ = std::make_shared<const detail::DiffuseKernel>(metric, reaction, u0.grid(), eps, u0.min(), u0.max());
  s.u = std::move(u0);
  s.eps = eps;
  s.metric = metric;
  s.reaction = reaction;
  if (dt <= 0.0) {
    if (!(dt_fraction > 0.0 && dt_fraction <= 1.0)) throw InvalidInput("dt_fraction must lie in (0, 1]");
    dt = dt_fraction * s.kernel_->guard();
  }
  s.dt = dt;
  return s;
}

double DiffuseState::guard() const { return kernel_->guard(); }

double energy(const DiffuseState& s) { return s.kernel().energy(s.u); }

ScalarField diffuse_rhs(const DiffuseState& s) {
  ScalarField out(s.u.grid());
  s.kernel().laplacian(s.u, out);
  const double inv_eps2 = 1.0 / (s.eps * s.eps);
  for (int k = 0; k < out.grid().size(); ++k) out[k] += inv_eps2 * s.reaction.f(s.u[k]);
  return out;
}

void step(DiffuseState& s, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
  if (dt > s.guard() * (1.0 + 1e-12))
    throw StabilityError(fmt::format("time step {} exceeds the stability guard {}", dt, s.guard()));
  ScalarField& lap = s.kernel().workspace();
  s.kernel().laplacian(s.u, lap);
  const double c = dt / (s.eps * s.eps);
  auto& u = s.u.values();
  const auto& l = lap.values();
  if (s.reaction.is_cubic()) {
    const double a = s.reaction.a();
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double v = u[k];
      u[k] = v + dt * l[k] + c * v * (1.0 - v) * (v - a);
    }
  } else {
    for (std::size_t k = 0; k < u.size(); ++k) u[k] += dt * l[k] + c * s.reaction.f(u[k]);
  }
  s.t += dt;
}

void step(DiffuseState& s) { step(s, s.dt); }

SolveSummary solve(DiffuseState& s, double t_end, const std::vector<Observer>& observers,
                   const SolveOptions& options) {
  SolveSummary out;
  const double lo0 = s.u.min(), hi0 = s.u.max();
  double lo = options.bound_lo, hi = options.bound_hi;
  if (lo == hi) {
    lo = -std::max(std::abs(lo0), std::abs(hi0));
    hi = std::max(1.0, std::max(std::abs(lo0), std::abs(hi0)));
  }
  out.u_min = lo0;
  out.u_max = hi0;
  auto record_bounds = [&] {
    double mn = s.u.min(), mx = s.u.max();
    out.u_min = std::min(out.u_min, mn);
    out.u_max = std::max(out.u_max, mx);
    out.bound_violation = std::max({out.bound_violation, lo - mn, mx - hi});
  };
  record_bounds();
  double previous = 0.0;
  if (options.track_energy) {
    previous = energy(s);
    if (s.energy_log.empty() || s.energy_log.back().t != s.t) s.energy_log.push_back({s.t, previous});
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(t_end));
  while (s.t < t_end - tol) {
    double dt = std::min(s.dt, t_end - s.t);
    step(s, dt);
    ++out.steps;
    record_bounds();
    if (options.track_energy) {
      double e = energy(s);
      out.max_energy_increase = std::max(out.max_energy_increase, (e - previous) / (1.0 + std::abs(previous)));
      s.energy_log.push_back({s.t, e});
      previous = e;
    }
    const bool last = !(s.t < t_end - tol);
    for (const auto& o : observers)
      if (o.callback && (last || (o.stride > 0 && out.steps % o.stride == 0))) o.callback(s);
  }
  if (out.steps == 0)
    for (const auto& o : observers)
      if (o.callback) o.callback(s);
  out.t = s.t;
  return out;
}

ScalarField residual_L0(const Anisotropy& metric, const BistableReaction& reaction, double eps,
                        const SpaceTimeFunction& candidate, double t, const Grid& grid, double dt_fd) {
  if (!(dt_fd > 0.0)) throw InvalidInput("finite-difference step must be positive");
  ScalarField w = ScalarField::sample(grid, [&](const Vec2& x) { return candidate(x, t); });
  const bool central = t >= dt_fd;
  const double t_lo = central ? t - dt_fd : t;
  const double span = central ? 2.0 * dt_fd : dt_fd;
  ScalarField lap = anisotropic_laplacian(metric, w, Boundary::zero_flux);
  ScalarField out(grid);
  const double inv_eps2 = 1.0 / (eps * eps);
  for (int k = 0; k < grid.size(); ++k) {
    const Vec2 x = grid.center(k);
    double wt = (candidate(x, t + dt_fd) - (central ? candidate(x, t_lo) : w[k])) / span;
    out[k] = wt - lap[k] - inv_eps2 * reaction.f(w[k]);
  }
  return out;
}

ComparisonReport comparison_check(const ScalarField& low0, const ScalarField& high0, double eps,
                                  const Anisotropy& metric, const BistableReaction& reaction, double t_end) {
  require_same_grid(low0.grid(), high0.grid(), "comparison check");
  for (int k = 0; k < low0.grid().size(); ++k)
    if (low0[k] > high0[k]) throw InvalidInput("comparison check needs low0 <= high0 cellwise");
  const double lo = std::min(low0.min(), high0.min()), hi = std::max(low0.max(), high0.max());
  double dt = 0.9 * detail::DiffuseKernel(metric, reaction, low0.grid(), eps, lo, hi).guard();
  DiffuseState a = DiffuseState::create(low0, eps, metric, reaction, dt);
  DiffuseState b = DiffuseState::create(high0, eps, metric, reaction, dt);
  ComparisonReport r;
  const double tol = 1e-12 * std::max(1.0, std::abs(t_end));
  while (a.t < t_end - tol) {
    double d = std::min(dt, t_end - a.t);
    step(a, d);
    step(b, d);
    ++r.steps;
    for (int k = 0; k < low0.grid().size(); ++k) {
      double v = a.u[k] - b.u[k];
      if (v > r.max_violation) {
        r.max_violation = v;
        r.worst_time = a.t;
      }
    }
  }
  return r;
}

ScalarField smoothed_indicator(const BistableReaction& reaction, const ScalarField& signed_dist, double eps_smooth) {
  if (!(eps_smooth > 0.0)) throw InvalidInput("smoothing width must be positive");
  ScalarField u(signed_dist.grid());
  for (int k = 0; k < u.grid().size(); ++k) u[k] = reaction.U0(signed_dist[k] / eps_smooth);
  return u;
}

ScalarField linear_ramp(double a, double slope, const ScalarField& signed_dist) {
  ScalarField u(signed_dist.grid());
  for (int k = 0; k < u.grid().size(); ++k) u[k] = a + slope * signed_dist[k];
  return u;
}

void flatten_boundary_collar(ScalarField& u, double width) {
  const Grid& g = u.grid();
  // Cell centers sit at (i + 1/2) h from the wall.
  const int n = std::max(0, static_cast<int>(std::ceil(width / g.h - 0.5 - 1e-12)));
  if (2 * n >= std::min(g.nx, g.ny)) throw GeometryError("boundary collar covers the whole grid");
  if (n == 0) return;
  ScalarField src = u;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int ii = std::clamp(i, n, g.nx - 1 - n), jj = std::clamp(j, n, g.ny - 1 - n);
      u(i, j) = src(ii, jj);
    }
}

double initial_data_norm(const ScalarField& u0) {
  const Grid& g = u0.grid();
  const double h = g.h;
  double sup = u0.max_abs(), grad_sup = 0.0, hess_sup = 0.0;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      double gx = (u0(i + 1, j) - u0(i - 1, j)) / (2 * h), gy = (u0(i, j + 1) - u0(i, j - 1)) / (2 * h);
      grad_sup = std::max(grad_sup, std::hypot(gx, gy));
      double xx = (u0(i + 1, j) - 2 * u0(i, j) + u0(i - 1, j)) / (h * h);
      double yy = (u0(i, j + 1) - 2 * u0(i, j) + u0(i, j - 1)) / (h * h);
      double xy = (u0(i + 1, j + 1) - u0(i + 1, j - 1) - u0(i - 1, j + 1) + u0(i - 1, j - 1)) / (4 * h * h);
      hess_sup = std::max({hess_sup, std::abs(xx), std::abs(yy), std::abs(xy)});
    }
  return sup + grad_sup + hess_sup;
}

}  // namespace anisoac
