#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "anisoac/anisotropy.hpp"
#include "anisoac/distance.hpp"
#include "anisoac/grid.hpp"
#include "anisoac/reaction.hpp"

namespace anisoac {

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;
};

namespace detail {
class DiffuseKernel;
}

// u_t = (1/m) div(m a_p(x, grad u)) + f(u) / eps^2 with zero boundary flux.
// Build with DiffuseState::create; the cached operator is tied to the grid,
// metric, reaction and eps given there.
struct DiffuseState {
  ScalarField u;
  double t = 0.0;
  double eps = 0.0;
  Anisotropy metric = Anisotropy::euclidean();
  BistableReaction reaction = BistableReaction::make();
  double dt = 0.0;
  std::vector<EnergySample> energy_log;

  // dt <= 0 selects dt_fraction times the stability guard.
  static DiffuseState create(ScalarField u0, double eps, const Anisotropy& metric, const BistableReaction& reaction,
                             double dt = 0.0, double dt_fraction = 0.9);

  double guard() const;
  const detail::DiffuseKernel& kernel() const { return *kernel_; }

 private:
  std::shared_ptr<const detail::DiffuseKernel> kernel_;
};

// min(h^2 / (4 Lambda2 m_max / m_min), eps^2 / (2 sup |f'|)); sup |f'| is taken
// over [min(u_lo, 0) - 0.05, max(u_hi, 1) + 0.05].
double stability_guard(const Anisotropy& metric, const BistableReaction& reaction, const Grid& grid, double eps,
                       double u_lo = 0.0, double u_hi = 1.0);

// Sum over cells of m h^2 [a(x, G) + W(u) / eps^2], with a averaged over the
// four one-sided gradients of each cell (mirror condition at the walls). For
// quadratic densities this is the exact discrete energy of the scheme.
double energy(const DiffuseState& s);

// One explicit Euler step; throws StabilityError if s.dt exceeds the guard.
void step(DiffuseState& s);
// Same with an explicit step size (used to land exactly on t_end).
void step(DiffuseState& s, double dt);

// Right-hand side Delta_phi u + f(u) / eps^2 of the scheme.
ScalarField diffuse_rhs(const DiffuseState& s);

struct Observer {
  int stride = 1;  // called every `stride` steps, and at the final time
  std::function<void(const DiffuseState&)> callback;
};

struct SolveSummary {
  long steps = 0;
  double t = 0.0;
  double max_energy_increase = 0.0;  // max over steps of (F_new - F_old) / (1 + |F_old|)
  double bound_violation = 0.0;      // excess over the a-priori interval
  double u_min = 0.0, u_max = 0.0;
};

struct SolveOptions {
  bool track_energy = true;  // log the energy at every step
  double bound_lo = 0.0, bound_hi = 1.0;  // a-priori interval; set by solve from the state when equal
};

// Steps until t_end; the last step is shortened to land on t_end.
SolveSummary solve(DiffuseState& s, double t_end, const std::vector<Observer>& observers = {},
                   const SolveOptions& options = {});

using SpaceTimeFunction = std::function<double(const Vec2& x, double t)>;

// L0 w = w_t - Delta_phi w - f(w) / eps^2 on the grid at time t. Delta_phi uses
// the zero-flux scheme on the sampled candidate; w_t is a central difference
// with step dt_fd (forward when t < dt_fd).
ScalarField residual_L0(const Anisotropy& metric, const BistableReaction& reaction, double eps,
                        const SpaceTimeFunction& candidate, double t, const Grid& grid, double dt_fd = 1e-6);

struct ComparisonReport {
  double max_violation = 0.0;  // max over time and cells of (low - high), floored at 0
  double worst_time = 0.0;
  long steps = 0;
};

// Evolves both data with one shared step size and reports the worst ordering violation.
ComparisonReport comparison_check(const ScalarField& low0, const ScalarField& high0, double eps,
                                  const Anisotropy& metric, const BistableReaction& reaction, double t_end);

// Initial data. The signed distance is positive outside the front, so u0 is
// close to 1 outside and close to 0 inside.
ScalarField smoothed_indicator(const BistableReaction& reaction, const ScalarField& signed_dist, double eps_smooth);
ScalarField linear_ramp(double a, double slope, const ScalarField& signed_dist);
// Cells closer than width to the boundary copy the nearest cell at distance >= width.
void flatten_boundary_collar(ScalarField& u, double width);
// sup |u| + sup |grad u| + sup max_ij |d_i d_j u| by differences on the grid.
double initial_data_norm(const ScalarField& u0);

namespace detail {

class DiffuseKernel {
 public:
  DiffuseKernel(const Anisotropy& metric, const BistableReaction& reaction, const Grid& grid, double eps, double u_lo,
                double u_hi);
  void laplacian(const ScalarField& u, ScalarField& out) const;
  double energy(const ScalarField& u) const;
  double guard() const { return guard_; }
  const Grid& grid() const { return grid_; }
  double eps() const { return eps_; }
  ScalarField& workspace() const { return work_; }

 private:
  Anisotropy metric_;
  BistableReaction reaction_;
  Grid grid_;
  double eps_;
  double guard_;
  bool quadratic_;
  double a11_ = 1.0, a12_ = 0.0, a22_ = 1.0;
  std::vector<double> mc_, mfx_, mfy_;
  std::unique_ptr<FluxOperator> general_;
  // Work arrays; a kernel is driven by one thread at a time.
  mutable std::vector<double> scratch_[4];
  mutable ScalarField work_;
};

}  // namespace detail
}  // namespace anisoac
