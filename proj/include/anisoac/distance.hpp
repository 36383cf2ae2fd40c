#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "anisoac/anisotropy.hpp"
#include "anisoac/front.hpp"
#include "anisoac/grid.hpp"

namespace anisoac {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct SignedDistanceField {
  ScalarField base;  // positive outside the front, negative inside
  double d0 = kUnbounded;  // cut-off radius once cutoff() has been applied
  Anisotropy metric = Anisotropy::euclidean();
  double boundary_clearance = kUnbounded;  // Euclidean front-to-boundary distance, when known
};

struct DistanceSeed {
  int cell;
  double value;  // non-negative distance at the cell center
  Vec2 foot;     // closest source point realizing value
  int tag = -1;  // source element holding the foot, for refiners
};

// Improves the foot of x starting from a neighbor's (foot, tag); returns the distance.
using FootRefiner = std::function<double(const Vec2& x, Vec2& foot, int& tag)>;

// Shortest-path relaxation on the 16-neighbor graph. Each cell also tests the
// straight segment from its parent's foot point, which removes the graph's
// metrication error for constant metrics; an optional refiner then searches
// near that foot. Seeds keep their values. Cells farther than max_distance
// are not expanded; unreached cells stay +inf.
ScalarField propagate_distance(const DualMetric& phi, const std::vector<DistanceSeed>& seeds, const Grid& grid,
                               double max_distance = kUnbounded, std::vector<Vec2>* feet = nullptr,
                               const FootRefiner& refiner = {});

// dist_phi(x, sources) with sources given as cell indices.
ScalarField integrated_distance(const Anisotropy& metric, const std::vector<int>& sources, const Grid& grid);

// min over y on [a, b] of phi(x, x - y); phi frozen at x.
double segment_phi_distance(const DualMetric& phi, const Vec2& x, const Vec2& a, const Vec2& b, Vec2* foot = nullptr);
double front_phi_distance(const DualMetric& phi, const Vec2& x, const Front& front, Vec2* foot = nullptr);

SignedDistanceField signed_distance(const Anisotropy& metric, const Front& front, const Grid& grid,
                                    double max_distance = kUnbounded);

// Rebuilds a signed distance from the zero level of psi (sign preserved).
// Every cell next to a sign change (and every cell with |psi| < seed_band) is
// projected onto the zero level of a bicubic interpolant of psi, falling back
// to psi / phi0(grad psi); the rest is propagated and projected the same way.
// Cells beyond max_distance are set to +-max_distance.
ScalarField redistance(const Anisotropy& metric, const ScalarField& psi, double max_distance = kUnbounded,
                       double seed_band = 0.0);

// zeta: identity on |s| <= d0, +-2 d0 beyond 2 d0, C2 monotone quintic blend between.
double zeta(double s, double d0);
double zeta_prime(double s, double d0);
double zeta_second(double s, double d0);
SignedDistanceField cutoff(const SignedDistanceField& d, double d0);

enum class Boundary {
  zero_flux,     // boundary faces carry no flux (the solvers' Neumann condition)
  extrapolated,  // boundary faces use the adjacent cell's gradient
};

VectorField grad(const ScalarField& u);
VectorField anisotropic_grad(const Anisotropy& metric, const ScalarField& u);
// (1/m) div(m v) with face values averaged from the adjacent cells.
ScalarField m_div(const Anisotropy& metric, const VectorField& v, Boundary boundary = Boundary::extrapolated);
// (1/m) div(m a_p(x, grad u)) in conservative face-flux form.
ScalarField anisotropic_laplacian(const Anisotropy& metric, const ScalarField& u,
                                  Boundary boundary = Boundary::extrapolated);
// Sum over boundary faces of the outward flux m a_p . nu times face length.
double boundary_flux(const Anisotropy& metric, const ScalarField& u, Boundary boundary = Boundary::extrapolated);

// max |phi0(x, grad d) - 1| over interior cells with 2h/lambda0 <= |d| < band.
// band <= 0 selects d.d0.
double eikonal_residual(const Anisotropy& metric, const SignedDistanceField& d, double band = 0.0);

// Conservative face-flux divergence shared by the distance operators and the solvers.
class FluxOperator {
 public:
  enum class Law {
    ap,     // m a_p(x, G)
    phi0p,  // m phi0_p(x, G), zero at G = 0
  };
  FluxOperator(const Anisotropy& metric, const Grid& grid, Law law, Boundary boundary);

  // out = (1/m) div(flux(u)).
  void apply(const ScalarField& u, ScalarField& out) const;
  // Only cells with mask[k] != 0 are written.
  void apply_masked(const ScalarField& u, const std::vector<char>& mask, ScalarField& out) const;
  // out[n] = value at cells[n].
  void apply_cells(const ScalarField& u, const std::vector<int>& cells, std::vector<double>& out) const;
  double boundary_flux(const ScalarField& u) const;
  const std::vector<double>& cell_weight() const { return mc_; }

 private:
  Vec2 face_gradient_x(const ScalarField& u, int i, int j) const;  // face between (i-1,j) and (i,j)
  Vec2 face_gradient_y(const ScalarField& u, int i, int j) const;  // face between (i,j-1) and (i,j)
  Vec2 cell_gradient(const ScalarField& u, int i, int j) const;
  Vec2 law(const Vec2& x, const Vec2& G) const;
  double flux_x(const ScalarField& u, int i, int j) const;
  double flux_y(const ScalarField& u, int i, int j) const;

  Anisotropy metric_;
  Grid grid_;
  Law law_;
  Boundary boundary_;
  bool quadratic_;
  Mat2 A_;
  std::vector<double> mx_, my_, mc_;  // face and cell weights
};

}  // namespace anisoac
