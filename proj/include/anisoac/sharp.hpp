#pragma once

#include <memory>
#include <vector>

#include "anisoac/anisotropy.hpp"
#include "anisoac/distance.hpp"
#include "anisoac/front.hpp"
#include "anisoac/grid.hpp"

namespace anisoac {

// Level-set form of V_{n,phi} = -kappa_phi:
//   psi_t = phi0(x, grad psi) div_m[phi0_p(x, grad psi)]
// updated explicitly in the band |psi| <= band and frozen outside it.
struct LevelSetState {
  ScalarField psi;  // anisotropic signed distance, positive outside
  double t = 0.0;
  Anisotropy metric = Anisotropy::euclidean();
  int reinit_stride = 20;
  double dt = 0.0;
  double band = 0.0;  // half-width, 6h by default
  long steps = 0;
  double seed_band = 0.0;  // passed to redistance at reinitialization

  // Maintained by create, sharp_step and reinitialize.
  std::shared_ptr<const FluxOperator> curvature_op;
  std::vector<int> band_cells;
  std::vector<char> in_band;

  // dt <= 0 selects dt_fraction of sharp_guard.
  static LevelSetState create(const Anisotropy& metric, const Front& front, const Grid& grid, double dt = 0.0,
                              int reinit_stride = 20, double dt_fraction = 0.9);
};

// h^2 / (6 Lambda2).
double sharp_guard(const Anisotropy& metric, const Grid& grid);

// One explicit step; every reinit_stride steps psi is redistanced from its own
// zero level (after a topology check through extract_front). Throws
// GeometryError when the zero level reaches the band edge or the boundary
// collar, TopologyChange when the level set splits.
void sharp_step(LevelSetState& s);
void reinitialize(LevelSetState& s);
// Steps until t_end, shortening the last step.
void sharp_solve(LevelSetState& s, double t_end);

// Zero contour by marching squares over cell centers, vertices at linear
// sub-cell crossings, oriented with psi < 0 on the left (counter-clockwise
// around a negative interior). Throws TopologyChange on several contours,
// InvalidFront when there is none or it is open.
Front extract_front(const ScalarField& psi);

// kappa_phi = div_m[phi0_p(x, grad psi)] interpolated at the vertices, plus the
// Euclidean-form velocity -(1/m) div[(m / phi0(x, n)) a_p(x, n)] with
// n = grad psi / |grad psi|, both in phi-normal units.
Front front_curvature(const Anisotropy& metric, const Front& front, const ScalarField& psi);

// Symmetric Hausdorff distance in the phi metric, vertex-to-polygon both ways.
double hausdorff_phi(const Anisotropy& metric, const Front& a, const Front& b);

}  // namespace anisoac
