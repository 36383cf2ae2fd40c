#pragma once

#include <limits>
#include <string>
#include <vector>

#include "anisoac/anisotropy.hpp"
#include "anisoac/bounds.hpp"
#include "anisoac/config.hpp"
#include "anisoac/front.hpp"
#include "anisoac/grid.hpp"
#include "anisoac/reaction.hpp"

namespace anisoac {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Measurement { generation, thickness, convergence, energy };
std::string to_string(Measurement m);

// One eps of a sweep. Per-time vectors share the indexing of `times`.
struct MeasurementRow {
  double eps = 0.0, h = 0.0;
  double t_pred = 0.0;  // mu^-1 eps^2 |ln eps|
  double t_gen = kNaN;  // generation: first checkpoint meeting the classification
  double ratio = kNaN;  // t_gen / (eps^2 |ln eps|)
  double radius = kNaN;  // classification radius in phi-distance
  std::vector<double> times;
  std::vector<double> thickness;      // max over the front of the phi-width of {eta <= u <= 1 - eta}
  std::vector<double> metrication;    // frozen-metric error bound of each width
  std::vector<double> hausdorff;      // diffuse u = a front against the sharp front
  std::vector<double> control;        // same against the initial front
  std::vector<double> misclassified;  // area where |u - limit| > eta away from the sharp front
  std::vector<double> oracle;         // sharp front against the coordinate-change reference
  double max_energy_increase = 0.0;   // per-step relative increase, max over the run
  double bound_violation = 0.0;
  long steps = 0;
  std::vector<std::string> checkpoints;  // paths relative to the output directory
  std::string failure;                   // empty when the measurement succeeded

  bool ok() const { return failure.empty(); }
  double max_thickness() const;
  double max_hausdorff() const;
  double max_control() const;
};

struct FrontRecord {
  double eps = 0.0, t = 0.0;
  std::string source;  // initial | diffuse | sharp
  Front front;
};

struct EnergyRecord {
  double eps = 0.0, t = 0.0, energy = 0.0;
};

struct LabReport {
  Measurement kind = Measurement::generation;
  ExperimentConfig config;
  std::vector<MeasurementRow> rows;
  double fit_exponent = kNaN;      // log-log slope of the headline quantity against eps
  double control_exponent = kNaN;  // convergence negative control
  double oracle = kNaN;            // 1/mu (generation) or the kink z-width (thickness)
  std::vector<FrontRecord> fronts;
  std::vector<EnergyRecord> energy;
  std::string ledger;  // constants report per eps

  bool ok() const;
  std::vector<std::string> failures() const;
};

struct RunOptions {
  bool write_files = true;
  std::string output_dir;  // overrides config.output_dir when set
  // > 0: eta entering the generation classification radius, so runs with different
  // acceptance bands can share one neighbourhood. Defaults to config.eta.
  double radius_eta = 0.0;
};

// Ramp u0 = a + s zeta(d, d0) or U0(d / eps), with d the phi-signed distance to the front.
struct InitialData {
  Grid grid;
  Front front;
  SignedDistanceField dist;
  ScalarField u0;
};
InitialData make_initial_data(const ExperimentConfig& config, std::size_t eps_index);

LabReport run_generation(const ExperimentConfig& config, const RunOptions& options = {});
LabReport run_thickness(const ExperimentConfig& config, const RunOptions& options = {});
LabReport run_convergence(const ExperimentConfig& config, const RunOptions& options = {});
// Diffuse run to T per eps with the energy trace.
LabReport run_energy(const ExperimentConfig& config, const RunOptions& options = {});

// rows.csv, fronts.csv, energy.csv, ledger.txt, summary.csv and schema.txt.
void write_report(const LabReport& report, const std::string& dir);

// Generation test: outside |d| < radius, u in [1 - eta, 1 + eta] where d > 0 and
// u in [-eta, eta] where d < 0. Returns the number of classified cells, or -1
// when some classified cell fails.
long classification_holds(const ScalarField& u, const ScalarField& dist, double radius, double eta);

struct ThicknessSample {
  double width = 0.0;        // max over front vertices
  double metrication = 0.0;  // max |phi(p_hi, w) - phi(p_lo, w)|
  Front front;               // u = a contour
};
// Marches from every vertex of the u = a contour along a_p(x, n) (the phi-closest
// direction to the level lines) to the eta and 1 - eta crossings. Throws
// GeometryError when a ray leaves the grid before crossing.
ThicknessSample measure_thickness(const Anisotropy& metric, const ScalarField& u, double a, double eta);

// z-width of {eta <= U0 <= 1 - eta}.
double kink_width(const BistableReaction& reaction, double eta);
// Radius (in units of eps) beyond which the limit classification is checked in
// convergence runs: 2 + max(U0^-1(1 - eta/2), -U0^-1(eta/2)).
double layer_radius(const BistableReaction& reaction, double eta);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// For an ellipsoidal metric a = p.Ap/2 the flow is Euclidean curvature flow in
// y = A^{-1/2} x. Runs that flow from the mapped front and maps the results
// back at the given times.
std::vector<Front> coordinate_change_reference(const Mat2& A, const Front& front0, const std::vector<double>& times,
                                               double h, int reinit_stride);

}  // namespace anisoac
