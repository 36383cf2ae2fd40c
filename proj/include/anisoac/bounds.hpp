#pragma once

#include <memory>
#include <string>
#include <vector>

#include "anisoac/anisotropy.hpp"
#include "anisoac/diffuse.hpp"
#include "anisoac/distance.hpp"
#include "anisoac/front.hpp"
#include "anisoac/grid.hpp"
#include "anisoac/reaction.hpp"

namespace anisoac {

// One named constant with the inequality that defines or constrains it.
// margin >= 0 means the constraint holds; NaN when the entry is a plain value.
struct LedgerEntry {
  std::string name;
  double value = 0.0;
  std::string constraint;
  double margin = 0.0;
};

struct LedgerInputs {
  double eps = 0.0, eta = 0.1, T = 0.0;
  double C0 = 0.0;  // <= 0: initial_data_norm(*u0) when u0 is given, else 1
  double d0 = 0.0;  // <= 0: a tenth of the shorter domain side
  // Lower bound for |u0 - a| / |d| off the front, used for M1 when the fields are absent.
  double interface_slope = 1.0;
  const ScalarField* u0 = nullptr;     // sampled M1 when both fields are given
  const ScalarField* dist0 = nullptr;  // signed distance to the initial front
  int xi_samples = 161;
  int tau_samples = 64;
  double safety = 1.1;  // factor applied to sampled sup/inf constants
  bool strict = true;   // throw LedgerInfeasible on the first violated constraint
  unsigned seed = 12345;  // sampling of the metric constants
};

struct ConstantsLedger {
  BistableReaction reaction = BistableReaction::make();
  Anisotropy metric = Anisotropy::euclidean();
  double eps = 0.0, eps0 = 0.0, eta = 0.0, eta0 = 0.0, T = 0.0, d0 = 0.0;
  double a = 0.5, mu = 0.0, C0 = 0.0, CL = 0.0;
  double M_lemma = 0.0;  // kernel-lemma range [-M, 1 + M]
  double M_F = 2.0;      // range |z| <= M_F for F
  double b = 0.0, m_react = 0.0, a1 = 0.0, F = 0.0;
  double beta = 0.0, sigma0 = 0.0, sigma1 = 0.0, sigma2 = 0.0, sigma = 0.0;
  double C1_tilde = 0.0, C2_tilde = 0.0, B1 = 0.0, B2 = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0, C5 = 0.0, C6 = 0.0, C7 = 0.0;
  double M0 = 0.0, M1 = 0.0, K = 0.0, L = 0.0, C = 0.0;

  std::vector<LedgerEntry> entries;
  std::vector<std::string> violations;  // names of violated constraints, in check order

  bool feasible() const { return violations.empty(); }
  // mu^-1 eps^2 |ln eps|
  double t_gen() const;
  double p(double t) const;
  double p_t(double t) const;
  double q(double t) const;
  double q_t(double t) const;
  // Shift eps^2 C6 (e^{mu t / eps^2} - 1) of the generation pair.
  double generation_shift(double t) const;
  // "name = value   # constraint [margin]" lines.
  std::string report() const;
};

ConstantsLedger build_ledger(const BistableReaction& reaction, const Anisotropy& metric, const Box& domain,
                             const LedgerInputs& inputs);
ConstantsLedger build_ledger(const BistableReaction& reaction, const Anisotropy& metric, const Box& domain, double eps,
                             double eta, double T);

// Cut-off signed distance of a moving front sampled at checkpoints; linear in
// time between checkpoints and bilinear in space.
class DistanceTrajectory {
 public:
  DistanceTrajectory(const Grid& grid, double d0) : grid_(grid), d0_(d0) {}
  // Runs the level-set solver from front0 and stores cutoff(signed_distance(extracted front)).
  static DistanceTrajectory from_sharp(const Anisotropy& metric, const Front& front0, const Grid& grid, double t_end,
                                       int checkpoints, double d0);
  void add(double t, ScalarField cut_distance);
  double operator()(const Vec2& x, double t) const;
  // Field at time t (linear blend of the neighbouring checkpoints).
  ScalarField at(double t) const;
  const std::vector<double>& times() const { return times_; }
  const Grid& grid() const { return grid_; }
  double d0() const { return d0_; }
  // Largest checkpoint spacing.
  double max_spacing() const;

 private:
  std::size_t bracket(double t, double& w) const;
  Grid grid_;
  double d0_;
  std::vector<double> times_;
  std::vector<ScalarField> fields_;
};

enum class PairKind { generation, motion };

struct SubSuperPair {
  PairKind kind = PairKind::generation;
  SpaceTimeFunction lower, upper;
  ConstantsLedger ledger;
  std::shared_ptr<const DistanceTrajectory> distance;  // motion only
  std::shared_ptr<const ScalarField> initial;          // generation only
  double t_begin = 0.0, t_end = 0.0;                   // validity range
};

// w^-+ (x, t) = Y(t / eps^2, u0(x) -+ shift(t)) on (0, t_gen]. Throws InvalidInput
// when the shifted data leave (-2 C0, 2 C0), unless check_range is false (the
// pair is then still evaluated, outside the range covered by the constants).
SubSuperPair generation_pair(const ConstantsLedger& ledger, const ScalarField& u0, bool check_range = true);

// u^-+ (x, t) = U0((d(x,t) -+ eps p(t)) / eps) -+ q(t) on [0, T].
SubSuperPair motion_pair(const ConstantsLedger& ledger, std::shared_ptr<const DistanceTrajectory> distance);

struct CertificationRow {
  double t = 0.0;
  double margin = 0.0;  // min over cells of L0(upper) and -L0(lower)
  int cell = -1;
  bool upper = true;  // which member attains the margin
  double E1 = 0.0, E2 = 0.0, E3 = 0.0;  // motion pair split at the worst cell, NaN otherwise
};

struct CertificationReport {
  bool passed = false;
  double min_margin = 0.0;
  double tol_sign = 0.0;
  double worst_t = 0.0;
  int worst_cell = -1;
  Vec2 worst_x = Vec2::Zero();
  double worst_distance = 0.0;  // signed distance at the worst cell (motion) or u0 - a there (generation)
  std::vector<CertificationRow> rows;
  std::vector<std::string> ledger_violations;
  std::string csv() const;
};

struct CertifyOptions {
  double tol_sign = -1.0;  // < 0: C_disc (h + dt) with C_disc from calibrate_disc_constant
  double collar = 2.0;     // skipped boundary collar, in cells
  double dt_fd = -1.0;     // < 0: 1e-3 eps^2
};

// Fits the discrete L0 residual of the static planar kink on the Euclidean
// grid at h, 2h and 4h with a line through the origin and returns twice the slope.
double calibrate_disc_constant(const BistableReaction& reaction, double eps, double h);

CertificationReport certify_pair(const SubSuperPair& pair, const Grid& grid, const std::vector<double>& times,
                                 const CertifyOptions& options = {});

struct Checkpoint {
  double t = 0.0;
  ScalarField u;
};

struct EnvelopeReport {
  double max_violation = 0.0;  // max of lower - u and u - upper, floored at 0
  double worst_t = 0.0;
  int worst_cell = -1;
  double sandwich_violation = 0.0;  // H^- <= u(t_gen) <= H^+, generation only
  double classification_violation = 0.0;  // motion only, see classification_check
  long classification_failures = 0;
};

// Checkpoint times are solution times; the pair is evaluated at t - time_offset
// (t_gen for the motion pair, 0 for generation). A 2-cell collar is skipped.
// For the generation pair with dist0 given, the H^+- sandwich is evaluated at the
// checkpoint nearest to t_gen; for the motion pair the classification is checked
// at every checkpoint.
EnvelopeReport envelope_check(const std::vector<Checkpoint>& trajectory, const SubSuperPair& pair,
                              double time_offset = 0.0, const ScalarField* dist0 = nullptr);

// Largest excess of H^- - u or u - H^+ with the ledger's M1 and sigma beta / 2.
double sandwich_violation(const ConstantsLedger& ledger, const ScalarField& u, const ScalarField& dist0);

struct ClassificationReport {
  double max_violation = 0.0;
  long failures = 0;
};
// u in [-eta, 1 + eta]; u >= 1 - eta where d >= C eps; u <= eta where d <= -C eps.
ClassificationReport classification_check(const ConstantsLedger& ledger, const ScalarField& u,
                                          const ScalarField& distance, double collar_cells = 2.0);

}  // namespace anisoac
