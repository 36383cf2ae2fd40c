// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "anisoac/anisotropy.hpp"
#include "anisoac/bounds.hpp"
#include "anisoac/config.hpp"
#include "anisoac/diffuse.hpp"
#include "anisoac/distance.hpp"
#include "anisoac/errors.hpp"
#include "anisoac/front.hpp"
#include "anisoac/lab.hpp"
#include "anisoac/reaction.hpp"
#include "anisoac/sharp.hpp"

using namespace anisoac;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::cout << fmt::format("criterion {:2d} {}: {} ({}) [{:.1f} s]", id, title, o.pass ? "PASS" : "FAIL", o.detail, secs)
            << std::endl;
}

std::string preset_path(const std::string& name) { return std::string(ANISOAC_PRESET_DIR) + "/" + name + ".yaml"; }

const Mat2 kTilted = (Mat2() << 1.5, 0.5, 0.5, 1.0).finished();

// ---- 1: Finsler toolkit ----------------------------------------------------

Outcome finsler_toolkit() {
  const std::vector<Anisotropy> fields = {Anisotropy::euclidean(), Anisotropy::ellipsoidal(kTilted),
                                          Anisotropy::fourfold(0.05)};
  std::vector<Vec2> dirs;
  for (int k = 0; k < 1024; ++k) dirs.emplace_back(std::cos(2 * M_PI * k / 1024), std::sin(2 * M_PI * k / 1024));
  std::string detail;
  bool pass = true;
  for (const auto& f : fields) {
    const auto c = estimate_constants(f, 1000);
    const DualMetric phi(f);
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> U(-1, 1), P(-2, 2), Alpha(0.1, 3);
    long bad_homog = 0, bad_euler = 0, bad_mono = 0, bad_bounds = 0, bad_dual = 0;
    double worst_dual = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const Vec2 x(U(rng), U(rng)), p(P(rng), P(rng)), q(P(rng), P(rng));
      const double alpha = (k % 2 ? 1 : -1) * Alpha(rng);
      const double a = f.a(x, p);
      if (std::abs(f.a(x, alpha * p) - alpha * alpha * a) > 1e-12 * (1 + std::abs(alpha * alpha * a))) ++bad_homog;
      const Vec2 ap = f.ap(x, p);
      if (std::abs(ap.dot(p) - 2 * a) > 1e-10 * (1 + a)) ++bad_euler;
      if ((f.app(x, p) * p - ap).norm() > 1e-8 * (1 + ap.norm())) ++bad_euler;
      const double s = 1e-6 * (1 + p.norm());
      for (int i = 0; i < 2; ++i) {
        Vec2 e = Vec2::Zero();
        e[i] = s;
        const double fd = (f.a(x, p + e) - f.a(x, p - e)) / (2 * s);
        if (std::abs(fd - ap[i]) > 1e-5 * (1 + p.squaredNorm())) ++bad_euler;
      }
      if ((f.ap(x, q) - ap).dot(q - p) < c.beta_mono * (q - p).squaredNorm() * (1 - 1e-9)) ++bad_mono;
      const double phi0 = f.phi0(x, p);
      if (phi0 < c.lambda0 * p.norm() * (1 - 1e-9) || phi0 > c.Lambda0 * p.norm() * (1 + 1e-9)) ++bad_bounds;
      if (p.norm() < 1e-3) continue;
      double best = 0.0;
      for (const auto& d : dirs) best = std::max(best, p.dot(d) / phi(x, d));
      const double rel = (phi0 - best) / phi0;
      worst_dual = std::max(worst_dual, std::abs(rel));
      if (best > phi0 * (1 + 1e-9) || rel > 2e-4) ++bad_dual;
    }
    const bool ok = bad_homog + bad_euler + bad_mono + bad_bounds + bad_dual == 0;
    pass = pass && ok;
    detail += fmt::format("{}: beta_mono {:.4g}, dual err {:.1e}, violations {}/{}/{}/{}/{}; ", to_string(f.preset()),
                          c.beta_mono, worst_dual, bad_homog, bad_euler, bad_mono, bad_bounds, bad_dual);
  }
  return {pass, detail + "counts are homogeneity/Euler/monotonicity/bounds/dual over 1e4 samples"};
}

// ---- 2: eikonal identity ---------------------------------------------------

Outcome eikonal_identity() {
  struct Case {
    std::string name;
    Anisotropy metric;
    std::function<Front(int)> front;
  };
  // The band stays clear of the inner medial axis of each front in its own metric.
  // Vertex counts grow with the grid so the polygon's sag stays below h^2.
  const std::vector<Case> cases = {
      {"euclidean circle", Anisotropy::euclidean(), [](int n) { return circle_front(Vec2::Zero(), 0.3, 16 * n); }},
      {"euclidean ellipse", Anisotropy::euclidean(),
       [](int n) { return ellipse_front(Vec2::Zero(), 0.36, 0.2, 16 * n); }},
      {"ellipsoidal circle", Anisotropy::ellipsoidal(kTilted),
       [](int n) { return circle_front(Vec2::Zero(), 0.3, 16 * n); }},
      {"ellipsoidal ellipse", Anisotropy::ellipsoidal((Mat2() << 4, 0, 0, 1).finished()),
       [](int n) { return ellipse_front(Vec2::Zero(), 0.36, 0.2, 16 * n); }},
  };
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    std::vector<double> res;
    for (int n : {128, 256, 512}) {
      auto sd = signed_distance(c.metric, c.front(n), Grid(n, n, 1.0 / n, Vec2(-0.5, -0.5)));
      sd.d0 = 0.08;
      res.push_back(eikonal_residual(c.metric, sd));
    }
    const double order = std::log2(res[0] / res[2]) / 2;
    pass = pass && order >= 0.8;
    detail += fmt::format("{} order {:.2f} (res {:.2e} -> {:.2e}); ", c.name, order, res[0], res[2]);
  }
  return {pass, detail + "required >= 0.8"};
}

// ---- 3: kernel lemmas ------------------------------------------------------

Outcome kernel_lemmas() {
  const auto r = BistableReaction::make();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> T(0, 10), X(-0.8, 1.8);
  double worst_identity = 0.0;
  for (int checked = 0; checked < 1000;) {
    const double tau = T(rng), xi = X(rng);
    if (std::abs(r.f(xi)) < 1e-3) continue;
    const auto k = r.kernel(tau, xi);
    worst_identity = std::max(worst_identity, std::abs(k.Y_xi * r.f(xi) - r.f(k.Y)));
    ++checked;
  }
  LedgerInputs in;
  in.eps = 0.01;
  in.eta = 0.1;
  in.T = 0.04;
  in.strict = false;
  const auto L = build_ledger(r, Anisotropy::euclidean(), Box{}, in);
  const double a = r.a(), tau_max = std::log(1 / in.eps) / r.mu();
  long bad_envelope = 0, bad_A = 0, samples = 0;
  for (double xi = a + 1e-3; xi < 1 - in.eta; xi += 0.01)
    for (double tau = 0.0; tau <= tau_max; tau += tau_max / 200) {
      const auto k = r.kernel(tau, xi);
      if (!(k.Y > a && k.Y < 1 - in.eta)) break;
      const double g = std::exp(r.mu() * tau);
      ++samples;
      bad_envelope += k.Y_xi < L.C1_tilde * g * (1 - 1e-9) || k.Y_xi > L.C2_tilde * g * (1 + 1e-9) ||
                      k.Y - a < L.C1 * g * (xi - a) * (1 - 1e-9) || k.Y - a > L.C2 * g * (xi - a) * (1 + 1e-9);
    }
  for (double xi = -2 * L.C0 + 1e-3; xi < 2 * L.C0; xi += 0.02)
    for (double tau = 0.0; tau <= tau_max; tau += tau_max / 100)
      bad_A += std::abs(r.A(tau, xi)) > L.C5 * (std::exp(r.mu() * tau) - 1) + 1e-12;
  const bool pass = worst_identity <= 1e-7 && bad_envelope == 0 && bad_A == 0;
  return {pass, fmt::format("identity max err {:.2e} (<= 1e-7), envelope violations {}/{} samples, A-bound violations {}",
                            worst_identity, bad_envelope, samples, bad_A)};
}

// ---- 4: standing wave ------------------------------------------------------

Outcome standing_wave() {
  const auto r = BistableReaction::make();
  const auto& p = r.profile();
  double stationary = 0.0, closed = 0.0;
  const double s = 1e-4;
  for (double z = -19; z <= 19; z += 0.01) {
    const double second = (p.deriv(z + s) - p.deriv(z - s)) / (2 * s);
    stationary = std::max(stationary, std::abs(second + r.f(p.eval(z))));
    closed = std::max(closed, std::abs(p.eval(z) - 1 / (1 + std::exp(-z / std::sqrt(2.0)))));
  }
  const double rate = p.lambda_decay();
  const bool pass = stationary <= 1e-6 && closed <= 1e-8 && rate >= 0.65 && rate <= 0.75;
  return {pass, fmt::format("|U0'' + f(U0)| {:.2e} (<= 1e-6), closed-form err {:.2e} (<= 1e-8), tail rate {:.4f}",
                            stationary, closed, rate)};
}

// ---- 6: sharp solver oracles ----------------------------------------------

Outcome sharp_oracles() {
  const Grid g(256, 256, 1.0 / 256, Vec2(-0.5, -0.5));
  const double R0 = 0.4;
  auto s = LevelSetState::create(Anisotropy::euclidean(), circle_front(Vec2::Zero(), R0, 2048), g);
  const double t_final = (R0 * R0 - 0.01) / 2;
  double worst_radius = 0.0;
  for (int k = 1; k <= 30; ++k) {
    sharp_solve(s, t_final * k / 30);
    const double R = std::sqrt(std::abs(signed_area(extract_front(s.psi))) / M_PI);
    const double exact = std::sqrt(R0 * R0 - 2 * s.t);
    worst_radius = std::max(worst_radius, std::abs(R - exact) / exact);
  }
  const auto metric = Anisotropy::ellipsoidal(kTilted);
  const Front f0 = circle_front(Vec2::Zero(), 0.35, 2048);
  auto e = LevelSetState::create(metric, f0, g);
  const std::vector<double> times = {0.01, 0.02, 0.03, 0.04};
  const auto ref = coordinate_change_reference(kTilted, f0, times, g.h, 20);
  double worst_haus = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    sharp_solve(e, times[k]);
    const double size = std::sqrt(std::abs(signed_area(ref[k])) / M_PI);
    worst_haus = std::max(worst_haus, hausdorff_phi(metric, extract_front(e.psi), ref[k]) / size);
  }
  const bool pass = worst_radius <= 0.01 && worst_haus <= 0.02;
  return {pass, fmt::format("euclidean radius rel err {:.2e} (<= 1e-2, down to R = 0.1), ellipsoidal Hausdorff / size "
                            "{:.2e} (<= 2e-2)",
                            worst_radius, worst_haus)};
}

// ---- 7-9: lab sweeps -------------------------------------------------------

struct Sweeps {
  LabReport gen, thick_euclid, thick_ellip, conv_euclid, conv_ellip;
  bool gen_ok = false, thick_ok = false, conv_ok = false;
};

RunOptions quiet() { return RunOptions{false, ""}; }

Outcome generation(Sweeps& sw) {
  sw.gen = run_generation(load_config(preset_path("gen_circle_euclid")), quiet());
  sw.gen_ok = true;
  const double lo = 0.7 * sw.gen.oracle, hi = 1.3 * sw.gen.oracle;
  bool pass = sw.gen.ok();
  std::string detail;
  double prev = -1.0;
  bool monotone = true;
  for (const auto& r : sw.gen.rows) {
    pass = pass && r.ratio >= lo && r.ratio <= hi;
    // Consistent across eps: the finite-eps excess over 1/mu does not grow as eps shrinks.
    if (prev > 0 && std::abs(r.ratio - sw.gen.oracle) > std::abs(prev - sw.gen.oracle) + 1e-12) monotone = false;
    prev = r.ratio;
    detail += fmt::format("eps {} ratio {:.3f}; ", r.eps, r.ratio);
  }
  for (const auto& f : sw.gen.failures()) detail += f + "; ";
  pass = pass && monotone;
  return {pass, detail + fmt::format("band [{:.1f}, {:.1f}], {}monotone toward 1/mu", lo, hi, monotone ? "" : "not ")};
}

Outcome thickness(Sweeps& sw) {
  sw.thick_euclid = run_thickness(load_config(preset_path("thick_circle_euclid")), quiet());
  sw.thick_ellip = run_thickness(load_config(preset_path("thick_circle_ellip")), quiet());
  sw.thick_ok = true;
  bool pass = true;
  std::string detail;
  for (const auto* rep : {&sw.thick_euclid, &sw.thick_ellip}) {
    pass = pass && rep->ok() && std::abs(rep->fit_exponent - 1.0) <= 0.15;
    detail += fmt::format("{}: exponent {:.3f}, width/eps", rep->config.name, rep->fit_exponent);
    double metrication = 0.0;
    for (const auto& r : rep->rows) {
      const double w = r.max_thickness() / r.eps;
      pass = pass && std::abs(w - rep->oracle) <= 0.25 * rep->oracle;
      detail += fmt::format(" {:.3f}", w);
      for (double m : r.metrication) metrication = std::max(metrication, m);
    }
    detail += fmt::format(", metrication <= {:.1e}; ", metrication);
    for (const auto& f : rep->failures()) detail += f + "; ";
  }
  return {pass, detail + fmt::format("oracle {:.3f}", sw.thick_euclid.oracle)};
}

Outcome convergence(Sweeps& sw) {
  sw.conv_euclid = run_convergence(load_config(preset_path("conv_circle_euclid")), quiet());
  sw.conv_ellip = run_convergence(load_config(preset_path("conv_circle_ellip")), quiet());
  sw.conv_ok = true;
  bool pass = true;
  std::string detail;
  for (const auto* rep : {&sw.conv_euclid, &sw.conv_ellip}) {
    // The control compares against the initial front and must not decay with eps.
    const bool control_flat = std::abs(rep->control_exponent) <= 0.2;
    pass = pass && rep->ok() && rep->fit_exponent >= 0.8 && control_flat;
    detail += fmt::format("{}: order {:.3f}, control order {:.3f}, max hausdorff", rep->config.name, rep->fit_exponent,
                          rep->control_exponent);
    for (const auto& r : rep->rows) detail += fmt::format(" {:.2e}", r.max_hausdorff());
    detail += ", control";
    for (const auto& r : rep->rows) detail += fmt::format(" {:.2e}", r.max_control());
    detail += "; ";
    for (const auto& f : rep->failures()) detail += f + "; ";
  }
  return {pass, detail + "required order >= 0.8, |control order| <= 0.2"};
}

// ---- 5: energy and comparison ---------------------------------------------

Outcome energy_and_comparison(const Sweeps& sw) {
  if (!(sw.gen_ok && sw.thick_ok && sw.conv_ok)) return {false, "a sweep of criteria 7-9 did not complete"};
  double worst_energy = 0.0;
  long rows = 0;
  for (const auto* rep : {&sw.gen, &sw.thick_euclid, &sw.thick_ellip, &sw.conv_euclid, &sw.conv_ellip})
    for (const auto& r : rep->rows) {
      worst_energy = std::max(worst_energy, r.max_energy_increase);
      ++rows;
    }
  // Ordered data built from each sweep's initial data at its coarsest eps, evolved to T.
  double worst_order = 0.0;
  for (const auto* rep : {&sw.gen, &sw.thick_euclid, &sw.thick_ellip, &sw.conv_euclid, &sw.conv_ellip}) {
    const auto& c = rep->config;
    const InitialData init = make_initial_data(c, 0);
    ScalarField low = init.u0;
    for (int k = 0; k < low.grid().size(); ++k) {
      const Vec2 x = low.grid().center(k);
      low[k] -= 0.05 * (1 + std::sin(7 * x[0]) * std::sin(5 * x[1])) / 2;
    }
    const auto cmp = comparison_check(low, init.u0, c.eps[0], c.make_metric(), c.make_reaction(), c.T);
    worst_order = std::max(worst_order, cmp.max_violation);
  }
  const bool pass = worst_energy <= 1e-10 && worst_order <= 1e-8;
  return {pass, fmt::format("max relative energy increase per step {:.2e} over {} runs (<= 1e-10), max ordering "
                            "violation {:.2e} (<= 1e-8)",
                            worst_energy, rows, worst_order)};
}

// ---- 10: sub/super certification ------------------------------------------

Outcome certification() {
  const auto c = load_config(preset_path("certify_circle_euclid"));
  const InitialData init = make_initial_data(c, 0);
  LedgerInputs in;
  in.eps = c.eps[0];
  in.eta = c.eta;
  in.T = c.T;
  in.d0 = c.cutoff_radius();
  in.u0 = &init.u0;
  in.dist0 = &init.dist.base;
  in.interface_slope = c.initial.slope;
  in.strict = false;
  in.seed = c.seed;
  const auto L = build_ledger(c.make_reaction(), c.make_metric(), c.domain, in);
  const int samples = 5;
  std::vector<double> gen_times, motion_times;
  for (int k = 1; k <= samples; ++k) gen_times.push_back(L.t_gen() * k / samples);
  for (int k = 0; k <= samples; ++k) motion_times.push_back(0.5 * c.T * k / samples);

  const auto gen = certify_pair(generation_pair(L, init.u0, false), init.grid, gen_times);
  auto traj = std::make_shared<const DistanceTrajectory>(
      DistanceTrajectory::from_sharp(c.make_metric(), init.front, init.grid, 0.5 * c.T, 2 * samples, L.d0));
  const auto motion = certify_pair(motion_pair(L, traj), init.grid, motion_times);

  ConstantsLedger broken = L;
  broken.C6 *= 0.5;
  const auto ctrl = certify_pair(generation_pair(broken, init.u0, false), init.grid, gen_times);
  const double ctrl_d = init.dist.base.interpolate(ctrl.worst_x);
  const bool localized = std::abs(ctrl_d) <= L.C7 * L.eps;

  const bool pass = gen.passed && motion.passed && !ctrl.passed && localized;
  return {pass, fmt::format("generation min margin {:.3e} tol {:.3e} {}; motion min margin {:.3e} tol {:.3e} {}; "
                            "C6-halved control min margin {:.3e} {} at distance {:.3g} from the front (near: {}); "
                            "ledger violations {}",
                            gen.min_margin, gen.tol_sign, gen.passed ? "pass" : "fail", motion.min_margin,
                            motion.tol_sign, motion.passed ? "pass" : "fail", ctrl.min_margin,
                            ctrl.passed ? "did not fail" : "failed", ctrl_d, localized ? "yes" : "no",
                            L.violations.size())};
}

}  // namespace

int main() {
  criterion(1, "finsler toolkit", finsler_toolkit);
  criterion(2, "eikonal identity", eikonal_identity);
  criterion(3, "kernel lemmas", kernel_lemmas);
  criterion(4, "standing wave", standing_wave);
  criterion(6, "sharp solver oracles", sharp_oracles);
  Sweeps sw;
  criterion(7, "generation time", [&] { return generation(sw); });
  criterion(8, "layer thickness", [&] { return thickness(sw); });
  criterion(9, "front convergence", [&] { return convergence(sw); });
  criterion(5, "energy and comparison", [&] { return energy_and_comparison(sw); });
  criterion(10, "sub/super certification", certification);
  std::cout << fmt::format("{} criteria failed", failures) << std::endl;
  return failures == 0 ? 0 : 1;
}
