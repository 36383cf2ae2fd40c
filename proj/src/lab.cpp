#include "anisoac/lab.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "anisoac/diffuse.hpp"
#include "anisoac/distance.hpp"
#include "anisoac/errors.hpp"
#include "anisoac/sharp.hpp"

namespace anisoac {

namespace {

double max_of(const std::vector<double>& v) {
  double m = kNaN;
  for (double x : v)
    if (std::isfinite(x)) m = std::isfinite(m) ? std::max(m, x) : x;
  return m;
}

double predicted_tgen(const BistableReaction& r, double eps) { return eps * eps * std::abs(std::log(eps)) / r.mu(); }

std::string output_dir(const ExperimentConfig& c, const RunOptions& o) {
  return o.output_dir.empty() ? c.output_dir : o.output_dir;
}

class CheckpointWriter {
 public:
  CheckpointWriter(const std::string& dir, bool enabled) : dir_(dir), enabled_(enabled) {
    if (enabled_) std::filesystem::create_directories(std::filesystem::path(dir_) / "ckpt");
  }
  std::string save(const ScalarField& f, const std::string& name) const {
    const std::string rel = "ckpt/" + name + ".bin";
    if (enabled_) write_binary(f, (std::filesystem::path(dir_) / rel).string());
    return rel;
  }

 private:
  std::string dir_;
  bool enabled_;
};

ConstantsLedger ledger_for(const ExperimentConfig& c, std::size_t i, const InitialData& init) {
  LedgerInputs in;
  in.eps = c.eps[i];
  in.eta = c.eta;
  in.T = c.T;
  in.d0 = c.cutoff_radius();
  in.u0 = &init.u0;
  in.dist0 = &init.dist.base;
  in.interface_slope = c.initial.kind == "ramp" ? c.initial.slope : 1.0;
  in.strict = false;
  in.seed = c.seed;
  return build_ledger(c.make_reaction(), c.make_metric(), c.domain, in);
}

void append_energy(LabReport& rep, double eps, const std::vector<EnergySample>& log, int stride) {
  for (std::size_t k = 0; k < log.size(); ++k)
    if (k % static_cast<std::size_t>(stride) == 0 || k + 1 == log.size())
      rep.energy.push_back({eps, log[k].t, log[k].energy});
}

void absorb(MeasurementRow& row, const SolveSummary& s) {
  row.max_energy_increase = std::max(row.max_energy_increase, s.max_energy_increase);
  row.bound_violation = std::max(row.bound_violation, s.bound_violation);
  row.steps += s.steps;
}

ScalarField shifted(const ScalarField& u, double a) {
  ScalarField out = u;
  for (auto& v : out.values()) v -= a;
  return out;
}

bool try_front(const ScalarField& u, double a, Front& out) {
  try {
    out = extract_front(shifted(u, a));
    return true;
  } catch (const Error&) {
    return false;
  }
}

LabReport start_report(Measurement kind, const ExperimentConfig& c) {
  validate(c);
  LabReport rep;
  rep.kind = kind;
  rep.config = c;
  return rep;
}

void finish(LabReport& rep, const RunOptions& o) {
  if (o.write_files) write_report(rep, output_dir(rep.config, o));
}

}  // namespace

std::string to_string(Measurement m) {
  switch (m) {
    case Measurement::generation: return "generation";
    case Measurement::thickness: return "thickness";
    case Measurement::convergence: return "convergence";
    case Measurement::energy: return "energy";
  }
  return "?";
}

double MeasurementRow::max_thickness() const { return max_of(thickness); }
double MeasurementRow::max_hausdorff() const { return max_of(hausdorff); }
double MeasurementRow::max_control() const { return max_of(control); }

bool LabReport::ok() const { return failures().empty(); }

std::vector<std::string> LabReport::failures() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (!r.ok()) out.push_back(fmt::format("eps = {}: {}", r.eps, r.failure));
  return out;
}

InitialData make_initial_data(const ExperimentConfig& c, std::size_t i) {
  InitialData d;
  d.grid = c.make_grid(i);
  d.front = c.make_front();
  const Anisotropy metric = c.make_metric();
  const BistableReaction reaction = c.make_reaction();
  d.dist = signed_distance(metric, d.front, d.grid);
  if (c.initial.kind == "ramp") {
    d.u0 = linear_ramp(reaction.a(), c.initial.slope, cutoff(d.dist, c.cutoff_radius()).base);
  } else {
    d.u0 = smoothed_indicator(reaction, d.dist.base, c.eps[i]);
  }
  return d;
}

long classification_holds(const ScalarField& u, const ScalarField& dist, double radius, double eta) {
  require_same_grid(u.grid(), dist.grid(), "classification");
  long count = 0;
  for (int k = 0; k < u.grid().size(); ++k) {
    const double d = dist[k], v = u[k];
    if (std::abs(d) < radius) continue;
    const bool good = d > 0.0 ? (v >= 1.0 - eta && v <= 1.0 + eta) : (v >= -eta && v <= eta);
    if (!good) return -1;
    ++count;
  }
  return count;
}

ThicknessSample measure_thickness(const Anisotropy& metric, const ScalarField& u, double a, double eta) {
  const Grid& g = u.grid();
  ThicknessSample out;
  out.front = extract_front(shifted(u, a));
  const VectorField gu = grad(u);
  ScalarField gx(g), gy(g);
  for (int k = 0; k < g.size(); ++k) gx[k] = gu.values[k][0], gy[k] = gu.values[k][1];
  const DualMetric phi(metric);
  const Vec2 lo = g.center(0, 0), hi = g.center(g.nx - 1, g.ny - 1);
  auto inside = [&](const Vec2& p) { return p[0] >= lo[0] && p[1] >= lo[1] && p[0] <= hi[0] && p[1] <= hi[1]; };
  const double step = 0.25 * g.h;
  for (const Vec2& x : out.front.vertices) {
    Vec2 gr(gx.interpolate(x), gy.interpolate(x));
    if (gr.norm() == 0.0) continue;
    const Vec2 dir = metric.ap(x, gr.normalized()).normalized();
    auto march = [&](double sign, double level) {
      Vec2 prev = x;
      double uprev = u.interpolate(x);
      for (int it = 1;; ++it) {
        const Vec2 p = x + sign * it * step * dir;
        if (!inside(p))
          throw GeometryError(fmt::format("transition band reaches the boundary from ({}, {})", x[0], x[1]));
        const double v = u.interpolate(p);
        if (sign > 0 ? v >= level : v <= level) return Vec2(prev + (level - uprev) / (v - uprev) * (p - prev));
        prev = p;
        uprev = v;
      }
    };
    const Vec2 p_hi = march(1.0, 1.0 - eta), p_lo = march(-1.0, eta);
    const Vec2 w = p_hi - p_lo;
    out.width = std::max(out.width, phi(x, w));
    out.metrication = std::max(out.metrication, std::abs(phi(p_hi, w) - phi(p_lo, w)));
  }
  return out;
}

double kink_width(const BistableReaction& r, double eta) {
  return r.profile().inverse(1.0 - eta) - r.profile().inverse(eta);
}

double layer_radius(const BistableReaction& r, double eta) {
  return 2.0 + std::max(r.profile().inverse(1.0 - 0.5 * eta), -r.profile().inverse(0.5 * eta));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidInput("loglog_slope needs matching samples");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] > 0.0 && y[k] > 0.0 && std::isfinite(x[k]) && std::isfinite(y[k]))
      lx.push_back(std::log(x[k])), ly.push_back(std::log(y[k]));
  const std::size_t n = lx.size();
  if (n < 2) return kNaN;
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) mx += lx[k] / n, my += ly[k] / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) sxy += (lx[k] - mx) * (ly[k] - my), sxx += (lx[k] - mx) * (lx[k] - mx);
  return sxx > 0.0 ? sxy / sxx : kNaN;
}

std::vector<Front> coordinate_change_reference(const Mat2& A, const Front& front0, const std::vector<double>& times,
                                               double h, int reinit_stride) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(A);
  const Mat2 S = es.operatorSqrt(), S_inv = es.operatorInverseSqrt();
  std::vector<Vec2> mapped;
  for (const auto& v : front0.vertices) mapped.push_back(S_inv * v);
  Front fy = polygon_front(mapped);
  Vec2 lo = fy.vertices[0], hi = lo;
  for (const auto& v : fy.vertices) lo = lo.cwiseMin(v), hi = hi.cwiseMax(v);
  const double margin = 12.0 * h;
  const Grid grid = Grid::covering(Box{lo - Vec2::Constant(margin), hi + Vec2::Constant(margin)}, h);
  LevelSetState st = LevelSetState::create(Anisotropy::euclidean(), fy, grid, 0.0, reinit_stride);
  std::vector<Front> out;
  for (double t : times) {
    sharp_solve(st, t);
    Front f = extract_front(st.psi);
    for (auto& v : f.vertices) v = S * v;
    out.push_back(std::move(f));
  }
  return out;
}

LabReport run_generation(const ExperimentConfig& c, const RunOptions& o) {
  LabReport rep = start_report(Measurement::generation, c);
  const Anisotropy metric = c.make_metric();
  const BistableReaction reaction = c.make_reaction();
  const CheckpointWriter ckpt(output_dir(c, o), o.write_files);
  rep.oracle = 1.0 / reaction.mu();
  std::vector<double> eps_ok, tgen_ok;
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    const double eps = c.eps[i];
    const InitialData init = make_initial_data(c, i);
    const ConstantsLedger ledger = ledger_for(c, i, init);
    rep.ledger += ledger.report() + "\n";
    MeasurementRow row;
    row.eps = eps;
    row.h = init.grid.h;
    row.t_pred = predicted_tgen(reaction, eps);
    row.radius = ledger.C7 * eps;
    if (o.radius_eta > 0.0) {
      ExperimentConfig pinned = c;
      pinned.eta = o.radius_eta;
      row.radius = ledger_for(pinned, i, init).C7 * eps;
    }
    rep.fronts.push_back({eps, 0.0, "initial", init.front});
    row.checkpoints.push_back(ckpt.save(init.dist.base, fmt::format("dist0_e{}", i)));
    row.checkpoints.push_back(ckpt.save(init.u0, fmt::format("u0_e{}", i)));

    DiffuseState s = DiffuseState::create(init.u0, eps, metric, reaction);
    const int per = c.strides.checkpoints_per_tgen;
    const double spacing = row.t_pred / per;
    ScalarField previous = init.u0;
    for (int k = 1; k <= 3 * per; ++k) {
      absorb(row, solve(s, k * spacing));
      const long classified = classification_holds(s.u, init.dist.base, row.radius, c.eta);
      if (classified == 0) {
        row.failure = fmt::format("no cell lies outside the classification radius {}", row.radius);
        break;
      }
      if (classified > 0) {
        row.t_gen = s.t;
        row.times.push_back(s.t);
        row.checkpoints.push_back(ckpt.save(previous, fmt::format("u_e{}_k{}", i, k - 1)));
        row.checkpoints.push_back(ckpt.save(s.u, fmt::format("u_e{}_k{}", i, k)));
        Front f;
        if (try_front(s.u, reaction.a(), f)) rep.fronts.push_back({eps, s.t, "diffuse", std::move(f)});
        break;
      }
      previous = s.u;
    }
    if (row.ok() && !std::isfinite(row.t_gen))
      row.failure = fmt::format("classification not reached by 3 t_eps = {}", 3.0 * row.t_pred);
    if (row.ok()) {
      row.ratio = row.t_gen / (eps * eps * std::abs(std::log(eps)));
      eps_ok.push_back(eps);
      tgen_ok.push_back(row.t_gen);
    }
    append_energy(rep, eps, s.energy_log, c.strides.energy);
    rep.rows.push_back(std::move(row));
  }
  rep.fit_exponent = loglog_slope(eps_ok, tgen_ok);
  finish(rep, o);
  return rep;
}

LabReport run_thickness(const ExperimentConfig& c, const RunOptions& o) {
  LabReport rep = start_report(Measurement::thickness, c);
  const Anisotropy metric = c.make_metric();
  const BistableReaction reaction = c.make_reaction();
  const CheckpointWriter ckpt(output_dir(c, o), o.write_files);
  rep.oracle = kink_width(reaction, c.eta);
  std::vector<double> eps_ok, width_ok;
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    const double eps = c.eps[i];
    const InitialData init = make_initial_data(c, i);
    rep.ledger += ledger_for(c, i, init).report() + "\n";
    MeasurementRow row;
    row.eps = eps;
    row.h = init.grid.h;
    row.t_pred = predicted_tgen(reaction, eps);
    rep.fronts.push_back({eps, 0.0, "initial", init.front});
    const double t_lo = 2.0 * row.t_pred, t_hi = std::min(0.5 * c.T, c.strides.window * row.t_pred);
    if (t_lo > t_hi) {
      row.failure = fmt::format("sampling window [2 t_eps, T/2] = [{}, {}] is empty", t_lo, 0.5 * c.T);
      rep.rows.push_back(std::move(row));
      continue;
    }
    const int n = c.strides.samples;
    DiffuseState s = DiffuseState::create(init.u0, eps, metric, reaction);
    for (int k = 0; k < n; ++k) {
      const double t = n == 1 ? t_lo : t_lo + (t_hi - t_lo) * k / (n - 1);
      absorb(row, solve(s, t));
      row.times.push_back(s.t);
      row.checkpoints.push_back(ckpt.save(s.u, fmt::format("u_e{}_k{}", i, k)));
      try {
        ThicknessSample m = measure_thickness(metric, s.u, reaction.a(), c.eta);
        row.thickness.push_back(m.width);
        row.metrication.push_back(m.metrication);
        rep.fronts.push_back({eps, s.t, "diffuse", std::move(m.front)});
      } catch (const Error& e) {
        row.failure = fmt::format("geometry error at t = {}: {}", s.t, e.what());
        row.times.pop_back();
        break;
      }
    }
    if (row.ok()) {
      eps_ok.push_back(eps);
      width_ok.push_back(row.max_thickness());
    }
    append_energy(rep, eps, s.energy_log, c.strides.energy);
    rep.rows.push_back(std::move(row));
  }
  rep.fit_exponent = loglog_slope(eps_ok, width_ok);
  finish(rep, o);
  return rep;
}

LabReport run_convergence(const ExperimentConfig& c, const RunOptions& o) {
  LabReport rep = start_report(Measurement::convergence, c);
  const Anisotropy metric = c.make_metric();
  const BistableReaction reaction = c.make_reaction();
  const CheckpointWriter ckpt(output_dir(c, o), o.write_files);
  const Front front0 = c.make_front();
  const int n = c.strides.samples;
  std::vector<double> times;
  for (int k = 1; k <= n; ++k) times.push_back(0.5 * c.T * k / n);

  // Sharp reference on its own grid, shared by every eps.
  const Grid sharp_grid = Grid::covering(c.domain, c.sharp.h);
  LevelSetState st = LevelSetState::create(metric, front0, sharp_grid, 0.0, c.sharp.reinit_stride);
  std::vector<Front> reference;
  std::vector<std::string> sharp_ckpt;
  for (std::size_t k = 0; k < times.size(); ++k) {
    sharp_solve(st, times[k]);
    reference.push_back(extract_front(st.psi));
    sharp_ckpt.push_back(ckpt.save(st.psi, fmt::format("psi_k{}", k)));
    rep.fronts.push_back({0.0, times[k], "sharp", reference.back()});
  }
  std::vector<double> oracle(times.size(), kNaN);
  if (metric.preset() == Preset::ellipsoidal && metric.weight_constant()) {
    auto mapped = coordinate_change_reference(metric.matrix(), front0, times, c.sharp.h, c.sharp.reinit_stride);
    for (std::size_t k = 0; k < times.size(); ++k) oracle[k] = hausdorff_phi(metric, reference[k], mapped[k]);
  }

  const double layer = layer_radius(reaction, c.eta);
  std::vector<double> eps_ok, haus_ok, ctrl_ok;
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    const double eps = c.eps[i];
    const InitialData init = make_initial_data(c, i);
    rep.ledger += ledger_for(c, i, init).report() + "\n";
    MeasurementRow row;
    row.eps = eps;
    row.h = init.grid.h;
    row.t_pred = predicted_tgen(reaction, eps);
    row.radius = layer * eps;
    rep.fronts.push_back({eps, 0.0, "initial", init.front});
    DiffuseState s = DiffuseState::create(init.u0, eps, metric, reaction);
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (times[k] < row.t_pred) continue;
      absorb(row, solve(s, times[k]));
      row.times.push_back(s.t);
      row.checkpoints.push_back(ckpt.save(s.u, fmt::format("u_e{}_k{}", i, k)));
      row.checkpoints.push_back(sharp_ckpt[k]);
      Front f = extract_front(shifted(s.u, reaction.a()));
      row.hausdorff.push_back(hausdorff_phi(metric, f, reference[k]));
      row.control.push_back(hausdorff_phi(metric, f, front0));
      row.oracle.push_back(oracle[k]);
      const ScalarField d = signed_distance(metric, reference[k], init.grid, 1.5 * row.radius).base;
      long bad = 0;
      for (int q = 0; q < init.grid.size(); ++q) {
        if (std::abs(d[q]) < row.radius) continue;
        if (std::abs(s.u[q] - (d[q] > 0.0 ? 1.0 : 0.0)) > c.eta) ++bad;
      }
      row.misclassified.push_back(bad * init.grid.h * init.grid.h);
      rep.fronts.push_back({eps, s.t, "diffuse", std::move(f)});
    }
    if (row.times.empty()) row.failure = fmt::format("no matched time lies past t_eps = {}", row.t_pred);
    if (row.ok()) {
      eps_ok.push_back(eps);
      haus_ok.push_back(row.max_hausdorff());
      ctrl_ok.push_back(row.max_control());
    }
    append_energy(rep, eps, s.energy_log, c.strides.energy);
    rep.rows.push_back(std::move(row));
  }
  rep.fit_exponent = loglog_slope(eps_ok, haus_ok);
  rep.control_exponent = loglog_slope(eps_ok, ctrl_ok);
  finish(rep, o);
  return rep;
}

LabReport run_energy(const ExperimentConfig& c, const RunOptions& o) {
  LabReport rep = start_report(Measurement::energy, c);
  const Anisotropy metric = c.make_metric();
  const BistableReaction reaction = c.make_reaction();
  const CheckpointWriter ckpt(output_dir(c, o), o.write_files);
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    const double eps = c.eps[i];
    const InitialData init = make_initial_data(c, i);
    MeasurementRow row;
    row.eps = eps;
    row.h = init.grid.h;
    row.t_pred = predicted_tgen(reaction, eps);
    DiffuseState s = DiffuseState::create(init.u0, eps, metric, reaction);
    absorb(row, solve(s, c.T));
    row.times.push_back(s.t);
    row.checkpoints.push_back(ckpt.save(s.u, fmt::format("u_e{}_final", i)));
    if (row.max_energy_increase > 1e-10)
      row.failure = fmt::format("energy increased by {} (relative) in one step", row.max_energy_increase);
    append_energy(rep, eps, s.energy_log, c.strides.energy);
    rep.rows.push_back(std::move(row));
  }
  finish(rep, o);
  return rep;
}

void write_report(const LabReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw Error(fmt::format("cannot write {}", (fs::path(dir) / name).string()));
    return f;
  };
  auto num = [](double v) { return std::isfinite(v) ? fmt::format("{:.10g}", v) : std::string("nan"); };
  auto at = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : kNaN; };
  const std::string kind = to_string(rep.kind);
  {
    auto f = open("rows.csv");
    f << "measurement,eps,h,t_pred,t_gen,ratio,radius,sample,t,thickness,thickness_over_eps,metrication,hausdorff,"
         "control,misclassified,oracle,max_energy_increase,bound_violation,steps,status\n";
    for (const auto& r : rep.rows) {
      const std::size_t n = std::max<std::size_t>(1, r.times.size());
      for (std::size_t k = 0; k < n; ++k) {
        const double width = at(r.thickness, k);
        f << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", kind, num(r.eps), num(r.h),
                         num(r.t_pred), num(r.t_gen), num(r.ratio), num(r.radius), k, num(at(r.times, k)), num(width),
                         num(width / r.eps), num(at(r.metrication, k)), num(at(r.hausdorff, k)),
                         num(at(r.control, k)), num(at(r.misclassified, k)), num(at(r.oracle, k)),
                         num(r.max_energy_increase), num(r.bound_violation), r.steps,
                         r.ok() ? std::string("ok") : "failed: " + r.failure);
      }
    }
  }
  {
    auto f = open("fronts.csv");
    f << "eps,t,source,vertex,x1,x2\n";
    for (const auto& fr : rep.fronts)
      for (std::size_t v = 0; v < fr.front.size(); ++v)
        f << fmt::format("{},{},{},{},{},{}\n", num(fr.eps), num(fr.t), fr.source, v,
                         num(fr.front.vertices[v][0]), num(fr.front.vertices[v][1]));
  }
  {
    auto f = open("energy.csv");
    f << "eps,t,energy\n";
    for (const auto& e : rep.energy) f << fmt::format("{},{},{}\n", num(e.eps), fmt::format("{:.17g}", e.t),
                                                     fmt::format("{:.17g}", e.energy));
  }
  {
    auto f = open("summary.csv");
    f << "key,value\n";
    f << "measurement," << kind << "\n";
    f << "config," << rep.config.name << "\n";
    f << "fit_exponent," << num(rep.fit_exponent) << "\n";
    f << "control_exponent," << num(rep.control_exponent) << "\n";
    f << "oracle," << num(rep.oracle) << "\n";
    f << "status," << (rep.ok() ? "ok" : "failed") << "\n";
  }
  {
    auto f = open("ledger.txt");
    f << rep.ledger;
  }
  {
    auto f = open("config.yaml");
    f << serialize_config(rep.config);
  }
  {
    auto f = open("checkpoints.csv");
    f << "eps,path\n";
    for (const auto& r : rep.rows)
      for (const auto& p : r.checkpoints) f << num(r.eps) << "," << p << "\n";
  }
  auto f = open("schema.txt");
  f << R"(rows.csv: one line per eps and time sample (one line per eps for generation)
  measurement          generation | thickness | convergence | energy
  eps                  interface width parameter
  h                    grid spacing of the diffuse run
  t_pred               mu^-1 eps^2 |ln eps|
  t_gen                first checkpoint meeting the classification (generation)
  ratio                t_gen / (eps^2 |ln eps|); compare with 1/mu
  radius               classification radius in phi-distance (generation: C7 eps; convergence: layer radius times eps)
  sample               index of the time sample
  t                    sample time
  thickness            max over the u = a contour of the phi-width of {eta <= u <= 1 - eta}
  thickness_over_eps   thickness / eps; compare with the kink z-width in summary.csv (oracle)
  metrication          max |phi(p_hi, w) - phi(p_lo, w)| over the width vectors w (zero for constant metrics)
  hausdorff            phi-Hausdorff distance between the diffuse u = a contour and the sharp front
  control              phi-Hausdorff distance between the diffuse u = a contour and the initial front
  misclassified        area of {|u - limit| > eta} farther than radius from the sharp front
  oracle               phi-Hausdorff distance between the sharp front and the coordinate-change reference (ellipsoidal only)
  max_energy_increase  max over steps of (F_new - F_old) / (1 + |F_old|)
  bound_violation      excess of u over the a-priori interval [0, 1]
  steps                diffuse steps taken
  status               ok, or failed: reason
fronts.csv: polygons, one line per vertex
  eps                  0 for the sharp reference shared by all eps
  t                    time
  source               initial | diffuse (u = a contour) | sharp
  vertex, x1, x2       vertex index and coordinates
energy.csv: discrete energy trace per eps (every strides.energy-th step and the last)
  eps, t, energy
summary.csv: key,value pairs
  fit_exponent         least-squares slope of log(headline) against log(eps): t_gen, max thickness or max hausdorff
  control_exponent     same for the convergence control
  oracle               1/mu (generation) or kink z-width (thickness)
checkpoints.csv: eps and path of every binary field written under ckpt/
  binary layout        "FFLD", uint16 nx, uint16 ny, double h, origin x, origin y, row-major doubles (little endian)
  dist0_e*, u0_e*      signed distance and initial data per eps index
  u_e*_k*              diffuse solution at sample or checkpoint k
  psi_k*               sharp level-set function at sample k
ledger.txt: constants report per eps
config.yaml: the configuration that produced these files
)";
}

}  // namespace anisoac
