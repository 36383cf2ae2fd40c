#include "anisoac/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>

#include <fmt/format.h>

#include "anisoac/errors.hpp"
#include "anisoac/sharp.hpp"

namespace anisoac {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct KernelStats {
  double ratio_min = kUnbounded, ratio_max = 0.0;  // Y_xi e^{-mu tau}
  double A_growth = 0.0;                           // |A| / (e^{mu tau} - 1)
  double A_linear = 0.0;                           // |A| / tau
};

// Samples the kernel over xi in [lo, hi] (endpoints excluded when open) and the
// given times. With a window, only samples whose Y stays inside it count.
KernelStats sample_kernel(const BistableReaction& r, double lo, double hi, bool open, int n,
                          const std::vector<double>& taus, double win_lo = -kUnbounded, double win_hi = kUnbounded) {
  KernelStats st;
  const double mu = r.mu();
  for (int k = 0; k < n; ++k) {
    double xi = open ? lo + (hi - lo) * (k + 1.0) / (n + 1.0) : lo + (hi - lo) * k / (n - 1.0);
    auto path = r.kernel_path(xi, taus);
    for (std::size_t m = 0; m < taus.size(); ++m) {
      const KernelValue& v = path[m];
      if (v.Y <= win_lo || v.Y >= win_hi) break;
      const double tau = taus[m];
      const double ratio = v.Y_xi * std::exp(-mu * tau);
      st.ratio_min = std::min(st.ratio_min, ratio);
      st.ratio_max = std::max(st.ratio_max, ratio);
      if (tau > 0.0) {
        st.A_growth = std::max(st.A_growth, std::abs(v.A) / std::expm1(mu * tau));
        st.A_linear = std::max(st.A_linear, std::abs(v.A) / tau);
      }
    }
  }
  return st;
}

double sampled_min(const std::function<double(double)>& g, double lo, double hi, int n = 2001) {
  double v = kUnbounded;
  for (int k = 0; k < n; ++k) v = std::min(v, g(lo + (hi - lo) * k / (n - 1.0)));
  return v;
}

double sampled_max(const std::function<double(double)>& g, double lo, double hi, int n = 2001) {
  return -sampled_min([&](double z) { return -g(z); }, lo, hi, n);
}

// Kernel tables keyed by tau, built on first use.
class KernelCache {
 public:
  KernelCache(BistableReaction r, double lo, double hi) : r_(std::move(r)), lo_(lo), hi_(hi) {}
  double Y(double tau, double xi) const {
    if (tau == 0.0) return xi;
    std::lock_guard<std::mutex> lock(mu_);
    auto it = tables_.find(tau);
    if (it == tables_.end()) it = tables_.emplace(tau, KernelTable(r_, lo_, hi_, 2049, {tau})).first;
    return it->second.Y(0, std::clamp(xi, lo_, hi_));
  }

 private:
  BistableReaction r_;
  double lo_, hi_;
  mutable std::mutex mu_;
  mutable std::map<double, KernelTable> tables_;
};

bool in_collar(const Grid& g, int k, double cells) {
  const int i = k % g.nx, j = k / g.nx;
  const int c = static_cast<int>(std::ceil(cells));
  return i < c || j < c || i >= g.nx - c || j >= g.ny - c;
}

void add_entry(ConstantsLedger& L, std::string name, double value, std::string constraint = {},
               double margin = kNaN) {
  L.entries.push_back({std::move(name), value, std::move(constraint), margin});
}

void add_check(ConstantsLedger& L, const std::string& name, double value, const std::string& constraint,
               double margin) {
  add_entry(L, name, value, constraint, margin);
  if (!(margin >= 0.0)) L.violations.push_back(constraint);
}

}  // namespace

double ConstantsLedger::t_gen() const { return eps * eps * std::abs(std::log(eps)) / mu; }

double ConstantsLedger::p(double t) const { return -std::exp(-beta * t / (eps * eps)) + std::exp(L * t) + K; }

double ConstantsLedger::p_t(double t) const {
  return beta / (eps * eps) * std::exp(-beta * t / (eps * eps)) + L * std::exp(L * t);
}

double ConstantsLedger::q(double t) const {
  return sigma * (beta * std::exp(-beta * t / (eps * eps)) + eps * eps * L * std::exp(L * t));
}

double ConstantsLedger::q_t(double t) const {
  return sigma * (-beta * beta / (eps * eps) * std::exp(-beta * t / (eps * eps)) + eps * eps * L * L * std::exp(L * t));
}

double ConstantsLedger::generation_shift(double t) const { return eps * eps * C6 * std::expm1(mu * t / (eps * eps)); }

std::string ConstantsLedger::report() const {
  std::string out = fmt::format("# constants at eps = {}, eta = {}, T = {}; {}\n", eps, eta, T,
                                feasible() ? "feasible" : "INFEASIBLE");
  for (const auto& e : entries) {
    out += fmt::format("{:<10} = {:<14.8g}", e.name, e.value);
    if (!e.constraint.empty()) {
      out += fmt::format("  # {}", e.constraint);
      if (!std::isnan(e.margin)) out += fmt::format(" [margin {:.4g}]", e.margin);
    }
    out += "\n";
  }
  for (const auto& v : violations) out += fmt::format("violated: {}\n", v);
  return out;
}

ConstantsLedger build_ledger(const BistableReaction& reaction, const Anisotropy& metric, const Box& domain,
                             const LedgerInputs& in) {
  if (!(in.eps > 0.0 && in.eps < 1.0)) throw InvalidInput(fmt::format("eps must lie in (0, 1), got {}", in.eps));
  if (!(in.T > 0.0)) throw InvalidInput("T must be positive");
  if (in.xi_samples < 8 || in.tau_samples < 4) throw InvalidInput("too few ledger samples");
  if ((in.u0 == nullptr) != (in.dist0 == nullptr)) throw InvalidInput("u0 and dist0 must be given together");

  ConstantsLedger L;
  L.reaction = reaction;
  L.metric = metric;
  L.eps = L.eps0 = in.eps;
  L.eta = in.eta;
  L.T = in.T;
  L.a = reaction.a();
  L.mu = reaction.mu();
  L.eta0 = reaction.eta0();
  const double side = std::min(domain.hi[0] - domain.lo[0], domain.hi[1] - domain.lo[1]);
  L.d0 = in.d0 > 0.0 ? in.d0 : 0.1 * side;
  L.C0 = in.C0 > 0.0 ? in.C0 : (in.u0 ? initial_data_norm(*in.u0) : 1.0);
  L.CL = estimate_constants(metric, 4096, domain, in.seed).CL;
  L.M_lemma = 2.0 * L.C0 + 1.0;
  const double eps = L.eps, eta = L.eta, a = L.a, mu = L.mu;

  add_entry(L, "eps", eps);
  add_entry(L, "eta", eta);
  add_check(L, "eta0", L.eta0, "0 < eta < eta0", std::min(eta, L.eta0 - eta));
  const bool eta_ok = eta > 0.0 && eta < L.eta0;
  add_entry(L, "mu", mu, "f'(a)");
  add_entry(L, "C0", L.C0, "sup|u0| + sup|grad u0| + sup|D2 u0|");
  add_entry(L, "CL", L.CL, "sampled metric constant");
  add_entry(L, "d0", L.d0, "cut-off radius");

  // Layer constants.
  auto first_zero = [&](double from, double to) {
    const int n = 20000;
    for (int k = 1; k <= n; ++k) {
      double u = from + (to - from) * k / n;
      if (reaction.fprime(u) >= 0.0) return u;
    }
    return to;
  };
  const double r0 = first_zero(0.0, a), r1 = first_zero(1.0, a);
  L.b = 0.5 * std::min(r0, 1.0 - r1);
  auto neg_fp = [&](double u) { return -reaction.fprime(u); };
  L.m_react = std::min(sampled_min(neg_fp, 0.0, L.b), sampled_min(neg_fp, 1.0 - L.b, 1.0));
  const WaveProfile& U = reaction.profile();
  L.a1 = sampled_min([&](double z) { return U.deriv(z); }, U.inverse(L.b), U.inverse(1.0 - L.b));
  L.F = sampled_max([&](double z) { return std::abs(reaction.f(z)) + std::abs(reaction.fprime(z)) +
                                           std::abs(reaction.fsecond(z)); },
                    -L.M_F, L.M_F, 4001);
  L.beta = L.m_react / 4.0;
  L.sigma0 = L.a1 / (4.0 * L.beta + L.F);
  L.sigma1 = 1.0 / (L.beta + 1.0);
  L.sigma2 = 4.0 * L.beta / (L.F * (L.beta + 1.0));
  L.sigma = std::min({L.sigma0, L.sigma1, L.sigma2});
  if (eta_ok && L.sigma * L.beta > eta / 3.0) L.sigma = eta / (3.0 * L.beta);
  add_entry(L, "b", L.b, "f' <= -m where U0 in [0, b] or [1 - b, 1]");
  add_entry(L, "m_react", L.m_react, "min -f' on [0, b] and [1 - b, 1]");
  add_entry(L, "a1", L.a1, "min U0' where U0 in [b, 1 - b]");
  add_entry(L, "F", L.F, fmt::format("sup |f| + |f'| + |f''| on |z| <= {}", L.M_F));
  add_entry(L, "beta", L.beta, "m_react / 4");
  add_entry(L, "sigma0", L.sigma0, "a1 / (4 beta + F)");
  add_entry(L, "sigma1", L.sigma1, "1 / (beta + 1)");
  add_entry(L, "sigma2", L.sigma2, "4 beta / (F (beta + 1))");
  add_check(L, "sigma", L.sigma, "sigma beta <= eta/3", eta / 3.0 - L.sigma * L.beta);

  // Kernel-lemma constants.
  const double tau_max = std::abs(std::log(eps)) / mu;
  std::vector<double> taus(in.tau_samples + 1);
  // Quadratic spacing resolves the tau -> 0 limits of the growth ratios.
  for (int k = 0; k <= in.tau_samples; ++k) taus[k] = tau_max * std::pow(static_cast<double>(k) / in.tau_samples, 2);
  const int n = in.xi_samples;
  if (eta_ok) {
    KernelStats up = sample_kernel(reaction, a, 1.0 - eta, true, n, taus, a, 1.0 - eta);
    KernelStats dn = sample_kernel(reaction, eta, a, true, n, taus, eta, a);
    L.C1_tilde = std::min(up.ratio_min, dn.ratio_min) / in.safety;
    L.C2_tilde = std::max(up.ratio_max, dn.ratio_max) * in.safety;
    L.C3 = std::max(up.A_growth, dn.A_growth) * in.safety;
    auto slope = [&](double q) { return q == a ? mu : reaction.f(q) / (q - a); };
    L.B1 = sampled_min(slope, eta, 1.0 - eta);
    L.B2 = sampled_max(slope, eta, 1.0 - eta);
    L.C1 = L.B1 / L.B2 * L.C1_tilde;
    L.C2 = L.B2 / L.B1 * L.C2_tilde;
    KernelStats hi = sample_kernel(reaction, 1.0 - eta, 1.0 + L.M_lemma, false, n, taus);
    KernelStats lo = sample_kernel(reaction, -L.M_lemma, eta, false, n, taus);
    L.C4 = std::max(hi.A_linear, lo.A_linear) * in.safety;
  }
  KernelStats all = sample_kernel(reaction, -2.0 * L.C0, 2.0 * L.C0, true, n, taus);
  L.C5 = all.A_growth * in.safety;
  L.C6 = 2.0 / mu * std::max(L.C0 * L.C0 * L.C5, L.C0 * (L.CL + 1.0));
  L.C7 = eta_ok ? (std::max(a, 1.0 - a) - eta) / L.C1 : kNaN;
  L.M0 = L.C7 + L.C6 * (1.0 - eps);
  add_entry(L, "C1~", L.C1_tilde, "inf Y_xi e^{-mu tau} on the Lemma 5.4 range / safety");
  add_entry(L, "C2~", L.C2_tilde, "sup Y_xi e^{-mu tau} on the Lemma 5.4 range * safety");
  add_entry(L, "B1", L.B1, "inf f(q) / (q - a) on [eta, 1 - eta]");
  add_entry(L, "B2", L.B2, "sup f(q) / (q - a) on [eta, 1 - eta]");
  add_entry(L, "C1", L.C1, "(B1 / B2) C1~");
  add_entry(L, "C2", L.C2, "(B2 / B1) C2~");
  add_entry(L, "C3", L.C3, "sup |A| / (e^{mu tau} - 1) on the Lemma 5.4 range * safety");
  add_entry(L, "C4", L.C4, "sup |A| / tau on [-M, eta] and [1 - eta, 1 + M] * safety");
  add_entry(L, "M", L.M_lemma, "2 C0 + 1");
  add_entry(L, "C5", L.C5, "sup |A| / (e^{mu tau} - 1) on (-2 C0, 2 C0) * safety");
  add_entry(L, "C6", L.C6, "(2 / mu) max(C0^2 C5, C0 (CL + 1))");
  add_check(L, "shift", L.generation_shift(L.t_gen()), "eps^2 C6 (1/eps - 1) <= C0",
            L.C0 - L.generation_shift(L.t_gen()));
  add_entry(L, "C7", L.C7, "(max(a, 1 - a) - eta) / C1");
  add_entry(L, "M0", L.M0, "M0 eps - C6 eps + C6 eps^2 >= C7 eps");

  // Interface correspondence constant M1.
  if (in.u0) {
    require_same_grid(in.u0->grid(), in.dist0->grid(), "build_ledger");
    double bad = 0.0, reach_pos = 0.0, reach_neg = 0.0;
    for (int k = 0; k < in.u0->grid().size(); ++k) {
      const double d = (*in.dist0)[k], u = (*in.u0)[k];
      if (d > 0) reach_pos = std::max(reach_pos, d);
      if (d < 0) reach_neg = std::max(reach_neg, -d);
      if ((d > 0 && u < a + L.M0 * eps) || (d < 0 && u > a - L.M0 * eps)) bad = std::max(bad, std::abs(d));
    }
    L.M1 = bad / eps * (1.0 + 1e-9) + 1e-9;
    const double reach = std::min(reach_pos, reach_neg);
    add_check(L, "M1", L.M1, "u0 reaches a +- M0 eps off an M1 eps neighbourhood", reach - bad - 1e-12);
  } else {
    L.M1 = L.M0 / in.interface_slope;
    add_entry(L, "M1", L.M1, "M0 / interface slope");
  }

  // Motion constants.
  if (L.sigma * L.beta > 0.0 && L.sigma * L.beta < 3.0) {
    const double sb3 = L.sigma * L.beta / 3.0;
    L.K = std::max(2.0, std::ceil(std::max(L.M1 + U.inverse(1.0 - sb3), L.M1 - U.inverse(sb3))));
    while (U.eval(-L.M1 + L.K) < 1.0 - sb3 || U.eval(L.M1 - L.K) > sb3) L.K += 1.0;
  } else {
    L.K = kNaN;
  }
  const double sb3 = L.sigma * L.beta / 3.0;
  add_check(L, "K", L.K, "U0(K - M1) >= 1 - sigma beta/3 and U0(M1 - K) <= sigma beta/3",
            std::min(U.eval(-L.M1 + L.K) - (1.0 - sb3), sb3 - U.eval(L.M1 - L.K)) + 1e-15);
  L.L = std::log(L.d0 / (4.0 * L.eps0)) / L.T;
  const double eLT = std::exp(L.L * L.T);
  add_check(L, "L", L.L, "e^{LT} + K <= d0 / (2 eps0)", L.d0 / (2.0 * L.eps0) - (eLT + L.K));
  add_check(L, "L>0", L.L, "L > 0", L.L);
  add_check(L, "eps0^2LeLT", L.eps0 * L.eps0 * L.L * eLT, "eps0^2 L e^{LT} <= 1",
            1.0 - L.eps0 * L.eps0 * L.L * eLT);
  if (eta_ok) {
    L.C = eLT + L.K + std::max(U.inverse(1.0 - eta / 2.0), -U.inverse(eta / 2.0));
    add_check(L, "C", L.C, "U0(C - e^{LT} - K) >= 1 - eta/2 and U0(-C + e^{LT} + K) <= eta/2",
              std::min(U.eval(L.C - eLT - L.K) - (1.0 - eta / 2.0), eta / 2.0 - U.eval(-L.C + eLT + L.K)) + 1e-12);
  } else {
    L.C = kNaN;
  }
  add_entry(L, "t_gen", L.t_gen(), "mu^-1 eps^2 |ln eps|");

  if (in.strict && !L.violations.empty()) {
    const std::string& first = L.violations.front();
    std::string detail;
    for (const auto& e : L.entries)
      if (e.constraint == first) detail = fmt::format("{} = {:.6g}, margin {:.4g}, eps = {}", e.name, e.value, e.margin, eps);
    throw LedgerInfeasible(first, detail);
  }
  return L;
}

ConstantsLedger build_ledger(const BistableReaction& reaction, const Anisotropy& metric, const Box& domain, double eps,
                             double eta, double T) {
  LedgerInputs in;
  in.eps = eps;
  in.eta = eta;
  in.T = T;
  return build_ledger(reaction, metric, domain, in);
}

DistanceTrajectory DistanceTrajectory::from_sharp(const Anisotropy& metric, const Front& front0, const Grid& grid,
                                                  double t_end, int checkpoints, double d0) {
  if (checkpoints < 1 || !(t_end > 0.0)) throw InvalidInput("distance trajectory needs t_end > 0 and checkpoints >= 1");
  DistanceTrajectory traj(grid, d0);
  LevelSetState s = LevelSetState::create(metric, front0, grid);
  for (int k = 0; k <= checkpoints; ++k) {
    const double t = t_end * k / checkpoints;
    if (k > 0) sharp_solve(s, t);
    const Front f = k == 0 ? front0 : extract_front(s.psi);
    traj.add(t, cutoff(signed_distance(metric, f, grid), d0).base);
  }
  return traj;
}

void DistanceTrajectory::add(double t, ScalarField cut_distance) {
  require_same_grid(grid_, cut_distance.grid(), "DistanceTrajectory::add");
  if (!times_.empty() && !(t > times_.back())) throw InvalidInput("trajectory times must increase");
  times_.push_back(t);
  fields_.push_back(std::move(cut_distance));
}

std::size_t DistanceTrajectory::bracket(double t, double& w) const {
  if (times_.empty()) throw InvalidInput("empty distance trajectory");
  if (times_.size() == 1 || t <= times_.front()) {
    w = 0.0;
    return 0;
  }
  if (t >= times_.back()) {
    w = 1.0;
    return times_.size() - 2;
  }
  std::size_t k = std::upper_bound(times_.begin(), times_.end(), t) - times_.begin() - 1;
  w = (t - times_[k]) / (times_[k + 1] - times_[k]);
  return k;
}

double DistanceTrajectory::operator()(const Vec2& x, double t) const {
  double w;
  std::size_t k = bracket(t, w);
  double v0 = fields_[k].interpolate(x);
  if (w == 0.0) return v0;
  return (1.0 - w) * v0 + w * fields_[k + 1].interpolate(x);
}

ScalarField DistanceTrajectory::at(double t) const {
  double w;
  std::size_t k = bracket(t, w);
  ScalarField out = fields_[k];
  if (w == 0.0) return out;
  for (int c = 0; c < grid_.size(); ++c) out[c] = (1.0 - w) * out[c] + w * fields_[k + 1][c];
  return out;
}

double DistanceTrajectory::max_spacing() const {
  double s = 0.0;
  for (std::size_t k = 1; k < times_.size(); ++k) s = std::max(s, times_[k] - times_[k - 1]);
  return s;
}

SubSuperPair generation_pair(const ConstantsLedger& ledger, const ScalarField& u0, bool check_range) {
  const double t_end = ledger.t_gen();
  const double shift = ledger.generation_shift(t_end);
  const double lo = u0.min() - shift, hi = u0.max() + shift;
  if (check_range && !(lo > -2.0 * ledger.C0 && hi < 2.0 * ledger.C0))
    throw InvalidInput(fmt::format("shifted initial data [{}, {}] leave (-2 C0, 2 C0) with C0 = {}", lo, hi, ledger.C0));
  auto cache = std::make_shared<KernelCache>(ledger.reaction, lo - 0.01, hi + 0.01);
  auto field = std::make_shared<const ScalarField>(u0);
  SubSuperPair p;
  p.kind = PairKind::generation;
  p.ledger = ledger;
  p.initial = field;
  p.t_begin = 0.0;
  p.t_end = t_end;
  const double eps2 = ledger.eps * ledger.eps;
  auto member = [=](double sign) {
    return [=, L = ledger](const Vec2& x, double t) {
      return cache->Y(t / eps2, field->interpolate(x) + sign * L.generation_shift(t));
    };
  };
  p.lower = member(-1.0);
  p.upper = member(1.0);
  return p;
}

SubSuperPair motion_pair(const ConstantsLedger& ledger, std::shared_ptr<const DistanceTrajectory> distance) {
  if (!distance) throw InvalidInput("motion pair needs a distance trajectory");
  SubSuperPair p;
  p.kind = PairKind::motion;
  p.ledger = ledger;
  p.distance = distance;
  p.t_begin = 0.0;
  p.t_end = ledger.T;
  auto member = [=, L = ledger](double sign) {
    return [=](const Vec2& x, double t) {
      const double d = (*distance)(x, t);
      return L.reaction.U0((d + sign * L.eps * L.p(t)) / L.eps) + sign * L.q(t);
    };
  };
  p.lower = member(-1.0);
  p.upper = member(1.0);
  return p;
}

double calibrate_disc_constant(const BistableReaction& reaction, double eps, double h) {
  if (!(h > 0.0 && eps > 0.0)) throw InvalidInput("calibration needs positive h and eps");
  const Anisotropy euclid = Anisotropy::euclidean();
  SpaceTimeFunction kink = [&](const Vec2& x, double) { return reaction.U0(x[0] / eps); };
  std::vector<double> hs, rs;
  for (double hk : {h, 2.0 * h, 4.0 * h}) {
    Grid g = Grid::covering(Box{Vec2(-0.5, 0.0), Vec2(0.5, 8.0 * hk)}, hk);
    ScalarField r = residual_L0(euclid, reaction, eps, kink, 1.0, g, 1e-3);
    double floor = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 2; i < g.nx - 2; ++i) floor = std::max(floor, std::abs(r(i, j)));
    hs.push_back(hk);
    rs.push_back(floor);
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < hs.size(); ++k) sxy += hs[k] * rs[k], sxx += hs[k] * hs[k];
  return 2.0 * sxy / sxx;
}

std::string CertificationReport::csv() const {
  std::string out = "t,min_margin,cell,member,E1,E2,E3\n";
  for (const auto& r : rows)
    out += fmt::format("{:.10g},{:.10g},{},{},{:.10g},{:.10g},{:.10g}\n", r.t, r.margin, r.cell,
                       r.upper ? "upper" : "lower", r.E1, r.E2, r.E3);
  return out;
}

CertificationReport certify_pair(const SubSuperPair& pair, const Grid& grid, const std::vector<double>& times,
                                 const CertifyOptions& options) {
  const ConstantsLedger& L = pair.ledger;
  const double eps = L.eps;
  if (grid.h > eps / 4.0 * (1.0 + 1e-12))
    throw InvalidInput(fmt::format("grid spacing {} does not resolve eps = {} (need h <= eps/4)", grid.h, eps));
  if (times.empty()) throw InvalidInput("certification needs at least one time");
  const double dt_fd = options.dt_fd > 0.0 ? options.dt_fd : 1e-3 * eps * eps;
  CertificationReport rep;
  rep.ledger_violations = L.violations;
  if (options.tol_sign >= 0.0) {
    rep.tol_sign = options.tol_sign;
  } else {
    const double dt = pair.kind == PairKind::motion && pair.distance ? pair.distance->max_spacing() : dt_fd;
    rep.tol_sign = calibrate_disc_constant(L.reaction, eps, grid.h) * (grid.h + dt);
  }
  std::unique_ptr<FluxOperator> flux;
  if (pair.kind == PairKind::motion)
    flux = std::make_unique<FluxOperator>(L.metric, grid, FluxOperator::Law::ap, Boundary::zero_flux);

  rep.min_margin = kUnbounded;
  for (double t0 : times) {
    const double t = std::clamp(t0, pair.t_begin, pair.t_end);
    ScalarField ru = residual_L0(L.metric, L.reaction, eps, pair.upper, t, grid, dt_fd);
    ScalarField rl = residual_L0(L.metric, L.reaction, eps, pair.lower, t, grid, dt_fd);
    CertificationRow row;
    row.t = t;
    row.margin = kUnbounded;
    for (int k = 0; k < grid.size(); ++k) {
      if (in_collar(grid, k, options.collar)) continue;
      if (ru[k] < row.margin) row.margin = ru[k], row.cell = k, row.upper = true;
      if (-rl[k] < row.margin) row.margin = -rl[k], row.cell = k, row.upper = false;
    }
    row.E1 = row.E2 = row.E3 = kNaN;
    if (pair.kind == PairKind::motion && row.cell >= 0) {
      const int k = row.cell, i = k % grid.nx, j = k / grid.nx;
      const double sign = row.upper ? 1.0 : -1.0;
      ScalarField d = pair.distance->at(t);
      const double tl = std::max(t - dt_fd, 0.0), tr = t + dt_fd;
      const double d_t = ((*pair.distance)(grid.center(k), tr) - (*pair.distance)(grid.center(k), tl)) / (tr - tl);
      int il = std::max(i - 1, 0), ir = std::min(i + 1, grid.nx - 1);
      int jl = std::max(j - 1, 0), jr = std::min(j + 1, grid.ny - 1);
      Vec2 g((d(ir, j) - d(il, j)) / ((ir - il) * grid.h), (d(i, jr) - d(i, jl)) / ((jr - jl) * grid.h));
      std::vector<double> div;
      flux->apply_cells(d, {k}, div);
      const Vec2 x = grid.center(k);
      const double z = (d[k] + sign * eps * L.p(t)) / eps;
      const double U = L.reaction.U0(z), Up = L.reaction.U0_prime(z), Upp = -L.reaction.f(U);
      const double q = L.q(t);
      row.E1 = -(L.reaction.f(U + sign * q) - L.reaction.f(U)) / (eps * eps) + sign * (Up * L.p_t(t) + L.q_t(t));
      row.E2 = Upp * (1.0 - 2.0 * L.metric.a(x, g)) / (eps * eps);
      row.E3 = Up / eps * (d_t - div[0]);
    }
    rep.rows.push_back(row);
    if (row.margin < rep.min_margin) {
      rep.min_margin = row.margin;
      rep.worst_t = t;
      rep.worst_cell = row.cell;
    }
  }
  if (rep.worst_cell >= 0) {
    rep.worst_x = grid.center(rep.worst_cell);
    if (pair.kind == PairKind::motion)
      rep.worst_distance = (*pair.distance)(rep.worst_x, rep.worst_t);
    else if (pair.initial)
      rep.worst_distance = pair.initial->interpolate(rep.worst_x) - L.a;
  }
  rep.passed = rep.min_margin >= -rep.tol_sign;
  return rep;
}

double sandwich_violation(const ConstantsLedger& L, const ScalarField& u, const ScalarField& dist0) {
  require_same_grid(u.grid(), dist0.grid(), "sandwich_violation");
  const double half = 0.5 * L.sigma * L.beta, band = L.M1 * L.eps;
  double worst = 0.0;
  for (int k = 0; k < u.grid().size(); ++k) {
    const double d = dist0[k];
    const double hp = d > -band ? 1.0 + half : half;
    const double hm = d >= band ? 1.0 - half : -half;
    worst = std::max({worst, hm - u[k], u[k] - hp});
  }
  return worst;
}

ClassificationReport classification_check(const ConstantsLedger& L, const ScalarField& u, const ScalarField& distance,
                                          double collar_cells) {
  require_same_grid(u.grid(), distance.grid(), "classification_check");
  ClassificationReport rep;
  const double band = L.C * L.eps, eta = L.eta;
  for (int k = 0; k < u.grid().size(); ++k) {
    if (in_collar(u.grid(), k, collar_cells)) continue;
    const double d = distance[k], v = u[k];
    double viol = std::max(-eta - v, v - (1.0 + eta));
    if (d >= band) viol = std::max(viol, (1.0 - eta) - v);
    if (d <= -band) viol = std::max(viol, v - eta);
    if (viol > 0.0) {
      ++rep.failures;
      rep.max_violation = std::max(rep.max_violation, viol);
    }
  }
  return rep;
}

EnvelopeReport envelope_check(const std::vector<Checkpoint>& trajectory, const SubSuperPair& pair, double time_offset,
                              const ScalarField* dist0) {
  EnvelopeReport rep;
  const double slack = 1e-12 * std::max(1.0, pair.t_end);
  const Checkpoint* nearest = nullptr;
  for (const auto& c : trajectory) {
    const double tp = c.t - time_offset;
    if (tp < pair.t_begin - slack || tp > pair.t_end + slack) continue;
    const double te = std::clamp(tp, pair.t_begin, pair.t_end);
    const Grid& g = c.u.grid();
    for (int k = 0; k < g.size(); ++k) {
      if (in_collar(g, k, 2.0)) continue;
      const Vec2 x = g.center(k);
      const double v = std::max(pair.lower(x, te) - c.u[k], c.u[k] - pair.upper(x, te));
      if (v > rep.max_violation) rep.max_violation = v, rep.worst_t = c.t, rep.worst_cell = k;
    }
    if (pair.kind == PairKind::motion && pair.distance) {
      ClassificationReport cr = classification_check(pair.ledger, c.u, pair.distance->at(te));
      rep.classification_violation = std::max(rep.classification_violation, cr.max_violation);
      rep.classification_failures += cr.failures;
    }
    if (!nearest || std::abs(c.t - pair.t_end) < std::abs(nearest->t - pair.t_end)) nearest = &c;
  }
  if (pair.kind == PairKind::generation && dist0 && nearest)
    rep.sandwich_violation = sandwich_violation(pair.ledger, nearest->u, *dist0);
  return rep;
}

}  // namespace anisoac
