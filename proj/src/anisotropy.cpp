#include "anisoac/anisotropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "anisoac/errors.hpp"
#include "numeric_util.hpp"

namespace anisoac {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_finite(const Vec2& v, const char* what) {
  if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
    throw InvalidInput(fmt::format("{}: non-finite input ({}, {})", what, v[0], v[1]));
}

Vec2 unit(double theta) { return Vec2(std::cos(theta), std::sin(theta)); }

// Smallest and largest eigenvalues of a symmetric 2x2 matrix.
std::pair<double, double> sym_eig(const Mat2& M) {
  double m = 0.5 * (M(0, 0) + M(1, 1));
  double d = 0.5 * (M(0, 0) - M(1, 1));
  double r = std::hypot(d, 0.5 * (M(0, 1) + M(1, 0)));
  return {m - r, m + r};
}

}  // namespace

std::string to_string(Preset p) {
  switch (p) {
    case Preset::euclidean: return "euclidean";
    case Preset::ellipsoidal: return "ellipsoidal";
    case Preset::fourfold: return "fourfold";
    case Preset::user: return "user";
  }
  return "?";
}

struct Anisotropy::Impl {
  Preset preset = Preset::euclidean;
  Mat2 A = Mat2::Identity();
  double delta = 0.0;
  Density density;
  bool x_dependent = false;
  Expr weight;
  bool weight_constant = true;
  double weight_value = 1.0;

  double user_a(const Vec2& x, const Vec2& p) const {
    double v = density(x, p);
    if (!std::isfinite(v)) throw InvalidInput("user anisotropy returned a non-finite value");
    return v;
  }
};

Anisotropy Anisotropy::euclidean() { return Anisotropy(std::make_shared<Impl>()); }

Anisotropy Anisotropy::ellipsoidal(const Mat2& A) {
  if (!A.allFinite()) throw InvalidInput("ellipsoidal matrix has non-finite entries");
  if (std::abs(A(0, 1) - A(1, 0)) > 1e-12 * (1.0 + A.norm()))
    throw InvalidInput("ellipsoidal matrix must be symmetric");
  auto [lo, hi] = sym_eig(A);
  if (lo <= 0.0)
    throw ConvexityViolation(fmt::format("ellipsoidal matrix not positive definite (eigenvalues {}, {})", lo, hi));
  auto impl = std::make_shared<Impl>();
  impl->preset = Preset::ellipsoidal;
  impl->A = A;
  return Anisotropy(impl);
}

Anisotropy Anisotropy::fourfold(double delta) {
  if (!std::isfinite(delta)) throw InvalidInput("fourfold strength must be finite");
  if (std::abs(delta) >= 1.0 / 15.0)
    throw ConvexityViolation(fmt::format("fourfold strength {} violates |delta| < 1/15 (gamma + gamma'' changes sign)", delta));
  auto impl = std::make_shared<Impl>();
  impl->preset = Preset::fourfold;
  impl->delta = delta;
  return Anisotropy(impl);
}

Anisotropy Anisotropy::user(Density density, bool depends_on_x) {
  if (!density) throw InvalidInput("user anisotropy needs a density");
  auto impl = std::make_shared<Impl>();
  impl->preset = Preset::user;
  impl->density = std::move(density);
  impl->x_dependent = depends_on_x;
  return Anisotropy(impl);
}

Anisotropy Anisotropy::with_weight(const Expr& m) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->weight = m;
  impl->weight_constant = m.is_constant();
  impl->weight_value = m(0.0, 0.0);
  if (impl->weight_constant && !(impl->weight_value > 0.0))
    throw InvalidInput(fmt::format("weight must be positive, got {}", impl->weight_value));
  return Anisotropy(impl);
}

Preset Anisotropy::preset() const { return impl_->preset; }
const Mat2& Anisotropy::matrix() const { return impl_->A; }
double Anisotropy::delta() const { return impl_->delta; }
bool Anisotropy::x_independent() const { return !(impl_->preset == Preset::user && impl_->x_dependent); }
bool Anisotropy::quadratic() const {
  return impl_->preset == Preset::euclidean || impl_->preset == Preset::ellipsoidal;
}
const Expr& Anisotropy::weight_expr() const { return impl_->weight; }
bool Anisotropy::weight_constant() const { return impl_->weight_constant; }

namespace {

struct FourfoldTerms {
  double r, gamma, dgamma, ddgamma;
  Vec2 er, et;
};

FourfoldTerms fourfold_terms(double delta, const Vec2& p) {
  FourfoldTerms t;
  t.r = p.norm();
  t.er = p / t.r;
  t.et = Vec2(-t.er[1], t.er[0]);
  double c2 = t.er[0] * t.er[0] - t.er[1] * t.er[1];
  double s2 = 2.0 * t.er[0] * t.er[1];
  double c4 = c2 * c2 - s2 * s2;
  double s4 = 2.0 * s2 * c2;
  t.gamma = 1.0 + delta * c4;
  t.dgamma = -4.0 * delta * s4;
  t.ddgamma = -16.0 * delta * c4;
  return t;
}

}  // namespace

double Anisotropy::a(const Vec2& x, const Vec2& p) const {
  require_finite(p, "a(x,p)");
  if (p[0] == 0.0 && p[1] == 0.0) return 0.0;
  switch (impl_->preset) {
    case Preset::euclidean: return 0.5 * p.squaredNorm();
    case Preset::ellipsoidal: return 0.5 * p.dot(impl_->A * p);
    case Preset::fourfold: {
      double r2 = p.squaredNorm();
      double r = std::sqrt(r2);
      double c = p[0] / r, s = p[1] / r;
      double c2 = c * c - s * s, s2 = 2.0 * c * s;
      double g = 1.0 + impl_->delta * (c2 * c2 - s2 * s2);
      return 0.5 * g * g * r2;
    }
    case Preset::user: return impl_->user_a(x, p);
  }
  return 0.0;
}

Vec2 Anisotropy::ap(const Vec2& x, const Vec2& p) const {
  require_finite(p, "a_p(x,p)");
  if (p[0] == 0.0 && p[1] == 0.0) return Vec2::Zero();
  switch (impl_->preset) {
    case Preset::euclidean: return p;
    case Preset::ellipsoidal: return impl_->A * p;
    case Preset::fourfold: {
      auto t = fourfold_terms(impl_->delta, p);
      return t.r * (t.gamma * t.gamma * t.er + t.gamma * t.dgamma * t.et);
    }
    case Preset::user: {
      // a_p is 1-homogeneous: differentiate at the unit direction.
      double r = p.norm();
      Vec2 u = p / r;
      const double s = 1e-6 * (1.0 + u.norm());
      Vec2 g;
      for (int i = 0; i < 2; ++i) {
        Vec2 e = Vec2::Zero();
        e[i] = s;
        g[i] = (impl_->user_a(x, u + e) - impl_->user_a(x, u - e)) / (2.0 * s);
      }
      return r * g;
    }
  }
  return Vec2::Zero();
}

Mat2 Anisotropy::app(const Vec2& x, const Vec2& p) const {
  require_finite(p, "a_pp(x,p)");
  if (p[0] == 0.0 && p[1] == 0.0) throw SingularDirection("a_pp is undefined at p = 0");
  switch (impl_->preset) {
    case Preset::euclidean: return Mat2::Identity();
    case Preset::ellipsoidal: return impl_->A;
    case Preset::fourfold: {
      auto t = fourfold_terms(impl_->delta, p);
      Vec2 grad_g = t.gamma * t.er + t.dgamma * t.et;
      return grad_g * grad_g.transpose() + t.gamma * (t.gamma + t.ddgamma) * t.et * t.et.transpose();
    }
    case Preset::user: {
      // a_pp is 0-homogeneous: second differences at the unit direction.
      Vec2 u = p / p.norm();
      const double s = 1e-4 * (1.0 + u.norm());
      auto f = [&](double d0, double d1) { return impl_->user_a(x, u + Vec2(d0, d1)); };
      double f0 = f(0, 0);
      Mat2 H;
      H(0, 0) = (f(s, 0) - 2.0 * f0 + f(-s, 0)) / (s * s);
      H(1, 1) = (f(0, s) - 2.0 * f0 + f(0, -s)) / (s * s);
      H(0, 1) = H(1, 0) = (f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4.0 * s * s);
      return H;
    }
  }
  return Mat2::Identity();
}

double Anisotropy::phi0(const Vec2& x, const Vec2& p) const { return std::sqrt(2.0 * a(x, p)); }

Vec2 Anisotropy::phi0_grad(const Vec2& x, const Vec2& p) const {
  require_finite(p, "phi0_grad(x,p)");
  if (p[0] == 0.0 && p[1] == 0.0) throw SingularDirection("phi0 is not differentiable at p = 0");
  return ap(x, p) / phi0(x, p);
}

double Anisotropy::weight(const Vec2& x) const {
  if (impl_->weight_constant) return impl_->weight_value;
  return impl_->weight(x);
}

Vec2 Anisotropy::grad_log_weight(const Vec2& x) const {
  if (impl_->weight_constant) return Vec2::Zero();
  const double s = 1e-6 * (1.0 + x.norm());
  Vec2 g;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e[i] = s;
    g[i] = (impl_->weight(x + e) - impl_->weight(x - e)) / (2.0 * s);
  }
  return g / impl_->weight(x);
}

std::string Anisotropy::describe() const {
  std::string s;
  switch (impl_->preset) {
    case Preset::euclidean: s = "euclidean"; break;
    case Preset::ellipsoidal:
      s = fmt::format("ellipsoidal[[{},{}],[{},{}]]", impl_->A(0, 0), impl_->A(0, 1), impl_->A(1, 0), impl_->A(1, 1));
      break;
    case Preset::fourfold: s = fmt::format("fourfold({})", impl_->delta); break;
    case Preset::user: s = impl_->x_dependent ? "user(x-dependent)" : "user"; break;
  }
  return s + ", m = " + impl_->weight.text();
}

double dual_metric(const Anisotropy& field, const Vec2& x, const Vec2& xi) {
  require_finite(xi, "dual_metric");
  if (xi[0] == 0.0 && xi[1] == 0.0) return 0.0;
  auto ratio = [&](double th) {
    Vec2 e = unit(th);
    return xi.dot(e) / field.phi0(x, e);
  };
  const int n = 256;
  const double step = two_pi / n;
  int best = 0;
  double best_val = -1e300;
  for (int k = 0; k < n; ++k) {
    double v = ratio(k * step);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  auto [arg, val] = detail::golden_max(ratio, (best - 1) * step, (best + 1) * step, 80);
  (void)arg;
  return std::max(val, best_val);
}

DualMetric::DualMetric(const Anisotropy& field) : field_(field), inv_(Mat2::Identity()) {
  if (field.preset() == Preset::euclidean) {
    mode_ = Mode::euclidean;
  } else if (field.preset() == Preset::ellipsoidal) {
    mode_ = Mode::quadratic;
    inv_ = field.matrix().inverse();
  } else if (field.x_independent()) {
    mode_ = Mode::table;
    const int n = 4096;
    table_.resize(n);
    Vec2 x0 = Vec2::Zero();
    for (int k = 0; k < n; ++k) table_[k] = dual_metric(field, x0, unit(two_pi * k / n));
  } else {
    mode_ = Mode::direct;
  }
  // Direct mode samples a few points; x-dependent user fields get a widened bracket.
  std::vector<Vec2> xs{Vec2::Zero()};
  if (mode_ == Mode::direct) xs = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 1), Vec2(0.5, 0.5)};
  phi_min_ = 1e300;
  phi_max_ = 0.0;
  for (const auto& x : xs)
    for (int k = 0; k < 256; ++k) {
      double v = (*this)(x, unit(two_pi * k / 256));
      phi_min_ = std::min(phi_min_, v);
      phi_max_ = std::max(phi_max_, v);
    }
  const double widen = mode_ == Mode::direct ? 1.25 : 1.0 + 1e-3;
  phi_min_ /= widen;
  phi_max_ *= widen;
}

double DualMetric::operator()(const Vec2& x, const Vec2& xi) const {
  switch (mode_) {
    case Mode::euclidean: return xi.norm();
    case Mode::quadratic: return std::sqrt(std::max(0.0, xi.dot(inv_ * xi)));
    case Mode::table: {
      double r = xi.norm();
      if (r == 0.0) return 0.0;
      const int n = static_cast<int>(table_.size());
      double t = std::atan2(xi[1], xi[0]) / two_pi * n;
      if (t < 0) t += n;
      int i = static_cast<int>(t);
      double f = t - i;
      auto at = [&](int k) { return table_[((k % n) + n) % n]; };
      double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
      // Catmull-Rom cubic on the periodic table.
      double v = p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
      return r * v;
    }
    case Mode::direct: return dual_metric(field_, x, xi);
  }
  return 0.0;
}

MetricConstants estimate_constants(const Anisotropy& field, int sample_count, const Box& region, unsigned seed) {
  if (sample_count < 64) throw InvalidInput("estimate_constants needs sample_count >= 64");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto random_x = [&] {
    return Vec2(region.lo[0] + U(rng) * (region.hi[0] - region.lo[0]), region.lo[1] + U(rng) * (region.hi[1] - region.lo[1]));
  };
  Vec2 center = 0.5 * (region.lo + region.hi);

  std::vector<Vec2> xs_a{center};
  if (!field.x_independent())
    for (int i = 0; i < sample_count; ++i) xs_a.push_back(random_x());
  std::vector<Vec2> xs_m{center};
  if (!field.weight_constant()) {
    int g = std::max(8, static_cast<int>(std::sqrt(static_cast<double>(sample_count))));
    for (int i = 0; i <= g; ++i)
      for (int j = 0; j <= g; ++j)
        xs_m.emplace_back(region.lo[0] + (region.hi[0] - region.lo[0]) * i / g,
                          region.lo[1] + (region.hi[1] - region.lo[1]) * j / g);
    for (int i = 0; i < sample_count; ++i) xs_m.push_back(random_x());
  }

  MetricConstants c;
  c.m_min = 1e300;
  c.m_max = -1e300;
  for (const auto& x : xs_m) {
    double m = field.weight(x);
    if (!std::isfinite(m) || m <= 0.0) throw InvalidInput(fmt::format("weight m({}, {}) = {} is not positive", x[0], x[1], m));
    c.m_min = std::min(c.m_min, m);
    c.m_max = std::max(c.m_max, m);
  }

  const int n = std::max(sample_count, 256);
  const double step = two_pi / n;
  double q_min = 1e300, q_max = 0.0, e_min = 1e300, e_max = -1e300, frob = 0.0;
  for (const auto& x : xs_a) {
    auto q = [&](double th) { return 2.0 * field.a(x, unit(th)); };
    auto lo_eig = [&](double th) { return sym_eig(field.app(x, unit(th))).first; };
    auto hi_eig = [&](double th) { return sym_eig(field.app(x, unit(th))).second; };
    int kqmin = 0, kqmax = 0, kemin = 0, kemax = 0;
    double vqmin = 1e300, vqmax = -1e300, vemin = 1e300, vemax = -1e300;
    for (int k = 0; k < n; ++k) {
      double th = k * step;
      double v = q(th);
      if (v < vqmin) vqmin = v, kqmin = k;
      if (v > vqmax) vqmax = v, kqmax = k;
      Mat2 H = field.app(x, unit(th));
      auto [l, h] = sym_eig(H);
      if (l < vemin) vemin = l, kemin = k;
      if (h > vemax) vemax = h, kemax = k;
      frob = std::max(frob, H.norm());
    }
    vqmin = std::min(vqmin, detail::golden_min(q, (kqmin - 1) * step, (kqmin + 1) * step, 60).second);
    vqmax = std::max(vqmax, detail::golden_max(q, (kqmax - 1) * step, (kqmax + 1) * step, 60).second);
    vemin = std::min(vemin, detail::golden_min(lo_eig, (kemin - 1) * step, (kemin + 1) * step, 60).second);
    vemax = std::max(vemax, detail::golden_max(hi_eig, (kemax - 1) * step, (kemax + 1) * step, 60).second);
    q_min = std::min(q_min, vqmin);
    q_max = std::max(q_max, vqmax);
    e_min = std::min(e_min, vemin);
    e_max = std::max(e_max, vemax);
  }
  if (!(q_min > 0.0)) throw ConvexityViolation(fmt::format("a(x,p) is not positive on the unit circle (min 2a = {})", q_min));
  c.lambda0 = std::sqrt(q_min);
  c.Lambda0 = std::sqrt(q_max);
  c.lambda2 = e_min;
  c.Lambda2 = e_max;

  // Sampled monotonicity ratio over random pairs.
  double ratio_min = 1e300;
  const int pairs = std::max(4096, 16 * sample_count);
  for (int i = 0; i < pairs; ++i) {
    const Vec2& x = xs_a[i % xs_a.size()];
    double r1 = 2.0 * U(rng), r2 = 2.0 * U(rng);
    Vec2 p1 = r1 * unit(two_pi * U(rng)), p2 = r2 * unit(two_pi * U(rng));
    Vec2 d = p2 - p1;
    double dd = d.squaredNorm();
    if (dd < 1e-12) continue;
    ratio_min = std::min(ratio_min, (field.ap(x, p2) - field.ap(x, p1)).dot(d) / dd);
  }
  double beta = std::min({ratio_min, c.lambda2, c.lambda0 * c.lambda0});
  // Shave a relative margin so sampled extrema do not overstate the bound.
  beta *= 1.0 - (field.preset() == Preset::user ? 1e-6 : 1e-9);
  if (!(beta > 0.0) || !(c.lambda2 > 0.0))
    throw ConvexityViolation(fmt::format("strong monotonicity fails: sampled beta = {}, lambda2 = {}", beta, c.lambda2));
  c.beta_mono = beta;

  // |div_m a_p(x, grad u)| <= |a_pp|_F |D2u|_F + (|grad log m . a_p(x,e)| + |div_x a_p(x,e)|) |grad u|.
  double lower_order = 0.0;
  std::vector<Vec2> xs_l = xs_a.size() > 1 ? xs_a : xs_m;
  for (const auto& x : xs_l) {
    Vec2 glm = field.grad_log_weight(x);
    for (int k = 0; k < 64; ++k) {
      Vec2 e = unit(two_pi * k / 64);
      double t = std::abs(glm.dot(field.ap(x, e)));
      if (!field.x_independent()) {
        const double s = 1e-5 * (1.0 + x.norm());
        double div = 0.0;
        for (int i = 0; i < 2; ++i) {
          Vec2 dx = Vec2::Zero();
          dx[i] = s;
          div += (field.ap(x + dx, e)[i] - field.ap(x - dx, e)[i]) / (2.0 * s);
        }
        t += std::abs(div);
      }
      lower_order = std::max(lower_order, t);
    }
  }
  c.CL = std::max(frob, lower_order);
  return c;
}

}  // namespace anisoac
