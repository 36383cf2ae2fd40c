#include "anisoac/reaction.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "anisoac/errors.hpp"

namespace anisoac {

namespace {

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr double kGLx[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
constexpr double kGLw[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_legendre(F&& f, double lo, double hi) {
  double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo), s = 0.0;
  for (int k = 0; k < 4; ++k) s += kGLw[k] * (f(c - r * kGLx[k]) + f(c + r * kGLx[k]));
  return r * s;
}

template <class F>
double simpson(F&& f, double lo, double hi, int panels) {
  if (panels % 2) ++panels;
  double h = (hi - lo) / panels, s = f(lo) + f(hi);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(lo + k * h);
  return s * h / 3.0;
}

double hermite(double y0, double y1, double d0, double d1, double h, double t) {
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sx += x[k], sy += y[k], sxx += x[k] * x[k], sxy += x[k] * y[k];
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double WaveProfile::eval(double z) const {
  if (z >= z_.back()) return 1.0 - (1.0 - u_.back()) * std::exp(-rate_hi_ * (z - z_.back()));
  if (z <= z_.front()) return u_.front() * std::exp(rate_lo_ * (z - z_.front()));
  const double dz = z_[1] - z_[0];
  std::size_t k = std::min(static_cast<std::size_t>((z - z_[0]) / dz), z_.size() - 2);
  double t = (z - z_[k]) / dz;
  return hermite(u_[k], u_[k + 1], du_[k], du_[k + 1], dz, t);
}

double WaveProfile::deriv(double z) const {
  if (z >= z_.back()) return rate_hi_ * (1.0 - eval(z));
  if (z <= z_.front()) return rate_lo_ * eval(z);
  const double dz = z_[1] - z_[0];
  std::size_t k = std::min(static_cast<std::size_t>((z - z_[0]) / dz), z_.size() - 2);
  double t = (z - z_[k]) / dz;
  // Derivative of the cubic Hermite interpolant.
  double t2 = t * t;
  return ((6 * t2 - 6 * t) * u_[k] + (3 * t2 - 4 * t + 1) * dz * du_[k] + (-6 * t2 + 6 * t) * u_[k + 1] +
          (3 * t2 - 2 * t) * dz * du_[k + 1]) /
         dz;
}

double WaveProfile::inverse(double level) const {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput(fmt::format("profile level {} outside (0, 1)", level));
  double lo = z_.front() - 60.0, hi = z_.back() + 60.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (eval(mid) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

BistableReaction BistableReaction::make(double a) {
  if (!(a > 0.0 && a < 1.0)) throw BistabilityError(fmt::format("unstable zero a = {} must lie in (0, 1)", a));
  BistableReaction r;
  r.cubic_ = true;
  r.a_ = a;
  r.finish();
  return r;
}

BistableReaction BistableReaction::custom(const Expr& f, const Expr& W) {
  BistableReaction r;
  r.cubic_ = false;
  r.f_expr_ = f;
  r.W_expr_ = W;
  // f < 0 on (0, a), f > 0 on (a, 1).
  double lo = 1e-3, hi = 1.0 - 1e-3;
  if (!(r.f(lo) < 0.0 && r.f(hi) > 0.0)) throw BistabilityError("f must be negative just above 0 and positive just below 1");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (r.f(mid) < 0.0 ? lo : hi) = mid;
  }
  r.a_ = 0.5 * (lo + hi);
  r.finish();
  return r;
}

double BistableReaction::f(double u) const {
  if (cubic_) return u * (1.0 - u) * (u - a_);
  return f_expr_(0.0, 0.0, u);
}

double BistableReaction::fprime(double u) const {
  if (cubic_) return -3.0 * u * u + 2.0 * (1.0 + a_) * u - a_;
  const double s = 1e-5 * (1.0 + std::abs(u));
  return (f(u + s) - f(u - s)) / (2.0 * s);
}

double BistableReaction::fsecond(double u) const {
  if (cubic_) return -6.0 * u + 2.0 * (1.0 + a_);
  const double s = 1e-4 * (1.0 + std::abs(u));
  return (f(u + s) - 2.0 * f(u) + f(u - s)) / (s * s);
}

double BistableReaction::W(double u) const {
  if (cubic_) {
    // W = -int_0^u f for the cubic family.
    double u2 = u * u;
    return u2 * u2 / 4.0 - (1.0 + a_) * u2 * u / 3.0 + a_ * u2 / 2.0;
  }
  return W_expr_(0.0, 0.0, u);
}

std::string BistableReaction::describe() const {
  if (cubic_) return fmt::format("cubic(a={})", a_);
  return "f = " + f_expr_.text() + ", W = " + W_expr_.text();
}

double BistableReaction::max_abs_fprime(double lo, double hi) const {
  double m = 0.0;
  for (int k = 0; k <= 400; ++k) m = std::max(m, std::abs(fprime(lo + (hi - lo) * k / 400.0)));
  return m;
}

void BistableReaction::finish() {
  const double tol = 1e-10;
  if (std::abs(f(0.0)) > tol || std::abs(f(a_)) > tol || std::abs(f(1.0)) > tol)
    throw BistabilityError(fmt::format("f must vanish at 0, a = {}, 1 (values {}, {}, {})", a_, f(0.0), f(a_), f(1.0)));
  if (!(fprime(0.0) < 0.0 && fprime(a_) > 0.0 && fprime(1.0) < 0.0))
    throw BistabilityError(fmt::format("sign pattern f'(0) < 0 < f'(a), f'(1) < 0 fails ({}, {}, {})", fprime(0.0),
                                       fprime(a_), fprime(1.0)));
  for (int k = 1; k < 100; ++k) {
    double u = k / 100.0;
    if (std::abs(u - a_) > 1e-2 && (u < a_ ? f(u) >= 0.0 : f(u) <= 0.0))
      throw BistabilityError(fmt::format("f has an extra sign change near u = {}", u));
  }
  double balance = simpson([&](double u) { return f(u); }, 0.0, 1.0, 2000);
  if (std::abs(balance) > 1e-8)
    throw BalanceViolation(fmt::format("integral of f over [0, 1] is {:.3e}; the wells are unbalanced", balance));
  if (!cubic_) {
    if (std::abs(W(0.0)) > 1e-10 || std::abs(W(1.0)) > 1e-10) throw InvalidInput("W must vanish at 0 and 1");
    for (int k = 1; k < 100; ++k) {
      double u = k / 100.0, s = 1e-5;
      double dW = (W(u + s) - W(u - s)) / (2 * s);
      if (std::abs(dW + f(u)) > 1e-6 * (1.0 + std::abs(f(u)))) throw InvalidInput("W' must equal -f");
      if (!(W(u) > 0.0)) throw InvalidInput("W must be positive on (0, 1)");
    }
  }
  mu_ = fprime(a_);

  // Kink profile from z(u) = int_a^u dq / sqrt(2 W(q)), inverted node by node with Newton steps.
  auto P = std::make_shared<WaveProfile>();
  const int n = 4096;
  const double zlim = 20.0;
  P->z_.resize(n);
  P->u_.resize(n);
  P->du_.resize(n);
  for (int k = 0; k < n; ++k) P->z_[k] = -zlim + 2.0 * zlim * k / (n - 1);
  auto speed = [&](double u) { return std::sqrt(std::max(0.0, 2.0 * W(u))); };
  auto inv_speed = [&](double u) { return 1.0 / speed(u); };
  auto march = [&](int k0, int k1, int dir) {
    double zp = 0.0, up = a_;
    for (int k = k0; k != k1; k += dir) {
      const double zt = P->z_[k];
      double u = up + (zt - zp) * speed(up);
      u = std::clamp(u, 1e-300, 1.0 - 1e-16);
      for (int it = 0; it < 50; ++it) {
        double F = zp + gauss_legendre(inv_speed, up, u) - zt;
        double du = -F * speed(u);
        double next = dir < 0 ? std::clamp(u + du, 1e-300, up) : std::clamp(u + du, up, 1.0 - 1e-17);
        bool done = std::abs(next - u) <= 1e-17 + 1e-15 * std::min(u, 1.0 - u);
        u = next;
        if (done) break;
      }
      P->u_[k] = u;
      zp = zt;
      up = u;
    }
  };
  march(n / 2, n, +1);
  march(n / 2 - 1, -1, -1);
  for (int k = 0; k < n; ++k) P->du_[k] = speed(P->u_[k]);
  P->rate_hi_ = P->du_.back() / (1.0 - P->u_.back());
  P->rate_lo_ = P->du_.front() / P->u_.front();

  std::vector<double> zs, hi_log, lo_log, zneg;
  for (int k = 0; k <= 200; ++k) {
    double z = 5.0 + 10.0 * k / 200.0;
    zs.push_back(z);
    hi_log.push_back(std::log(1.0 - P->eval(z)));
    zneg.push_back(-z);
    lo_log.push_back(std::log(P->eval(-z)));
  }
  double lam_hi = -slope_fit(zs, hi_log), lam_lo = slope_fit(zneg, lo_log);
  P->lambda_ = std::min(lam_hi, lam_lo);
  double C = 0.0;
  for (int k = 0; k < n; ++k) {
    double z = P->z_[k], u = P->u_[k];
    double m = std::max({P->du_[k], std::abs(f(u)), std::min(u, 1.0 - u)});
    C = std::max(C, m * std::exp(P->lambda_ * std::abs(z)));
  }
  P->Cdecay_ = C;
  profile_ = std::move(P);
}

KernelValue BistableReaction::kernel(double tau, double xi) const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidInput(fmt::format("kernel time must be >= 0, got {}", tau));
  if (!std::isfinite(xi)) throw InvalidInput("kernel argument must be finite");
  KernelValue v;
  v.Y = xi;
  if (tau == 0.0) return v;
  if (xi == 0.0 || xi == a_ || xi == 1.0) {
    double fp = fprime(xi), fpp = fsecond(xi);
    v.Y_xi = std::exp(fp * tau);
    v.A = fpp * std::expm1(fp * tau) / fp;
    return v;
  }
  const double L = max_abs_fprime(std::min(xi, 0.0) - 0.1, std::max(xi, 1.0) + 0.1);
  auto integrate = [&](long steps) {
    const double dt = tau / steps;
    double y = xi, l = 0.0, A = 0.0;
    for (long s = 0; s < steps; ++s) {
      // RK4 on (Y, ln Y_xi, A).
      double y1 = y;
      double k1y = f(y1), k1l = fprime(y1), k1a = fsecond(y1) * std::exp(l);
      double y2 = y + 0.5 * dt * k1y, l2 = l + 0.5 * dt * k1l;
      double k2y = f(y2), k2l = fprime(y2), k2a = fsecond(y2) * std::exp(l2);
      double y3 = y + 0.5 * dt * k2y, l3 = l + 0.5 * dt * k2l;
      double k3y = f(y3), k3l = fprime(y3), k3a = fsecond(y3) * std::exp(l3);
      double y4 = y + dt * k3y, l4 = l + dt * k3l;
      double k4y = f(y4), k4l = fprime(y4), k4a = fsecond(y4) * std::exp(l4);
      y += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
      l += dt / 6.0 * (k1l + 2 * k2l + 2 * k3l + k4l);
      A += dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
    }
    return KernelValue{y, std::exp(l), A};
  };
  long steps = std::max<long>(16, static_cast<long>(std::ceil(tau * L / 0.01)));
  KernelValue coarse = integrate(steps), fine = integrate(2 * steps);
  // Richardson safeguard: refine until the two resolutions agree.
  for (int r = 0; r < 4 && std::abs(fine.Y - coarse.Y) > 1e-11 * (1.0 + std::abs(fine.Y)); ++r) {
    steps *= 2;
    coarse = fine;
    fine = integrate(2 * steps);
  }
  v.Y = fine.Y + (fine.Y - coarse.Y) / 15.0;
  v.Y_xi = fine.Y_xi + (fine.Y_xi - coarse.Y_xi) / 15.0;
  v.A = fine.A + (fine.A - coarse.A) / 15.0;
  return v;
}

std::vector<KernelValue> BistableReaction::kernel_path(double xi, const std::vector<double>& taus) const {
  if (!std::is_sorted(taus.begin(), taus.end()) || (!taus.empty() && !(taus.front() >= 0.0)))
    throw InvalidInput("kernel_path times must be sorted and non-negative");
  if (!std::isfinite(xi)) throw InvalidInput("kernel argument must be finite");
  std::vector<KernelValue> out;
  out.reserve(taus.size());
  double y = xi, l = 0.0, A = 0.0, t = 0.0;
  auto rk4 = [&](double dt) {
    double k1y = f(y), k1l = fprime(y), k1a = fsecond(y) * std::exp(l);
    double y2 = y + 0.5 * dt * k1y, l2 = l + 0.5 * dt * k1l;
    double k2y = f(y2), k2l = fprime(y2), k2a = fsecond(y2) * std::exp(l2);
    double y3 = y + 0.5 * dt * k2y, l3 = l + 0.5 * dt * k2l;
    double k3y = f(y3), k3l = fprime(y3), k3a = fsecond(y3) * std::exp(l3);
    double y4 = y + dt * k3y, l4 = l + dt * k3l;
    double k4y = f(y4), k4l = fprime(y4), k4a = fsecond(y4) * std::exp(l4);
    y += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    l += dt / 6.0 * (k1l + 2 * k2l + 2 * k3l + k4l);
    A += dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
  };
  const bool pinned = xi == 0.0 || xi == a_ || xi == 1.0;
  for (double target : taus) {
    if (pinned) {
      double fp = fprime(xi), fpp = fsecond(xi);
      out.push_back({xi, std::exp(fp * target), fpp * std::expm1(fp * target) / fp});
      continue;
    }
    while (t < target) {
      double dt = std::min(0.005 / std::max(std::abs(fprime(y)), mu_), target - t);
      rk4(dt);
      t = (target - t <= dt) ? target : t + dt;
    }
    out.push_back({y, std::exp(l), A});
  }
  return out;
}

double BistableReaction::A(double tau, double xi) const {
  KernelValue k = kernel(tau, xi);
  double fx = f(xi);
  if (std::abs(fx) >= 1e-4) return (fprime(k.Y) - fprime(xi)) / fx;
  return k.A;
}

double BistableReaction::Y_quadrature(double tau, double xi, int panels) const {
  if (!(tau >= 0.0)) throw InvalidInput("kernel time must be >= 0");
  double fx = f(xi);
  if (fx == 0.0 || tau == 0.0) return xi;
  // Attracting equilibrium in the direction of motion.
  double target;
  if (fx > 0) target = xi < 0.0 ? 0.0 : 1.0;
  else target = xi > 1.0 ? 1.0 : 0.0;
  auto G = [&](double y) { return simpson([&](double q) { return 1.0 / f(q); }, xi, y, panels); };
  double lo = xi, hi = target;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == target) break;
    (G(mid) < tau ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

KernelTable::KernelTable(const BistableReaction& r, double xi_lo, double xi_hi, int n, std::vector<double> taus)
    : lo_(xi_lo), hi_(xi_hi), dxi_((xi_hi - xi_lo) / (n - 1)), n_(n), taus_(std::move(taus)) {
  if (n < 4 || !(xi_hi > xi_lo)) throw InvalidInput("kernel table needs n >= 4 and a non-empty range");
  if (!std::is_sorted(taus_.begin(), taus_.end()) || (!taus_.empty() && taus_.front() < 0.0))
    throw InvalidInput("kernel table times must be sorted and non-negative");
  y_.assign(taus_.size(), std::vector<double>(n));
  dy_.assign(taus_.size(), std::vector<double>(n));
  for (int k = 0; k < n; ++k) {
    const auto path = r.kernel_path(lo_ + k * dxi_, taus_);
    for (std::size_t m = 0; m < taus_.size(); ++m) {
      y_[m][k] = path[m].Y;
      dy_[m][k] = path[m].Y_xi;
    }
  }
}

double KernelTable::Y(std::size_t m, double xi) const {
  if (xi < lo_ || xi > hi_) throw InvalidInput(fmt::format("kernel table argument {} outside [{}, {}]", xi, lo_, hi_));
  std::size_t k = std::min(static_cast<std::size_t>((xi - lo_) / dxi_), static_cast<std::size_t>(n_ - 2));
  double t = (xi - (lo_ + k * dxi_)) / dxi_;
  return hermite(y_[m][k], y_[m][k + 1], dy_[m][k], dy_[m][k + 1], dxi_, t);
}

}  // namespace anisoac
