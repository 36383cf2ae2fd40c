#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "anisoac/expr.hpp"

namespace anisoac {

// Standing wave U0'' + f(U0) = 0 with U0(-inf) = 0, U0(0) = a, U0(+inf) = 1.
class WaveProfile {
 public:
  double eval(double z) const;
  double deriv(double z) const;  // sqrt(2 W(U0(z)))
  double lambda_decay() const { return lambda_; }
  double Cdecay() const { return Cdecay_; }
  double z_min() const { return z_.front(); }
  double z_max() const { return z_.back(); }
  // Smallest z with U0(z) >= level (monotone inversion).
  double inverse(double level) const;
  const std::vector<double>& nodes() const { return z_; }
  const std::vector<double>& values() const { return u_; }
  const std::vector<double>& derivs() const { return du_; }

 private:
  friend class BistableReaction;
  std::vector<double> z_, u_, du_;
  double rate_lo_ = 0.0, rate_hi_ = 0.0;  // tail rates used beyond the table
  double lambda_ = 0.0, Cdecay_ = 0.0;
};

struct KernelValue {
  double Y = 0.0;
  double Y_xi = 1.0;  // exp of the integral of f'(Y)
  double A = 0.0;     // integral of f''(Y) Y_xi, equal to Y_xixi / Y_xi
};

// Balanced bistable nonlinearity f = -W' with zeros 0 < a < 1.
class BistableReaction {
 public:
  // Cubic family f(u) = u(1-u)(u-a); only a = 1/2 is balanced.
  static BistableReaction make(double a = 0.5);
  // User-supplied f(u) and W(u); the unstable zero is located by bisection.
  static BistableReaction custom(const Expr& f, const Expr& W);

  double f(double u) const;
  double fprime(double u) const;
  double fsecond(double u) const;
  double W(double u) const;
  double a() const { return a_; }
  double mu() const { return mu_; }
  double eta0() const { return std::min(a_, 1.0 - a_); }
  bool is_cubic() const { return cubic_; }
  std::string describe() const;
  // max |f'| on [lo, hi] (sampled).
  double max_abs_fprime(double lo, double hi) const;

  // Kernel ODE Y' = f(Y), Y(0) = xi, with the variational quantities.
  KernelValue kernel(double tau, double xi) const;
  double Y(double tau, double xi) const { return kernel(tau, xi).Y; }
  double Y_xi(double tau, double xi) const { return kernel(tau, xi).Y_xi; }
  // Kernel values at each of the sorted times, from one RK4 integration whose
  // step adapts to |f'(Y)|.
  std::vector<KernelValue> kernel_path(double xi, const std::vector<double>& taus) const;
  // (f'(Y) - f'(xi)) / f(xi) when f(xi) is not small, else the integral form.
  double A(double tau, double xi) const;
  // Inverts tau = int_xi^Y dq / f(q) on the branch containing xi (cross-check).
  double Y_quadrature(double tau, double xi, int panels = 100000) const;

  const WaveProfile& profile() const { return *profile_; }
  double U0(double z) const { return profile_->eval(z); }
  double U0_prime(double z) const { return profile_->deriv(z); }

 private:
  void finish();  // validates and tabulates
  bool cubic_ = true;
  double a_ = 0.5, mu_ = 0.25;
  Expr f_expr_, W_expr_;
  std::shared_ptr<const WaveProfile> profile_;
};

// Y(tau_k, xi) on a uniform xi grid for a fixed list of times, interpolated in xi.
class KernelTable {
 public:
  KernelTable(const BistableReaction& r, double xi_lo, double xi_hi, int n, std::vector<double> taus);
  double Y(std::size_t time_index, double xi) const;
  const std::vector<double>& taus() const { return taus_; }

 private:
  double lo_, hi_, dxi_;
  int n_;
  std::vector<double> taus_;
  std::vector<std::vector<double>> y_, dy_;  // values and xi-derivatives per time
};

}  // namespace anisoac
