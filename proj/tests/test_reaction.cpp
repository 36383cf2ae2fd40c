#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "anisoac/bounds.hpp"
#include "anisoac/errors.hpp"
#include "anisoac/reaction.hpp"

using namespace anisoac;

namespace {

double kink(double z) { return 1.0 / (1.0 + std::exp(-z / std::sqrt(2.0))); }

}  // namespace

TEST(Reaction, CubicValues) {
  const auto r = BistableReaction::make();
  EXPECT_DOUBLE_EQ(r.f(0.25), -0.046875);
  EXPECT_DOUBLE_EQ(r.a(), 0.5);
  EXPECT_DOUBLE_EQ(r.eta0(), 0.5);
  const double s = 1e-6;
  EXPECT_NEAR(r.mu(), (r.f(0.5 + s) - r.f(0.5 - s)) / (2 * s), 1e-9);
  EXPECT_NEAR(r.mu(), 0.25, 1e-15);
  EXPECT_EQ(r.f(0.0), 0.0);
  EXPECT_EQ(r.f(1.0), 0.0);
  EXPECT_LT(r.fprime(0.0), 0.0);
  EXPECT_LT(r.fprime(1.0), 0.0);
  EXPECT_NEAR(r.W(0.5), 1.0 / 64, 1e-15);
  for (double u = -0.5; u <= 1.5; u += 0.01) {
    EXPECT_NEAR(r.fprime(u), (r.f(u + s) - r.f(u - s)) / (2 * s), 1e-8);
    EXPECT_NEAR(r.fsecond(u), (r.fprime(u + s) - r.fprime(u - s)) / (2 * s), 1e-6);
    EXPECT_NEAR(-r.f(u), (r.W(u + s) - r.W(u - s)) / (2 * s), 1e-8);
  }
}

TEST(Reaction, UnbalancedRejected) {
  EXPECT_THROW(BistableReaction::make(0.3), BalanceViolation);
  EXPECT_THROW(BistableReaction::custom(Expr::parse("u*(1-u)*(u-0.3)"),
                                        Expr::parse("u^2*(1-u)^2/4 - 0.2*(u^2/2 - u^3/3)")),
               BalanceViolation);
  EXPECT_THROW(BistableReaction::custom(Expr::parse("0 - u*(1-u)*(u-0.5)"), Expr::parse("0 - u^2*(1-u)^2/4")),
               BistabilityError);
}

TEST(Reaction, CustomBalancedFamily) {
  // f = u(1-u)(u-1/2)(1 + u(1-u)) is balanced by symmetry about 1/2.
  const auto r = BistableReaction::custom(
      Expr::parse("u*(1-u)*(u-0.5)*(1+u*(1-u))"),
      Expr::parse("u^2*(1-u)^2/4 + u^3*(1-u)^3/6"));
  EXPECT_NEAR(r.a(), 0.5, 1e-10);
  EXPECT_NEAR(r.mu(), 0.25 * 1.25, 1e-6);
  EXPECT_FALSE(r.is_cubic());
  EXPECT_NEAR(r.U0(0.0), 0.5, 1e-10);
}

TEST(Kernel, Equilibria) {
  const auto r = BistableReaction::make();
  for (double tau : {0.0, 1.0, 10.0, 40.0}) {
    EXPECT_EQ(r.Y(tau, 0.0), 0.0);
    EXPECT_EQ(r.Y(tau, 0.5), 0.5);
    EXPECT_EQ(r.Y(tau, 1.0), 1.0);
  }
  EXPECT_THROW(r.Y(-1.0, 0.3), InvalidInput);
}

TEST(Kernel, MatchesQuadratureInversion) {
  const auto r = BistableReaction::make();
  const double y = r.Y(5.0, 0.6);
  EXPECT_GT(y, 0.6);
  EXPECT_LT(y, 1.0);
  EXPECT_NEAR(y, r.Y_quadrature(5.0, 0.6, 100000), 1e-7);
  // Closed form for the cubic: tau = ln((y - 1/2)^4 / (y (1 - y))^2) between endpoints.
  auto phase = [](double v) { return std::log(std::pow(v - 0.5, 4) / std::pow(v * (1 - v), 2)); };
  EXPECT_NEAR(phase(y) - phase(0.6), 5.0, 1e-7);
}

TEST(Kernel, SupersaturatedDecaysToOne) {
  const auto r = BistableReaction::make();
  double prev = 1.2;
  for (double tau = 0.5; tau <= 60; tau += 0.5) {
    const double y = r.Y(tau, 1.2);
    EXPECT_GE(y, 1.0);
    // The kernel integrator resolves Y - 1 down to about 1e-13.
    EXPECT_LE(y, prev + 1e-13);
    prev = y;
  }
  EXPECT_LT(prev - 1.0, 1e-6);
}

TEST(Kernel, VariationalInitialValues) {
  const auto r = BistableReaction::make();
  for (double xi : {-0.3, 0.0, 0.2, 0.5, 0.6, 1.0, 1.4}) {
    EXPECT_DOUBLE_EQ(r.Y_xi(0.0, xi), 1.0);
    EXPECT_DOUBLE_EQ(r.A(0.0, xi), 0.0);
  }
}

TEST(Kernel, VariationalIdentityAndIntegralForm) {
  const auto r = BistableReaction::make();
  const double yx = r.Y_xi(3.0, 0.6);
  EXPECT_GT(yx, 0.0);
  EXPECT_LE(std::abs(yx * r.f(0.6) - r.f(r.Y(3.0, 0.6))), 1e-7);
  // A = Y_xixi / Y_xi, checked by differences of Y_xi in xi.
  const double s = 1e-5;
  for (double xi : {0.1, 0.45, 0.6, 0.9, 1.2}) {
    const double tau = 2.0;
    const double ref = (r.Y_xi(tau, xi + s) - r.Y_xi(tau, xi - s)) / (2 * s) / r.Y_xi(tau, xi);
    EXPECT_NEAR(r.A(tau, xi), ref, 1e-5 * (1 + std::abs(ref)));
    EXPECT_NEAR(r.kernel(tau, xi).A, ref, 1e-5 * (1 + std::abs(ref)));
  }
  // At the unstable zero only the integral form applies; f''(1/2) = 0 for the cubic.
  EXPECT_NEAR(r.A(3.0, 0.5), 0.0, 1e-10);
}

TEST(Kernel, PathAgreesWithPointwise) {
  const auto r = BistableReaction::make();
  const std::vector<double> taus = {0.0, 0.3, 1.0, 4.0, 12.0};
  const auto path = r.kernel_path(0.37, taus);
  ASSERT_EQ(path.size(), taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    EXPECT_NEAR(path[k].Y, r.Y(taus[k], 0.37), 1e-9);
    EXPECT_NEAR(path[k].Y_xi, r.Y_xi(taus[k], 0.37), 1e-7 * (1 + path[k].Y_xi));
  }
  EXPECT_THROW(r.kernel_path(0.3, {1.0, 0.5}), InvalidInput);
}

TEST(Kernel, TableInterpolates) {
  const auto r = BistableReaction::make();
  const KernelTable table(r, -0.5, 1.5, 401, {0.0, 2.0, 8.0});
  for (double xi = -0.5; xi <= 1.5; xi += 0.0137)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(table.Y(k, xi), r.Y(table.taus()[k], xi), 1e-5);
  EXPECT_THROW(table.Y(0, 2.0), InvalidInput);
}

TEST(KernelProperty, VariationalIdentityRandom) {
  const auto r = BistableReaction::make();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> T(0, 10), X(-0.8, 1.8);
  int checked = 0;
  while (checked < 1000) {
    const double tau = T(rng), xi = X(rng);
    if (std::abs(r.f(xi)) < 1e-3) continue;
    const auto k = r.kernel(tau, xi);
    EXPECT_LE(std::abs(k.Y_xi * r.f(xi) - r.f(k.Y)), 1e-7) << "tau " << tau << " xi " << xi;
    ++checked;
  }
}

TEST(KernelProperty, LedgerEnvelopes) {
  const auto r = BistableReaction::make();
  const double eps = 0.01, eta = 0.1;
  LedgerInputs in;
  in.eps = eps;
  in.eta = eta;
  in.T = 0.04;
  in.strict = false;
  const auto L = build_ledger(r, Anisotropy::euclidean(), Box{}, in);
  const double a = r.a(), tau_max = std::log(1 / eps) / r.mu();
  for (double xi = a + 1e-3; xi < 1 - eta; xi += 0.01) {
    for (double tau = 0.0; tau <= tau_max; tau += tau_max / 200) {
      const auto k = r.kernel(tau, xi);
      if (!(k.Y > a && k.Y < 1 - eta)) break;
      const double g = std::exp(r.mu() * tau);
      EXPECT_GE(k.Y_xi, L.C1_tilde * g * (1 - 1e-9));
      EXPECT_LE(k.Y_xi, L.C2_tilde * g * (1 + 1e-9));
      EXPECT_GE(k.Y - a, L.C1 * g * (xi - a) * (1 - 1e-9));
      EXPECT_LE(k.Y - a, L.C2 * g * (xi - a) * (1 + 1e-9));
    }
  }
  for (double xi = -2 * L.C0 + 1e-3; xi < 2 * L.C0; xi += 0.02)
    for (double tau = 0.0; tau <= tau_max; tau += tau_max / 100)
      EXPECT_LE(std::abs(r.A(tau, xi)), L.C5 * (std::exp(r.mu() * tau) - 1) + 1e-12);
}

TEST(Profile, MatchesClosedForm) {
  const auto r = BistableReaction::make();
  EXPECT_NEAR(r.U0(0.0), 0.5, 1e-14);
  EXPECT_NEAR(r.U0(std::sqrt(2.0) * std::log(3.0)), 0.75, 1e-8);
  for (double z = -20; z <= 20; z += 0.05) {
    EXPECT_NEAR(r.U0(z), kink(z), 1e-8);
    EXPECT_NEAR(r.U0_prime(z), kink(z) * (1 - kink(z)) / std::sqrt(2.0), 1e-8);
  }
  EXPECT_NEAR(r.profile().inverse(0.75), std::sqrt(2.0) * std::log(3.0), 1e-7);
}

TEST(Profile, StationaryAndMonotone) {
  const auto r = BistableReaction::make();
  const auto& p = r.profile();
  const double s = 1e-4;
  double worst = 0.0;
  for (double z = -19; z <= 19; z += 0.01) {
    const double second = (p.deriv(z + s) - p.deriv(z - s)) / (2 * s);
    worst = std::max(worst, std::abs(second + r.f(p.eval(z))));
  }
  EXPECT_LE(worst, 1e-6);
  for (double d : p.derivs()) EXPECT_GT(d, 0.0);
  for (std::size_t k = 1; k < p.values().size(); ++k) EXPECT_GT(p.values()[k], p.values()[k - 1]);
  EXPECT_LT(r.U0(-40), 1e-10);
  EXPECT_GT(r.U0(40), 1 - 1e-10);
}

TEST(Profile, DecayConstants) {
  const auto r = BistableReaction::make();
  const auto& p = r.profile();
  EXPECT_GE(p.lambda_decay(), 0.65);
  EXPECT_LE(p.lambda_decay(), 0.75);
  for (double z = -30; z <= 30; z += 0.1) {
    const double bound = p.Cdecay() * std::exp(-p.lambda_decay() * std::abs(z));
    EXPECT_LE(p.deriv(z), bound * (1 + 1e-9));
    EXPECT_LE(std::min(p.eval(z), 1 - p.eval(z)), bound * (1 + 1e-9));
  }
}
