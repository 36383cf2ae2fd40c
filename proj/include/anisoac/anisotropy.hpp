#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anisoac/expr.hpp"

namespace anisoac {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class Preset { euclidean, ellipsoidal, fourfold, user };

std::string to_string(Preset p);

// Energy density a(x,p) and weight m(x). Degree-two homogeneous and strictly
// convex in p. Copies share the immutable implementation.
class Anisotropy {
 public:
  using Density = std::function<double(const Vec2& x, const Vec2& p)>;

  static Anisotropy euclidean();
  static Anisotropy ellipsoidal(const Mat2& A);
  static Anisotropy fourfold(double delta);
  // Derivatives of user densities are taken by central differences.
  static Anisotropy user(Density density, bool depends_on_x);

  Anisotropy with_weight(const Expr& m) const;

  Preset preset() const;
  const Mat2& matrix() const;  // A for ellipsoidal, identity for euclidean
  double delta() const;        // fourfold strength
  bool x_independent() const;
  bool quadratic() const;  // a = p^T A p / 2 with constant A
  const Expr& weight_expr() const;
  bool weight_constant() const;

  double a(const Vec2& x, const Vec2& p) const;
  Vec2 ap(const Vec2& x, const Vec2& p) const;
  Mat2 app(const Vec2& x, const Vec2& p) const;
  double phi0(const Vec2& x, const Vec2& p) const;
  Vec2 phi0_grad(const Vec2& x, const Vec2& p) const;
  Vec2 T0(const Vec2& x, const Vec2& p) const { return ap(x, p); }
  double weight(const Vec2& x) const;
  Vec2 grad_log_weight(const Vec2& x) const;

  std::string describe() const;

  struct Impl;

 private:
  explicit Anisotropy(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// phi(x, xi) = sup { xi . p : phi0(x,p) <= 1 }, by angle sampling plus
// golden-section refinement.
double dual_metric(const Anisotropy& field, const Vec2& x, const Vec2& xi);

// Fast evaluator of phi for repeated use: closed forms for quadratic fields,
// a periodic cubic table over angle for other x-independent fields, and the
// direct maximization otherwise.
class DualMetric {
 public:
  explicit DualMetric(const Anisotropy& field);
  double operator()(const Vec2& x, const Vec2& xi) const;
  const Anisotropy& field() const { return field_; }
  // phi(x, xi) = sqrt(xi^T inverse_matrix() xi) when true.
  bool quadratic() const { return mode_ == Mode::euclidean || mode_ == Mode::quadratic; }
  const Mat2& inverse_matrix() const { return inv_; }
  // Sampled extremes of phi over unit vectors, so phi_min |xi| <= phi(x, xi) <= phi_max |xi|.
  double phi_min() const { return phi_min_; }
  double phi_max() const { return phi_max_; }

 private:
  enum class Mode { euclidean, quadratic, table, direct };
  Anisotropy field_;
  Mode mode_;
  Mat2 inv_;
  double phi_min_ = 1.0, phi_max_ = 1.0;
  std::vector<double> table_;  // phi(cos t, sin t) on a uniform angle grid
};

struct Box {
  Vec2 lo = Vec2(0.0, 0.0);
  Vec2 hi = Vec2(1.0, 1.0);
};

struct MetricConstants {
  double lambda0 = 0.0, Lambda0 = 0.0;
  double lambda2 = 0.0, Lambda2 = 0.0;
  double beta_mono = 0.0;
  double CL = 0.0;
  double m_min = 0.0, m_max = 0.0;
  bool sampled = true;  // estimates, not certified bounds
};

MetricConstants estimate_constants(const Anisotropy& field, int sample_count, const Box& region = {},
                                   unsigned seed = 12345);

}  // namespace anisoac
