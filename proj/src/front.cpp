#include "anisoac/front.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include <fmt/format.h>

#include "anisoac/errors.hpp"

namespace anisoac {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  double d1 = cross(q2 - q1, p1 - q1), d2 = cross(q2 - q1, p2 - q1);
  double d3 = cross(p2 - p1, q1 - p1), d4 = cross(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on_seg = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return std::min(a[0], b[0]) <= c[0] && c[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= c[1] &&
           c[1] <= std::max(a[1], b[1]);
  };
  if (d1 == 0 && on_seg(q1, q2, p1)) return true;
  if (d2 == 0 && on_seg(q1, q2, p2)) return true;
  if (d3 == 0 && on_seg(p1, p2, q1)) return true;
  if (d4 == 0 && on_seg(p1, p2, q2)) return true;
  return false;
}

}  // namespace

Front circle_front(const Vec2& center, double radius, int vertex_count) {
  return ellipse_front(center, radius, radius, vertex_count);
}

Front ellipse_front(const Vec2& center, double semi_x, double semi_y, int vertex_count) {
  if (vertex_count < 3 || !(semi_x > 0) || !(semi_y > 0)) throw InvalidFront("ellipse needs positive semi-axes and >= 3 vertices");
  Front f;
  f.vertices.reserve(vertex_count);
  for (int k = 0; k < vertex_count; ++k) {
    double t = 2.0 * std::numbers::pi * k / vertex_count;
    f.vertices.emplace_back(center[0] + semi_x * std::cos(t), center[1] + semi_y * std::sin(t));
  }
  return f;
}

Front polygon_front(std::vector<Vec2> vertices) {
  Front f;
  f.vertices = std::move(vertices);
  if (f.vertices.size() >= 3 && signed_area(f) < 0) std::reverse(f.vertices.begin(), f.vertices.end());
  return f;
}

double signed_area(const Front& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += cross(f.vertex(k), f.vertex(k + 1));
  return 0.5 * s;
}

double perimeter(const Front& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += (f.vertex(k + 1) - f.vertex(k)).norm();
  return s;
}

Vec2 centroid(const Front& f) {
  Vec2 c = Vec2::Zero();
  double a = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double w = cross(f.vertex(k), f.vertex(k + 1));
    c += w * (f.vertex(k) + f.vertex(k + 1));
    a += w;
  }
  return c / (3.0 * a);
}

bool is_simple(const Front& f) {
  const std::size_t n = f.size();
  if (n < 3) return false;
  double cell = 0.0;
  for (std::size_t k = 0; k < n; ++k) cell = std::max(cell, (f.vertex(k + 1) - f.vertex(k)).norm());
  if (!(cell > 0.0)) return false;
  auto key = [](long i, long j) { return (i << 32) ^ (j & 0xffffffffL); };
  std::unordered_map<long, std::vector<std::size_t>> buckets;
  auto cells_of = [&](std::size_t k, auto&& visit) {
    const Vec2 &a = f.vertex(k), &b = f.vertex(k + 1);
    long i0 = static_cast<long>(std::floor(std::min(a[0], b[0]) / cell));
    long i1 = static_cast<long>(std::floor(std::max(a[0], b[0]) / cell));
    long j0 = static_cast<long>(std::floor(std::min(a[1], b[1]) / cell));
    long j1 = static_cast<long>(std::floor(std::max(a[1], b[1]) / cell));
    for (long i = i0; i <= i1; ++i)
      for (long j = j0; j <= j1; ++j) visit(key(i, j));
  };
  for (std::size_t k = 0; k < n; ++k) cells_of(k, [&](long c) { buckets[c].push_back(k); });
  for (std::size_t k = 0; k < n; ++k) {
    if ((f.vertex(k + 1) - f.vertex(k)).squaredNorm() == 0.0) return false;
    bool bad = false;
    cells_of(k, [&](long c) {
      for (std::size_t m : buckets[c]) {
        if (m <= k) continue;
        if (m == k + 1 || (k == 0 && m == n - 1)) continue;
        if (segments_intersect(f.vertex(k), f.vertex(k + 1), f.vertex(m), f.vertex(m + 1))) bad = true;
      }
    });
    if (bad) return false;
  }
  return true;
}

void validate_front(const Front& f) {
  if (f.size() < 3) throw InvalidFront(fmt::format("front has {} vertices; a closed polygon needs 3", f.size()));
  for (const auto& v : f.vertices)
    if (!v.allFinite()) throw InvalidFront("front has non-finite vertices");
  if (!is_simple(f)) throw InvalidFront("front polygon is not simple (repeated vertex or self-intersection)");
}

bool inside(const Front& f, const Vec2& x) {
  bool in = false;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const Vec2 &a = f.vertex(k), &b = f.vertex(k + 1);
    if ((a[1] > x[1]) != (b[1] > x[1])) {
      double xc = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (x[0] < xc) in = !in;
    }
  }
  return in;
}

Front resample(const Front& f, double spacing) {
  double L = perimeter(f);
  int n = std::max(3, static_cast<int>(std::lround(L / spacing)));
  double ds = L / n;
  Front out;
  out.vertices.reserve(n);
  std::size_t k = 0;
  double acc = 0.0;  // arc length at vertex k
  double seg = (f.vertex(1) - f.vertex(0)).norm();
  for (int m = 0; m < n; ++m) {
    double s = m * ds;
    while (acc + seg < s && k + 1 < f.size()) {
      acc += seg;
      ++k;
      seg = (f.vertex(k + 1) - f.vertex(k)).norm();
    }
    double t = seg > 0 ? std::clamp((s - acc) / seg, 0.0, 1.0) : 0.0;
    out.vertices.push_back(f.vertex(k) + t * (f.vertex(k + 1) - f.vertex(k)));
  }
  return out;
}

double clearance(const Front& f, const Box& box) {
  double c = 1e300;
  for (const auto& v : f.vertices)
    c = std::min({c, v[0] - box.lo[0], box.hi[0] - v[0], v[1] - box.lo[1], box.hi[1] - v[1]});
  return c;
}

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  Vec2 d = b - a;
  double L2 = d.squaredNorm();
  double t = L2 > 0 ? std::clamp((x - a).dot(d) / L2, 0.0, 1.0) : 0.0;
  return (x - a - t * d).norm();
}

}  // namespace anisoac
