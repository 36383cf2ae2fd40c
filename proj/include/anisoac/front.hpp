#pragma once

#include <vector>

#include "anisoac/anisotropy.hpp"

namespace anisoac {

// Closed polygon, counter-clockwise around the enclosed (negative) region.
// Per-vertex samples are filled by front_curvature and may be empty.
struct Front {
  std::vector<Vec2> vertices;
  std::vector<Vec2> normal;          // outward Euclidean unit normal
  std::vector<Vec2> phi_normal;      // phi0_p(x, normal)
  std::vector<double> curvature;     // kappa_phi
  std::vector<double> velocity;      // relative-geometry normal velocity -kappa_phi
  std::vector<double> euclid_velocity;  // same law through the Euclidean form

  std::size_t size() const { return vertices.size(); }
  const Vec2& vertex(std::size_t k) const { return vertices[k % vertices.size()]; }
};

Front circle_front(const Vec2& center, double radius, int vertex_count);
Front ellipse_front(const Vec2& center, double semi_x, double semi_y, int vertex_count);
Front polygon_front(std::vector<Vec2> vertices);  // reorients to counter-clockwise

double signed_area(const Front& f);
double perimeter(const Front& f);
Vec2 centroid(const Front& f);
// Throws InvalidFront on fewer than 3 vertices, repeated vertices or self-intersections.
void validate_front(const Front& f);
bool is_simple(const Front& f);
// Even-odd point-in-polygon test.
bool inside(const Front& f, const Vec2& x);
// Resample to uniform arc-length spacing close to `spacing`.
Front resample(const Front& f, double spacing);
// Euclidean distance from the polygon to the boundary of box.
double clearance(const Front& f, const Box& box);
// Euclidean distance from a point to a segment.
double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b);

}  // namespace anisoac
