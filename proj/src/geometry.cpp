#include "navvi/geometry.hpp"

#include <algorithm>
#include <limits>

namespace navvi {

Vec2 to_local_point(const Pose& pose, Vec2 world) {
  return to_local_direction(pose, world - pose.position);
}

Vec2 to_local_direction(const Pose& pose, Vec2 direction) {
  return {dot(direction, right_axis(pose.heading)), dot(direction, forward_axis(pose.heading))};
}

Aabb bounds_of(std::span<const Vec2> points) {
  Aabb box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
           {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (const Vec2& p : points) {
    box.min.x = std::min(box.min.x, p.x);
    box.min.z = std::min(box.min.z, p.z);
    box.max.x = std::max(box.max.x, p.x);
    box.max.z = std::max(box.max.z, p.z);
  }
  return box;
}

double polygon_area(std::span<const Vec2> poly) {
  double twice = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    twice += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * twice;
}

bool is_convex_ccw(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3 || polygon_area(poly) <= 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (orient(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) < 0.0) return false;
  }
  return true;
}

bool covers_sample(std::span<const Vec2> convex_ccw, Vec2 p) {
  const std::size_t n = convex_ccw.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = convex_ccw[i];
    const Vec2 b = convex_ccw[(i + 1) % n];
    const Vec2 e = b - a;
    const double side = cross(e, p - a);
    if (side < 0.0) return false;
    if (side == 0.0) {
      const bool left_edge = e.z < 0.0;
      const bool bottom_edge = e.z == 0.0 && e.x > 0.0;
      if (!left_edge && !bottom_edge) return false;
    }
  }
  return n >= 3;
}

bool contains_closed(std::span<const Vec2> convex_ccw, Vec2 p) {
  const std::size_t n = convex_ccw.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (orient(convex_ccw[i], convex_ccw[(i + 1) % n], p) < 0.0) return false;
  }
  return n >= 3;
}

Vec2 closest_point_on_segment(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 ab = b - a;
  const double len_sq = dot(ab, ab);
  if (len_sq <= 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
  return a + ab * t;
}

double point_segment_distance(Vec2 a, Vec2 b, Vec2 p) {
  return distance(closest_point_on_segment(a, b, p), p);
}

double point_polygon_distance(std::span<const Vec2> convex_ccw, Vec2 p) {
  if (contains_closed(convex_ccw, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = convex_ccw.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_distance(convex_ccw[i], convex_ccw[(i + 1) % n], p));
  }
  return best;
}

Vec2 polygon_centroid(std::span<const Vec2> poly) {
  const double area = polygon_area(poly);
  if (std::abs(area) <= 0.0) {
    Vec2 mean;
    for (const Vec2& v : poly) mean = mean + v;
    return poly.empty() ? mean : mean * (1.0 / static_cast<double>(poly.size()));
  }
  Vec2 c;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const double w = cross(a, b);
    c = c + (a + b) * w;
  }
  return c * (1.0 / (6.0 * area));
}

double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
    return 0.0;
  }
  return std::min({point_segment_distance(a, b, c), point_segment_distance(a, b, d),
                   point_segment_distance(c, d, a), point_segment_distance(c, d, b)});
}

double point_triangle_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
  const double o = orient(a, b, c);
  const double s0 = orient(a, b, p);
  const double s1 = orient(b, c, p);
  const double s2 = orient(c, a, p);
  if (o > 0 ? (s0 >= 0 && s1 >= 0 && s2 >= 0) : (s0 <= 0 && s1 <= 0 && s2 <= 0)) return 0.0;
  return std::min({point_segment_distance(a, b, p), point_segment_distance(b, c, p),
                   point_segment_distance(c, a, p)});
}

bool segment_crosses_triangle_interior(Vec2 a, Vec2 b, Vec2 t0, Vec2 t1, Vec2 t2, double eps) {
  if (orient(t0, t1, t2) < 0.0) std::swap(t1, t2);
  const Vec2 tri[3] = {t0, t1, t2};
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2 p = tri[i];
    const Vec2 q = tri[(i + 1) % 3];
    const double len = distance(p, q);
    if (len <= 0.0) return false;
    // Signed distance of the segment endpoints from edge i, inside positive.
    const double f0 = cross(q - p, a - p) / len - eps;
    const double f1 = cross(q - p, b - p) / len - eps;
    if (f0 <= 0.0 && f1 <= 0.0) return false;
    if (f0 > 0.0 && f1 > 0.0) continue;
    const double t = f0 / (f0 - f1);
    if (f0 > 0.0) {
      hi = std::min(hi, t);
    } else {
      lo = std::max(lo, t);
    }
  }
  return lo < hi;
}

double polyline_length(std::span<const Vec2> pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += distance(pts[i - 1], pts[i]);
  return total;
}

}  // namespace navvi
