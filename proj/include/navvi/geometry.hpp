#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace navvi {

/// Point or vector in the warehouse plan view. `x` grows to the east, `z` to
/// the north; the pair is right-handed, so counter-clockwise is positive.
struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.z + b.z}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.z - b.z}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.z * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.z * s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.z * b.z; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.z - a.z * b.x; }
inline double length(Vec2 a) { return std::hypot(a.x, a.z); }
inline double distance(Vec2 a, Vec2 b) { return std::hypot(b.x - a.x, b.z - a.z); }
constexpr double distance_sq(Vec2 a, Vec2 b) {
  return (b.x - a.x) * (b.x - a.x) + (b.z - a.z) * (b.z - a.z);
}
/// Twice the signed area of (a, b, c); positive when counter-clockwise.
constexpr double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

/// Robot or agent pose. Heading is a compass angle: 0 faces +z and positive
/// values turn clockwise (toward +x), the way a joystick "right" turns.
struct Pose {
  Vec2 position;
  double heading = 0.0;
};

inline Vec2 forward_axis(double heading) { return {std::sin(heading), std::cos(heading)}; }
inline Vec2 right_axis(double heading) { return {std::cos(heading), -std::sin(heading)}; }

/// World point into the robot frame: x = lateral (right positive),
/// z = forward.
Vec2 to_local_point(const Pose& pose, Vec2 world);
/// World direction into the robot frame (rotation only).
Vec2 to_local_direction(const Pose& pose, Vec2 direction);

struct Aabb {
  Vec2 min;
  Vec2 max;
  double width() const { return max.x - min.x; }
  double depth() const { return max.z - min.z; }
  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.z >= min.z && p.z <= max.z;
  }
};

Aabb bounds_of(std::span<const Vec2> points);

/// Signed area of a polygon; positive for counter-clockwise winding.
double polygon_area(std::span<const Vec2> poly);
bool is_convex_ccw(std::span<const Vec2> poly);

/// Cell-center coverage test with a top-left fill rule: points on left and
/// bottom edges count as inside, points on right and top edges do not. Two
/// footprints that share an edge therefore never both claim a sample.
bool covers_sample(std::span<const Vec2> convex_ccw, Vec2 p);

/// Closed containment (boundary counts as inside).
bool contains_closed(std::span<const Vec2> convex_ccw, Vec2 p);

Vec2 closest_point_on_segment(Vec2 a, Vec2 b, Vec2 p);
double point_segment_distance(Vec2 a, Vec2 b, Vec2 p);
/// Euclidean distance from p to a convex polygon (0 inside).
double point_polygon_distance(std::span<const Vec2> convex_ccw, Vec2 p);
Vec2 polygon_centroid(std::span<const Vec2> poly);

double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Distance from p to the closed triangle (a, b, c), any winding.
double point_triangle_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 p);

/// True when the segment passes through the triangle's interior by more than
/// `eps` (grazing contact along edges or at corners does not count).
bool segment_crosses_triangle_interior(Vec2 a, Vec2 b, Vec2 t0, Vec2 t1, Vec2 t2,
                                       double eps = 1e-9);

double polyline_length(std::span<const Vec2> pts);

}  // namespace navvi
