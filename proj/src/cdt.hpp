#pragma once

// Constrained Delaunay triangulation over integer lattice points.
//
// All predicates are exact (64-bit orientation, 128-bit in-circle), which is
// what makes the grid-aligned inputs from the navmesh builder tractable: they
// are full of collinear and co-circular configurations.

#include <array>
#include <cstdint>
#include <vector>

namespace navvi::detail {

struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t z = 0;
  friend bool operator==(LatticePoint, LatticePoint) = default;
};

class ConstrainedDelaunay {
 public:
  struct Triangle {
    std::array<int, 3> v{};          // counter-clockwise
    std::array<int, 3> n{-1, -1, -1};  // neighbor across the edge opposite v[i]
    std::array<bool, 3> fixed{};     // edge opposite v[i] is a constraint
  };

  /// Starts from the two triangles of the axis-aligned box [lo, hi].
  ConstrainedDelaunay(LatticePoint lo, LatticePoint hi);

  /// Inserts a point inside the box; returns its vertex id (existing id if the
  /// point is already present).
  int insert_point(LatticePoint p);

  /// Forces the segment between two existing vertices to appear as edges.
  /// Vertices lying on the open segment split it into sub-constraints.
  void insert_constraint(int a, int b);

  /// Flips every unconstrained, non-locally-Delaunay edge until none remain.
  void restore_delaunay();

  const std::vector<LatticePoint>& points() const { return pts_; }
  const std::vector<Triangle>& triangles() const { return tris_; }

  bool has_edge(int a, int b) const;
  bool is_fixed_edge(int a, int b) const;
  /// True when no unconstrained edge violates the empty-circle test.
  bool is_constrained_delaunay() const;

 private:
  struct Located {
    int tri = -1;
    int on_edge = -1;  // index of the vertex opposite the edge containing p
    int at_vertex = -1;
  };

  Located locate(LatticePoint p) const;
  void split_triangle(int t, int p);
  void split_edge(int t, int k, int p);
  void legalize(std::vector<std::pair<int, int>>& stack);
  void flip(int t, int i);
  void relink(int tri, int old_neighbor, int new_neighbor);
  bool find_edge(int a, int b, int& tri, int& idx) const;
  std::vector<int> triangles_around(int v) const;
  bool locally_delaunay(int t, int i) const;

  std::vector<LatticePoint> pts_;
  std::vector<Triangle> tris_;
  std::vector<int> vertex_tri_;
  int last_tri_ = 0;
};

}  // namespace navvi::detail
