#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "navvi/geometry.hpp"
#include "navvi/world_model.hpp"

namespace navvi {

struct BuildOptions {
  double cell_size = 0.20;
  double agent_radius = 0.35;
  std::size_t max_cells = 16'000'000;
  /// Target upper bound on triangle edge length; 0 keeps only contour
  /// vertices. Finer triangles make carves block less area.
  double max_edge_length = 1.6;
};

/// Placement of a cell lattice on the floor. Cell (x, z) spans
/// [origin + (x, z) * cell_size, origin + (x + 1, z + 1) * cell_size).
struct GridFrame {
  double cell_size = 0.20;
  Vec2 origin;
  int width = 0;
  int depth = 0;

  std::size_t cell_count() const { return static_cast<std::size_t>(width) * depth; }
  std::size_t index(int x, int z) const { return static_cast<std::size_t>(z) * width + x; }
  bool in_bounds(int x, int z) const { return x >= 0 && z >= 0 && x < width && z < depth; }
  Vec2 cell_center(int x, int z) const {
    return {origin.x + (x + 0.5) * cell_size, origin.z + (z + 0.5) * cell_size};
  }
  Vec2 corner(int x, int z) const { return {origin.x + x * cell_size, origin.z + z * cell_size}; }
};

struct OccupancyGrid {
  GridFrame frame;
  std::vector<std::uint8_t> walkable;  // 1 = walkable

  bool is_walkable(int x, int z) const {
    return frame.in_bounds(x, z) && walkable[frame.index(x, z)] != 0;
  }
  std::size_t walkable_count() const;
};

/// Squared Euclidean distance, in cells², from each cell to the nearest
/// non-walkable cell; cells outside the grid do not count as obstacles.
struct DistanceField {
  static constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max() / 4;

  GridFrame frame;
  std::vector<std::int64_t> sq_distance;

  std::int64_t at(int x, int z) const { return sq_distance[frame.index(x, z)]; }
};

struct RegionMap {
  GridFrame frame;
  std::vector<int> region;  // 0 = non-walkable
  int region_count = 0;

  int at(int x, int z) const { return frame.in_bounds(x, z) ? region[frame.index(x, z)] : 0; }
};

struct Disc {
  Vec2 center;
  double radius = 0.0;
};

/// Marks a cell non-walkable iff its center lies inside a static footprint
/// (or one of `extra_obstacles`). The floor is planar, so the 45° slope
/// filter of a height-field builder accepts every remaining cell.
OccupancyGrid rasterize(const SceneDescription& scene, const BuildOptions& options = {},
                        std::span<const Disc> extra_obstacles = {});

/// r = ceil(agent_radius / cell_size).
int erosion_cells(double agent_radius, double cell_size);

/// Square (Chebyshev) erosion by erosion_cells(agent_radius); cells beyond
/// the grid edge count as blocked.
OccupancyGrid erode(const OccupancyGrid& grid, double agent_radius);

DistanceField distance_transform(const OccupancyGrid& grid);

/// Priority flood from the field's local-maximum plateaus in decreasing
/// distance order. Contested cells go to the lowest region id.
RegionMap watershed_partition(const DistanceField& field);

struct BuildInfo {
  double cell_size = 0.0;
  double agent_radius = 0.0;
  int erosion_cells = 0;
  int region_count = 0;
  int lattice_step = 0;
  int grid_width = 0;
  int grid_depth = 0;
  std::size_t walkable_cells = 0;
  bool slope_filter_vacuous = true;
};

struct Portal {
  int neighbor = -1;
  int left = -1;   // vertex index, left when crossing from this triangle
  int right = -1;
};

struct NavMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  /// neighbors[t][i]: triangle across edge (v[i], v[i+1]), or -1.
  std::vector<std::array<int, 3>> neighbors;
  std::vector<int> triangle_region;
  BuildInfo info;

  std::size_t size() const { return triangles.size(); }
  Vec2 vertex(int t, int i) const { return vertices[triangles[t][i]]; }
  Vec2 centroid(int t) const { return centroids_[t]; }
  double area(int t) const { return areas_[t]; }
  double total_area() const { return total_area_; }

  /// Portal edge from triangle `from` into triangle `to`; neighbor = -1 when
  /// the two are not adjacent.
  Portal portal(int from, int to) const;
  std::vector<Portal> portals(int t) const;

  /// Closed containment with an absolute tolerance in meters.
  bool contains(int t, Vec2 p, double eps = 1e-9) const;
  double distance_to(int t, Vec2 p) const;
  Vec2 closest_point(int t, Vec2 p) const;

  /// Triangles whose bounding boxes overlap the box, ascending ids.
  std::vector<int> query(const Aabb& box) const;

  /// Recomputes centroids, areas and the bucket index. Call after editing
  /// the raw arrays.
  void finalize();

 private:
  std::vector<Vec2> centroids_;
  std::vector<double> areas_;
  double total_area_ = 0.0;
  Aabb bounds_{};
  double bucket_size_ = 1.0;
  int buckets_x_ = 0;
  int buckets_z_ = 0;
  std::vector<std::vector<int>> buckets_;
};

/// Traces region boundaries into lattice contours (dropping collinear
/// vertices whose neighboring regions do not change) and triangulates them
/// with the boundaries as Delaunay constraints.
/// `lattice_step` > 0 adds a vertex every that many cells along straight
/// boundaries and inside regions.
NavMesh triangulate(const RegionMap& regions, int lattice_step = 0);

/// Full bake: rasterize, erode, distance transform, watershed, triangulate.
NavMesh build_navmesh(const SceneDescription& scene, const BuildOptions& options = {},
                      std::span<const Disc> extra_obstacles = {});

std::string dump_navmesh(const NavMesh& mesh);

struct CarveVolume {
  Vec2 center;
  double radius = 0.0;
  std::string owner;
};

/// Baked mesh plus the dynamic carve overlay. Carves block whole triangles;
/// exact hole geometry comes back at the next rebuild.
class NavMeshRuntime {
 public:
  static constexpr double kRebuildPeriod = 2.0;
  static constexpr double kRebuildThreshold = 0.01;

  NavMeshRuntime(SceneDescription scene, BuildOptions options = {});

  const NavMesh& mesh() const { return mesh_; }
  const SceneDescription& scene() const { return scene_; }
  const BuildOptions& options() const { return options_; }
  std::span<const std::uint8_t> blocked() const { return blocked_; }
  bool is_blocked(int t) const { return blocked_[t] != 0; }
  double changed_area() const { return changed_area_; }
  double last_rebuild_check() const { return last_rebuild_check_; }
  std::uint64_t generation() const { return generation_; }
  const std::map<std::string, CarveVolume>& carves() const { return carves_; }

  /// Adds the carve, or moves it if the owner already has one.
  void apply_carve(const CarveVolume& carve);
  void remove_carve(const std::string& owner);

  /// Runs the periodic check. Rebuilding needs both a due check (every
  /// kRebuildPeriod seconds) and accumulated change above kRebuildThreshold.
  bool rebuild_if_due(double now);
  void rebuild();

 private:
  void refresh_blocked();
  bool carve_is_baked(const CarveVolume& carve) const;
  void release_baked(const std::string& owner);

  SceneDescription scene_;
  BuildOptions options_;
  NavMesh mesh_;
  std::vector<std::uint8_t> blocked_;
  std::map<std::string, CarveVolume> carves_;
  std::map<std::string, CarveVolume> baked_;
  double changed_area_ = 0.0;
  double last_rebuild_check_ = 0.0;
  std::uint64_t generation_ = 0;
};

}  // namespace navvi
