#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "navvi/geometry.hpp"
#include "navvi/navmesh.hpp"
#include "navvi/world_model.hpp"

namespace navvi {

struct PlannerConfig {
  double heuristic_scale = 1.0;
  double replan_period = 2.0;
  double stuck_speed = 0.1;
  double stuck_duration = 1.0;
  double waypoint_radius = 1.0;
  double obstacle_check_radius = 5.0;
  /// Minimum spacing between attempts after a failed replan.
  double failed_retry_interval = 0.25;
};

/// Triangle-centroid graph mirroring the mesh portals.
struct NavGraph {
  struct Edge {
    int to = -1;
    double cost = 0.0;
  };
  std::vector<Vec2> position;
  std::vector<std::vector<Edge>> edges;
  std::vector<std::uint8_t> blocked;

  std::size_t size() const { return position.size(); }
  bool is_blocked(int v) const { return !blocked.empty() && blocked[v] != 0; }
};

NavGraph make_graph(const NavMesh& mesh, std::span<const std::uint8_t> blocked = {});

struct PathCorridor {
  std::vector<int> triangles;
  double cost = 0.0;
};

/// portals[i] joins triangles[i] and triangles[i + 1]. Throws ContractError
/// when two consecutive triangles are not adjacent.
std::vector<Portal> corridor_portals(const NavMesh& mesh, const PathCorridor& corridor);

struct PlanStats {
  std::size_t nodes_expanded = 0;
  double query_time = 0.0;  // s
};

struct Path {
  std::vector<Vec2> waypoints;
  std::size_t current_index = 0;
  double total_cost = 0.0;  // polyline length, m
  std::vector<int> corridor;

  bool empty() const { return waypoints.empty(); }
};

struct Location {
  int triangle = -1;
  bool off_mesh = false;
  Vec2 point;  // p itself, or its projection onto the chosen triangle
};

/// Containing unblocked triangle (lowest id on shared edges), else the
/// nearest unblocked one with off_mesh set.
Location locate_triangle(const NavMesh& mesh, Vec2 p, std::span<const std::uint8_t> blocked = {});

/// The heuristic measures to the goal triangle's centroid, which keeps it
/// admissible for centroid edge costs.
PathCorridor astar(const NavGraph& graph, int start, int goal, const PlannerConfig& config = {},
                   PlanStats* stats = nullptr);

Path funnel(const NavMesh& mesh, const PathCorridor& corridor, Vec2 start, Vec2 goal);

void advance_waypoint(Path& path, Vec2 robot_pos, const PlannerConfig& config);

std::pair<Path, PlanStats> plan(const NavMeshRuntime& rt, Vec2 start, const GoalSpec& goal,
                                const PlannerConfig& config);

/// True when the segment from `from` to the last passed waypoint, or any
/// later path segment, passes through a blocked triangle's interior.
bool path_blocked(const NavMeshRuntime& rt, const Path& path, Vec2 from);

enum class ReplanReason { none, periodic, path_invalidated, stuck, proximity };
std::string_view to_string(ReplanReason r);

struct DynamicObstacle {
  std::string id;
  Vec2 center;
  double radius = 0.0;
};

/// Tracks the timers behind the replan triggers. One instance per session.
class ReplanMonitor {
 public:
  explicit ReplanMonitor(PlannerConfig config = {}) : config_(config) {}

  /// Evaluates the triggers in priority order: path_invalidated, stuck,
  /// proximity, periodic. Call once per tick.
  ReplanReason check(const Pose& robot, double speed, double robot_radius,
                     const NavMeshRuntime& rt, const Path* path,
                     std::span<const DynamicObstacle> obstacles, double now);

  void planned(double now, std::uint64_t generation);
  double last_plan() const { return last_plan_; }
  const PlannerConfig& config() const { return config_; }

 private:
  PlannerConfig config_;
  double last_plan_ = 0.0;
  std::uint64_t generation_ = 0;
  std::optional<double> slow_since_;
  std::set<std::string> near_;
};

}  // namespace navvi
