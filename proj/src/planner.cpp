#include "navvi/planner.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <queue>
#include <tuple>

#include "navvi/error.hpp"

namespace navvi {

namespace {

bool blocked_at(std::span<const std::uint8_t> blocked, int t) {
  return !blocked.empty() && blocked[t] != 0;
}

}  // namespace

NavGraph make_graph(const NavMesh& mesh, std::span<const std::uint8_t> blocked) {
  NavGraph g;
  const int n = static_cast<int>(mesh.size());
  g.position.resize(n);
  g.edges.resize(n);
  g.blocked.assign(blocked.begin(), blocked.end());
  for (int t = 0; t < n; ++t) g.position[t] = mesh.centroid(t);
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < 3; ++i) {
      const int nb = mesh.neighbors[t][i];
      if (nb >= 0) g.edges[t].push_back({nb, distance(g.position[t], g.position[nb])});
    }
    std::sort(g.edges[t].begin(), g.edges[t].end(),
              [](const NavGraph::Edge& a, const NavGraph::Edge& b) { return a.to < b.to; });
  }
  return g;
}

std::vector<Portal> corridor_portals(const NavMesh& mesh, const PathCorridor& corridor) {
  std::vector<Portal> out;
  for (std::size_t i = 0; i + 1 < corridor.triangles.size(); ++i) {
    const Portal p = mesh.portal(corridor.triangles[i], corridor.triangles[i + 1]);
    if (p.neighbor < 0) throw ContractError("corridor triangles are not adjacent");
    out.push_back(p);
  }
  return out;
}

Location locate_triangle(const NavMesh& mesh, Vec2 p, std::span<const std::uint8_t> blocked) {
  if (mesh.size() == 0) throw ContractError("empty navmesh");
  for (int t : mesh.query({p, p})) {
    if (!blocked_at(blocked, t) && mesh.contains(t, p)) return {t, false, p};
  }
  Location best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int t = 0; t < static_cast<int>(mesh.size()); ++t) {
    if (blocked_at(blocked, t)) continue;
    const double d = mesh.distance_to(t, p);
    if (d < best_d) {
      best_d = d;
      best.triangle = t;
    }
  }
  if (best.triangle < 0) throw UnreachableError("every navmesh triangle is blocked");
  best.off_mesh = true;
  best.point = mesh.closest_point(best.triangle, p);
  return best;
}

PathCorridor astar(const NavGraph& graph, int start, int goal, const PlannerConfig& config,
                   PlanStats* stats) {
  const int n = static_cast<int>(graph.size());
  if (start < 0 || goal < 0 || start >= n || goal >= n) throw ContractError("triangle id out of range");
  if (graph.is_blocked(start) || graph.is_blocked(goal)) {
    throw UnreachableError("start or goal triangle is blocked");
  }
  // Shrinking h by a hair keeps it admissible under rounding; reopening
  // closed nodes covers the rest.
  const double scale = config.heuristic_scale * (1.0 - 1e-9);
  const Vec2 target = graph.position[goal];
  auto h = [&](int v) { return scale * distance(graph.position[v], target); };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, kInf);
  std::vector<int> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  using Entry = std::tuple<double, double, int, double>;  // f, h, id, g
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  g[start] = 0.0;
  open.emplace(h(start), h(start), start, 0.0);
  std::size_t expanded = 0;
  bool found = false;
  while (!open.empty()) {
    const auto [f, hv, v, gv] = open.top();
    open.pop();
    if (gv != g[v]) continue;
    if (v == goal) {
      found = true;
      break;
    }
    if (!closed[v]) {
      closed[v] = 1;
      ++expanded;
    }
    for (const NavGraph::Edge& e : graph.edges[v]) {
      if (graph.is_blocked(e.to)) continue;
      const double ng = gv + e.cost;
      if (ng < g[e.to]) {
        g[e.to] = ng;
        parent[e.to] = v;
        const double he = h(e.to);
        open.emplace(ng + he, he, e.to, ng);
      }
    }
  }
  if (stats) stats->nodes_expanded = expanded;
  if (!found) throw UnreachableError("no unblocked route to the goal");
  PathCorridor out;
  for (int v = goal; v >= 0; v = parent[v]) out.triangles.push_back(v);
  std::reverse(out.triangles.begin(), out.triangles.end());
  out.cost = g[goal];
  return out;
}

Path funnel(const NavMesh& mesh, const PathCorridor& corridor, Vec2 start, Vec2 goal) {
  if (corridor.triangles.empty()) throw ContractError("empty corridor");
  constexpr double kTol = 1e-6;
  if (!mesh.contains(corridor.triangles.front(), start, kTol)) {
    throw ContractError("start is outside the first corridor triangle");
  }
  if (!mesh.contains(corridor.triangles.back(), goal, kTol)) {
    throw ContractError("goal is outside the last corridor triangle");
  }

  std::vector<std::pair<Vec2, Vec2>> gates;  // (left, right)
  gates.emplace_back(start, start);
  for (const Portal& p : corridor_portals(mesh, corridor)) {
    gates.emplace_back(mesh.vertices[p.left], mesh.vertices[p.right]);
  }
  gates.emplace_back(goal, goal);

  Path path;
  path.corridor = corridor.triangles;
  path.waypoints.push_back(start);
  Vec2 apex = start, left = start, right = start;
  std::size_t apex_i = 0, left_i = 0, right_i = 0;
  for (std::size_t i = 1; i < gates.size(); ++i) {
    const Vec2 l = gates[i].first;
    const Vec2 r = gates[i].second;

    if (cross(right - apex, r - apex) >= 0.0) {
      if (apex == right || cross(left - apex, r - apex) < 0.0) {
        right = r;
        right_i = i;
      } else {
        apex = left;
        apex_i = left_i;
        if (!(path.waypoints.back() == apex)) path.waypoints.push_back(apex);
        right = left = apex;
        right_i = left_i = apex_i;
        i = apex_i;
        continue;
      }
    }
    if (cross(left - apex, l - apex) <= 0.0) {
      if (apex == left || cross(right - apex, l - apex) > 0.0) {
        left = l;
        left_i = i;
      } else {
        apex = right;
        apex_i = right_i;
        if (!(path.waypoints.back() == apex)) path.waypoints.push_back(apex);
        right = left = apex;
        right_i = left_i = apex_i;
        i = apex_i;
        continue;
      }
    }
  }
  if (!(path.waypoints.back() == goal) || path.waypoints.size() == 1) path.waypoints.push_back(goal);
  path.total_cost = polyline_length(path.waypoints);
  return path;
}

void advance_waypoint(Path& path, Vec2 robot_pos, const PlannerConfig& config) {
  while (path.current_index + 1 < path.waypoints.size() &&
         distance(robot_pos, path.waypoints[path.current_index]) < config.waypoint_radius) {
    ++path.current_index;
  }
}

std::pair<Path, PlanStats> plan(const NavMeshRuntime& rt, Vec2 start, const GoalSpec& goal,
                                const PlannerConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const StaticObstacle& s : rt.scene().statics) {
    if (contains_closed(s.footprint, goal.position)) {
      throw UnreachableError("goal lies inside obstacle '" + s.id + "'");
    }
  }
  const NavMesh& mesh = rt.mesh();
  const Location from = locate_triangle(mesh, start, rt.blocked());
  const Location to = locate_triangle(mesh, goal.position, rt.blocked());
  if (to.off_mesh && distance(to.point, goal.position) >= goal.threshold) {
    throw UnreachableError("goal is not within reach of the walkable area");
  }
  const NavGraph graph = make_graph(mesh, rt.blocked());
  PlanStats stats;
  const PathCorridor corridor = astar(graph, from.triangle, to.triangle, config, &stats);
  Path path = funnel(mesh, corridor, from.point, to.point);
  stats.query_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(path), stats};
}

bool path_blocked(const NavMeshRuntime& rt, const Path& path, Vec2 from) {
  const auto blocked = rt.blocked();
  if (std::find(blocked.begin(), blocked.end(), std::uint8_t{1}) == blocked.end()) return false;
  if (path.current_index >= path.waypoints.size()) return false;
  const NavMesh& mesh = rt.mesh();
  auto crosses = [&](Vec2 a, Vec2 b, bool from_robot) {
    const Aabb box{{std::min(a.x, b.x), std::min(a.z, b.z)}, {std::max(a.x, b.x), std::max(a.z, b.z)}};
    for (int t : mesh.query(box)) {
      if (!blocked[t]) continue;
      // A carve that already covers the robot cannot be routed around.
      if (from_robot && mesh.contains(t, a)) continue;
      if (segment_crosses_triangle_interior(a, b, mesh.vertex(t, 0), mesh.vertex(t, 1), mesh.vertex(t, 2))) {
        return true;
      }
    }
    return false;
  };
  // The current leg starts at the last passed waypoint.
  const std::size_t first = path.current_index > 0 ? path.current_index - 1 : 0;
  if (crosses(from, path.waypoints[first], true)) return true;
  for (std::size_t i = first; i + 1 < path.waypoints.size(); ++i) {
    if (crosses(path.waypoints[i], path.waypoints[i + 1], false)) return true;
  }
  return false;
}

std::string_view to_string(ReplanReason r) {
  switch (r) {
    case ReplanReason::none: return "none";
    case ReplanReason::periodic: return "periodic";
    case ReplanReason::path_invalidated: return "path_invalidated";
    case ReplanReason::stuck: return "stuck";
    case ReplanReason::proximity: return "proximity";
  }
  return "none";
}

ReplanReason ReplanMonitor::check(const Pose& robot, double speed, double robot_radius,
                                  const NavMeshRuntime& rt, const Path* path,
                                  std::span<const DynamicObstacle> obstacles, double now) {
  const bool has_path = path != nullptr && !path->empty();

  bool stuck = false;
  if (std::abs(speed) < config_.stuck_speed) {
    if (!slow_since_) {
      slow_since_ = now;
    } else if (has_path && now - *slow_since_ > config_.stuck_duration) {
      stuck = true;
    }
  } else {
    slow_since_.reset();
  }

  // Obstacles that just came close to the robot and to the remaining path.
  std::set<std::string> near;
  if (has_path) {
    for (const DynamicObstacle& o : obstacles) {
      if (distance(o.center, robot.position) >= config_.obstacle_check_radius) continue;
      const double clearance = o.radius + robot_radius;
      bool touches = point_segment_distance(robot.position, path->waypoints[path->current_index], o.center) < clearance;
      for (std::size_t i = path->current_index; !touches && i + 1 < path->waypoints.size(); ++i) {
        touches = point_segment_distance(path->waypoints[i], path->waypoints[i + 1], o.center) < clearance;
      }
      if (touches) near.insert(o.id);
    }
  }
  bool newly_near = false;
  for (const std::string& id : near) newly_near = newly_near || !near_.count(id);
  near_ = std::move(near);

  if (has_path && (rt.generation() != generation_ || path_blocked(rt, *path, robot.position))) {
    return ReplanReason::path_invalidated;
  }
  if (stuck) return ReplanReason::stuck;
  if (newly_near) return ReplanReason::proximity;
  if (now - last_plan_ >= config_.replan_period - 1e-9) return ReplanReason::periodic;
  return ReplanReason::none;
}

void ReplanMonitor::planned(double now, std::uint64_t generation) {
  last_plan_ = now;
  generation_ = generation;
  if (slow_since_) slow_since_ = now;
}

}  // namespace navvi
