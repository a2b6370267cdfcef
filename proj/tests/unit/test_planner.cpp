#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "navvi/error.hpp"
#include "navvi/planner.hpp"
#include "oracles.hpp"

using namespace navvi;
using navvi::testing::empty_scene;
using navvi::testing::make_static;
using navvi::testing::rect;

namespace {

SceneDescription l_scene() {
  auto s = empty_scene(10.0, 10.0);
  s.statics.push_back(make_static("block", StaticCategory::wall, rect(3.0, 3.0, 10.0, 10.0)));
  s.robot.spawn = {{8.0, 1.5}, 0.0};
  s.goal.position = {1.5, 8.0};
  return s;
}

}  // namespace

TEST_CASE("locate finds the containing triangle") {
  const NavMesh mesh = build_navmesh(l_scene());
  for (int t = 0; t < static_cast<int>(mesh.size()); ++t) {
    const Location loc = locate_triangle(mesh, mesh.centroid(t));
    CHECK(loc.triangle == t);
    CHECK_FALSE(loc.off_mesh);
  }
  // Shared edges go to the lower id.
  for (int t = 0; t < static_cast<int>(mesh.size()); ++t) {
    for (const Portal& p : mesh.portals(t)) {
      const Vec2 mid = (mesh.vertices[p.left] + mesh.vertices[p.right]) * 0.5;
      CHECK(locate_triangle(mesh, mid).triangle == std::min(t, p.neighbor));
    }
  }
}

TEST_CASE("locate skips blocked triangles and reports the nearest free one") {
  const NavMesh mesh = build_navmesh(empty_scene(8.0, 6.0));
  std::vector<std::uint8_t> blocked(mesh.size(), 0);
  const Vec2 p{4.0, 3.0};
  for (int t = 0; t < static_cast<int>(mesh.size()); ++t)
    if (mesh.distance_to(t, p) < 1.0) blocked[t] = 1;
  const Location loc = locate_triangle(mesh, p, blocked);
  CHECK(loc.off_mesh);
  double best = 1e9;
  for (int t = 0; t < static_cast<int>(mesh.size()); ++t)
    if (!blocked[t]) best = std::min(best, mesh.distance_to(t, p));
  CHECK(mesh.distance_to(loc.triangle, p) == best);
  CHECK(distance(loc.point, p) == doctest::Approx(best));
}

TEST_CASE("astar corner cases") {
  const NavMesh mesh = build_navmesh(l_scene());
  const NavGraph g = make_graph(mesh);
  const PathCorridor one = astar(g, 3, 3);
  CHECK(one.triangles.size() == 1);
  CHECK(one.cost == 0.0);
  std::vector<std::uint8_t> blocked(mesh.size(), 0);
  const int last = static_cast<int>(mesh.size()) - 1;
  blocked[last] = 1;
  const NavGraph gb = make_graph(mesh, blocked);
  CHECK_THROWS_AS(astar(gb, 0, last), UnreachableError);
}

TEST_CASE("astar matches Dijkstra and its heuristic is admissible") {
  std::mt19937 rng(23);
  const NavMesh mesh = build_navmesh(l_scene());
  const NavGraph g = make_graph(mesh);
  const int n = static_cast<int>(mesh.size());
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int i = 0; i < 50; ++i) {
    const int a = pick(rng), b = pick(rng);
    PlanStats st;
    const PathCorridor c = astar(g, a, b, {}, &st);
    const auto ref = oracle::dijkstra_cost(g, a, b);
    REQUIRE(ref);
    CHECK(c.cost == *ref);
    CHECK(st.nodes_expanded <= mesh.size());
    const auto to_goal = oracle::distances_to(g, b);
    for (int v = 0; v < n; ++v) CHECK(distance(g.position[v], g.position[b]) <= to_goal[v] + 1e-9);
  }
}

static BuildOptions contour_only() {
  BuildOptions o;
  o.max_edge_length = 0.0;
  return o;
}

TEST_CASE("funnel on an open floor gives a straight segment") {
  NavMeshRuntime rt(empty_scene(12.0, 8.0), contour_only());
  GoalSpec goal{{10.0, 6.0}, 1.0};
  auto [path, stats] = plan(rt, {1.0, 1.0}, goal, {});
  REQUIRE(path.waypoints.size() == 2);
  CHECK(path.waypoints.front() == Vec2{1.0, 1.0});
  CHECK(path.waypoints.back() == Vec2{10.0, 6.0});
  CHECK(path.total_cost == doctest::Approx(std::hypot(9.0, 5.0)));
  CHECK(stats.nodes_expanded >= 1);
}

TEST_CASE("refined open floor stays close to straight") {
  NavMeshRuntime rt(empty_scene(12.0, 8.0));
  auto [path, stats] = plan(rt, {1.0, 1.0}, {{10.0, 6.0}, 1.0}, {});
  CHECK(path.total_cost < 1.05 * std::hypot(9.0, 5.0));
  const double ref = oracle::corridor_shortest_path(rt.mesh(), path.corridor, path.waypoints.front(),
                                                    path.waypoints.back());
  CHECK(path.total_cost == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("funnel bends once around the inner corner of an L") {
  const auto scene = l_scene();
  NavMeshRuntime rt(scene, contour_only());
  auto [path, stats] = plan(rt, scene.robot.spawn.position, scene.goal, {});
  REQUIRE(path.waypoints.size() == 3);
  CHECK(path.waypoints[1].x == doctest::Approx(2.6));
  CHECK(path.waypoints[1].z == doctest::Approx(2.6));
  const double ref = oracle::corridor_shortest_path(rt.mesh(), path.corridor, path.waypoints.front(),
                                                    path.waypoints.back());
  CHECK(path.total_cost == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("funnel rejects points outside the corridor") {
  const NavMesh mesh = build_navmesh(l_scene());
  PathCorridor c;
  c.triangles = {0};
  CHECK_THROWS_AS(funnel(mesh, c, {-5.0, -5.0}, mesh.centroid(0)), ContractError);
  c.triangles = {0, static_cast<int>(mesh.size()) - 1};
  if (mesh.portal(c.triangles[0], c.triangles[1]).neighbor < 0) {
    CHECK_THROWS_AS(funnel(mesh, c, mesh.centroid(0), mesh.centroid(c.triangles[1])), ContractError);
  }
}

TEST_CASE("plan refuses goals inside obstacles or far off the mesh") {
  const auto scene = l_scene();
  NavMeshRuntime rt(scene);
  CHECK_THROWS_AS(plan(rt, {1.0, 1.0}, {{6.0, 6.0}, 1.0}, {}), UnreachableError);
  // Off-mesh but close: projected.
  auto [p, st] = plan(rt, {1.0, 1.0}, {{9.9, 1.0}, 1.0}, {});
  CHECK(p.waypoints.back().x == doctest::Approx(9.6));
  CHECK(p.waypoints.back().z == doctest::Approx(1.0));
  CHECK_THROWS_AS(plan(rt, {1.0, 1.0}, {{9.9, 1.0}, 0.2}, {}), UnreachableError);
}

TEST_CASE("advance_waypoint") {
  Path path;
  path.waypoints = {{0, 0}, {3, 0}, {3.5, 0}, {10, 0}};
  path.current_index = 1;
  advance_waypoint(path, {1.5, 0.0}, {});
  CHECK(path.current_index == 1);
  advance_waypoint(path, {2.2, 0.0}, {});
  CHECK(path.current_index == 2);
  path.current_index = 1;
  advance_waypoint(path, {3.2, 0.0}, {});
  CHECK(path.current_index == 3);
  advance_waypoint(path, {10.0, 0.0}, {});
  CHECK(path.current_index == 3);
}

TEST_CASE("replan triggers") {
  auto scene = empty_scene(20.0, 10.0);
  NavMeshRuntime rt(scene);
  auto [path, st] = plan(rt, {1.0, 5.0}, {{19.0, 5.0}, 1.0}, {});
  const Pose robot{{1.0, 5.0}, std::acos(0.0)};

  SUBCASE("periodic") {
    ReplanMonitor m;
    m.planned(0.0, rt.generation());
    CHECK(m.check(robot, 1.0, 0.35, rt, &path, {}, 1.9) == ReplanReason::none);
    CHECK(m.check(robot, 1.0, 0.35, rt, &path, {}, 2.1) == ReplanReason::periodic);
  }
  SUBCASE("stuck") {
    ReplanMonitor m;
    m.planned(0.0, rt.generation());
    ReplanReason r = ReplanReason::none;
    double t = 0.0;
    for (; t <= 1.2 && r == ReplanReason::none; t += 0.02) r = m.check(robot, 0.05, 0.35, rt, &path, {}, t);
    CHECK(r == ReplanReason::stuck);
    CHECK(t > 1.0);
    CHECK(t < 1.1);
  }
  SUBCASE("carve on the path") {
    ReplanMonitor m;
    m.planned(0.0, rt.generation());
    rt.apply_carve({{10.0, 5.0}, 1.0, "forklift"});
    CHECK(m.check(robot, 1.0, 0.35, rt, &path, {}, 0.1) == ReplanReason::path_invalidated);
    auto [detour, st2] = plan(rt, robot.position, {{19.0, 5.0}, 1.0}, {});
    CHECK_FALSE(path_blocked(rt, detour, robot.position));
    for (std::size_t i = 0; i + 1 < detour.waypoints.size(); ++i) {
      CHECK(point_segment_distance(detour.waypoints[i], detour.waypoints[i + 1], {10.0, 5.0}) >= 1.0 + 0.35 - 1e-9);
    }
  }
  SUBCASE("proximity is edge triggered") {
    ReplanMonitor m;
    m.planned(0.0, rt.generation());
    const DynamicObstacle worker{"w", {4.0, 5.2}, 0.3};
    CHECK(m.check(robot, 1.0, 0.35, rt, &path, {&worker, 1}, 0.1) == ReplanReason::proximity);
    CHECK(m.check(robot, 1.0, 0.35, rt, &path, {&worker, 1}, 0.2) == ReplanReason::none);
    const DynamicObstacle far{"f", {8.0, 5.0}, 0.3};
    CHECK(m.check(robot, 1.0, 0.35, rt, &path, {&far, 1}, 0.3) == ReplanReason::none);
  }
}
