#include "navvi/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "navvi/error.hpp"

namespace navvi {

namespace {

template <typename T>
T percentile(std::vector<T> v, double q) {
  if (v.empty()) return T{};
  std::sort(v.begin(), v.end());
  const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(k, v.size() - 1)];
}

}  // namespace

BenchReport bench_planner(const SceneDescription& scene, std::size_t queries, std::uint64_t seed,
                          const PlannerConfig& config, const BuildOptions& build) {
  NavMeshRuntime rt(scene, build);
  for (const DynamicAgent& a : scene.agents) {
    rt.apply_carve({agent_pose_at(a, 0.0).position, a.radius, a.id});
  }
  const NavMesh& mesh = rt.mesh();
  std::vector<int> open;
  for (int t = 0; t < static_cast<int>(mesh.size()); ++t) {
    if (!rt.is_blocked(t)) open.push_back(t);
  }
  if (open.empty()) throw Error("scene has no open navmesh triangles");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample = [&] {
    const int t = open[pick(rng)];
    double u = unit(rng), v = unit(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec2 a = mesh.vertex(t, 0);
    return a + (mesh.vertex(t, 1) - a) * u + (mesh.vertex(t, 2) - a) * v;
  };

  BenchReport r;
  r.triangles = mesh.size();
  std::vector<double> ms;
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < queries; ++i) {
    const Vec2 start = sample();
    GoalSpec goal;
    goal.position = sample();
    try {
      const auto [path, stats] = plan(rt, start, goal, config);
      ms.push_back(stats.query_time * 1e3);
      nodes.push_back(stats.nodes_expanded);
    } catch (const UnreachableError&) {
      ++r.failures;
    }
  }
  r.queries = queries;
  r.median_ms = percentile(ms, 0.5);
  r.p99_ms = percentile(ms, 0.99);
  r.max_ms = ms.empty() ? 0.0 : *std::max_element(ms.begin(), ms.end());
  r.median_nodes = percentile(nodes, 0.5);
  r.max_nodes = nodes.empty() ? 0 : *std::max_element(nodes.begin(), nodes.end());
  double sum = 0.0;
  for (std::size_t n : nodes) sum += static_cast<double>(n);
  r.mean_nodes = nodes.empty() ? 0.0 : sum / static_cast<double>(nodes.size());
  return r;
}

std::string format_bench_report(const BenchReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "triangles: %zu\nqueries: %zu (unreachable: %zu)\n"
                "plan latency ms: median %.4f  p99 %.4f  max %.4f\n"
                "nodes expanded: mean %.1f  median %zu  max %zu\n"
                "target: median < 1 ms, p99 < 5 ms: %s\n",
                r.triangles, r.queries, r.failures, r.median_ms, r.p99_ms, r.max_ms, r.mean_nodes,
                r.median_nodes, r.max_nodes, r.median_ms < 1.0 && r.p99_ms < 5.0 ? "met" : "missed");
  return buf;
}

}  // namespace navvi
