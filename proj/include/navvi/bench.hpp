#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "navvi/navmesh.hpp"
#include "navvi/planner.hpp"

namespace navvi {

struct BenchReport {
  std::size_t queries = 0;
  std::size_t failures = 0;  // unreachable pairs
  std::size_t triangles = 0;
  double median_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
  double mean_nodes = 0.0;
  std::size_t median_nodes = 0;
  std::size_t max_nodes = 0;
};

/// Plans between seeded random points on the mesh, with agent carves at
/// their t = 0 positions.
BenchReport bench_planner(const SceneDescription& scene, std::size_t queries, std::uint64_t seed,
                          const PlannerConfig& config = {}, const BuildOptions& build = {});

std::string format_bench_report(const BenchReport& r);

}  // namespace navvi
