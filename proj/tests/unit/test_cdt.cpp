#include <algorithm>
#include <random>
#include <set>

#include "cdt.hpp"
#include "doctest.h"

using navvi::detail::ConstrainedDelaunay;
using navvi::detail::LatticePoint;

namespace {

std::int64_t twice_area(const ConstrainedDelaunay& cdt) {
  std::int64_t sum = 0;
  const auto& p = cdt.points();
  for (const auto& t : cdt.triangles()) {
    const auto a = p[t.v[0]], b = p[t.v[1]], c = p[t.v[2]];
    const std::int64_t o = (b.x - a.x) * (c.z - a.z) - (b.z - a.z) * (c.x - a.x);
    CHECK(o > 0);
    sum += o;
  }
  return sum;
}

void check_adjacency(const ConstrainedDelaunay& cdt) {
  const auto& tris = cdt.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int nb = tris[t].n[k];
      if (nb < 0) continue;
      const int a = tris[t].v[(k + 1) % 3];
      const int b = tris[t].v[(k + 2) % 3];
      bool back = false;
      for (int j = 0; j < 3; ++j) {
        if (tris[nb].n[j] == static_cast<int>(t)) {
          back = tris[nb].v[(j + 1) % 3] == b && tris[nb].v[(j + 2) % 3] == a;
        }
      }
      CHECK(back);
    }
  }
}

}  // namespace

TEST_CASE("box starts as two triangles") {
  ConstrainedDelaunay cdt({0, 0}, {4, 3});
  CHECK(cdt.triangles().size() == 2);
  CHECK(twice_area(cdt) == 24);
}

TEST_CASE("random lattice points stay Delaunay and tile the box") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int W = 6 + trial, D = 5 + trial / 2;
    ConstrainedDelaunay cdt({0, 0}, {W, D});
    std::uniform_int_distribution<int> ux(0, W), uz(0, D);
    std::set<std::pair<int, int>> seen{{0, 0}, {W, 0}, {0, D}, {W, D}};
    for (int i = 0; i < 40; ++i) {
      const int x = ux(rng), z = uz(rng);
      cdt.insert_point({x, z});
      seen.insert({x, z});
    }
    CHECK(cdt.points().size() == seen.size());
    CHECK(twice_area(cdt) == 2LL * W * D);
    CHECK(cdt.is_constrained_delaunay());
    check_adjacency(cdt);
  }
}

TEST_CASE("constraints appear as edges after restoring Delaunay") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int W = 12, D = 10;
    ConstrainedDelaunay cdt({0, 0}, {W, D});
    std::uniform_int_distribution<int> ux(0, W), uz(0, D);
    std::vector<int> ids;
    for (int i = 0; i < 25; ++i) ids.push_back(cdt.insert_point({ux(rng), uz(rng)}));
    // Axis-aligned constraints never cross one another when drawn from a
    // single row or column, so pick a few distinct rows.
    std::vector<std::pair<int, int>> wanted;
    for (int row : {2, 5, 8}) {
      const int x0 = std::uniform_int_distribution<int>(0, W / 2)(rng);
      const int x1 = std::uniform_int_distribution<int>(W / 2 + 1, W)(rng);
      const int a = cdt.insert_point({x0, row});
      const int b = cdt.insert_point({x1, row});
      wanted.push_back({a, b});
    }
    for (auto [a, b] : wanted) cdt.insert_constraint(a, b);
    cdt.restore_delaunay();
    CHECK(twice_area(cdt) == 2LL * W * D);
    CHECK(cdt.is_constrained_delaunay());
    check_adjacency(cdt);
    const auto& pts = cdt.points();
    for (auto [a, b] : wanted) {
      // Every lattice vertex on the constraint splits it; walk the pieces.
      std::vector<int> on_line;
      for (int v = 0; v < static_cast<int>(pts.size()); ++v) {
        if (pts[v].z == pts[a].z && pts[v].x >= std::min(pts[a].x, pts[b].x) &&
            pts[v].x <= std::max(pts[a].x, pts[b].x)) {
          on_line.push_back(v);
        }
      }
      std::sort(on_line.begin(), on_line.end(), [&](int u, int v) { return pts[u].x < pts[v].x; });
      for (std::size_t i = 1; i < on_line.size(); ++i) {
        CHECK(cdt.has_edge(on_line[i - 1], on_line[i]));
        CHECK(cdt.is_fixed_edge(on_line[i - 1], on_line[i]));
      }
    }
  }
}

TEST_CASE("diagonal constraint through a cocircular grid") {
  ConstrainedDelaunay cdt({0, 0}, {8, 8});
  for (int z = 0; z <= 8; ++z)
    for (int x = 0; x <= 8; ++x) cdt.insert_point({x, z});
  const int a = cdt.insert_point({0, 1});
  const int b = cdt.insert_point({8, 4});
  cdt.insert_constraint(a, b);
  cdt.restore_delaunay();
  CHECK(cdt.has_edge(a, b));
  CHECK(twice_area(cdt) == 128);
  CHECK(cdt.is_constrained_delaunay());
  check_adjacency(cdt);
}
