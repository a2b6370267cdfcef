#include "navvi/navmesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cdt.hpp"
#include "navvi/error.hpp"

namespace navvi {

std::size_t OccupancyGrid::walkable_count() const {
  return static_cast<std::size_t>(std::count(walkable.begin(), walkable.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------------------
// Rasterization and erosion

OccupancyGrid rasterize(const SceneDescription& scene, const BuildOptions& options,
                        std::span<const Disc> extra_obstacles) {
  if (!(options.cell_size > 0.0)) throw ContractError("cell size must be positive");
  const double s = options.cell_size;
  const double w_cells = std::ceil(scene.floor.width() / s - 1e-9);
  const double d_cells = std::ceil(scene.floor.depth() / s - 1e-9);
  if (w_cells < 1 || d_cells < 1) throw ContractError("floor is smaller than one cell");
  if (w_cells * d_cells > static_cast<double>(options.max_cells)) {
    throw CapacityError("floor needs " + std::to_string(static_cast<long long>(w_cells * d_cells)) +
                        " cells, cap is " + std::to_string(options.max_cells));
  }

  OccupancyGrid grid;
  grid.frame = {s, scene.floor.min, static_cast<int>(w_cells), static_cast<int>(d_cells)};
  grid.walkable.assign(grid.frame.cell_count(), 1);
  const GridFrame& f = grid.frame;

  // Only cells under each footprint's bounding box are visited.
  auto cell_range = [&](const Aabb& box, int& x0, int& x1, int& z0, int& z1) {
    x0 = std::max(0, static_cast<int>(std::floor((box.min.x - f.origin.x) / s - 0.5)));
    x1 = std::min(f.width - 1, static_cast<int>(std::ceil((box.max.x - f.origin.x) / s - 0.5)));
    z0 = std::max(0, static_cast<int>(std::floor((box.min.z - f.origin.z) / s - 0.5)));
    z1 = std::min(f.depth - 1, static_cast<int>(std::ceil((box.max.z - f.origin.z) / s - 0.5)));
  };

  for (const StaticObstacle& obs : scene.statics) {
    int x0, x1, z0, z1;
    cell_range(bounds_of(obs.footprint), x0, x1, z0, z1);
    for (int z = z0; z <= z1; ++z) {
      for (int x = x0; x <= x1; ++x) {
        if (covers_sample(obs.footprint, f.cell_center(x, z))) grid.walkable[f.index(x, z)] = 0;
      }
    }
  }
  for (const Disc& disc : extra_obstacles) {
    const Vec2 r{disc.radius, disc.radius};
    int x0, x1, z0, z1;
    cell_range({disc.center - r, disc.center + r}, x0, x1, z0, z1);
    const double r2 = disc.radius * disc.radius;
    for (int z = z0; z <= z1; ++z) {
      for (int x = x0; x <= x1; ++x) {
        if (distance_sq(disc.center, f.cell_center(x, z)) <= r2) grid.walkable[f.index(x, z)] = 0;
      }
    }
  }
  return grid;
}

int erosion_cells(double agent_radius, double cell_size) {
  if (agent_radius <= 0.0) return 0;
  return static_cast<int>(std::ceil(agent_radius / cell_size - 1e-9));
}

OccupancyGrid erode(const OccupancyGrid& grid, double agent_radius) {
  if (agent_radius < 0.0) throw ContractError("agent radius must be non-negative");
  const int r = erosion_cells(agent_radius, grid.frame.cell_size);
  if (r == 0) return grid;
  const GridFrame& f = grid.frame;

  // Separable min filter over a (2r+1)² square via running blocked counts.
  auto pass = [&](const std::vector<std::uint8_t>& in, bool along_x) {
    std::vector<std::uint8_t> out(in.size(), 0);
    const int lines = along_x ? f.depth : f.width;
    const int len = along_x ? f.width : f.depth;
    std::vector<int> prefix(len + 1);
    for (int line = 0; line < lines; ++line) {
      auto at = [&](int i) {
        return along_x ? in[f.index(i, line)] : in[f.index(line, i)];
      };
      prefix[0] = 0;
      for (int i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + (at(i) ? 0 : 1);
      for (int i = 0; i < len; ++i) {
        if (i - r < 0 || i + r >= len) continue;
        if (prefix[i + r + 1] - prefix[i - r] == 0) {
          out[along_x ? f.index(i, line) : f.index(line, i)] = 1;
        }
      }
    }
    return out;
  };

  OccupancyGrid out;
  out.frame = f;
  out.walkable = pass(pass(grid.walkable, true), false);
  return out;
}

// ---------------------------------------------------------------------------
// Exact squared Euclidean distance transform (lower envelope of parabolas,
// one pass per axis).

namespace {

constexpr double kFar = 1e20;

void envelope_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                 std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    for (;;) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
          (2.0 * q - 2.0 * p);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates from -inf.
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = static_cast<double>(q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

DistanceField distance_transform(const OccupancyGrid& grid) {
  const GridFrame& fr = grid.frame;
  std::vector<double> work(fr.cell_count());
  for (std::size_t i = 0; i < work.size(); ++i) work[i] = grid.walkable[i] ? kFar : 0.0;

  const int longest = std::max(fr.width, fr.depth);
  std::vector<double> f(longest), d(longest), z(longest + 1);
  std::vector<int> v(longest);

  f.resize(fr.width);
  d.resize(fr.width);
  for (int row = 0; row < fr.depth; ++row) {
    for (int x = 0; x < fr.width; ++x) f[x] = work[fr.index(x, row)];
    envelope_1d(f, d, v, z);
    for (int x = 0; x < fr.width; ++x) work[fr.index(x, row)] = d[x];
  }
  f.resize(fr.depth);
  d.resize(fr.depth);
  for (int col = 0; col < fr.width; ++col) {
    for (int zz = 0; zz < fr.depth; ++zz) f[zz] = work[fr.index(col, zz)];
    envelope_1d(f, d, v, z);
    for (int zz = 0; zz < fr.depth; ++zz) work[fr.index(col, zz)] = d[zz];
  }

  DistanceField field;
  field.frame = fr;
  field.sq_distance.resize(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    field.sq_distance[i] =
        work[i] >= kFar * 0.5 ? DistanceField::kUnbounded : static_cast<std::int64_t>(work[i]);
  }
  return field;
}

// ---------------------------------------------------------------------------
// Watershed

RegionMap watershed_partition(const DistanceField& field) {
  const GridFrame& f = field.frame;
  const int n = static_cast<int>(f.cell_count());
  RegionMap out;
  out.frame = f;
  out.region.assign(n, 0);

  std::vector<int> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (field.sq_distance[i] > 0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return field.sq_distance[a] > field.sq_distance[b];
  });

  std::vector<int> level_stamp(n, -1);
  auto neighbors = [&](int idx, auto&& fn) {
    const int x = idx % f.width;
    const int z = idx / f.width;
    if (x > 0) fn(idx - 1);
    if (x + 1 < f.width) fn(idx + 1);
    if (z > 0) fn(idx - f.width);
    if (z + 1 < f.depth) fn(idx + f.width);
  };

  int next_region = 1;
  std::vector<int> frontier, candidates, labels, queue;
  std::size_t begin = 0;
  int level = 0;
  while (begin < order.size()) {
    std::size_t end = begin;
    const std::int64_t value = field.sq_distance[order[begin]];
    while (end < order.size() && field.sq_distance[order[end]] == value) ++end;
    for (std::size_t i = begin; i < end; ++i) level_stamp[order[i]] = level;

    // Grow existing regions into this level one ring at a time; a cell
    // touching several regions in the same ring takes the lowest id.
    frontier.clear();
    for (std::size_t i = begin; i < end; ++i) frontier.push_back(order[i]);
    bool first_ring = true;
    for (;;) {
      candidates.clear();
      if (first_ring) {
        for (int c : frontier) {
          bool touches = false;
          neighbors(c, [&](int nb) { touches = touches || out.region[nb] > 0; });
          if (touches) candidates.push_back(c);
        }
      } else {
        for (int c : frontier) {
          neighbors(c, [&](int nb) {
            if (level_stamp[nb] == level && out.region[nb] == 0) candidates.push_back(nb);
          });
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      }
      first_ring = false;
      if (candidates.empty()) break;
      labels.assign(candidates.size(), 0);
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        int best = 0;
        neighbors(candidates[i], [&](int nb) {
          const int r = out.region[nb];
          if (r > 0 && (best == 0 || r < best)) best = r;
        });
        labels[i] = best;
      }
      for (std::size_t i = 0; i < candidates.size(); ++i) out.region[candidates[i]] = labels[i];
      frontier = candidates;
    }

    // Whatever is left at this level is a new local-maximum plateau.
    for (std::size_t i = begin; i < end; ++i) {
      const int seed = order[i];
      if (out.region[seed] != 0) continue;
      const int id = next_region++;
      out.region[seed] = id;
      queue.assign(1, seed);
      for (std::size_t q = 0; q < queue.size(); ++q) {
        neighbors(queue[q], [&](int nb) {
          if (level_stamp[nb] == level && out.region[nb] == 0) {
            out.region[nb] = id;
            queue.push_back(nb);
          }
        });
      }
    }
    begin = end;
    ++level;
  }
  out.region_count = next_region - 1;
  return out;
}

// ---------------------------------------------------------------------------
// NavMesh

Portal NavMesh::portal(int from, int to) const {
  const auto& tri = triangles[from];
  for (int i = 0; i < 3; ++i) {
    if (neighbors[from][i] == to) return {to, tri[(i + 1) % 3], tri[i]};
  }
  return {};
}

std::vector<Portal> NavMesh::portals(int t) const {
  std::vector<Portal> out;
  for (int i = 0; i < 3; ++i) {
    if (neighbors[t][i] >= 0) out.push_back({neighbors[t][i], triangles[t][(i + 1) % 3], triangles[t][i]});
  }
  std::sort(out.begin(), out.end(), [](const Portal& a, const Portal& b) { return a.neighbor < b.neighbor; });
  return out;
}

bool NavMesh::contains(int t, Vec2 p, double eps) const {
  for (int i = 0; i < 3; ++i) {
    const Vec2 a = vertex(t, i);
    const Vec2 b = vertex(t, (i + 1) % 3);
    const double len = distance(a, b);
    if (orient(a, b, p) < -eps * len) return false;
  }
  return true;
}

double NavMesh::distance_to(int t, Vec2 p) const {
  return point_triangle_distance(vertex(t, 0), vertex(t, 1), vertex(t, 2), p);
}

Vec2 NavMesh::closest_point(int t, Vec2 p) const {
  if (contains(t, p, 0.0)) return p;
  Vec2 best = p;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const Vec2 c = closest_point_on_segment(vertex(t, i), vertex(t, (i + 1) % 3), p);
    const double d = distance_sq(c, p);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

void NavMesh::finalize() {
  const std::size_t n = triangles.size();
  centroids_.resize(n);
  areas_.resize(n);
  total_area_ = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const Vec2 a = vertex(static_cast<int>(t), 0);
    const Vec2 b = vertex(static_cast<int>(t), 1);
    const Vec2 c = vertex(static_cast<int>(t), 2);
    centroids_[t] = (a + b + c) * (1.0 / 3.0);
    areas_[t] = 0.5 * orient(a, b, c);
    total_area_ += areas_[t];
  }
  buckets_.clear();
  buckets_x_ = buckets_z_ = 0;
  if (n == 0) return;
  bounds_ = bounds_of(vertices);
  const double extent = std::max(bounds_.width(), bounds_.depth());
  bucket_size_ = std::max(extent / 256.0, std::max(0.5, std::sqrt(bounds_.width() * bounds_.depth() / n) * 2.0));
  buckets_x_ = std::max(1, static_cast<int>(std::ceil(bounds_.width() / bucket_size_)));
  buckets_z_ = std::max(1, static_cast<int>(std::ceil(bounds_.depth() / bucket_size_)));
  buckets_.assign(static_cast<std::size_t>(buckets_x_) * buckets_z_, {});
  for (std::size_t t = 0; t < n; ++t) {
    const Vec2 pts[3] = {vertex(static_cast<int>(t), 0), vertex(static_cast<int>(t), 1),
                         vertex(static_cast<int>(t), 2)};
    const Aabb box = bounds_of(pts);
    const int x0 = std::clamp(static_cast<int>((box.min.x - bounds_.min.x) / bucket_size_), 0, buckets_x_ - 1);
    const int x1 = std::clamp(static_cast<int>((box.max.x - bounds_.min.x) / bucket_size_), 0, buckets_x_ - 1);
    const int z0 = std::clamp(static_cast<int>((box.min.z - bounds_.min.z) / bucket_size_), 0, buckets_z_ - 1);
    const int z1 = std::clamp(static_cast<int>((box.max.z - bounds_.min.z) / bucket_size_), 0, buckets_z_ - 1);
    for (int z = z0; z <= z1; ++z) {
      for (int x = x0; x <= x1; ++x) buckets_[static_cast<std::size_t>(z) * buckets_x_ + x].push_back(static_cast<int>(t));
    }
  }
}

std::vector<int> NavMesh::query(const Aabb& box) const {
  std::vector<int> out;
  if (buckets_.empty()) return out;
  if (box.max.x < bounds_.min.x || box.max.z < bounds_.min.z || box.min.x > bounds_.max.x ||
      box.min.z > bounds_.max.z) {
    return out;
  }
  const int x0 = std::clamp(static_cast<int>(std::floor((box.min.x - bounds_.min.x) / bucket_size_)), 0, buckets_x_ - 1);
  const int x1 = std::clamp(static_cast<int>(std::floor((box.max.x - bounds_.min.x) / bucket_size_)), 0, buckets_x_ - 1);
  const int z0 = std::clamp(static_cast<int>(std::floor((box.min.z - bounds_.min.z) / bucket_size_)), 0, buckets_z_ - 1);
  const int z1 = std::clamp(static_cast<int>(std::floor((box.max.z - bounds_.min.z) / bucket_size_)), 0, buckets_z_ - 1);
  for (int z = z0; z <= z1; ++z) {
    for (int x = x0; x <= x1; ++x) {
      const auto& b = buckets_[static_cast<std::size_t>(z) * buckets_x_ + x];
      out.insert(out.end(), b.begin(), b.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Contours and triangulation

NavMesh triangulate(const RegionMap& regions, int lattice_step) {
  const GridFrame& f = regions.frame;
  const int W = f.width;
  const int D = f.depth;

  // Lattice corner (i, j) touches cells SW (i-1, j-1), SE (i, j-1),
  // NW (i-1, j) and NE (i, j).
  auto east_boundary = [&](int i, int j) { return regions.at(i, j - 1) != regions.at(i, j); };
  auto north_boundary = [&](int i, int j) { return regions.at(i - 1, j) != regions.at(i, j); };

  std::vector<int> corner_id(static_cast<std::size_t>(W + 1) * (D + 1), -1);
  auto corner_index = [&](int i, int j) { return static_cast<std::size_t>(j) * (W + 1) + i; };
  const int row_step = std::max(1, static_cast<int>(std::lround(lattice_step * 0.866)));
  auto is_kept = [&](int i, int j) {
    const bool e = i < W && east_boundary(i, j);
    const bool w = i > 0 && east_boundary(i - 1, j);
    const bool nn = j < D && north_boundary(i, j);
    const bool s = j > 0 && north_boundary(i, j - 1);
    const bool E = e, Wb = w, N = nn, S = s;
    const int count = E + Wb + N + S;
    if (count == 0) {
      // Interior corner: a Steiner point on a staggered, near-equilateral
      // lattice.
      if (lattice_step <= 0 || regions.at(i, j) == 0 || j % row_step != 0) return false;
      const int shift = (j / row_step) % 2 == 0 ? 0 : lattice_step / 2;
      return (i - shift) % lattice_step == 0;
    }
    const bool straight = (count == 2) && ((E && Wb) || (N && S));
    if (!straight) return true;
    return lattice_step > 0 && ((E && i % lattice_step == 0) || (N && j % row_step == 0));
  };

  detail::ConstrainedDelaunay cdt({0, 0}, {W, D});
  for (int j = 0; j <= D; ++j) {
    for (int i = 0; i <= W; ++i) {
      if (is_kept(i, j)) corner_id[corner_index(i, j)] = cdt.insert_point({i, j});
    }
  }

  auto edge_is_boundary_east = [&](int i, int j) {
    // Lattice edge (i, j) -> (i + 1, j).
    return regions.at(i, j - 1) != regions.at(i, j);
  };
  auto edge_is_boundary_north = [&](int i, int j) {
    // Lattice edge (i, j) -> (i, j + 1).
    return regions.at(i - 1, j) != regions.at(i, j);
  };
  for (int j = 0; j <= D; ++j) {
    for (int i = 0; i <= W; ++i) {
      const int a = corner_id[corner_index(i, j)];
      if (a < 0) continue;
      if (i < W && edge_is_boundary_east(i, j)) {
        int k = i + 1;
        while (corner_id[corner_index(k, j)] < 0) ++k;
        cdt.insert_constraint(a, corner_id[corner_index(k, j)]);
      }
      if (j < D && edge_is_boundary_north(i, j)) {
        int k = j + 1;
        while (corner_id[corner_index(i, k)] < 0) ++k;
        cdt.insert_constraint(a, corner_id[corner_index(i, k)]);
      }
    }
  }
  cdt.restore_delaunay();

  const auto& pts = cdt.points();
  const auto& tris = cdt.triangles();
  std::vector<int> keep_index(tris.size(), -1);
  std::vector<int> vertex_map(pts.size(), -1);
  NavMesh mesh;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tr = tris[t];
    const std::int64_t sx = pts[tr.v[0]].x + pts[tr.v[1]].x + pts[tr.v[2]].x;
    const std::int64_t sz = pts[tr.v[0]].z + pts[tr.v[1]].z + pts[tr.v[2]].z;
    const int cx = std::clamp(static_cast<int>(sx / 3), 0, W - 1);
    const int cz = std::clamp(static_cast<int>(sz / 3), 0, D - 1);
    const int region = regions.at(cx, cz);
    if (region == 0) continue;
    keep_index[t] = static_cast<int>(mesh.triangles.size());
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      int& mapped = vertex_map[tr.v[k]];
      if (mapped < 0) {
        mapped = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(f.corner(static_cast<int>(pts[tr.v[k]].x), static_cast<int>(pts[tr.v[k]].z)));
      }
      tri[k] = mapped;
    }
    mesh.triangles.push_back(tri);
    mesh.triangle_region.push_back(region);
  }
  mesh.neighbors.assign(mesh.triangles.size(), {-1, -1, -1});
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const int mt = keep_index[t];
    if (mt < 0) continue;
    for (int k = 0; k < 3; ++k) {
      // CDT neighbor k sits across edge (v[k+1], v[k+2]) = mesh edge k+1.
      const int nb = tris[t].n[k];
      mesh.neighbors[mt][(k + 1) % 3] = nb >= 0 ? keep_index[nb] : -1;
    }
  }
  mesh.info.cell_size = f.cell_size;
  mesh.info.region_count = regions.region_count;
  mesh.info.lattice_step = lattice_step;
  mesh.info.grid_width = W;
  mesh.info.grid_depth = D;
  mesh.info.walkable_cells = static_cast<std::size_t>(
      std::count_if(regions.region.begin(), regions.region.end(), [](int r) { return r != 0; }));
  mesh.finalize();
  return mesh;
}

NavMesh build_navmesh(const SceneDescription& scene, const BuildOptions& options,
                      std::span<const Disc> extra_obstacles) {
  const OccupancyGrid raw = rasterize(scene, options, extra_obstacles);
  const OccupancyGrid eroded = erode(raw, options.agent_radius);
  const DistanceField field = distance_transform(eroded);
  const RegionMap regions = watershed_partition(field);
  const int step = options.max_edge_length > 0.0
                       ? std::max(1, static_cast<int>(std::floor(options.max_edge_length / options.cell_size / std::sqrt(2.0) + 1e-9)))
                       : 0;
  NavMesh mesh = triangulate(regions, step);
  mesh.info.agent_radius = options.agent_radius;
  mesh.info.erosion_cells = erosion_cells(options.agent_radius, options.cell_size);
  return mesh;
}

std::string dump_navmesh(const NavMesh& mesh) {
  using nlohmann::json;
  json doc;
  doc["format"] = "navvi-navmesh/1";
  json verts = json::array();
  for (const Vec2& v : mesh.vertices) verts.push_back({v.x, v.z});
  json tris = json::array();
  for (const auto& t : mesh.triangles) tris.push_back({t[0], t[1], t[2]});
  json portals = json::array();
  for (std::size_t t = 0; t < mesh.size(); ++t) {
    for (const Portal& p : mesh.portals(static_cast<int>(t))) {
      portals.push_back({{"from", t}, {"to", p.neighbor}, {"left", p.left}, {"right", p.right}});
    }
  }
  doc["vertices"] = verts;
  doc["triangles"] = tris;
  doc["regions"] = mesh.triangle_region;
  doc["portals"] = portals;
  doc["build"] = {{"cell_size", mesh.info.cell_size},
                  {"agent_radius", mesh.info.agent_radius},
                  {"erosion_cells", mesh.info.erosion_cells},
                  {"region_count", mesh.info.region_count},
                  {"lattice_step", mesh.info.lattice_step},
                  {"grid_width", mesh.info.grid_width},
                  {"grid_depth", mesh.info.grid_depth},
                  {"walkable_cells", mesh.info.walkable_cells},
                  {"triangle_count", mesh.size()},
                  {"walkable_area_m2", mesh.total_area()},
                  {"slope_filter", "planar floor: 45 degree slope limit satisfied by every cell"}};
  return doc.dump(1);
}

// ---------------------------------------------------------------------------
// Runtime carving

NavMeshRuntime::NavMeshRuntime(SceneDescription scene, BuildOptions options)
    : scene_(std::move(scene)), options_(options) {
  mesh_ = build_navmesh(scene_, options_);
  blocked_.assign(mesh_.size(), 0);
}

bool NavMeshRuntime::carve_is_baked(const CarveVolume& carve) const {
  const auto it = baked_.find(carve.owner);
  if (it == baked_.end()) return false;
  return distance(carve.center, it->second.center) + carve.radius <= it->second.radius + 1e-9;
}

void NavMeshRuntime::refresh_blocked() {
  std::vector<std::uint8_t> next(mesh_.size(), 0);
  for (const auto& [owner, carve] : carves_) {
    if (carve_is_baked(carve)) continue;
    const double reach = carve.radius + options_.agent_radius;
    const Vec2 ext{reach, reach};
    for (int t : mesh_.query({carve.center - ext, carve.center + ext})) {
      if (mesh_.distance_to(t, carve.center) < reach) next[t] = 1;
    }
  }
  double delta = 0.0;
  for (std::size_t t = 0; t < next.size(); ++t) {
    if (next[t] != blocked_[t]) delta += mesh_.area(static_cast<int>(t));
  }
  if (mesh_.total_area() > 0.0) {
    changed_area_ = std::min(1.0, changed_area_ + delta / mesh_.total_area());
  }
  blocked_ = std::move(next);
}

void NavMeshRuntime::apply_carve(const CarveVolume& carve) {
  if (!(carve.radius > 0.0)) throw ContractError("carve radius must be positive");
  if (baked_.count(carve.owner) && !carve_is_baked(carve)) release_baked(carve.owner);
  carves_[carve.owner] = carve;
  refresh_blocked();
}

void NavMeshRuntime::release_baked(const std::string& owner) {
  // The old hole stays in the mesh until the next rebuild; count it as change.
  const auto it = baked_.find(owner);
  const double r = it->second.radius + options_.agent_radius;
  if (mesh_.total_area() > 0.0) {
    changed_area_ = std::min(1.0, changed_area_ + std::numbers::pi * r * r / mesh_.total_area());
  }
  baked_.erase(it);
}

void NavMeshRuntime::remove_carve(const std::string& owner) {
  if (carves_.erase(owner) == 0) return;
  if (baked_.count(owner)) release_baked(owner);
  refresh_blocked();
}

bool NavMeshRuntime::rebuild_if_due(double now) {
  // Two conditions: the periodic check must be due, and the change since the
  // last rebuild must exceed the threshold when it fires.
  if (now - last_rebuild_check_ < kRebuildPeriod - 1e-9) return false;
  last_rebuild_check_ = now;
  if (changed_area_ <= kRebuildThreshold) return false;
  rebuild();
  return true;
}

void NavMeshRuntime::rebuild() {
  std::vector<Disc> discs;
  for (const auto& [owner, carve] : carves_) discs.push_back({carve.center, carve.radius});
  mesh_ = build_navmesh(scene_, options_, discs);
  baked_ = carves_;
  blocked_.assign(mesh_.size(), 0);
  changed_area_ = 0.0;
  refresh_blocked();
  changed_area_ = 0.0;
  ++generation_;
}

}  // namespace navvi
