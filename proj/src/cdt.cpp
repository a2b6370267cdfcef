#include "cdt.hpp"

#include <deque>

#include "navvi/error.hpp"

namespace navvi::detail {

namespace {

std::int64_t orient(LatticePoint a, LatticePoint b, LatticePoint c) {
  return (b.x - a.x) * (c.z - a.z) - (b.z - a.z) * (c.x - a.x);
}

// > 0 when d lies strictly inside the circumcircle of counter-clockwise (a,b,c).
int incircle(LatticePoint a, LatticePoint b, LatticePoint c, LatticePoint d) {
  using i128 = __int128;
  const i128 adx = a.x - d.x, adz = a.z - d.z;
  const i128 bdx = b.x - d.x, bdz = b.z - d.z;
  const i128 cdx = c.x - d.x, cdz = c.z - d.z;
  const i128 det = (adx * adx + adz * adz) * (bdx * cdz - cdx * bdz) +
                   (bdx * bdx + bdz * bdz) * (cdx * adz - adx * cdz) +
                   (cdx * cdx + cdz * cdz) * (adx * bdz - bdx * adz);
  return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

int sign(std::int64_t v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

bool cross_properly(LatticePoint p, LatticePoint r, LatticePoint a, LatticePoint b) {
  if (p == a || p == b || r == a || r == b) return false;
  const int s1 = sign(orient(a, b, p));
  const int s2 = sign(orient(a, b, r));
  const int s3 = sign(orient(p, r, a));
  const int s4 = sign(orient(p, r, b));
  return s1 * s2 < 0 && s3 * s4 < 0;
}

inline int next(int i) { return (i + 1) % 3; }
inline int prev(int i) { return (i + 2) % 3; }

}  // namespace

ConstrainedDelaunay::ConstrainedDelaunay(LatticePoint lo, LatticePoint hi) {
  pts_ = {lo, {hi.x, lo.z}, hi, {lo.x, hi.z}};
  vertex_tri_ = {0, 0, 0, 1};
  Triangle t0;
  t0.v = {0, 1, 2};
  t0.n = {-1, 1, -1};
  t0.fixed = {true, false, true};
  Triangle t1;
  t1.v = {0, 2, 3};
  t1.n = {-1, -1, 0};
  t1.fixed = {true, true, false};
  tris_ = {t0, t1};
}

ConstrainedDelaunay::Located ConstrainedDelaunay::locate(LatticePoint p) const {
  int t = last_tri_;
  const std::size_t cap = tris_.size() * 3 + 64;
  for (std::size_t step = 0; step < cap; ++step) {
    const Triangle& tri = tris_[t];
    bool moved = false;
    for (int kk = 0; kk < 3; ++kk) {
      const int k = (kk + static_cast<int>(step)) % 3;
      if (orient(pts_[tri.v[next(k)]], pts_[tri.v[prev(k)]], p) < 0) {
        if (tri.n[k] < 0) throw Error("triangulation: point outside the domain");
        t = tri.n[k];
        moved = true;
        break;
      }
    }
    if (moved) continue;
    Located loc;
    loc.tri = t;
    for (int k = 0; k < 3; ++k) {
      if (pts_[tri.v[k]] == p) {
        loc.at_vertex = tri.v[k];
        return loc;
      }
    }
    for (int k = 0; k < 3; ++k) {
      if (orient(pts_[tri.v[next(k)]], pts_[tri.v[prev(k)]], p) == 0) loc.on_edge = k;
    }
    return loc;
  }
  throw Error("triangulation: point location did not converge");
}

int ConstrainedDelaunay::insert_point(LatticePoint p) {
  const Located loc = locate(p);
  if (loc.at_vertex >= 0) return loc.at_vertex;
  const int id = static_cast<int>(pts_.size());
  pts_.push_back(p);
  vertex_tri_.push_back(loc.tri);
  if (loc.on_edge >= 0) {
    split_edge(loc.tri, loc.on_edge, id);
  } else {
    split_triangle(loc.tri, id);
  }
  last_tri_ = vertex_tri_[id];
  return id;
}

void ConstrainedDelaunay::relink(int tri, int old_neighbor, int new_neighbor) {
  if (tri < 0) return;
  for (int& n : tris_[tri].n) {
    if (n == old_neighbor) {
      n = new_neighbor;
      return;
    }
  }
}

void ConstrainedDelaunay::split_triangle(int t, int p) {
  const Triangle old = tris_[t];
  const int a = old.v[0], b = old.v[1], c = old.v[2];
  const int t1 = t;
  const int t2 = static_cast<int>(tris_.size());
  const int t3 = t2 + 1;
  tris_.resize(tris_.size() + 2);

  tris_[t1].v = {a, b, p};
  tris_[t1].n = {t2, t3, old.n[2]};
  tris_[t1].fixed = {false, false, old.fixed[2]};
  tris_[t2].v = {b, c, p};
  tris_[t2].n = {t3, t1, old.n[0]};
  tris_[t2].fixed = {false, false, old.fixed[0]};
  tris_[t3].v = {c, a, p};
  tris_[t3].n = {t1, t2, old.n[1]};
  tris_[t3].fixed = {false, false, old.fixed[1]};
  relink(old.n[0], t, t2);
  relink(old.n[1], t, t3);

  vertex_tri_[a] = t1;
  vertex_tri_[b] = t1;
  vertex_tri_[c] = t2;
  vertex_tri_[p] = t1;

  std::vector<std::pair<int, int>> stack = {{t1, 2}, {t2, 2}, {t3, 2}};
  legalize(stack);
}

void ConstrainedDelaunay::split_edge(int t, int k, int p) {
  const Triangle old_t = tris_[t];
  const int a = old_t.v[k], b = old_t.v[next(k)], c = old_t.v[prev(k)];
  const int u = old_t.n[k];
  const bool edge_fixed = old_t.fixed[k];
  const int n_ca = old_t.n[next(k)];
  const bool f_ca = old_t.fixed[next(k)];
  const int n_ab = old_t.n[prev(k)];
  const bool f_ab = old_t.fixed[prev(k)];

  const int t1 = t;
  const int t2 = static_cast<int>(tris_.size());
  tris_.emplace_back();
  int u1 = -1;
  int u2 = -1;
  if (u >= 0) {
    u1 = u;
    u2 = static_cast<int>(tris_.size());
    tris_.emplace_back();
  }

  tris_[t1].v = {a, b, p};
  tris_[t1].n = {u2, t2, n_ab};
  tris_[t1].fixed = {edge_fixed, false, f_ab};
  tris_[t2].v = {a, p, c};
  tris_[t2].n = {u1, n_ca, t1};
  tris_[t2].fixed = {edge_fixed, f_ca, false};
  relink(n_ca, t, t2);
  vertex_tri_[a] = t1;
  vertex_tri_[b] = t1;
  vertex_tri_[c] = t2;
  vertex_tri_[p] = t1;

  std::vector<std::pair<int, int>> stack = {{t1, 2}, {t2, 1}};
  if (u >= 0) {
    const Triangle old_u = tris_[u];
    int j = 0;
    while (old_u.n[j] != t) ++j;
    const int d = old_u.v[j];
    const int n_bd = old_u.n[next(j)];
    const bool f_bd = old_u.fixed[next(j)];
    const int n_dc = old_u.n[prev(j)];
    const bool f_dc = old_u.fixed[prev(j)];
    tris_[u1].v = {d, c, p};
    tris_[u1].n = {t2, u2, n_dc};
    tris_[u1].fixed = {edge_fixed, false, f_dc};
    tris_[u2].v = {d, p, b};
    tris_[u2].n = {t1, n_bd, u1};
    tris_[u2].fixed = {edge_fixed, f_bd, false};
    relink(n_bd, u, u2);
    vertex_tri_[d] = u1;
    stack.emplace_back(u1, 2);
    stack.emplace_back(u2, 1);
  }
  legalize(stack);
}

bool ConstrainedDelaunay::locally_delaunay(int t, int i) const {
  const Triangle& tri = tris_[t];
  const int u = tri.n[i];
  if (u < 0) return true;
  const Triangle& other = tris_[u];
  int j = 0;
  while (other.n[j] != t) ++j;
  return incircle(pts_[tri.v[0]], pts_[tri.v[1]], pts_[tri.v[2]], pts_[other.v[j]]) <= 0;
}

void ConstrainedDelaunay::legalize(std::vector<std::pair<int, int>>& stack) {
  while (!stack.empty()) {
    const auto [t, i] = stack.back();
    stack.pop_back();
    if (tris_[t].fixed[i] || tris_[t].n[i] < 0) continue;
    if (locally_delaunay(t, i)) continue;
    const int u = tris_[t].n[i];
    flip(t, i);
    // The inserted vertex now sits at index 0 of t and index 2 of u.
    stack.emplace_back(t, 0);
    stack.emplace_back(u, 2);
  }
}

void ConstrainedDelaunay::flip(int t, int i) {
  const Triangle tt = tris_[t];
  const int u = tt.n[i];
  const Triangle uu = tris_[u];
  int j = 0;
  while (uu.n[j] != t) ++j;

  const int p = tt.v[i], q1 = tt.v[next(i)], q2 = tt.v[prev(i)];
  const int r = uu.v[j];
  const int na = tt.n[next(i)];  // edge (q2, p)
  const int nb = tt.n[prev(i)];  // edge (p, q1)
  const int nc = uu.n[next(j)];  // edge (q1, r)
  const int nd = uu.n[prev(j)];  // edge (r, q2)

  tris_[t].v = {p, q1, r};
  tris_[t].n = {nc, u, nb};
  tris_[t].fixed = {uu.fixed[next(j)], false, tt.fixed[prev(i)]};
  tris_[u].v = {r, q2, p};
  tris_[u].n = {na, t, nd};
  tris_[u].fixed = {tt.fixed[next(i)], false, uu.fixed[prev(j)]};
  relink(nc, u, t);
  relink(na, t, u);

  vertex_tri_[p] = t;
  vertex_tri_[q1] = t;
  vertex_tri_[r] = t;
  vertex_tri_[q2] = u;
}

std::vector<int> ConstrainedDelaunay::triangles_around(int v) const {
  std::vector<int> out;
  const int start = vertex_tri_[v];
  auto index_of = [&](int t) {
    for (int k = 0; k < 3; ++k) {
      if (tris_[t].v[k] == v) return k;
    }
    throw Error("triangulation: vertex/triangle map out of sync");
  };
  int t = start;
  do {
    out.push_back(t);
    t = tris_[t].n[next(index_of(t))];
  } while (t >= 0 && t != start);
  if (t < 0) {
    t = tris_[start].n[prev(index_of(start))];
    while (t >= 0) {
      out.push_back(t);
      t = tris_[t].n[prev(index_of(t))];
    }
  }
  return out;
}

bool ConstrainedDelaunay::find_edge(int a, int b, int& tri, int& idx) const {
  for (int t : triangles_around(a)) {
    const Triangle& tr = tris_[t];
    for (int k = 0; k < 3; ++k) {
      const int x = tr.v[next(k)];
      const int y = tr.v[prev(k)];
      if ((x == a && y == b) || (x == b && y == a)) {
        tri = t;
        idx = k;
        return true;
      }
    }
  }
  return false;
}

bool ConstrainedDelaunay::has_edge(int a, int b) const {
  int t = 0, k = 0;
  return find_edge(a, b, t, k);
}

bool ConstrainedDelaunay::is_fixed_edge(int a, int b) const {
  int t = 0, k = 0;
  return find_edge(a, b, t, k) && tris_[t].fixed[k];
}

void ConstrainedDelaunay::insert_constraint(int a, int b) {
  if (a == b) return;
  int t = 0, k = 0;
  auto fix = [&](int tri, int idx) {
    tris_[tri].fixed[idx] = true;
    const int u = tris_[tri].n[idx];
    if (u >= 0) {
      for (int j = 0; j < 3; ++j) {
        if (tris_[u].n[j] == tri) tris_[u].fixed[j] = true;
      }
    }
  };
  if (find_edge(a, b, t, k)) {
    fix(t, k);
    return;
  }

  const LatticePoint pa = pts_[a];
  const LatticePoint pb = pts_[b];
  auto ahead = [&](int x) {
    const LatticePoint px = pts_[x];
    return (px.x - pa.x) * (pb.x - pa.x) + (px.z - pa.z) * (pb.z - pa.z) > 0;
  };

  // Triangle around a whose opposite edge the segment leaves through.
  int cur = -1;
  int cur_idx = -1;
  for (int tri : triangles_around(a)) {
    const Triangle& tr = tris_[tri];
    int i = 0;
    while (tr.v[i] != a) ++i;
    const int x = tr.v[next(i)];
    const int y = tr.v[prev(i)];
    const std::int64_t ox = orient(pa, pts_[x], pb);
    const std::int64_t oy = orient(pa, pts_[y], pb);
    if (ox == 0 && ahead(x)) {
      insert_constraint(a, x);
      insert_constraint(x, b);
      return;
    }
    if (oy == 0 && ahead(y)) {
      insert_constraint(a, y);
      insert_constraint(y, b);
      return;
    }
    if (ox > 0 && oy < 0) {
      cur = tri;
      cur_idx = i;
      break;
    }
  }
  if (cur < 0) throw Error("triangulation: constraint start not found");

  std::deque<std::pair<int, int>> crossed;
  for (;;) {
    const Triangle& tr = tris_[cur];
    if (tr.fixed[cur_idx]) throw Error("triangulation: intersecting constraints");
    crossed.emplace_back(tr.v[next(cur_idx)], tr.v[prev(cur_idx)]);
    const int u = tr.n[cur_idx];
    const Triangle& ut = tris_[u];
    int j = 0;
    while (ut.n[j] != cur) ++j;
    const int w = ut.v[j];
    if (w == b) break;
    const int ow = sign(orient(pa, pb, pts_[w]));
    if (ow == 0) {
      insert_constraint(a, w);
      insert_constraint(w, b);
      return;
    }
    const int s1 = ut.v[next(j)];
    cur = u;
    cur_idx = sign(orient(pa, pb, pts_[s1])) != ow ? prev(j) : next(j);
  }

  std::vector<std::pair<int, int>> fresh;
  std::size_t guard = 0;
  const std::size_t guard_cap = 64 * (crossed.size() + 1) * (crossed.size() + 1) + 1024;
  while (!crossed.empty()) {
    if (++guard > guard_cap) throw Error("triangulation: constraint recovery stalled");
    const auto [x, y] = crossed.front();
    crossed.pop_front();
    int tri = 0, i = 0;
    if (!find_edge(x, y, tri, i)) throw Error("triangulation: lost a crossed edge");
    const Triangle& tr = tris_[tri];
    const int u = tr.n[i];
    const Triangle& ut = tris_[u];
    int j = 0;
    while (ut.n[j] != tri) ++j;
    const int p = tr.v[i], q1 = tr.v[next(i)], q2 = tr.v[prev(i)], r = ut.v[j];
    if (orient(pts_[p], pts_[q1], pts_[r]) > 0 && orient(pts_[r], pts_[q2], pts_[p]) > 0) {
      flip(tri, i);
      if (cross_properly(pts_[p], pts_[r], pa, pb)) {
        crossed.emplace_back(p, r);
      } else {
        fresh.emplace_back(p, r);
      }
    } else {
      crossed.emplace_back(x, y);
    }
  }

  if (!find_edge(a, b, t, k)) throw Error("triangulation: constraint not recovered");
  fix(t, k);

  bool swapped = true;
  while (swapped) {
    swapped = false;
    for (auto& e : fresh) {
      if ((e.first == a && e.second == b) || (e.first == b && e.second == a)) continue;
      int tri = 0, i = 0;
      if (!find_edge(e.first, e.second, tri, i)) continue;
      if (tris_[tri].fixed[i] || locally_delaunay(tri, i)) continue;
      const int p = tris_[tri].v[i];
      const int u = tris_[tri].n[i];
      int j = 0;
      while (tris_[u].n[j] != tri) ++j;
      const int r = tris_[u].v[j];
      flip(tri, i);
      e = {p, r};
      swapped = true;
    }
  }
}

void ConstrainedDelaunay::restore_delaunay() {
  std::vector<std::pair<int, int>> stack;
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
    for (int i = 0; i < 3; ++i) {
      if (tris_[t].n[i] > t) stack.emplace_back(t, i);
    }
  }
  while (!stack.empty()) {
    const auto [t, i] = stack.back();
    stack.pop_back();
    if (tris_[t].fixed[i] || tris_[t].n[i] < 0 || locally_delaunay(t, i)) continue;
    const int u = tris_[t].n[i];
    flip(t, i);
    stack.emplace_back(t, 0);
    stack.emplace_back(t, 2);
    stack.emplace_back(u, 0);
    stack.emplace_back(u, 2);
  }
}

bool ConstrainedDelaunay::is_constrained_delaunay() const {
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
    for (int i = 0; i < 3; ++i) {
      if (!tris_[t].fixed[i] && !locally_delaunay(t, i)) return false;
    }
  }
  return true;
}

}  // namespace navvi::detail
