#include "treedecay/delaunay.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

// Bowyer-Watson with an infinite vertex instead of a super-triangle:
// the triangle soup is a closed "sphere" in which every hull edge is
// shared with a triangle containing kInfinite. Conflict of a query
// point with an infinite triangle degenerates to an orientation test
// against its hull edge (open-segment test when collinear), which is
// exactly what makes hull growth and collinear chains work without
// coordinate hacks. Predicates run a double-precision error-bound
// filter first and retry in long double; anything still inside the
// bound counts as degenerate (sign 0).

namespace treedecay {

namespace {

constexpr double kOrientErr = 3.3306690738754716e-16;     // (3+16e)e,  e = 2^-53
constexpr double kIncircleErr = 1.1102230246251577e-15;   // (10+96e)e, e = 2^-53
constexpr long double kOrientErrL = 1.6263032587282566e-19L;   // 3 * 2^-64
constexpr long double kIncircleErrL = 5.421010862427522e-19L;  // 10 * 2^-64

template <typename F>
F incircle_det(F ax, F ay, F bx, F by, F cx, F cy, F dx, F dy, F& permanent) {
  const F adx = ax - dx, ady = ay - dy;
  const F bdx = bx - dx, bdy = by - dy;
  const F cdx = cx - dx, cdy = cy - dy;
  const F ad2 = adx * adx + ady * ady;
  const F bd2 = bdx * bdx + bdy * bdy;
  const F cd2 = cdx * cdx + cdy * cdy;
  const F bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const F cdxady = cdx * ady, adxcdy = adx * cdy;
  const F adxbdy = adx * bdy, bdxady = bdx * ady;
  using std::abs;
  permanent = (abs(bdxcdy) + abs(cdxbdy)) * ad2 + (abs(cdxady) + abs(adxcdy)) * bd2 +
              (abs(adxbdy) + abs(bdxady)) * cd2;
  return ad2 * (bdxcdy - cdxbdy) + bd2 * (cdxady - adxcdy) + cd2 * (adxbdy - bdxady);
}

}  // namespace

int orient2d_sign(double ax, double ay, double bx, double by, double cx, double cy) {
  const double detl = (bx - ax) * (cy - ay);
  const double detr = (by - ay) * (cx - ax);
  const double det = detl - detr;
  const double detsum = std::fabs(detl) + std::fabs(detr);
  if (std::fabs(det) > kOrientErr * detsum) return det > 0 ? 1 : -1;

  const long double dl = (static_cast<long double>(bx) - ax) * (static_cast<long double>(cy) - ay);
  const long double dr = (static_cast<long double>(by) - ay) * (static_cast<long double>(cx) - ax);
  const long double d = dl - dr;
  const long double s = fabsl(dl) + fabsl(dr);
  if (fabsl(d) > kOrientErrL * s) return d > 0 ? 1 : -1;
  return 0;
}

int incircle_sign(double ax, double ay, double bx, double by, double cx, double cy,
                  double dx, double dy) {
  double perm = 0.0;
  const double det = incircle_det<double>(ax, ay, bx, by, cx, cy, dx, dy, perm);
  if (std::fabs(det) > kIncircleErr * perm) return det > 0 ? 1 : -1;

  long double perml = 0.0L;
  const long double detl = incircle_det<long double>(ax, ay, bx, by, cx, cy, dx, dy, perml);
  if (fabsl(detl) > kIncircleErrL * perml) return detl > 0 ? 1 : -1;
  return 0;
}

std::uint32_t Delaunay2D::insert(const Vec3& p) {
  XYKey key;
  std::memcpy(&key.x, &p.x, sizeof(double));
  std::memcpy(&key.y, &p.y, sizeof(double));
  if (auto it = dedup_.find(key); it != dedup_.end()) return it->second;

  const auto id = static_cast<std::uint32_t>(vertices_.size());
  vertices_.push_back(p);
  dedup_.emplace(key, id);

  if (!initialized_) {
    pending_.push_back(id);
    try_initialize();
    return id;
  }
  insert_vertex(id);
  return id;
}

std::uint32_t Delaunay2D::new_tri(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
  std::uint32_t idx;
  if (!free_.empty()) {
    idx = free_.back();
    free_.pop_back();
    tris_[idx] = Tri{{a, b, c}, {kInfinite, kInfinite, kInfinite}, true};
  } else {
    idx = static_cast<std::uint32_t>(tris_.size());
    tris_.push_back(Tri{{a, b, c}, {kInfinite, kInfinite, kInfinite}, true});
  }
  return idx;
}

int Delaunay2D::edge_index(const Tri& t, std::uint32_t u, std::uint32_t v) {
  for (int i = 0; i < 3; ++i) {
    const std::uint32_t a = t.v[(i + 1) % 3];
    const std::uint32_t b = t.v[(i + 2) % 3];
    if ((a == u && b == v) || (a == v && b == u)) return i;
  }
  return -1;
}

bool Delaunay2D::try_initialize() {
  if (pending_.size() < 3) return false;
  // All pending vertices are xy-distinct; look for a non-collinear third.
  const Vec3& p0 = vertices_[pending_[0]];
  const Vec3& p1 = vertices_[pending_[1]];
  std::size_t third = pending_.size();
  int orient = 0;
  for (std::size_t k = 2; k < pending_.size(); ++k) {
    orient = orient2d_sign(p0.x, p0.y, p1.x, p1.y, vertices_[pending_[k]].x,
                           vertices_[pending_[k]].y);
    if (orient != 0) {
      third = k;
      break;
    }
  }
  if (third == pending_.size()) return false;

  std::uint32_t a = pending_[0], b = pending_[1], c = pending_[third];
  if (orient < 0) std::swap(b, c);

  const std::uint32_t t0 = new_tri(a, b, c);
  const std::uint32_t t1 = new_tri(b, a, kInfinite);
  const std::uint32_t t2 = new_tri(c, b, kInfinite);
  const std::uint32_t t3 = new_tri(a, c, kInfinite);
  const std::uint32_t all[4] = {t0, t1, t2, t3};
  for (std::uint32_t ti : all) {
    for (int i = 0; i < 3; ++i) {
      const std::uint32_t u = tris_[ti].v[(i + 1) % 3];
      const std::uint32_t v = tris_[ti].v[(i + 2) % 3];
      for (std::uint32_t tj : all) {
        if (tj == ti) continue;
        if (edge_index(tris_[tj], u, v) >= 0) {
          tris_[ti].nb[i] = tj;
          break;
        }
      }
    }
  }
  initialized_ = true;
  hint_ = t0;

  std::vector<std::uint32_t> rest;
  for (std::size_t k = 2; k < pending_.size(); ++k)
    if (k != third) rest.push_back(pending_[k]);
  pending_.clear();
  for (std::uint32_t id : rest) insert_vertex(id);
  return true;
}

bool Delaunay2D::in_conflict(const Tri& t, double x, double y) const {
  int inf = -1;
  for (int i = 0; i < 3; ++i)
    if (t.v[i] == kInfinite) inf = i;
  if (inf < 0) {
    const Vec3& a = vertices_[t.v[0]];
    const Vec3& b = vertices_[t.v[1]];
    const Vec3& c = vertices_[t.v[2]];
    return incircle_sign(a.x, a.y, b.x, b.y, c.x, c.y, x, y) > 0;
  }
  const Vec3& u = vertices_[t.v[(inf + 1) % 3]];
  const Vec3& v = vertices_[t.v[(inf + 2) % 3]];
  const int o = orient2d_sign(u.x, u.y, v.x, v.y, x, y);
  if (o != 0) return o > 0;
  // Collinear with the hull edge: conflict only strictly inside the
  // open segment.
  const long double d1 = (static_cast<long double>(x) - u.x) * (static_cast<long double>(v.x) - u.x) +
                         (static_cast<long double>(y) - u.y) * (static_cast<long double>(v.y) - u.y);
  const long double d2 = (static_cast<long double>(x) - v.x) * (static_cast<long double>(u.x) - v.x) +
                         (static_cast<long double>(y) - v.y) * (static_cast<long double>(u.y) - v.y);
  return d1 > 0 && d2 > 0;
}

std::uint32_t Delaunay2D::find_conflict(double x, double y) const {
  // Orientation walk from the hint, then a linear sweep as fallback.
  std::uint32_t cur = hint_;
  if (cur >= tris_.size() || !tris_[cur].alive) {
    cur = kInfinite;
    for (std::uint32_t i = 0; i < tris_.size(); ++i)
      if (tris_[i].alive && !has_infinite(tris_[i])) {
        cur = i;
        break;
      }
  }
  std::size_t steps_left = 2 * tris_.size() + 16;
  while (cur != kInfinite && steps_left-- > 0) {
    const Tri& t = tris_[cur];
    if (has_infinite(t)) {
      if (in_conflict(t, x, y)) return cur;
      // March around the hull cycle of infinite triangles; a point
      // outside the hull conflicts with at least one of them.
      int inf = 0;
      while (t.v[inf] != kInfinite) ++inf;
      cur = t.nb[(inf + 1) % 3];
      continue;
    }
    int exit_edge = -1;
    for (int i = 0; i < 3; ++i) {
      const Vec3& u = vertices_[t.v[(i + 1) % 3]];
      const Vec3& v = vertices_[t.v[(i + 2) % 3]];
      if (orient2d_sign(u.x, u.y, v.x, v.y, x, y) < 0) {
        exit_edge = i;
        break;
      }
    }
    if (exit_edge < 0) {
      // The query lies in this triangle; in-conflict unless degenerate.
      if (in_conflict(t, x, y)) return cur;
      break;
    }
    cur = t.nb[exit_edge];
  }
  for (std::uint32_t i = 0; i < tris_.size(); ++i)
    if (tris_[i].alive && in_conflict(tris_[i], x, y)) return i;
  return kInfinite;
}

void Delaunay2D::insert_vertex(std::uint32_t id) {
  const double x = vertices_[id].x;
  const double y = vertices_[id].y;
  const std::uint32_t seed = find_conflict(x, y);
  if (seed == kInfinite) return;  // degenerate tie; point keeps its vertex id only

  // Grow the conflict cavity.
  std::vector<std::uint32_t> cavity{seed};
  std::vector<std::uint32_t> stack{seed};
  std::unordered_map<std::uint32_t, bool> visited;
  visited[seed] = true;
  while (!stack.empty()) {
    const std::uint32_t ti = stack.back();
    stack.pop_back();
    for (int i = 0; i < 3; ++i) {
      const std::uint32_t n = tris_[ti].nb[i];
      if (n == kInfinite || visited.count(n)) continue;
      visited[n] = true;
      if (tris_[n].alive && in_conflict(tris_[n], x, y)) {
        cavity.push_back(n);
        stack.push_back(n);
      }
    }
  }
  std::unordered_map<std::uint32_t, bool> in_cav;
  for (std::uint32_t t : cavity) in_cav[t] = true;

  struct BoundaryEdge {
    std::uint32_t u, v, outside;
  };
  std::vector<BoundaryEdge> boundary;
  for (std::uint32_t ti : cavity) {
    for (int i = 0; i < 3; ++i) {
      const std::uint32_t n = tris_[ti].nb[i];
      if (n != kInfinite && in_cav.count(n)) continue;
      boundary.push_back({tris_[ti].v[(i + 1) % 3], tris_[ti].v[(i + 2) % 3], n});
    }
  }

  // Star the cavity boundary from the new vertex.
  std::unordered_map<std::uint32_t, std::uint32_t> at_u, at_v;
  std::vector<std::uint32_t> created;
  created.reserve(boundary.size());
  for (const auto& be : boundary) {
    const std::uint32_t nt = new_tri(be.u, be.v, id);
    if (!at_u.emplace(be.u, nt).second || !at_v.emplace(be.v, nt).second)
      throw std::runtime_error("delaunay: degenerate (pinched) insertion cavity");
    created.push_back(nt);
    tris_[nt].nb[2] = be.outside;
    if (be.outside != kInfinite) {
      const int j = edge_index(tris_[be.outside], be.u, be.v);
      tris_[be.outside].nb[j] = nt;
    }
  }
  for (std::size_t k = 0; k < created.size(); ++k) {
    Tri& nt = tris_[created[k]];
    nt.nb[0] = at_u.at(nt.v[1]);  // across (v, id)
    nt.nb[1] = at_v.at(nt.v[0]);  // across (id, u)
  }
  for (std::uint32_t ti : cavity) {
    tris_[ti].alive = false;
    free_.push_back(ti);
  }
  hint_ = created.front();
}

Delaunay2D::Facet Delaunay2D::locate(double x, double y) const {
  if (!initialized_) throw std::logic_error("delaunay: locate before triangulation exists");
  std::uint32_t cur = hint_;
  if (cur >= tris_.size() || !tris_[cur].alive) cur = kInfinite;
  if (cur != kInfinite && has_infinite(tris_[cur])) {
    int inf = 0;
    while (tris_[cur].v[inf] != kInfinite) ++inf;
    cur = tris_[cur].nb[inf];
  }
  if (cur == kInfinite || !tris_[cur].alive || has_infinite(tris_[cur])) {
    cur = kInfinite;
    for (std::uint32_t i = 0; i < tris_.size(); ++i)
      if (tris_[i].alive && !has_infinite(tris_[i])) {
        cur = i;
        break;
      }
    if (cur == kInfinite) throw std::logic_error("delaunay: no finite triangles");
  }

  std::size_t steps_left = 2 * tris_.size() + 16;
  while (steps_left-- > 0) {
    const Tri& t = tris_[cur];
    int exit_edge = -1;
    for (int i = 0; i < 3; ++i) {
      const Vec3& u = vertices_[t.v[(i + 1) % 3]];
      const Vec3& v = vertices_[t.v[(i + 2) % 3]];
      if (orient2d_sign(u.x, u.y, v.x, v.y, x, y) < 0) {
        exit_edge = i;
        break;
      }
    }
    if (exit_edge < 0) {
      hint_ = cur;
      return Facet{t.v, true};
    }
    const std::uint32_t n = t.nb[exit_edge];
    if (n == kInfinite || has_infinite(tris_[n])) {
      hint_ = cur;
      return Facet{t.v, false};  // left the hull through this facet's edge
    }
    cur = n;
  }

  // Fallback sweep: containing triangle, else nearest by centroid.
  std::uint32_t best = kInfinite;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < tris_.size(); ++i) {
    const Tri& t = tris_[i];
    if (!t.alive || has_infinite(t)) continue;
    const Vec3& a = vertices_[t.v[0]];
    const Vec3& b = vertices_[t.v[1]];
    const Vec3& c = vertices_[t.v[2]];
    if (orient2d_sign(a.x, a.y, b.x, b.y, x, y) >= 0 &&
        orient2d_sign(b.x, b.y, c.x, c.y, x, y) >= 0 &&
        orient2d_sign(c.x, c.y, a.x, a.y, x, y) >= 0)
      return Facet{t.v, true};
    const double mx = (a.x + b.x + c.x) / 3 - x;
    const double my = (a.y + b.y + c.y) / 3 - y;
    const double d = mx * mx + my * my;
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return Facet{tris_[best].v, false};
}

Triangulation Delaunay2D::finalize() const {
  Triangulation out;
  out.vertices = vertices_;
  std::vector<std::int32_t> remap(tris_.size(), -1);
  for (std::uint32_t i = 0; i < tris_.size(); ++i) {
    const Tri& t = tris_[i];
    if (!t.alive) continue;
    if (has_infinite(t)) {
      ++out.hull_vertex_count;  // one hull edge (== one hull vertex) each
      continue;
    }
    remap[i] = static_cast<std::int32_t>(out.triangles.size());
    out.triangles.push_back(t.v);
  }
  for (std::uint32_t i = 0; i < tris_.size(); ++i) {
    if (remap[i] < 0) continue;
    const Tri& t = tris_[i];
    std::array<std::int32_t, 3> nb{-1, -1, -1};
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t n = t.nb[k];
      if (n != kInfinite && tris_[n].alive && !has_infinite(tris_[n])) nb[k] = remap[n];
    }
    out.neighbors.push_back(nb);
  }
  return out;
}

Triangulation delaunay_triangulate(const std::vector<Vec3>& points) {
  Delaunay2D dt;
  for (const auto& p : points) dt.insert(p);
  if (dt.vertex_count() < 3)
    throw std::invalid_argument("delaunay: need at least 3 distinct points");
  if (!dt.ready()) throw std::invalid_argument("delaunay: all points are collinear");
  return dt.finalize();
}

}  // namespace treedecay
