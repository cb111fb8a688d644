#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "treedecay/delaunay.hpp"
#include "treedecay/rng.hpp"

using namespace treedecay;

namespace {

// Brute-force empty-circumcircle check: circumcenter from the
// perpendicular-bisector 2x2 solve, then every other point must stay
// outside (tolerance scaled by the circumradius).
bool triangle_is_delaunay(const std::vector<Vec3>& pts, const std::array<std::uint32_t, 3>& t) {
  const Vec3 &a = pts[t[0]], &b = pts[t[1]], &c = pts[t[2]];
  const long double abx = b.x - a.x, aby = b.y - a.y;
  const long double acx = c.x - a.x, acy = c.y - a.y;
  const long double det = 2.0L * (abx * acy - aby * acx);
  if (det == 0.0L) return false;  // degenerate triangle
  const long double ab2 = abx * abx + aby * aby;
  const long double ac2 = acx * acx + acy * acy;
  const long double ux = (acy * ab2 - aby * ac2) / det;
  const long double uy = (abx * ac2 - acx * ab2) / det;
  const long double r2 = ux * ux + uy * uy;
  const long double tol = 1e-9L * (r2 + 1.0L);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == t[0] || i == t[1] || i == t[2]) continue;
    const long double dx = pts[i].x - a.x - ux;
    const long double dy = pts[i].y - a.y - uy;
    if (dx * dx + dy * dy < r2 - tol) return false;
  }
  return true;
}

// Monotone chain, counting collinear boundary points as hull vertices
// (matches the Euler identity convention).
std::size_t hull_vertex_count(std::vector<Vec3> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec3& p, const Vec3& q) {
    return p.x < q.x || (p.x == q.x && p.y < q.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec3& p, const Vec3& q) { return p.x == q.x && p.y == q.y; }),
            pts.end());
  const auto cross = [](const Vec3& o, const Vec3& p, const Vec3& q) {
    return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
  };
  std::vector<Vec3> hull;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t base = hull.size();
    for (const Vec3& p : pts) {
      while (hull.size() >= base + 2 &&
             cross(hull[hull.size() - 2], hull[hull.size() - 1], p) < 0)
        hull.pop_back();
      hull.push_back(p);
    }
    hull.pop_back();
    std::reverse(pts.begin(), pts.end());
  }
  return hull.size();
}

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(0, 10)});
  return pts;
}

}  // namespace

TEST_CASE("delaunay: three points give one triangle") {
  const Triangulation tri = delaunay_triangulate({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  CHECK(tri.triangles.size() == 1);
  CHECK(tri.hull_vertex_count == 3);
}

TEST_CASE("delaunay: unit square gives two triangles passing the circle test") {
  const std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  const Triangulation tri = delaunay_triangulate(pts);
  REQUIRE(tri.triangles.size() == 2);
  for (const auto& t : tri.triangles) CHECK(triangle_is_delaunay(pts, t));
}

TEST_CASE("delaunay: error conditions") {
  CHECK_THROWS_AS(delaunay_triangulate({{0, 0, 0}, {1, 1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(delaunay_triangulate({{0, 0, 0}, {1, 1, 0}, {2, 2, 0}, {3, 3, 0}}),
                  std::invalid_argument);
}

TEST_CASE("delaunay: 50 random points pass the brute-force oracle") {
  const auto pts = random_points(50, 1234);
  const Triangulation tri = delaunay_triangulate(pts);
  CHECK(tri.vertices.size() == 50);
  for (const auto& t : tri.triangles) CHECK(triangle_is_delaunay(pts, t));
}

TEST_CASE("delaunay: Euler count 2n-2-h on random sets") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto pts = random_points(40, seed);
    const Triangulation tri = delaunay_triangulate(pts);
    const std::size_t h = hull_vertex_count(pts);
    CHECK(tri.hull_vertex_count == h);
    CHECK(tri.triangles.size() == 2 * pts.size() - 2 - h);
  }
}

TEST_CASE("delaunay: regular grid with collinear hull chains") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 5; ++j) pts.push_back({static_cast<double>(i), static_cast<double>(j), 0});
  const Triangulation tri = delaunay_triangulate(pts);
  // grid hull has every boundary point on it
  const std::size_t h = 2 * 6 + 2 * 5 - 4;
  CHECK(tri.hull_vertex_count == h);
  CHECK(tri.triangles.size() == 2 * pts.size() - 2 - h);
  for (const auto& t : tri.triangles) CHECK(triangle_is_delaunay(pts, t));
}

TEST_CASE("delaunay: all triangles counterclockwise, vertex set preserved") {
  const auto pts = random_points(30, 99);
  const Triangulation tri = delaunay_triangulate(pts);
  std::vector<bool> used(pts.size(), false);
  for (const auto& t : tri.triangles) {
    const Vec3 &a = tri.vertices[t[0]], &b = tri.vertices[t[1]], &c = tri.vertices[t[2]];
    CHECK(orient2d_sign(a.x, a.y, b.x, b.y, c.x, c.y) > 0);
    for (auto v : t) used[v] = true;
  }
  CHECK(std::count(used.begin(), used.end(), false) == 0);
}

TEST_CASE("delaunay: incremental locate finds the containing facet") {
  Delaunay2D dt;
  for (const auto& p : random_points(60, 5150)) dt.insert(p);
  REQUIRE(dt.ready());
  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-49, 49), y = rng.uniform(-49, 49);
    const auto facet = dt.locate(x, y);
    const auto& vs = dt.vertices();
    if (facet.inside) {
      const Vec3 &a = vs[facet.v[0]], &b = vs[facet.v[1]], &c = vs[facet.v[2]];
      CHECK(orient2d_sign(a.x, a.y, b.x, b.y, x, y) >= 0);
      CHECK(orient2d_sign(b.x, b.y, c.x, c.y, x, y) >= 0);
      CHECK(orient2d_sign(c.x, c.y, a.x, a.y, x, y) >= 0);
    }
  }
}

TEST_CASE("delaunay: duplicate points merge") {
  const Triangulation tri =
      delaunay_triangulate({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 0}, {1, 0, 0}});
  CHECK(tri.vertices.size() == 3);
  CHECK(tri.triangles.size() == 1);
}
