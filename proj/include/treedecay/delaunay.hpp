#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "treedecay/point_cloud.hpp"

namespace treedecay {

// Finite snapshot of a 2D Delaunay triangulation. Vertices carry their
// elevation so the structure doubles as a TIN. Triangles are
// counterclockwise; neighbors[t][i] is the triangle across the edge
// opposite triangles[t][i], or -1 on the hull.
struct Triangulation {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<std::array<std::int32_t, 3>> neighbors;
  std::size_t hull_vertex_count = 0;
};

// Sign predicates with a floating-point filter and a long-double
// fallback; ties inside the final error bound report 0.
int orient2d_sign(double ax, double ay, double bx, double by, double cx, double cy);
int incircle_sign(double ax, double ay, double bx, double by, double cx, double cy,
                  double dx, double dy);

// Incremental Delaunay builder (Bowyer-Watson with an infinite vertex,
// so hull handling needs no super-triangle). Exact xy duplicates merge
// into one vertex. Insertion order only affects internal labels, not
// the resulting triangulation.
class Delaunay2D {
 public:
  static constexpr std::uint32_t kInfinite = 0xFFFFFFFFu;

  // Returns the vertex id (existing id for a duplicate xy).
  std::uint32_t insert(const Vec3& p);

  std::size_t vertex_count() const { return vertices_.size(); }
  const std::vector<Vec3>& vertices() const { return vertices_; }

  // True once three non-collinear vertices have been inserted.
  bool ready() const { return initialized_; }

  struct Facet {
    std::array<std::uint32_t, 3> v{};  // vertex ids of a finite triangle
    bool inside = false;               // false: query was outside the hull
  };

  // Containing finite facet for an interior query; for a query outside
  // the hull, the finite facet adjacent to the nearest visible hull
  // edge. Requires ready().
  Facet locate(double x, double y) const;

  Triangulation finalize() const;

 private:
  struct Tri {
    std::array<std::uint32_t, 3> v;
    std::array<std::uint32_t, 3> nb;  // neighbor across edge opposite v[i]
    bool alive = true;
  };

  bool has_infinite(const Tri& t) const {
    return t.v[0] == kInfinite || t.v[1] == kInfinite || t.v[2] == kInfinite;
  }
  bool in_conflict(const Tri& t, double x, double y) const;
  bool try_initialize();
  void insert_vertex(std::uint32_t id);
  std::uint32_t new_tri(std::uint32_t a, std::uint32_t b, std::uint32_t c);
  static int edge_index(const Tri& t, std::uint32_t u, std::uint32_t v);
  std::uint32_t find_conflict(double x, double y) const;

  struct XYKey {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    bool operator==(const XYKey&) const = default;
  };
  struct XYKeyHash {
    std::size_t operator()(const XYKey& k) const {
      std::uint64_t h = k.x * 0x9E3779B97F4A7C15ULL;
      h ^= k.y + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };

  std::vector<Vec3> vertices_;
  std::vector<Tri> tris_;
  std::vector<std::uint32_t> free_;
  std::vector<std::uint32_t> pending_;  // vertices buffered before init
  bool initialized_ = false;
  mutable std::uint32_t hint_ = 0;
  std::unordered_map<XYKey, std::uint32_t, XYKeyHash> dedup_;  // exact-xy merge
};

// Full triangulation of a point set. Throws std::invalid_argument when
// fewer than three distinct points are given or all points are
// collinear.
Triangulation delaunay_triangulate(const std::vector<Vec3>& points);

}  // namespace treedecay
