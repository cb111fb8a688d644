#include "treedecay/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "treedecay/text_io.hpp"

namespace treedecay {

void SegParams::validate() const {
  if (threshold <= 0 || min_height <= 0 || min_points == 0)
    throw std::invalid_argument("segmentation params must be positive");
}

namespace {

// Uniform 2D bucket grid with cell == threshold, so any point within
// `threshold` of a query lives in the 3x3 neighborhood.
class AssignmentGrid {
 public:
  AssignmentGrid(const Bounds3& b, double cell)
      : min_x_(b.min.x), min_y_(b.min.y), cell_(cell) {
    cols_ = std::max<std::int64_t>(1, static_cast<std::int64_t>((b.max.x - b.min.x) / cell) + 1);
    rows_ = std::max<std::int64_t>(1, static_cast<std::int64_t>((b.max.y - b.min.y) / cell) + 1);
    buckets_.resize(static_cast<std::size_t>(cols_ * rows_));
  }

  void add(double x, double y, int tree, std::size_t point_index) {
    buckets_[cell_of(x, y)].push_back({x, y, tree, point_index});
  }

  struct NearTrees {
    double d_current = std::numeric_limits<double>::infinity();
    double d_other = std::numeric_limits<double>::infinity();
  };

  NearTrees nearest(double x, double y, int current_tree) const {
    NearTrees out;
    const std::int64_t cx = col_of(x), cy = row_of(y);
    for (std::int64_t gy = std::max<std::int64_t>(0, cy - 1);
         gy <= std::min(rows_ - 1, cy + 1); ++gy) {
      for (std::int64_t gx = std::max<std::int64_t>(0, cx - 1);
           gx <= std::min(cols_ - 1, cx + 1); ++gx) {
        for (const auto& e : buckets_[static_cast<std::size_t>(gy * cols_ + gx)]) {
          const double dx = e.x - x, dy = e.y - y;
          const double d = std::sqrt(dx * dx + dy * dy);
          if (e.tree == current_tree) {
            if (d < out.d_current) out.d_current = d;
          } else if (d < out.d_other) {
            out.d_other = d;
          }
        }
      }
    }
    return out;
  }

 private:
  struct Entry {
    double x, y;
    int tree;
    std::size_t point_index;
  };

  std::int64_t col_of(double x) const {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>((x - min_x_) / cell_), 0,
                                    cols_ - 1);
  }
  std::int64_t row_of(double y) const {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>((y - min_y_) / cell_), 0,
                                    rows_ - 1);
  }
  std::size_t cell_of(double x, double y) const {
    return static_cast<std::size_t>(row_of(y) * cols_ + col_of(x));
  }

  double min_x_, min_y_, cell_;
  std::int64_t cols_ = 0, rows_ = 0;
  std::vector<std::vector<Entry>> buckets_;
};

}  // namespace

SegmentationResult segment_trees(const PointCloud& cloud, const SegParams& params) {
  params.validate();
  if (cloud.empty()) throw std::invalid_argument("segment_trees: empty point cloud");

  // Descending height, ties by input index.
  std::vector<std::size_t> order(cloud.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cloud[a].z > cloud[b].z;
  });

  std::vector<int> assignment(cloud.size(), -1);
  AssignmentGrid grid(cloud.bounds(), params.threshold);
  int tree_count = 0;

  for (std::size_t seed_pos = 0; seed_pos < order.size(); ++seed_pos) {
    const std::size_t seed = order[seed_pos];
    if (assignment[seed] >= 0) continue;
    if (cloud[seed].z < params.min_height) break;  // nothing taller remains

    const int tree = tree_count++;
    assignment[seed] = tree;
    grid.add(cloud[seed].x, cloud[seed].y, tree, seed);

    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t pos = seed_pos + 1; pos < order.size(); ++pos) {
        const std::size_t i = order[pos];
        if (assignment[i] >= 0) continue;
        const auto near = grid.nearest(cloud[i].x, cloud[i].y, tree);
        if (near.d_current < params.threshold && near.d_current <= near.d_other) {
          assignment[i] = tree;
          grid.add(cloud[i].x, cloud[i].y, tree, i);
          grew = true;
        }
      }
    }
  }

  SegmentationResult result;
  std::vector<std::vector<MultispectralPoint>> members(tree_count);
  std::vector<std::size_t> apex(tree_count, SIZE_MAX);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int t = assignment[i];
    if (t < 0) {
      result.residual.push_back(i);
      continue;
    }
    members[t].push_back(cloud[i]);
    if (apex[t] == SIZE_MAX || cloud[i].z > cloud[apex[t]].z) apex[t] = i;
  }
  for (int t = 0; t < tree_count; ++t) {
    TreeSegment seg;
    seg.points = PointCloud(std::move(members[t]), cloud.channel_state());
    seg.apex = cloud[apex[t]];
    seg.stem_x = seg.apex.x;
    seg.stem_y = seg.apex.y;
    seg.id = t;
    result.trees.push_back(std::move(seg));
  }
  return result;
}

std::pair<std::vector<TreeSegment>, std::vector<TreeSegment>> filter_segments(
    const std::vector<TreeSegment>& segments, const SegParams& params) {
  std::vector<TreeSegment> kept, rejected;
  for (const auto& seg : segments) {
    if (seg.points.size() >= params.min_points && seg.apex.z >= params.min_height)
      kept.push_back(seg);
    else
      rejected.push_back(seg);
  }
  return {kept, rejected};
}

PointCloud crop_cylinder(const PointCloud& cloud, double cx, double cy, double radius) {
  if (radius <= 0) throw std::invalid_argument("crop_cylinder: radius must be positive");
  std::vector<MultispectralPoint> out;
  const double r2 = radius * radius;
  for (const auto& p : cloud) {
    const double dx = p.x - cx, dy = p.y - cy;
    if (dx * dx + dy * dy <= r2) out.push_back(p);
  }
  return PointCloud(std::move(out), cloud.channel_state());
}

void write_segments(const std::vector<TreeSegment>& segments, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir + "/segments.csv");
  if (!manifest) throw io_error("segments: cannot open manifest in " + dir);
  manifest << "id,apex_x,apex_y,apex_z,point_count\n";
  char buf[256];
  for (const auto& seg : segments) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%zu\n", seg.id, seg.apex.x,
                  seg.apex.y, seg.apex.z, seg.points.size());
    manifest << buf;
    std::snprintf(buf, sizeof(buf), "%s/segment_%04d.xyz", dir.c_str(), seg.id);
    write_text_cloud_file(seg.points, buf);
  }
}

}  // namespace treedecay
