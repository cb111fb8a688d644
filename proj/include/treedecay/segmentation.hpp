#pragma once

#include <string>
#include <utility>
#include <vector>

#include "treedecay/point_cloud.hpp"

namespace treedecay {

struct SegParams {
  double threshold = 0.5;   // m, 2D spacing between neighboring trees
  double min_height = 2.0;  // m, seeds below this never start a tree
  std::size_t min_points = 16;

  void validate() const;
};

struct TreeSegment {
  PointCloud points;       // normalized heights
  MultispectralPoint apex; // highest point (ties by input order)
  double stem_x = 0.0;     // apex xy
  double stem_y = 0.0;
  int id = 0;
};

// Top-down greedy growing: the globally highest unassigned point seeds
// a tree, then unassigned points are swept in descending height and
// join when they sit closer than `threshold` to the growing tree and
// no closer to any previously grown one. Sweeps repeat until the tree
// stops growing. Points that never join any tree stay in the residual.
struct SegmentationResult {
  std::vector<TreeSegment> trees;
  std::vector<std::size_t> residual;  // indices into the input cloud
};

SegmentationResult segment_trees(const PointCloud& cloud, const SegParams& params);

// Automated proxy for sample selection: keeps segments with enough
// points and a tall enough apex.
std::pair<std::vector<TreeSegment>, std::vector<TreeSegment>> filter_segments(
    const std::vector<TreeSegment>& segments, const SegParams& params);

// Closed-disk crop around (cx, cy); point order is preserved.
PointCloud crop_cylinder(const PointCloud& cloud, double cx, double cy, double radius);

// One text cloud per segment plus a manifest CSV
// (id, apex_x, apex_y, apex_z, point_count).
void write_segments(const std::vector<TreeSegment>& segments, const std::string& dir);

}  // namespace treedecay
