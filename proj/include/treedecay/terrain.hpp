#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treedecay/delaunay.hpp"
#include "treedecay/point_cloud.hpp"

namespace treedecay {

// Progressive TIN densification parameters (Axelsson-style defaults;
// all tunable through the pipeline config).
struct PtdParams {
  double seed_cell = 5.0;    // m, grid for per-cell lowest seed points
  double max_angle = 6.0;    // degrees, point-to-facet-plane angle cap
  double max_dist = 1.4;     // m, vertical distance to facet cap
  int max_iterations = 50;

  void validate() const;
};

// Classifies ground points: per-cell lowest points seed a TIN, then a
// point joins the ground set when its vertical distance to the
// containing facet and its angles to the facet vertices both stay
// under the thresholds. All candidates of one iteration are judged
// against the same TIN, so the accept set does not depend on scan
// order; accepted points densify the TIN for the next iteration.
std::vector<std::uint8_t> filter_ground(const PointCloud& cloud, const PtdParams& params);

struct Dtm {
  double origin_x = 0.0;  // west edge of cell (0,0)
  double origin_y = 0.0;  // south edge of cell (0,0)
  double cell = 1.0;
  int cols = 0;
  int rows = 0;
  std::vector<double> elevations;  // row-major, row 0 at the south

  double at(int col, int row) const {
    return elevations[static_cast<std::size_t>(row) * cols + col];
  }
  // Bilinear between cell centers, clamping to the edge cells outside
  // the grid.
  double sample(double x, double y) const;
};

// Rasterizes the masked ground points to per-cell mean elevations;
// empty cells copy the nearest filled cell (ties by linear cell index).
Dtm build_dtm(const PointCloud& cloud, const std::vector<std::uint8_t>& ground_mask,
              double cell);

// z' = z - dtm(x,y), clamped at zero; everything else is untouched.
PointCloud normalize_heights(const PointCloud& cloud, const Dtm& dtm);

// Text grid export: "origin_x origin_y cell cols rows" then row-major
// elevations, one row per line.
std::string write_dtm_text(const Dtm& dtm);
Dtm read_dtm_text(const std::string& text);
void write_dtm_file(const Dtm& dtm, const std::string& path);
Dtm read_dtm_file(const std::string& path);

}  // namespace treedecay
