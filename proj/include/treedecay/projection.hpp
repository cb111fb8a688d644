#pragma once

#include <array>
#include <string>
#include <vector>

#include "treedecay/ppm_io.hpp"
#include "treedecay/segmentation.hpp"

namespace treedecay {

// One orthographic side view, unit-range NIR/R/G planes on a black
// background.
struct ViewImage {
  int width = 0;
  int height = 0;
  std::array<std::vector<float>, 3> planes;  // row-major, NIR, R, G
  int azimuth = 0;                           // degrees, one of 0/90/180/270

  float at(int plane, int col, int row) const {
    return planes[plane][static_cast<std::size_t>(row) * width + col];
  }
};

struct CanvasSpec {
  double world_width = 12.0;   // m, horizontal span of the canvas
  double world_height = 41.0;  // m, vertical span (ground at the bottom)
  double px_per_m = 10.0;
  double downscale = 0.2;
  int final_width = 129;
  int final_height = 132;

  void validate() const;
};

// Canvas that fits every segment in the dataset with a 1 m margin, so
// all trees share one world-to-pixel scale.
CanvasSpec fit_canvas(const std::vector<TreeSegment>& segments, const CanvasSpec& base);

// Rotation about the vertical axis through the cloud's xy centroid; z
// and channels are untouched.
PointCloud rotate_z(const PointCloud& cloud, double azimuth_degrees);

// Splats each point onto the xz plane after rotating by `azimuth`;
// nearest rotated-y depth wins a pixel. The tree is horizontally
// centered on its centroid with the base at the bottom row. No
// downscaling here.
ViewImage render_view(const TreeSegment& tree, const CanvasSpec& spec, int azimuth);

// k x k block mean with k = 1/factor (must be integral), then center
// pad/crop to the spec's final size.
ViewImage downscale(const ViewImage& image, double factor, int final_width,
                    int final_height);

// The paper-shaped product: four downscaled views at 0/90/180/270.
std::array<ViewImage, 4> project_views(const TreeSegment& tree, const CanvasSpec& spec);

// Export with channel values scaled by 255, rounded half-up.
PpmImage view_to_ppm(const ViewImage& image);

}  // namespace treedecay
