#pragma once

#include <cstddef>

#include "treedecay/geo_raster.hpp"
#include "treedecay/point_cloud.hpp"

namespace treedecay {

struct PixelCoord {
  double col = 0.0;
  double row = 0.0;
};

// Inverse of the raster's pixel-center-to-world affine map. Throws on a
// singular transform.
PixelCoord world_to_pixel(const std::array<double, 6>& transform, double x, double y);

struct ColorizeResult {
  PointCloud cloud;
  std::size_t outside_count = 0;  // points that fell off the raster
};

// Assigns each point the channel values of the raster pixel it falls
// into (floor lookup, no interpolation). Points outside the raster keep
// zero channels and are counted; if every point is outside the raster
// the inputs clearly do not overlap and the call fails.
ColorizeResult colorize(const PointCloud& cloud, const GeoRaster& raster);

// Per-cloud min-max normalization of intensity, nir, r, g into [0,1].
// A constant channel maps to all zeros.
PointCloud normalize_channels(const PointCloud& cloud);

}  // namespace treedecay
