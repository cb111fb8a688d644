#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace treedecay {

// Georeferenced 3-band CIR raster. Planes are stored NIR, R, G in
// row-major order. The transform holds world-file coefficients in file
// line order (A, D, B, E, C, F) and maps pixel-center (col,row) to
// world (x,y):
//   x = A*col + B*row + C
//   y = D*col + E*row + F
struct GeoRaster {
  int width = 0;
  int height = 0;
  std::array<std::vector<std::uint8_t>, 3> planes;  // NIR, R, G
  std::array<double, 6> transform = {1, 0, 0, -1, 0, 0};

  double a() const { return transform[0]; }
  double d() const { return transform[1]; }
  double b() const { return transform[2]; }
  double e() const { return transform[3]; }
  double c() const { return transform[4]; }
  double f() const { return transform[5]; }

  bool in_bounds(int col, int row) const {
    return col >= 0 && col < width && row >= 0 && row < height;
  }

  std::uint8_t at(int plane, int col, int row) const {
    return planes[plane][static_cast<std::size_t>(row) * width + col];
  }

  void validate() const {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("raster dimensions must be positive");
    if (a() == 0.0 || e() == 0.0)
      throw std::invalid_argument("degenerate raster transform (A or E is zero)");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    for (const auto& plane : planes)
      if (plane.size() != n)
        throw std::invalid_argument("raster plane size does not match dimensions");
  }
};

}  // namespace treedecay
