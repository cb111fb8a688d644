#include "treedecay/fusion.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace treedecay {

PixelCoord world_to_pixel(const std::array<double, 6>& transform, double x, double y) {
  // col,row solve  [A B; D E] [col row]^T = [x-C, y-F]^T
  const double a = transform[0], d = transform[1], b = transform[2];
  const double e = transform[3], c = transform[4], f = transform[5];
  const double det = a * e - b * d;
  if (det == 0.0) throw std::invalid_argument("world_to_pixel: singular transform");
  const double dx = x - c;
  const double dy = y - f;
  return PixelCoord{(dx * e - b * dy) / det, (a * dy - dx * d) / det};
}

ColorizeResult colorize(const PointCloud& cloud, const GeoRaster& raster) {
  if (cloud.empty()) throw std::invalid_argument("colorize: empty point cloud");
  raster.validate();

  std::vector<MultispectralPoint> out;
  out.reserve(cloud.size());
  std::size_t outside = 0;
  for (const auto& p : cloud) {
    const PixelCoord pc = world_to_pixel(raster.transform, p.x, p.y);
    const int col = static_cast<int>(std::floor(pc.col));
    const int row = static_cast<int>(std::floor(pc.row));
    MultispectralPoint q = p;
    if (raster.in_bounds(col, row)) {
      q.nir = raster.at(0, col, row);
      q.r = raster.at(1, col, row);
      q.g = raster.at(2, col, row);
    } else {
      q.nir = q.r = q.g = 0.0;
      ++outside;
    }
    out.push_back(q);
  }
  if (outside == cloud.size())
    throw std::runtime_error("colorize: all points fall outside the raster extent");
  return ColorizeResult{PointCloud(std::move(out), cloud.channel_state()), outside};
}

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void grow(double v) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  double map(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }
};

}  // namespace

PointCloud normalize_channels(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("normalize_channels: empty point cloud");
  Range ri, rn, rr, rg;
  for (const auto& p : cloud) {
    ri.grow(p.intensity);
    rn.grow(p.nir);
    rr.grow(p.r);
    rg.grow(p.g);
  }
  std::vector<MultispectralPoint> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) {
    MultispectralPoint q = p;
    q.intensity = ri.map(p.intensity);
    q.nir = rn.map(p.nir);
    q.r = rr.map(p.r);
    q.g = rg.map(p.g);
    out.push_back(q);
  }
  return PointCloud(std::move(out), ChannelState::normalized);
}

}  // namespace treedecay
