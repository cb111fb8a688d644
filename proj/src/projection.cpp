#include "treedecay/projection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace treedecay {

void CanvasSpec::validate() const {
  if (world_width <= 0 || world_height <= 0)
    throw std::invalid_argument("canvas world extent must be positive");
  if (px_per_m <= 0) throw std::invalid_argument("px_per_m must be positive");
  if (downscale <= 0 || downscale > 1)
    throw std::invalid_argument("downscale must be in (0, 1]");
  if (final_width <= 0 || final_height <= 0)
    throw std::invalid_argument("final image size must be positive");
}

CanvasSpec fit_canvas(const std::vector<TreeSegment>& segments, const CanvasSpec& base) {
  double max_radius = 0.5;
  double max_height = 1.0;
  for (const auto& seg : segments) {
    if (seg.points.empty()) continue;
    double cx = 0.0, cy = 0.0;
    for (const auto& p : seg.points) {
      cx += p.x;
      cy += p.y;
    }
    cx /= static_cast<double>(seg.points.size());
    cy /= static_cast<double>(seg.points.size());
    for (const auto& p : seg.points) {
      const double dx = p.x - cx, dy = p.y - cy;
      max_radius = std::max(max_radius, std::sqrt(dx * dx + dy * dy));
      max_height = std::max(max_height, p.z);
    }
  }
  CanvasSpec spec = base;
  spec.world_width = 2.0 * max_radius + 1.0;
  spec.world_height = max_height + 1.0;
  return spec;
}

PointCloud rotate_z(const PointCloud& cloud, double azimuth_degrees) {
  if (cloud.empty()) return cloud;
  double cx = 0.0, cy = 0.0;
  for (const auto& p : cloud) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(cloud.size());
  cy /= static_cast<double>(cloud.size());

  const double rad = azimuth_degrees * 3.14159265358979323846 / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  std::vector<MultispectralPoint> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) {
    MultispectralPoint q = p;
    const double dx = p.x - cx, dy = p.y - cy;
    q.x = cx + c * dx - s * dy;
    q.y = cy + s * dx + c * dy;
    out.push_back(q);
  }
  return PointCloud(std::move(out), cloud.channel_state());
}

namespace {

float unit_clamp(double v) {
  return static_cast<float>(std::min(1.0, std::max(0.0, v)));
}

}  // namespace

ViewImage render_view(const TreeSegment& tree, const CanvasSpec& spec, int azimuth) {
  spec.validate();
  if (tree.points.empty()) throw std::invalid_argument("render_view: empty tree");

  const PointCloud rotated = rotate_z(tree.points, azimuth);
  double cx = 0.0, cy = 0.0;
  for (const auto& p : rotated) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(rotated.size());
  cy /= static_cast<double>(rotated.size());

  ViewImage img;
  img.azimuth = azimuth;
  img.width = std::max(1, static_cast<int>(std::ceil(spec.world_width * spec.px_per_m)));
  img.height = std::max(1, static_cast<int>(std::ceil(spec.world_height * spec.px_per_m)));
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (auto& plane : img.planes) plane.assign(n, 0.0f);
  std::vector<double> depth(n, std::numeric_limits<double>::infinity());

  for (const auto& p : rotated) {
    const double u = p.x - cx;  // horizontal position on the canvas
    const double v = p.z;       // height above ground
    const int col = static_cast<int>(
        std::floor((u + spec.world_width / 2) / spec.world_width * img.width));
    const int row_from_bottom =
        static_cast<int>(std::floor(v / spec.world_height * img.height));
    if (col < 0 || col >= img.width || row_from_bottom < 0 || row_from_bottom >= img.height)
      continue;
    const int row = img.height - 1 - row_from_bottom;
    const std::size_t idx = static_cast<std::size_t>(row) * img.width + col;
    const double d = p.y - cy;  // viewer looks along +y after rotation
    if (d < depth[idx]) {
      depth[idx] = d;
      img.planes[0][idx] = unit_clamp(p.nir);
      img.planes[1][idx] = unit_clamp(p.r);
      img.planes[2][idx] = unit_clamp(p.g);
    }
  }
  return img;
}

ViewImage downscale(const ViewImage& image, double factor, int final_width,
                    int final_height) {
  if (factor <= 0 || factor > 1)
    throw std::invalid_argument("downscale: factor must be in (0, 1]");
  const double inv = 1.0 / factor;
  const int k = static_cast<int>(std::llround(inv));
  if (k < 1 || std::fabs(inv - k) > 1e-9)
    throw std::invalid_argument("downscale: 1/factor must be a positive integer");

  const int sw = (image.width + k - 1) / k;
  const int sh = (image.height + k - 1) / k;
  ViewImage small;
  small.azimuth = image.azimuth;
  small.width = sw;
  small.height = sh;
  for (auto& plane : small.planes)
    plane.assign(static_cast<std::size_t>(sw) * sh, 0.0f);

  for (int row = 0; row < sh; ++row) {
    for (int col = 0; col < sw; ++col) {
      const int y0 = row * k, y1 = std::min(image.height, y0 + k);
      const int x0 = col * k, x1 = std::min(image.width, x0 + k);
      const double count = static_cast<double>((y1 - y0) * (x1 - x0));
      for (int plane = 0; plane < 3; ++plane) {
        double sum = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) sum += image.at(plane, x, y);
        small.planes[plane][static_cast<std::size_t>(row) * sw + col] =
            static_cast<float>(sum / count);
      }
    }
  }

  // Center pad or crop to the fixed output shape.
  ViewImage out;
  out.azimuth = image.azimuth;
  out.width = final_width;
  out.height = final_height;
  for (auto& plane : out.planes)
    plane.assign(static_cast<std::size_t>(final_width) * final_height, 0.0f);
  const int dx = (final_width - sw) / 2;
  const int dy = (final_height - sh) / 2;
  for (int row = 0; row < sh; ++row) {
    const int orow = row + dy;
    if (orow < 0 || orow >= final_height) continue;
    for (int col = 0; col < sw; ++col) {
      const int ocol = col + dx;
      if (ocol < 0 || ocol >= final_width) continue;
      for (int plane = 0; plane < 3; ++plane)
        out.planes[plane][static_cast<std::size_t>(orow) * final_width + ocol] =
            small.at(plane, col, row);
    }
  }
  return out;
}

std::array<ViewImage, 4> project_views(const TreeSegment& tree, const CanvasSpec& spec) {
  std::array<ViewImage, 4> views;
  const int azimuths[4] = {0, 90, 180, 270};
  for (int i = 0; i < 4; ++i) {
    const ViewImage full = render_view(tree, spec, azimuths[i]);
    views[i] = downscale(full, spec.downscale, spec.final_width, spec.final_height);
  }
  return views;
}

PpmImage view_to_ppm(const ViewImage& image) {
  PpmImage ppm;
  ppm.width = image.width;
  ppm.height = image.height;
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  ppm.rgb.resize(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (int plane = 0; plane < 3; ++plane) {
      const double v = std::floor(image.planes[plane][i] * 255.0 + 0.5);
      ppm.rgb[3 * i + plane] = static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, v)));
    }
  }
  return ppm;
}

}  // namespace treedecay
