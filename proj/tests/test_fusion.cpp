#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "treedecay/fusion.hpp"
#include "treedecay/rng.hpp"

using namespace treedecay;

namespace {

GeoRaster checker_raster(int w, int h) {
  GeoRaster raster;
  raster.width = w;
  raster.height = h;
  raster.transform = {1, 0, 0, -1, 0.5, -0.5};  // pixel (c,r) center -> (c+0.5, -r-0.5)
  for (auto& plane : raster.planes) plane.resize(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      raster.planes[0][i] = static_cast<std::uint8_t>(10 * c + r);
      raster.planes[1][i] = static_cast<std::uint8_t>(100 + c);
      raster.planes[2][i] = static_cast<std::uint8_t>(200 - r);
    }
  return raster;
}

PointCloud one_point(double x, double y) {
  MultispectralPoint p;
  p.x = x;
  p.y = y;
  p.z = 5;
  p.intensity = 3;
  return PointCloud({p});
}

}  // namespace

TEST_CASE("world_to_pixel: pixel-center identities") {
  const std::array<double, 6> t = {1, 0, 0, -1, 0.5, -0.5};
  const PixelCoord a = world_to_pixel(t, 0.5, -0.5);
  CHECK(a.col == doctest::Approx(0.0));
  CHECK(a.row == doctest::Approx(0.0));

  // solved by hand: col = x - 0.5, row = -(y + 0.5) / 1
  const PixelCoord b = world_to_pixel(t, 2.5, -3.5);
  CHECK(b.col == doctest::Approx(2.0));
  CHECK(b.row == doctest::Approx(3.0));
}

TEST_CASE("world_to_pixel: rotated transform round trips") {
  // B and D nonzero: a slightly rotated grid
  const std::array<double, 6> t = {0.96, 0.28, -0.28, -0.96, 1234.5, 678.9};
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double col = rng.uniform(0, 100), row = rng.uniform(0, 100);
    const double x = t[0] * col + t[2] * row + t[4];
    const double y = t[1] * col + t[3] * row + t[5];
    const PixelCoord back = world_to_pixel(t, x, y);
    CHECK(std::fabs(back.col - col) < 1e-9);
    CHECK(std::fabs(back.row - row) < 1e-9);
  }
}

TEST_CASE("world_to_pixel: singular transform throws") {
  CHECK_THROWS_AS(world_to_pixel({1, 1, 1, 1, 0, 0}, 0, 0), std::invalid_argument);
}

TEST_CASE("colorize: point picks up its containing pixel") {
  const GeoRaster raster = checker_raster(8, 6);
  // center of pixel (3,2) in world coords
  const ColorizeResult result = colorize(one_point(3.5 + 0.5, -(2.5 + 0.5)), raster);
  REQUIRE(result.outside_count == 0);
  CHECK(result.cloud[0].nir == 32.0);
  CHECK(result.cloud[0].r == 103.0);
  CHECK(result.cloud[0].g == 198.0);
  // geometry and intensity untouched, bitwise
  CHECK(result.cloud[0].x == 4.0);
  CHECK(result.cloud[0].intensity == 3.0);
}

TEST_CASE("colorize: two points in one pixel share colors") {
  const GeoRaster raster = checker_raster(8, 6);
  MultispectralPoint a, b;
  a.x = 1.6;
  a.y = -1.2;
  b.x = 1.9;
  b.y = -1.3;
  const ColorizeResult result = colorize(PointCloud({a, b}), raster);
  CHECK(result.cloud[0].nir == result.cloud[1].nir);
  CHECK(result.cloud[0].g == result.cloud[1].g);
}

TEST_CASE("colorize: out-of-raster point flagged with zero colors") {
  const GeoRaster raster = checker_raster(8, 6);
  MultispectralPoint inside, outside;
  inside.x = 1.5;
  inside.y = -1.5;
  inside.nir = 99;
  outside.x = 9.5;  // 1 m past the right edge
  outside.y = -1.5;
  outside.nir = 99;
  const ColorizeResult result = colorize(PointCloud({inside, outside}), raster);
  CHECK(result.outside_count == 1);
  CHECK(result.cloud[1].nir == 0.0);
  CHECK(result.cloud[1].r == 0.0);

  CHECK_THROWS_WITH(colorize(one_point(500, 500), raster), doctest::Contains("outside"));
}

TEST_CASE("colorize: idempotent for in-bounds points") {
  const GeoRaster raster = checker_raster(8, 6);
  Rng rng(17);
  std::vector<MultispectralPoint> points;
  for (int i = 0; i < 200; ++i) {
    MultispectralPoint p;
    p.x = rng.uniform(0.6, 8.4);
    p.y = -rng.uniform(0.6, 5.4);
    p.z = rng.uniform(0, 30);
    points.push_back(p);
  }
  const PointCloud once = colorize(PointCloud(points), raster).cloud;
  const PointCloud twice = colorize(once, raster).cloud;
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].nir == twice[i].nir);
    CHECK(once[i].r == twice[i].r);
    CHECK(once[i].g == twice[i].g);
  }
}

TEST_CASE("normalize_channels: min-max formula") {
  std::vector<MultispectralPoint> points(3);
  points[0].intensity = 10;
  points[1].intensity = 20;
  points[2].intensity = 30;
  for (auto& p : points) p.nir = 5;  // constant channel
  const PointCloud out = normalize_channels(PointCloud(points));
  CHECK(out[0].intensity == 0.0);
  CHECK(out[1].intensity == 0.5);
  CHECK(out[2].intensity == 1.0);
  CHECK(out[0].nir == 0.0);
  CHECK(out[2].nir == 0.0);
  CHECK(out.channel_state() == ChannelState::normalized);
}

TEST_CASE("normalize_channels: idempotent, range and argmax preserved") {
  Rng rng(23);
  std::vector<MultispectralPoint> points;
  for (int i = 0; i < 100; ++i) {
    MultispectralPoint p;
    p.intensity = rng.uniform(3, 900);
    p.nir = rng.uniform(0, 255);
    p.r = rng.uniform(0, 255);
    p.g = rng.uniform(0, 255);
    points.push_back(p);
  }
  const PointCloud cloud(points);
  const PointCloud once = normalize_channels(cloud);

  std::size_t argmax_before = 0, argmax_after = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(once[i].intensity >= 0.0);
    CHECK(once[i].intensity <= 1.0);
    CHECK(once[i].nir >= 0.0);
    CHECK(once[i].nir <= 1.0);
    if (cloud[i].nir > cloud[argmax_before].nir) argmax_before = i;
    if (once[i].nir > once[argmax_after].nir) argmax_after = i;
  }
  CHECK(argmax_before == argmax_after);

  const PointCloud twice = normalize_channels(once);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(twice[i].intensity == doctest::Approx(once[i].intensity).epsilon(1e-12));
    CHECK(twice[i].nir == doctest::Approx(once[i].nir).epsilon(1e-12));
  }
}

TEST_CASE("normalize_channels: empty cloud throws") {
  CHECK_THROWS_AS(normalize_channels(PointCloud{}), std::invalid_argument);
}
