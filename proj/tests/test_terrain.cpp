#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "treedecay/rng.hpp"
#include "treedecay/terrain.hpp"

using namespace treedecay;

namespace {

MultispectralPoint pt(double x, double y, double z) {
  MultispectralPoint p;
  p.x = x;
  p.y = y;
  p.z = z;
  return p;
}

// 10x10 grid of ground points on z = a*x + b*y + c over a 20x20 m patch.
PointCloud plane_cloud(double a, double b, double c) {
  std::vector<MultispectralPoint> points;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const double x = i * 20.0 / 9.0;
      const double y = j * 20.0 / 9.0;
      points.push_back(pt(x, y, a * x + b * y + c));
    }
  return PointCloud(points);
}

// Smooth rolling terrain plus canopy returns above it.
PointCloud random_forest_cloud(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<MultispectralPoint> points;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(0, 60);
    const double y = rng.uniform(0, 60);
    const double ground = 2.0 * std::sin(x / 18.0) + 1.5 * std::cos(y / 23.0);
    if (rng.uniform() < 0.45) {
      points.push_back(pt(x, y, ground + rng.uniform(0, 0.25)));
    } else {
      points.push_back(pt(x, y, ground + rng.uniform(1.0, 25.0)));
    }
  }
  return PointCloud(points);
}

std::size_t count_ground(const std::vector<std::uint8_t>& mask) {
  std::size_t n = 0;
  for (auto m : mask) n += m ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("filter_ground: perfectly planar cloud is all ground") {
  const PointCloud cloud = plane_cloud(0, 0, 0);
  const auto mask = filter_ground(cloud, PtdParams{});
  CHECK(count_ground(mask) == cloud.size());
}

TEST_CASE("filter_ground: 10 m outlier over planar ground is rejected") {
  std::vector<MultispectralPoint> points(plane_cloud(0, 0, 5).points());
  points.push_back(pt(10.3, 10.3, 15.0));  // 10 m above the plane
  const PointCloud cloud{points};
  const auto mask = filter_ground(cloud, PtdParams{});
  CHECK(count_ground(mask) == cloud.size() - 1);
  CHECK(mask.back() == 0);
}

TEST_CASE("filter_ground: gentle 5% slope stays ground") {
  const PointCloud cloud = plane_cloud(0.05, 0, 0);  // 2.9 degrees
  const auto mask = filter_ground(cloud, PtdParams{});
  CHECK(count_ground(mask) == cloud.size());
}

TEST_CASE("filter_ground: fewer than 3 occupied seed cells") {
  std::vector<MultispectralPoint> points;
  for (int i = 0; i < 10; ++i) points.push_back(pt(i * 0.1, i * 0.1, 0));
  CHECK_THROWS_WITH(filter_ground(PointCloud(points), PtdParams{}),
                    doctest::Contains("seed cells"));
}

TEST_CASE("filter_ground: loosening thresholds never shrinks the ground set") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const PointCloud cloud = random_forest_cloud(seed, 900);
    PtdParams tight;
    tight.max_dist = 0.6;
    tight.max_angle = 4.0;
    PtdParams loose_dist = tight;
    loose_dist.max_dist = 1.8;
    PtdParams loose_angle = tight;
    loose_angle.max_angle = 12.0;

    const auto base = filter_ground(cloud, tight);
    for (const auto& loose : {loose_dist, loose_angle}) {
      const auto wider = filter_ground(cloud, loose);
      for (std::size_t i = 0; i < base.size(); ++i)
        if (base[i]) CHECK(wider[i]);
    }
  }
}

TEST_CASE("build_dtm: constant ground fills every cell") {
  const PointCloud cloud = plane_cloud(0, 0, 3);
  const std::vector<std::uint8_t> mask(cloud.size(), 1);
  const Dtm dtm = build_dtm(cloud, mask, 1.0);
  for (double e : dtm.elevations) CHECK(e == doctest::Approx(3.0));
}

TEST_CASE("build_dtm: empty cell copies the nearest filled cell") {
  // two ground points 2 cells apart leave one empty cell between
  std::vector<MultispectralPoint> points{pt(0.5, 0.5, 0), pt(2.5, 0.5, 2)};
  const std::vector<std::uint8_t> mask{1, 1};
  const Dtm dtm = build_dtm(PointCloud(points), mask, 1.0);
  REQUIRE(dtm.cols >= 2);
  // the middle cell is equidistant; the tie goes to the lower index
  CHECK(dtm.at(1, 0) == 0.0);
}

TEST_CASE("build_dtm: single ground point") {
  std::vector<MultispectralPoint> points{pt(4, 4, 7.5)};
  const Dtm dtm = build_dtm(PointCloud(points), {1}, 1.0);
  CHECK(dtm.cols == 1);
  CHECK(dtm.rows == 1);
  CHECK(dtm.at(0, 0) == 7.5);
}

TEST_CASE("build_dtm: no ground points throws") {
  const PointCloud cloud = plane_cloud(0, 0, 0);
  const std::vector<std::uint8_t> mask(cloud.size(), 0);
  CHECK_THROWS_WITH(build_dtm(cloud, mask, 1.0), doctest::Contains("no ground"));
}

TEST_CASE("normalize_heights: flat DTM subtraction and clamp") {
  Dtm dtm;
  dtm.cols = dtm.rows = 4;
  dtm.cell = 10.0;
  dtm.elevations.assign(16, 10.0);

  std::vector<MultispectralPoint> points{pt(5, 5, 30), pt(15, 15, 10), pt(20, 20, 9.5)};
  points[0].nir = 0.33;
  const PointCloud out = normalize_heights(PointCloud(points), dtm);
  CHECK(out[0].z == doctest::Approx(20.0));
  CHECK(out[1].z == doctest::Approx(0.0));
  CHECK(out[2].z == doctest::Approx(0.0));  // below the surface, clamped
  CHECK(out[0].nir == 0.33);                // channels untouched
  CHECK(out[0].x == 5.0);
  CHECK(out.size() == points.size());
}

TEST_CASE("normalize_heights: bilinear between cell centers") {
  Dtm dtm;
  dtm.cols = 2;
  dtm.rows = 1;
  dtm.cell = 1.0;
  dtm.elevations = {0.0, 4.0};
  // halfway between the two cell centers (0.5 and 1.5)
  const PointCloud out = normalize_heights(PointCloud({pt(1.0, 0.5, 10)}), dtm);
  CHECK(out[0].z == doctest::Approx(10.0 - 2.0));
}

TEST_CASE("dtm text round trip") {
  Dtm dtm;
  dtm.origin_x = 3.25;
  dtm.origin_y = -2.5;
  dtm.cell = 0.5;
  dtm.cols = 3;
  dtm.rows = 2;
  dtm.elevations = {1, 2, 3, 4, 5, 6};
  const Dtm back = read_dtm_text(write_dtm_text(dtm));
  CHECK(back.origin_x == dtm.origin_x);
  CHECK(back.cell == dtm.cell);
  CHECK(back.elevations == dtm.elevations);
  CHECK_THROWS_AS(read_dtm_text("1 2 0.5 2 2\n1 2 3\n"), io_error);
}

TEST_CASE("ptd params validate") {
  PtdParams bad;
  bad.max_angle = 95;
  CHECK_THROWS_AS(filter_ground(plane_cloud(0, 0, 0), bad), std::invalid_argument);
}
