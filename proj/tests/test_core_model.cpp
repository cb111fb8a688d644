#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "treedecay/las_io.hpp"
#include "treedecay/ppm_io.hpp"
#include "treedecay/rng.hpp"
#include "treedecay/text_io.hpp"

using namespace treedecay;

namespace {

template <typename T>
void poke(std::vector<std::uint8_t>& bytes, std::size_t offset, T value) {
  std::memcpy(bytes.data() + offset, &value, sizeof(T));
}

// Hand-assembled uncompressed LAS 1.2, point format 0, independent of
// write_las.
std::vector<std::uint8_t> make_las(double scale, std::uint32_t n_points,
                                   const std::vector<std::array<std::int32_t, 3>>& raw,
                                   const std::vector<std::uint16_t>& intensity) {
  std::vector<std::uint8_t> bytes(227 + raw.size() * 20, 0);
  std::memcpy(bytes.data(), "LASF", 4);
  bytes[24] = 1;
  bytes[25] = 2;
  poke<std::uint16_t>(bytes, 94, 227);
  poke<std::uint32_t>(bytes, 96, 227);
  bytes[104] = 0;
  poke<std::uint16_t>(bytes, 105, 20);
  poke<std::uint32_t>(bytes, 107, n_points);
  poke<double>(bytes, 131, scale);
  poke<double>(bytes, 139, scale);
  poke<double>(bytes, 147, scale);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    poke<std::int32_t>(bytes, 227 + i * 20, raw[i][0]);
    poke<std::int32_t>(bytes, 227 + i * 20 + 4, raw[i][1]);
    poke<std::int32_t>(bytes, 227 + i * 20 + 8, raw[i][2]);
    poke<std::uint16_t>(bytes, 227 + i * 20 + 12, intensity[i]);
  }
  return bytes;
}

}  // namespace

TEST_CASE("las: minimal hand-assembled file decodes as expected") {
  const auto bytes = make_las(0.01, 1, {{100, 200, 300}}, {7});
  const PointCloud cloud = read_las(bytes);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud[0].x == doctest::Approx(1.00).epsilon(1e-12));
  CHECK(cloud[0].y == doctest::Approx(2.00).epsilon(1e-12));
  CHECK(cloud[0].z == doctest::Approx(3.00).epsilon(1e-12));
  CHECK(cloud[0].intensity == 7.0);
  CHECK(cloud[0].nir == 0.0);
}

TEST_CASE("las: zero-point header yields an empty cloud") {
  const auto bytes = make_las(0.01, 0, {}, {});
  CHECK(read_las(bytes).empty());
}

TEST_CASE("las: error paths are distinct and carry byte offsets") {
  auto bytes = make_las(0.01, 1, {{1, 2, 3}}, {1});

  SUBCASE("bad signature") {
    bytes[0] = 'X';
    CHECK_THROWS_WITH_AS(read_las(bytes), doctest::Contains("signature"), io_error);
  }
  SUBCASE("unsupported version") {
    bytes[25] = 4;
    CHECK_THROWS_WITH_AS(read_las(bytes), doctest::Contains("version"), io_error);
  }
  SUBCASE("unsupported point format") {
    bytes[104] = 6;
    CHECK_THROWS_WITH_AS(read_las(bytes), doctest::Contains("format"), io_error);
  }
  SUBCASE("truncated point block reports the offset") {
    bytes.resize(bytes.size() - 5);
    CHECK_THROWS_WITH_AS(read_las(bytes), doctest::Contains("byte offset 227"), io_error);
  }
}

TEST_CASE("las: write/read round trip within the scale quantum") {
  std::vector<MultispectralPoint> points;
  MultispectralPoint p;
  p.x = 1;
  p.y = 2;
  p.z = 3;
  p.intensity = 7;
  points.push_back(p);
  const PointCloud cloud(points);
  const PointCloud back = read_las(write_las(cloud));
  REQUIRE(back.size() == 1);
  CHECK(std::fabs(back[0].x - 1) <= 0.001);
  CHECK(std::fabs(back[0].y - 2) <= 0.001);
  CHECK(std::fabs(back[0].z - 3) <= 0.001);
  CHECK(back[0].intensity == 7.0);
}

TEST_CASE("las: empty cloud writes a header-only file") {
  const auto bytes = write_las(PointCloud{});
  CHECK(bytes.size() == 227);
  CHECK(read_las(bytes).empty());
}

TEST_CASE("las: 10 km span stays in range via offsets") {
  std::vector<MultispectralPoint> points;
  for (double x : {0.0, 10000.0}) {
    MultispectralPoint p;
    p.x = x;
    p.y = 500000.0;  // typical projected easting magnitude
    p.z = 100.0;
    points.push_back(p);
  }
  const PointCloud back = read_las(write_las(PointCloud(points)));
  REQUIRE(back.size() == 2);
  CHECK(std::fabs(back[1].x - 10000.0) <= 0.001);
  CHECK(std::fabs(back[0].y - 500000.0) <= 0.001);
}

TEST_CASE("las: writer point block is read back byte-for-byte") {
  Rng rng(7);
  std::vector<MultispectralPoint> points;
  for (int i = 0; i < 100; ++i) {
    MultispectralPoint p;
    p.x = rng.uniform(0, 100);
    p.y = rng.uniform(0, 100);
    p.z = rng.uniform(0, 50);
    p.intensity = static_cast<double>(rng.uniform_index(65536));
    points.push_back(p);
  }
  const auto bytes = write_las(PointCloud(points));
  const auto bytes2 = write_las(read_las(bytes));
  REQUIRE(bytes.size() == bytes2.size());
  CHECK(std::memcmp(bytes.data() + 227, bytes2.data() + 227, bytes.size() - 227) == 0);
}

TEST_CASE("text cloud: 4- and 7-field lines") {
  const PointCloud four = read_text_cloud("1 2 3 10\n");
  REQUIRE(four.size() == 1);
  CHECK(four[0].intensity == 10.0);
  CHECK(four[0].nir == 0.0);

  const PointCloud seven = read_text_cloud("1 2 3 10 50 60 70\n");
  REQUIRE(seven.size() == 1);
  CHECK(seven[0].nir == 50.0);
  CHECK(seven[0].g == 70.0);
}

TEST_CASE("text cloud: parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(read_text_cloud("1 2 3 4\n1 x 3 4\n"), doctest::Contains("line 2"),
                       io_error);
  CHECK_THROWS_WITH_AS(read_text_cloud("1 2 3\n"), doctest::Contains("4 or 7"), io_error);
}

TEST_CASE("text cloud: random round trip exact to 1e-6") {
  Rng rng(11);
  std::vector<MultispectralPoint> points;
  for (int i = 0; i < 100; ++i) {
    MultispectralPoint p;
    p.x = rng.uniform(-1000, 1000);
    p.y = rng.uniform(-1000, 1000);
    p.z = rng.uniform(0, 60);
    p.intensity = rng.uniform(0, 1);
    p.nir = rng.uniform(0, 1);
    p.r = rng.uniform(0, 1);
    p.g = rng.uniform(0, 1);
    points.push_back(p);
  }
  const PointCloud cloud(points);
  const PointCloud back = read_text_cloud(write_text_cloud(cloud));
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(std::fabs(back[i].x - cloud[i].x) <= 1e-6);
    CHECK(std::fabs(back[i].intensity - cloud[i].intensity) <= 1e-6);
    CHECK(std::fabs(back[i].g - cloud[i].g) <= 1e-6);
  }
}

TEST_CASE("bounds: tight under growth, empty rejects queries") {
  PointCloud cloud;
  CHECK_THROWS_AS(cloud.bounds(), std::logic_error);
  cloud.add({0, 0, 0, 0, 0, 0, 0});
  cloud.add({1, 2, 3, 0, 0, 0, 0});
  CHECK(cloud.bounds().max.z == 3.0);

  // adding a point outside the box strictly grows it; rebuilding
  // without it restores the old box
  const Bounds3 before = cloud.bounds();
  PointCloud grown = cloud;
  grown.add({5, -1, 7, 0, 0, 0, 0});
  CHECK(grown.bounds().max.x > before.max.x);
  CHECK(grown.bounds().min.y < before.min.y);
  std::vector<MultispectralPoint> without(grown.points().begin(), grown.points().end() - 1);
  const PointCloud restored{without};
  CHECK(restored.bounds().max.x == before.max.x);
  CHECK(restored.bounds().min.y == before.min.y);
  CHECK(restored.bounds().max.z == before.max.z);
}

TEST_CASE("ppm: 1x1 white P6 plus world file") {
  const std::vector<std::uint8_t> ppm = {'P', '6', '\n', '1', ' ', '1', '\n',
                                         '2', '5', '5', '\n', 255, 255, 255};
  const GeoRaster raster = read_geo_raster(ppm, "0.2\n0\n0\n-0.2\n100.1\n200.1\n");
  CHECK(raster.width == 1);
  CHECK(raster.at(0, 0, 0) == 255);
  CHECK(raster.at(2, 0, 0) == 255);
  CHECK(raster.a() == 0.2);
  CHECK(raster.f() == 200.1);
}

TEST_CASE("ppm: 2x2 planes preserve row-major order") {
  std::vector<std::uint8_t> ppm = {'P', '6', '\n', '2', ' ', '2', '\n', '2', '5', '5', '\n'};
  for (std::uint8_t v = 0; v < 12; ++v) ppm.push_back(v);
  const GeoRaster raster = read_geo_raster(ppm, "1\n0\n0\n-1\n0\n0\n");
  CHECK(raster.at(0, 0, 0) == 0);   // NIR of pixel (0,0) = first byte
  CHECK(raster.at(1, 0, 0) == 1);
  CHECK(raster.at(2, 1, 0) == 5);   // G of pixel (1,0)
  CHECK(raster.at(0, 0, 1) == 6);   // NIR of pixel (0,1)
}

TEST_CASE("ppm: malformed inputs are rejected") {
  const std::vector<std::uint8_t> p5 = {'P', '5', '\n', '1', ' ', '1', '\n', '2', '5', '5',
                                        '\n', 0};
  CHECK_THROWS_WITH_AS(read_ppm(p5), doctest::Contains("P6"), io_error);

  const std::vector<std::uint8_t> bad_maxval = {'P', '6', '\n', '1', ' ', '1', '\n', '6',
                                                '3', '\n', 0,   0,   0};
  CHECK_THROWS_WITH_AS(read_ppm(bad_maxval), doctest::Contains("maxval"), io_error);

  std::vector<std::uint8_t> truncated = {'P', '6', '\n', '2', ' ', '2', '\n',
                                         '2', '5', '5', '\n', 1,  2,   3};
  CHECK_THROWS_WITH_AS(read_ppm(truncated), doctest::Contains("truncated"), io_error);

  CHECK_THROWS_WITH_AS(read_geo_raster({'P', '6', '\n', '1', ' ', '1', '\n', '2', '5',
                                        '5', '\n', 0, 0, 0},
                                       "1\n2\n3\n"),
                       doctest::Contains("6 lines"), io_error);
}

TEST_CASE("ppm: comments in the header are allowed") {
  const std::vector<std::uint8_t> ppm = {'P', '6', '\n', '#', ' ', 'h', 'i', '\n', '1',
                                         ' ', '1', '\n', '2', '5', '5', '\n', 9, 8, 7};
  const PpmImage img = read_ppm(ppm);
  CHECK(img.rgb == std::vector<std::uint8_t>{9, 8, 7});
}

TEST_CASE("decay level validates its range") {
  CHECK_THROWS_AS(DecayLevel(0), std::invalid_argument);
  CHECK_THROWS_AS(DecayLevel(6), std::invalid_argument);
  CHECK(DecayLevel(3).index() == 2);
}
