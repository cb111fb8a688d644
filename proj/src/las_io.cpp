#include "treedecay/las_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace treedecay {

namespace {

constexpr std::size_t kHeaderSize = 227;

template <typename T>
T read_le(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;  // assumes little-endian host
}

template <typename T>
void write_le(std::vector<std::uint8_t>& bytes, std::size_t offset, T value) {
  std::memcpy(bytes.data() + offset, &value, sizeof(T));
}

[[noreturn]] void fail(const std::string& what, std::size_t byte_offset) {
  std::ostringstream os;
  os << "las: " << what << " at byte offset " << byte_offset;
  throw io_error(os.str());
}

}  // namespace

PointCloud read_las(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "LASF", 4) != 0)
    fail("bad file signature (expected LASF)", 0);
  if (bytes.size() < kHeaderSize)
    fail("truncated header (need 227 bytes)", bytes.size());

  const int ver_major = bytes[24];
  const int ver_minor = bytes[25];
  if (ver_major != 1 || ver_minor != 2) {
    std::ostringstream os;
    os << "las: unsupported version " << ver_major << "." << ver_minor
       << " (only 1.2 is supported)";
    throw io_error(os.str());
  }

  const auto header_size = read_le<std::uint16_t>(bytes, 94);
  if (header_size < kHeaderSize) fail("header size field below 227", 94);
  const auto point_offset = read_le<std::uint32_t>(bytes, 96);
  const int format = bytes[104];
  if (format != 0 && format != 1) {
    std::ostringstream os;
    os << "las: unsupported point data record format " << format
       << " (only 0 and 1 are supported)";
    throw io_error(os.str());
  }
  const auto record_length = read_le<std::uint16_t>(bytes, 105);
  const std::uint16_t min_length = format == 0 ? 20 : 28;
  if (record_length < min_length) fail("point record length below format minimum", 105);
  const auto point_count = read_le<std::uint32_t>(bytes, 107);

  const double sx = read_le<double>(bytes, 131);
  const double sy = read_le<double>(bytes, 139);
  const double sz = read_le<double>(bytes, 147);
  const double ox = read_le<double>(bytes, 155);
  const double oy = read_le<double>(bytes, 163);
  const double oz = read_le<double>(bytes, 171);

  std::vector<MultispectralPoint> points;
  points.reserve(point_count);
  std::size_t pos = point_offset;
  for (std::uint32_t i = 0; i < point_count; ++i, pos += record_length) {
    if (pos + min_length > bytes.size())
      fail("truncated point record " + std::to_string(i), pos);
    MultispectralPoint p;
    p.x = read_le<std::int32_t>(bytes, pos) * sx + ox;
    p.y = read_le<std::int32_t>(bytes, pos + 4) * sy + oy;
    p.z = read_le<std::int32_t>(bytes, pos + 8) * sz + oz;
    p.intensity = read_le<std::uint16_t>(bytes, pos + 12);
    points.push_back(p);
  }
  return PointCloud(std::move(points), ChannelState::raw);
}

std::vector<std::uint8_t> write_las(const PointCloud& cloud) {
  constexpr double kScale = 0.001;
  constexpr std::uint16_t kRecordLength = 20;

  double ox = 0.0, oy = 0.0, oz = 0.0;
  Bounds3 b{};
  if (!cloud.empty()) {
    b = cloud.bounds();
    ox = std::floor(b.min.x);
    oy = std::floor(b.min.y);
    oz = std::floor(b.min.z);
  }

  std::vector<std::uint8_t> bytes(kHeaderSize + cloud.size() * kRecordLength, 0);
  std::memcpy(bytes.data(), "LASF", 4);
  bytes[24] = 1;
  bytes[25] = 2;
  static const char kSoftware[] = "treedecay";
  std::memcpy(bytes.data() + 58, kSoftware, sizeof(kSoftware) - 1);
  write_le<std::uint16_t>(bytes, 94, kHeaderSize);
  write_le<std::uint32_t>(bytes, 96, kHeaderSize);
  bytes[104] = 0;
  write_le<std::uint16_t>(bytes, 105, kRecordLength);
  write_le<std::uint32_t>(bytes, 107, static_cast<std::uint32_t>(cloud.size()));
  write_le<double>(bytes, 131, kScale);
  write_le<double>(bytes, 139, kScale);
  write_le<double>(bytes, 147, kScale);
  write_le<double>(bytes, 155, ox);
  write_le<double>(bytes, 163, oy);
  write_le<double>(bytes, 171, oz);
  if (!cloud.empty()) {
    write_le<double>(bytes, 179, b.max.x);
    write_le<double>(bytes, 187, b.min.x);
    write_le<double>(bytes, 195, b.max.y);
    write_le<double>(bytes, 203, b.min.y);
    write_le<double>(bytes, 211, b.max.z);
    write_le<double>(bytes, 219, b.min.z);
  }

  std::size_t pos = kHeaderSize;
  for (std::size_t i = 0; i < cloud.size(); ++i, pos += kRecordLength) {
    const auto& p = cloud[i];
    const double fx = (p.x - ox) / kScale;
    const double fy = (p.y - oy) / kScale;
    const double fz = (p.z - oz) / kScale;
    constexpr double kIntMax = 2147483647.0;
    if (std::fabs(fx) > kIntMax || std::fabs(fy) > kIntMax || std::fabs(fz) > kIntMax)
      throw std::range_error(
          "las: coordinate outside representable 32-bit scaled range at point " +
          std::to_string(i));
    write_le<std::int32_t>(bytes, pos, static_cast<std::int32_t>(std::llround(fx)));
    write_le<std::int32_t>(bytes, pos + 4, static_cast<std::int32_t>(std::llround(fy)));
    write_le<std::int32_t>(bytes, pos + 8, static_cast<std::int32_t>(std::llround(fz)));
    double inten = std::llround(p.intensity);
    if (inten < 0) inten = 0;
    if (inten > 65535) inten = 65535;
    write_le<std::uint16_t>(bytes, pos + 12, static_cast<std::uint16_t>(inten));
  }
  return bytes;
}

PointCloud read_las_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("las: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_las(bytes);
}

void write_las_file(const PointCloud& cloud, const std::string& path) {
  const auto bytes = write_las(cloud);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("las: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("las: short write to " + path);
}

}  // namespace treedecay
