#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treedecay/point_cloud.hpp"

namespace treedecay {

// Uncompressed LAS 1.2 only (point record formats 0 and 1, 227-byte
// header, little endian). Channels other than intensity are not part
// of the format; read_las leaves nir/r/g at zero.
PointCloud read_las(const std::vector<std::uint8_t>& bytes);

// Writes point format 0 with scale 0.001 on all axes and offsets at
// the floor of the bounds minimum. Throws if a coordinate does not fit
// the scaled 32-bit range.
std::vector<std::uint8_t> write_las(const PointCloud& cloud);

PointCloud read_las_file(const std::string& path);
void write_las_file(const PointCloud& cloud, const std::string& path);

}  // namespace treedecay
