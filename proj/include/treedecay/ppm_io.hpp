#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "treedecay/geo_raster.hpp"
#include "treedecay/point_cloud.hpp"

namespace treedecay {

struct PpmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // interleaved, row-major
};

// Binary PPM (P6, maxval 255) with '#' comments allowed in the header.
PpmImage read_ppm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> write_ppm(const PpmImage& image);

PpmImage read_ppm_file(const std::string& path);
void write_ppm_file(const PpmImage& image, const std::string& path);

// Six decimal lines: A, D, B, E, C, F.
std::array<double, 6> read_world_file(const std::string& text);
std::string write_world_file(const std::array<double, 6>& transform);

// Builds a GeoRaster from a P6 image and its world file. The PPM's
// R/G/B bytes are interpreted as the CIR bands NIR/R/G in that order.
GeoRaster read_geo_raster(const std::vector<std::uint8_t>& ppm_bytes,
                          const std::string& world_file_text);
GeoRaster read_geo_raster_files(const std::string& ppm_path,
                                const std::string& world_path);
void write_geo_raster_files(const GeoRaster& raster, const std::string& ppm_path,
                            const std::string& world_path);

}  // namespace treedecay
