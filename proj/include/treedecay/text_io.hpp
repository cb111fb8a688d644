#pragma once

#include <string>

#include "treedecay/point_cloud.hpp"

namespace treedecay {

// Plain text interchange format: one point per line, either
// "x y z intensity" or "x y z intensity nir r g". Four-field lines get
// zero channels. The writer always emits seven fields at six decimals.
PointCloud read_text_cloud(const std::string& text);
std::string write_text_cloud(const PointCloud& cloud);

PointCloud read_text_cloud_file(const std::string& path);
void write_text_cloud_file(const PointCloud& cloud, const std::string& path);

}  // namespace treedecay
