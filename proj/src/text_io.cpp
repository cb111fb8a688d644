#include "treedecay/text_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace treedecay {

namespace {

double parse_field(const std::string& token, std::size_t line_no) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size())
    throw io_error("text cloud: non-numeric token '" + token + "' on line " +
                   std::to_string(line_no));
  return value;
}

}  // namespace

PointCloud read_text_cloud(const std::string& text) {
  std::vector<MultispectralPoint> points;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (fields >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;  // blank line
    if (tokens.size() != 4 && tokens.size() != 7)
      throw io_error("text cloud: expected 4 or 7 fields, got " +
                     std::to_string(tokens.size()) + " on line " +
                     std::to_string(line_no));
    MultispectralPoint p;
    p.x = parse_field(tokens[0], line_no);
    p.y = parse_field(tokens[1], line_no);
    p.z = parse_field(tokens[2], line_no);
    p.intensity = parse_field(tokens[3], line_no);
    if (tokens.size() == 7) {
      p.nir = parse_field(tokens[4], line_no);
      p.r = parse_field(tokens[5], line_no);
      p.g = parse_field(tokens[6], line_no);
    }
    points.push_back(p);
  }
  return PointCloud(std::move(points), ChannelState::raw);
}

std::string write_text_cloud(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 64);
  char buf[192];
  for (const auto& p : cloud) {
    std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f %.6f %.6f %.6f %.6f\n",
                  p.x, p.y, p.z, p.intensity, p.nir, p.r, p.g);
    out += buf;
  }
  return out;
}

PointCloud read_text_cloud_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("text cloud: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_text_cloud(ss.str());
}

void write_text_cloud_file(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("text cloud: cannot open " + path + " for writing");
  out << write_text_cloud(cloud);
  if (!out) throw io_error("text cloud: short write to " + path);
}

}  // namespace treedecay
