#include "treedecay/ppm_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace treedecay {

namespace {

constexpr int kMaxSide = 65536;

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() &&
         !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#')
    tok += static_cast<char>(bytes[pos++]);
  return tok;
}

int parse_dim(const std::string& tok, const char* what) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || value <= 0)
    throw io_error(std::string("ppm: invalid ") + what + " '" + tok + "'");
  return value;
}

}  // namespace

PpmImage read_ppm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P6") throw io_error("ppm: magic is not P6");
  PpmImage img;
  img.width = parse_dim(next_token(bytes, pos), "width");
  img.height = parse_dim(next_token(bytes, pos), "height");
  if (img.width > kMaxSide || img.height > kMaxSide)
    throw io_error("ppm: image side exceeds 65536 pixels");
  const int maxval = parse_dim(next_token(bytes, pos), "maxval");
  if (maxval != 255) throw io_error("ppm: maxval must be 255");
  if (pos >= bytes.size()) throw io_error("ppm: truncated before pixel data");
  ++pos;  // single whitespace byte after maxval

  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * 3;
  if (bytes.size() - pos < n)
    throw io_error("ppm: truncated pixel data (have " +
                   std::to_string(bytes.size() - pos) + " bytes, need " +
                   std::to_string(n) + ")");
  img.rgb.assign(bytes.begin() + pos, bytes.begin() + pos + n);
  return img;
}

std::vector<std::uint8_t> write_ppm(const PpmImage& image) {
  char header[64];
  std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", image.width, image.height);
  std::vector<std::uint8_t> bytes(header, header + std::string(header).size());
  bytes.insert(bytes.end(), image.rgb.begin(), image.rgb.end());
  return bytes;
}

PpmImage read_ppm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("ppm: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_ppm(bytes);
}

void write_ppm_file(const PpmImage& image, const std::string& path) {
  const auto bytes = write_ppm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("ppm: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("ppm: short write to " + path);
}

std::array<double, 6> read_world_file(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> values;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string tok;
    if (!(fields >> tok)) continue;  // blank line
    std::string extra;
    if (fields >> extra)
      throw io_error("world file: more than one value on line " + std::to_string(line_no));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size())
      throw io_error("world file: non-numeric line " + std::to_string(line_no));
    values.push_back(v);
  }
  if (values.size() != 6)
    throw io_error("world file: expected 6 lines, got " + std::to_string(values.size()));
  return {values[0], values[1], values[2], values[3], values[4], values[5]};
}

std::string write_world_file(const std::array<double, 6>& transform) {
  char buf[256];
  std::string out;
  for (double v : transform) {
    std::snprintf(buf, sizeof(buf), "%.10f\n", v);
    out += buf;
  }
  return out;
}

GeoRaster read_geo_raster(const std::vector<std::uint8_t>& ppm_bytes,
                          const std::string& world_file_text) {
  const PpmImage img = read_ppm(ppm_bytes);
  GeoRaster raster;
  raster.width = img.width;
  raster.height = img.height;
  raster.transform = read_world_file(world_file_text);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (auto& plane : raster.planes) plane.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    raster.planes[0][i] = img.rgb[3 * i];      // NIR from red byte
    raster.planes[1][i] = img.rgb[3 * i + 1];  // R from green byte
    raster.planes[2][i] = img.rgb[3 * i + 2];  // G from blue byte
  }
  raster.validate();
  return raster;
}

GeoRaster read_geo_raster_files(const std::string& ppm_path,
                                const std::string& world_path) {
  std::ifstream pin(ppm_path, std::ios::binary);
  if (!pin) throw io_error("ppm: cannot open " + ppm_path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(pin)),
                                  std::istreambuf_iterator<char>());
  std::ifstream win(world_path);
  if (!win) throw io_error("world file: cannot open " + world_path);
  std::stringstream ss;
  ss << win.rdbuf();
  return read_geo_raster(bytes, ss.str());
}

void write_geo_raster_files(const GeoRaster& raster, const std::string& ppm_path,
                            const std::string& world_path) {
  PpmImage img;
  img.width = raster.width;
  img.height = raster.height;
  const std::size_t n = static_cast<std::size_t>(raster.width) * raster.height;
  img.rgb.resize(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    img.rgb[3 * i] = raster.planes[0][i];
    img.rgb[3 * i + 1] = raster.planes[1][i];
    img.rgb[3 * i + 2] = raster.planes[2][i];
  }
  write_ppm_file(img, ppm_path);
  std::ofstream out(world_path);
  if (!out) throw io_error("world file: cannot open " + world_path + " for writing");
  out << write_world_file(raster.transform);
}

}  // namespace treedecay
