#include "treedecay/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace treedecay {

void PtdParams::validate() const {
  if (seed_cell <= 0 || max_dist <= 0 || max_iterations <= 0)
    throw std::invalid_argument("ptd params must be positive");
  if (max_angle <= 0 || max_angle >= 90)
    throw std::invalid_argument("ptd max_angle must be in (0, 90) degrees");
}

namespace {

struct FacetPlane {
  // z = nx*x + ny*y + d over the facet, plus the three corners
  double nx, ny, d;
  Vec3 a, b, c;
  bool valid;
};

FacetPlane facet_plane(const Delaunay2D& dt, const Delaunay2D::Facet& f) {
  const Vec3& a = dt.vertices()[f.v[0]];
  const Vec3& b = dt.vertices()[f.v[1]];
  const Vec3& c = dt.vertices()[f.v[2]];
  const double ux = b.x - a.x, uy = b.y - a.y, uz = b.z - a.z;
  const double vx = c.x - a.x, vy = c.y - a.y, vz = c.z - a.z;
  const double denom = ux * vy - uy * vx;
  FacetPlane p{0, 0, a.z, a, b, c, false};
  if (denom != 0.0) {
    p.nx = (uz * vy - uy * vz) / denom;
    p.ny = (ux * vz - uz * vx) / denom;
    p.d = a.z - p.nx * a.x - p.ny * a.y;
    p.valid = true;
  }
  return p;
}

// Largest angle (degrees) between the facet plane and the segments
// from each facet corner to p.
double max_corner_angle(const FacetPlane& f, const MultispectralPoint& p) {
  const double plane_z = f.nx * p.x + f.ny * p.y + f.d;
  // perpendicular distance = |dz| * cos(slope); with n = (-nx,-ny,1)
  const double norm = std::sqrt(f.nx * f.nx + f.ny * f.ny + 1.0);
  const double perp = std::fabs(p.z - plane_z) / norm;
  double angle = 0.0;
  for (const Vec3* v : {&f.a, &f.b, &f.c}) {
    const double dx = p.x - v->x, dy = p.y - v->y, dz = p.z - v->z;
    const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (len == 0.0) continue;
    const double s = std::min(1.0, perp / len);
    angle = std::max(angle, std::asin(s));
  }
  return angle * 180.0 / 3.14159265358979323846;
}

}  // namespace

std::vector<std::uint8_t> filter_ground(const PointCloud& cloud, const PtdParams& params) {
  params.validate();
  if (cloud.empty()) throw std::invalid_argument("filter_ground: empty point cloud");

  const Bounds3& b = cloud.bounds();
  const int cols = std::max(1, static_cast<int>(std::ceil((b.max.x - b.min.x) / params.seed_cell)));
  const int rows = std::max(1, static_cast<int>(std::ceil((b.max.y - b.min.y) / params.seed_cell)));

  // Lowest point per occupied seed cell (ties by input index).
  std::vector<std::int64_t> lowest(static_cast<std::size_t>(cols) * rows, -1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud[i];
    int cx = static_cast<int>((p.x - b.min.x) / params.seed_cell);
    int cy = static_cast<int>((p.y - b.min.y) / params.seed_cell);
    cx = std::clamp(cx, 0, cols - 1);
    cy = std::clamp(cy, 0, rows - 1);
    auto& slot = lowest[static_cast<std::size_t>(cy) * cols + cx];
    if (slot < 0 || p.z < cloud[static_cast<std::size_t>(slot)].z) slot = static_cast<std::int64_t>(i);
  }

  std::vector<std::uint8_t> ground(cloud.size(), 0);
  Delaunay2D tin;
  std::size_t seed_cells = 0;
  for (const auto slot : lowest) {
    if (slot < 0) continue;
    ++seed_cells;
    const auto& p = cloud[static_cast<std::size_t>(slot)];
    ground[static_cast<std::size_t>(slot)] = 1;
    tin.insert(Vec3{p.x, p.y, p.z});
  }
  if (seed_cells < 3)
    throw std::runtime_error("filter_ground: fewer than 3 occupied seed cells");
  if (!tin.ready())
    throw std::runtime_error("filter_ground: seed points are collinear");

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    // Judge every unassigned point against this iteration's TIN, then
    // densify with the whole accept set at once.
    std::vector<std::size_t> accepted;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (ground[i]) continue;
      const auto& p = cloud[i];
      const auto facet = tin.locate(p.x, p.y);
      const auto plane = facet_plane(tin, facet);
      if (!plane.valid) continue;
      const double dz = std::fabs(p.z - (plane.nx * p.x + plane.ny * p.y + plane.d));
      if (dz > params.max_dist) continue;
      if (max_corner_angle(plane, p) > params.max_angle) continue;
      accepted.push_back(i);
    }
    if (accepted.empty()) break;
    for (std::size_t i : accepted) {
      ground[i] = 1;
      const auto& p = cloud[i];
      tin.insert(Vec3{p.x, p.y, p.z});
    }
  }
  return ground;
}

Dtm build_dtm(const PointCloud& cloud, const std::vector<std::uint8_t>& ground_mask,
              double cell) {
  if (cell <= 0) throw std::invalid_argument("build_dtm: cell size must be positive");
  if (cloud.size() != ground_mask.size())
    throw std::invalid_argument("build_dtm: mask size does not match cloud");
  std::size_t ground_count = 0;
  for (auto m : ground_mask) ground_count += m ? 1 : 0;
  if (ground_count == 0) throw std::runtime_error("build_dtm: no ground points");

  const Bounds3& b = cloud.bounds();
  Dtm dtm;
  dtm.origin_x = b.min.x;
  dtm.origin_y = b.min.y;
  dtm.cell = cell;
  dtm.cols = std::max(1, static_cast<int>(std::ceil((b.max.x - b.min.x) / cell)));
  dtm.rows = std::max(1, static_cast<int>(std::ceil((b.max.y - b.min.y) / cell)));

  const std::size_t n = static_cast<std::size_t>(dtm.cols) * dtm.rows;
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!ground_mask[i]) continue;
    const auto& p = cloud[i];
    int cx = std::clamp(static_cast<int>((p.x - b.min.x) / cell), 0, dtm.cols - 1);
    int cy = std::clamp(static_cast<int>((p.y - b.min.y) / cell), 0, dtm.rows - 1);
    const std::size_t idx = static_cast<std::size_t>(cy) * dtm.cols + cx;
    sum[idx] += p.z;
    ++count[idx];
  }

  dtm.elevations.assign(n, 0.0);
  std::vector<std::size_t> filled;
  for (std::size_t i = 0; i < n; ++i)
    if (count[i] > 0) {
      dtm.elevations[i] = sum[i] / static_cast<double>(count[i]);
      filled.push_back(i);
    }

  // Nearest filled cell by center distance, ties by linear index.
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] > 0) continue;
    const double cx = static_cast<double>(i % dtm.cols);
    const double cy = static_cast<double>(i / dtm.cols);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = filled.front();
    for (std::size_t f : filled) {
      const double dx = static_cast<double>(f % dtm.cols) - cx;
      const double dy = static_cast<double>(f / dtm.cols) - cy;
      const double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        best_idx = f;
      }
    }
    dtm.elevations[i] = dtm.elevations[best_idx];
  }
  return dtm;
}

double Dtm::sample(double x, double y) const {
  // Continuous coordinates in units of cells, measured from the center
  // of cell (0,0).
  const double gx = (x - origin_x) / cell - 0.5;
  const double gy = (y - origin_y) / cell - 0.5;
  const int c0 = std::clamp(static_cast<int>(std::floor(gx)), 0, cols - 1);
  const int r0 = std::clamp(static_cast<int>(std::floor(gy)), 0, rows - 1);
  const int c1 = std::min(c0 + 1, cols - 1);
  const int r1 = std::min(r0 + 1, rows - 1);
  const double fx = std::clamp(gx - c0, 0.0, 1.0);
  const double fy = std::clamp(gy - r0, 0.0, 1.0);
  const double top = at(c0, r0) * (1 - fx) + at(c1, r0) * fx;
  const double bot = at(c0, r1) * (1 - fx) + at(c1, r1) * fx;
  return top * (1 - fy) + bot * fy;
}

PointCloud normalize_heights(const PointCloud& cloud, const Dtm& dtm) {
  if (cloud.empty()) throw std::invalid_argument("normalize_heights: empty point cloud");
  std::vector<MultispectralPoint> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) {
    MultispectralPoint q = p;
    q.z = std::max(0.0, p.z - dtm.sample(p.x, p.y));
    out.push_back(q);
  }
  return PointCloud(std::move(out), cloud.channel_state());
}

std::string write_dtm_text(const Dtm& dtm) {
  std::ostringstream os;
  os.precision(10);
  os << dtm.origin_x << " " << dtm.origin_y << " " << dtm.cell << " " << dtm.cols << " "
     << dtm.rows << "\n";
  for (int r = 0; r < dtm.rows; ++r) {
    for (int c = 0; c < dtm.cols; ++c) {
      if (c) os << " ";
      os << dtm.at(c, r);
    }
    os << "\n";
  }
  return os.str();
}

Dtm read_dtm_text(const std::string& text) {
  std::istringstream in(text);
  Dtm dtm;
  if (!(in >> dtm.origin_x >> dtm.origin_y >> dtm.cell >> dtm.cols >> dtm.rows))
    throw io_error("dtm: malformed header line");
  if (dtm.cell <= 0 || dtm.cols <= 0 || dtm.rows <= 0)
    throw io_error("dtm: non-positive cell size or dimensions");
  const std::size_t n = static_cast<std::size_t>(dtm.cols) * dtm.rows;
  dtm.elevations.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(in >> dtm.elevations[i]))
      throw io_error("dtm: truncated elevation grid at value " + std::to_string(i));
  return dtm;
}

void write_dtm_file(const Dtm& dtm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("dtm: cannot open " + path + " for writing");
  out << write_dtm_text(dtm);
}

Dtm read_dtm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("dtm: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_dtm_text(ss.str());
}

}  // namespace treedecay
