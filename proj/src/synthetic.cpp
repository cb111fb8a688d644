#include "treedecay/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "treedecay/rng.hpp"
#include "treedecay/text_io.hpp"

namespace treedecay {

SyntheticSpec SyntheticSpec::defaults() {
  SyntheticSpec spec;
  // point-count row per class: min / max / mean
  spec.levels[0] = {845, 10295, 3346, 12, 35, 2.5, 4.0, 1.0, 0.08, 1.0, false,
                    0.85, 0.35, 0.30, 0.05, 0.55};
  spec.levels[1] = {1586, 14405, 4785, 12, 35, 2.5, 4.0, 1.0, 0.08, 1.0, false,
                    0.45, 0.45, 0.42, 0.05, 0.50};
  spec.levels[2] = {644, 5963, 2139, 10, 30, 1.8, 3.0, 0.5, 0.15, 1.0, false,
                    0.30, 0.52, 0.46, 0.05, 0.45};
  spec.levels[3] = {121, 2799, 637, 8, 25, 1.2, 2.2, 1.0, 0.30, 0.75, true,
                    0.22, 0.55, 0.50, 0.05, 0.40};
  spec.levels[4] = {16, 1418, 161, 5, 20, 0.15, 0.3, 1.0, 0.90, 0.85, true,
                    0.12, 0.60, 0.55, 0.05, 0.35};
  return spec;
}

void SyntheticSpec::validate() const {
  for (const auto& level : levels) {
    if (level.min_points == 0 || level.max_points < level.min_points ||
        level.mean_points < level.min_points || level.mean_points > level.max_points)
      throw std::invalid_argument("synthetic: bad point-count range");
    if (level.min_height < 5.0 || level.max_height > 40.0 ||
        level.max_height < level.min_height)
      throw std::invalid_argument("synthetic: tree heights must stay within [5,40] m");
  }
}

namespace {

constexpr double kTau = 6.28318530717958647692;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Draw a count in [min,max] whose expectation is the level mean:
// min + (max-min) * u^gamma has mean min + (max-min)/(gamma+1).
std::size_t draw_point_count(const LevelSpec& level, Rng& rng) {
  const double span = static_cast<double>(level.max_points - level.min_points);
  if (span <= 0) return level.min_points;
  const double mean_offset = static_cast<double>(level.mean_points - level.min_points);
  const double gamma = mean_offset > 0 ? span / mean_offset - 1.0 : 1e6;
  const double u = std::pow(rng.uniform(), std::max(gamma, 1e-9));
  const auto count =
      level.min_points + static_cast<std::size_t>(std::floor(u * (span + 0.999999)));
  return std::min(count, level.max_points);
}

MultispectralPoint colored_point(double x, double y, double z, const LevelSpec& level,
                                 double shade, Rng& rng) {
  MultispectralPoint p;
  p.x = x;
  p.y = y;
  p.z = z;
  p.intensity = clamp01(rng.normal(level.intensity_mean, 0.1));
  p.nir = clamp01(rng.normal(level.nir_mean * shade, level.color_sigma));
  p.r = clamp01(rng.normal(level.r_mean * shade, level.color_sigma));
  p.g = clamp01(rng.normal(level.g_mean * shade, level.color_sigma));
  return p;
}

}  // namespace

LabeledSample generate_synthetic_tree(int level, const SyntheticSpec& spec,
                                      std::uint64_t seed) {
  if (level < 1 || level > 5)
    throw std::invalid_argument("synthetic: decay level must be in [1,5]");
  spec.validate();
  const LevelSpec& ls = spec.levels[level - 1];
  Rng rng(seed);

  const std::size_t n_points = draw_point_count(ls, rng);
  const double height = rng.uniform(ls.min_height, ls.max_height);
  const double crown_radius = rng.uniform(ls.crown_radius_lo, ls.crown_radius_hi);
  const double crown_top = height * ls.top_fraction;
  const double crown_base = std::min(crown_top * 0.35, crown_top - 0.5);

  // crown thinning: drop whole angular sectors, like defoliation does
  constexpr int kSectors = 16;
  bool sector_alive[kSectors];
  bool any_alive = false;
  for (int s = 0; s < kSectors; ++s) {
    sector_alive[s] = rng.uniform() < ls.crown_keep_fraction;
    any_alive = any_alive || sector_alive[s];
  }
  if (!any_alive) sector_alive[0] = true;

  // sparse branch skeleton for the late decay stages
  constexpr int kMaxBranches = 14;
  double branch_angle[kMaxBranches], branch_height[kMaxBranches], branch_droop[kMaxBranches];
  const int n_branches = 6 + static_cast<int>(rng.uniform_index(kMaxBranches - 6 + 1));
  for (int b = 0; b < n_branches; ++b) {
    branch_angle[b] = rng.uniform(0.0, kTau);
    branch_height[b] = rng.uniform(std::max(crown_base, 0.2 * crown_top), crown_top);
    branch_droop[b] = rng.uniform(0.0, 0.35);
  }

  const auto n_stem = static_cast<std::size_t>(ls.stem_fraction * n_points);
  std::vector<MultispectralPoint> points;
  points.reserve(n_points);

  constexpr double kStemRadius = 0.15;
  for (std::size_t i = 0; i < n_stem; ++i) {
    const double z = rng.uniform(0.0, height);
    const double a = rng.uniform(0.0, kTau);
    const double r = kStemRadius * std::sqrt(rng.uniform());
    points.push_back(
        colored_point(r * std::cos(a), r * std::sin(a), z, ls, 0.8, rng));
  }

  while (points.size() < n_points) {
    if (ls.branch_crown) {
      const int b = static_cast<int>(rng.uniform_index(n_branches));
      const double reach = crown_radius *
                           (1.0 - branch_height[b] / std::max(crown_top, 1e-9)) *
                           rng.uniform(0.6, 1.0) / 0.65;
      const double t = rng.uniform();
      const double x = t * reach * std::cos(branch_angle[b]);
      const double y = t * reach * std::sin(branch_angle[b]);
      const double z = branch_height[b] - branch_droop[b] * t * reach +
                       rng.normal(0.0, 0.05);
      points.push_back(colored_point(x, y, std::max(0.0, z), ls, 1.0, rng));
    } else {
      const double z = rng.uniform(crown_base, crown_top);
      const double a = rng.uniform(0.0, kTau);
      const int sector = static_cast<int>(a / kTau * kSectors) % kSectors;
      if (!sector_alive[sector]) continue;
      // cone: radius tapers linearly to zero at the top, points biased
      // toward the shell where the needles sit
      const double taper = (crown_top - z) / std::max(crown_top - crown_base, 1e-9);
      const double r = crown_radius * taper * std::pow(rng.uniform(), 0.3);
      const double jitter = rng.normal(0.0, 0.05);
      points.push_back(colored_point(r * std::cos(a), r * std::sin(a),
                                     std::max(0.0, z + jitter), ls, 1.0, rng));
    }
  }

  LabeledSample sample{TreeSegment{}, DecayLevel(level), LabeledSample::Source::synthetic,
                       0, ""};
  sample.tree.points = PointCloud(std::move(points), ChannelState::normalized);
  std::size_t apex = 0;
  for (std::size_t i = 1; i < sample.tree.points.size(); ++i)
    if (sample.tree.points[i].z > sample.tree.points[apex].z) apex = i;
  sample.tree.apex = sample.tree.points[apex];
  sample.tree.stem_x = sample.tree.apex.x;
  sample.tree.stem_y = sample.tree.apex.y;
  return sample;
}

std::vector<LabeledSample> generate_dataset(const SyntheticSpec& spec,
                                            const std::array<int, 5>& counts) {
  spec.validate();
  for (int c : counts)
    if (c < 0) throw std::invalid_argument("synthetic: negative class count");

  std::vector<LabeledSample> samples;
  std::uint64_t index = 0;
  for (int level = 1; level <= 5; ++level) {
    for (int i = 0; i < counts[level - 1]; ++i, ++index) {
      LabeledSample s = generate_synthetic_tree(level, spec, mix_seed(spec.seed, index));
      s.group = static_cast<int>(index);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "tree_%05llu",
                    static_cast<unsigned long long>(index + 1));
      s.id = buf;
      samples.push_back(std::move(s));
    }
  }
  Rng rng(mix_seed(spec.seed, 0x7368756666ULL));
  for (std::size_t i = samples.size(); i > 1; --i)
    std::swap(samples[i - 1], samples[rng.uniform_index(i)]);
  return samples;
}

void write_dataset(const std::vector<LabeledSample>& samples, const std::string& dir) {
  std::filesystem::create_directories(dir + "/clouds");
  std::ofstream manifest(dir + "/manifest.csv");
  if (!manifest) throw io_error("dataset: cannot open manifest in " + dir);
  manifest << "sample_id,label,source,group,point_count,path\n";
  for (const auto& s : samples) {
    const std::string rel = "clouds/" + s.id + ".xyz";
    manifest << s.id << "," << s.label.value() << ","
             << (s.source == LabeledSample::Source::synthetic ? "synthetic" : "field")
             << "," << s.group << "," << s.tree.points.size() << "," << rel << "\n";
    write_text_cloud_file(s.tree.points, dir + "/" + rel);
  }
  if (!manifest) throw io_error("dataset: short write to manifest in " + dir);
}

std::vector<LabeledSample> read_dataset(const std::string& dir) {
  std::ifstream in(dir + "/manifest.csv");
  if (!in) throw io_error("dataset: cannot open " + dir + "/manifest.csv");
  std::string line;
  if (!std::getline(in, line) ||
      line != "sample_id,label,source,group,point_count,path")
    throw io_error("dataset: bad manifest header in " + dir);

  std::vector<LabeledSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id, label, source, group, count, path;
    if (!std::getline(ls, id, ',') || !std::getline(ls, label, ',') ||
        !std::getline(ls, source, ',') || !std::getline(ls, group, ',') ||
        !std::getline(ls, count, ',') || !std::getline(ls, path))
      throw io_error("dataset: malformed manifest line " + std::to_string(line_no));
    LabeledSample s{TreeSegment{}, DecayLevel(std::stoi(label)),
                    source == "field" ? LabeledSample::Source::field
                                      : LabeledSample::Source::synthetic,
                    std::stoi(group), id};
    s.tree.points = read_text_cloud_file(dir + "/" + path);
    // dataset clouds store unit-range channels
    s.tree.points.set_channel_state(ChannelState::normalized);
    if (s.tree.points.size() != static_cast<std::size_t>(std::stoll(count)))
      throw io_error("dataset: point count mismatch for " + id);
    if (!s.tree.points.empty()) {
      std::size_t apex = 0;
      for (std::size_t i = 1; i < s.tree.points.size(); ++i)
        if (s.tree.points[i].z > s.tree.points[apex].z) apex = i;
      s.tree.apex = s.tree.points[apex];
      s.tree.stem_x = s.tree.apex.x;
      s.tree.stem_y = s.tree.apex.y;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace treedecay
