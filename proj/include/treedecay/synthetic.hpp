#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "treedecay/segmentation.hpp"

namespace treedecay {

// Per-level generator knobs. Point-count statistics follow the field
// dataset's published per-class minimum/maximum/mean; color means
// follow CIR semantics (live canopy reflects NIR strongly, bare wood
// barely at all). Purely synthetic stand-ins, not biology.
struct LevelSpec {
  std::size_t min_points = 16;
  std::size_t max_points = 1418;
  std::size_t mean_points = 161;
  double min_height = 5.0;
  double max_height = 40.0;
  double crown_radius_lo = 0.2;
  double crown_radius_hi = 0.4;
  double crown_keep_fraction = 1.0;  // thinning of crown sectors
  double stem_fraction = 0.1;        // share of points on the stem
  double top_fraction = 1.0;         // < 1 models a broken top
  bool branch_crown = false;         // sparse discrete branches instead of a cone shell
  double nir_mean = 0.5, r_mean = 0.5, g_mean = 0.5;
  double color_sigma = 0.05;
  double intensity_mean = 0.5;
};

struct SyntheticSpec {
  std::array<LevelSpec, 5> levels;
  std::uint64_t seed = 42;

  static SyntheticSpec defaults();
  void validate() const;
};

struct LabeledSample {
  TreeSegment tree;
  DecayLevel label;
  enum class Source { field, synthetic };
  Source source = Source::synthetic;
  int group = 0;
  std::string id;
};

// Deterministic per (level, seed). The point count always lands inside
// the level's [min,max] and its long-run mean matches the level's
// mean.
LabeledSample generate_synthetic_tree(int level, const SyntheticSpec& spec,
                                      std::uint64_t seed);

// counts[i] trees of level i+1, shuffled deterministically, group ids
// unique across the dataset.
std::vector<LabeledSample> generate_dataset(const SyntheticSpec& spec,
                                            const std::array<int, 5>& counts);

// Field dataset's per-class sample counts (the generator default).
constexpr std::array<int, 5> kDefaultLevelCounts{233, 167, 236, 239, 155};

// dir/manifest.csv (sample_id,label,source,group,point_count,path) plus
// one text cloud per sample under dir/clouds/.
void write_dataset(const std::vector<LabeledSample>& samples, const std::string& dir);
std::vector<LabeledSample> read_dataset(const std::string& dir);

}  // namespace treedecay
