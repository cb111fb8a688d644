#pragma once

#include <string>
#include <vector>

#include "treedecay/crossval.hpp"
#include "treedecay/features.hpp"
#include "treedecay/projection.hpp"
#include "treedecay/random_forest.hpp"
#include "treedecay/segmentation.hpp"
#include "treedecay/terrain.hpp"

namespace treedecay {

// Flat key-value configuration for the batch pipeline. Defaults equal
// the module defaults; a config file overrides defaults and command
// line --set overrides the file. Unknown keys are rejected.
struct PipelineConfig {
  PtdParams terrain;
  double terrain_dtm_cell = 1.0;
  SegParams seg;
  CanvasSpec proj;           // final size / scale; world extent below
  double proj_world_width = 0.0;   // 0 = fit to the dataset
  double proj_world_height = 0.0;  // 0 = fit to the dataset
  FeatureOptions features;
  RfConfig rf;
  int eval_k = 5;
  bool eval_augment = true;  // cloud-mode cross-validation only
  AugmentConfig eval_aug;
  double crop_radius = 0.0;  // m, 0 disables the parcel crop

  // "key = value"; throws on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  // Text file of "key = value" lines, '#' comments.
  void load_file(const std::string& path);

  // "key=value" from the command line.
  void apply_override(const std::string& assignment);

  // One "key = default  # doc" line per known key.
  static std::string describe_keys();
};

}  // namespace treedecay
