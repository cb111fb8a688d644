#include "treedecay/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace treedecay {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size())
    throw std::invalid_argument("config: bad numeric value '" + value + "' for " + key);
  return v;
}

long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size())
    throw std::invalid_argument("config: bad integer value '" + value + "' for " + key);
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw std::invalid_argument("config: bad boolean value '" + value + "' for " + key);
}

struct KeyDoc {
  const char* key;
  const char* def;
  const char* doc;
};

constexpr KeyDoc kKeys[] = {
    {"terrain.seed_cell", "5.0", "seed grid cell for ground filtering (m)"},
    {"terrain.max_angle", "6.0", "densification angle threshold (degrees)"},
    {"terrain.max_dist", "1.4", "densification vertical distance threshold (m)"},
    {"terrain.max_iterations", "50", "densification iteration cap"},
    {"terrain.dtm_cell", "1.0", "DTM raster cell size (m)"},
    {"seg.threshold", "0.5", "2D spacing threshold between trees (m)"},
    {"seg.min_height", "2.0", "minimum seed/apex height (m)"},
    {"seg.min_points", "16", "minimum points per kept segment"},
    {"proj.px_per_m", "10", "render resolution (pixels per meter)"},
    {"proj.downscale", "0.2", "block-mean downscale factor"},
    {"proj.final_width", "129", "output image width (px)"},
    {"proj.final_height", "132", "output image height (px)"},
    {"proj.world_width", "0", "canvas width in meters, 0 = fit dataset"},
    {"proj.world_height", "0", "canvas height in meters, 0 = fit dataset"},
    {"features.glcm_levels", "16", "gray levels for the co-occurrence matrix"},
    {"features.hsv_bins", "8", "HSV histogram bins per channel"},
    {"features.include_optional", "false", "append HOG and Harris blocks"},
    {"rf.n_estimators", "800", "trees in the forest"},
    {"rf.max_depth", "64", "maximum tree depth"},
    {"rf.random_state", "42", "forest random seed"},
    {"rf.class_weight", "balanced", "'balanced' or 'uniform'"},
    {"rf.features_per_split", "0", "candidate features per split, 0 = sqrt(dim)"},
    {"rf.min_samples_leaf", "1", "minimum samples per leaf"},
    {"rf.bootstrap", "true", "bootstrap the per-tree training sets"},
    {"eval.k", "5", "cross-validation folds"},
    {"eval.augment", "true", "augment training folds (cloud-mode CV)"},
    {"eval.rotation", "true", "augmentation: random rotation about the vertical"},
    {"eval.removal_fraction", "0.1", "augmentation: per-point drop probability"},
    {"eval.jitter_sigma", "0.02", "augmentation: Gaussian position noise (m)"},
    {"pipeline.crop_radius", "0", "parcel crop radius in meters, 0 = off"},
};

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "terrain.seed_cell")
    terrain.seed_cell = parse_double(key, value);
  else if (key == "terrain.max_angle")
    terrain.max_angle = parse_double(key, value);
  else if (key == "terrain.max_dist")
    terrain.max_dist = parse_double(key, value);
  else if (key == "terrain.max_iterations")
    terrain.max_iterations = static_cast<int>(parse_int(key, value));
  else if (key == "terrain.dtm_cell")
    terrain_dtm_cell = parse_double(key, value);
  else if (key == "seg.threshold")
    seg.threshold = parse_double(key, value);
  else if (key == "seg.min_height")
    seg.min_height = parse_double(key, value);
  else if (key == "seg.min_points")
    seg.min_points = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "proj.px_per_m")
    proj.px_per_m = parse_double(key, value);
  else if (key == "proj.downscale")
    proj.downscale = parse_double(key, value);
  else if (key == "proj.final_width")
    proj.final_width = static_cast<int>(parse_int(key, value));
  else if (key == "proj.final_height")
    proj.final_height = static_cast<int>(parse_int(key, value));
  else if (key == "proj.world_width")
    proj_world_width = parse_double(key, value);
  else if (key == "proj.world_height")
    proj_world_height = parse_double(key, value);
  else if (key == "features.glcm_levels")
    features.glcm_levels = static_cast<int>(parse_int(key, value));
  else if (key == "features.hsv_bins")
    features.hsv_bins = static_cast<int>(parse_int(key, value));
  else if (key == "features.include_optional")
    features.include_optional = parse_bool(key, value);
  else if (key == "rf.n_estimators")
    rf.n_estimators = static_cast<int>(parse_int(key, value));
  else if (key == "rf.max_depth")
    rf.max_depth = static_cast<int>(parse_int(key, value));
  else if (key == "rf.random_state")
    rf.random_state = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "rf.class_weight") {
    if (value == "balanced")
      rf.class_weight = RfConfig::ClassWeight::balanced;
    else if (value == "uniform")
      rf.class_weight = RfConfig::ClassWeight::uniform;
    else
      throw std::invalid_argument("config: rf.class_weight must be balanced or uniform");
  } else if (key == "rf.features_per_split")
    rf.features_per_split = static_cast<int>(parse_int(key, value));
  else if (key == "rf.min_samples_leaf")
    rf.min_samples_leaf = static_cast<int>(parse_int(key, value));
  else if (key == "rf.bootstrap")
    rf.bootstrap = parse_bool(key, value);
  else if (key == "eval.k")
    eval_k = static_cast<int>(parse_int(key, value));
  else if (key == "eval.augment")
    eval_augment = parse_bool(key, value);
  else if (key == "eval.rotation")
    eval_aug.rotation = parse_bool(key, value);
  else if (key == "eval.removal_fraction")
    eval_aug.removal_fraction = parse_double(key, value);
  else if (key == "eval.jitter_sigma")
    eval_aug.jitter_sigma = parse_double(key, value);
  else if (key == "pipeline.crop_radius")
    crop_radius = parse_double(key, value);
  else
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

void PipelineConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("config: cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq, value;
    if (!(ls >> key)) continue;  // blank
    if (!(ls >> eq)) throw io_error("config: malformed line " + std::to_string(line_no));
    if (eq != "=") {
      // allow "key value" too
      value = eq;
    } else if (!(ls >> value)) {
      throw io_error("config: missing value on line " + std::to_string(line_no));
    }
    std::string extra;
    if (ls >> extra) throw io_error("config: trailing junk on line " + std::to_string(line_no));
    set(key, value);
  }
}

void PipelineConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= assignment.size())
    throw std::invalid_argument("config: override must look like key=value, got '" +
                                assignment + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string PipelineConfig::describe_keys() {
  std::string out;
  for (const auto& k : kKeys) {
    out += k.key;
    out += " = ";
    out += k.def;
    out += "  # ";
    out += k.doc;
    out += "\n";
  }
  return out;
}

}  // namespace treedecay
