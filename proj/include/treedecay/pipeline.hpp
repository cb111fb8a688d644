#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "treedecay/config.hpp"
#include "treedecay/synthetic.hpp"

namespace treedecay {

// Stage-tagged failure; io distinguishes unreadable/invalid inputs
// from processing failures (the CLI maps them to exit codes 2 and 3).
struct StageError : std::runtime_error {
  StageError(std::string stage_, const std::string& what_, bool io_)
      : std::runtime_error("[" + stage_ + "] " + what_), stage(std::move(stage_)), io(io_) {}
  std::string stage;
  bool io;
};

struct PipelineOptions {
  PipelineConfig config;
  std::uint64_t seed = 42;
  int jobs = 1;
  bool write_images = false;
};

// Full chain on a plot: colorize, ground-filter, height-normalize,
// segment, project, extract. Writes dtm.txt, segments/, features.csv
// and optionally images/ under out_dir.
void run_pipeline_plot(const std::string& cloud_path, const std::string& raster_path,
                       const std::string& world_path, const std::string& out_dir,
                       const PipelineOptions& options);

// Dataset mode: the samples are already individual normalized trees,
// so only projection and feature extraction run.
void run_pipeline_dataset(const std::string& dataset_dir, const std::string& out_dir,
                          const PipelineOptions& options);

// Shared by both modes and by the crossval command.
FeatureTable extract_features(const std::vector<LabeledSample>& samples,
                              const PipelineOptions& options, const std::string& image_dir);

}  // namespace treedecay
