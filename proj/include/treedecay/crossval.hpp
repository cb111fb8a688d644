#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treedecay/features.hpp"
#include "treedecay/metrics.hpp"
#include "treedecay/point_cloud.hpp"
#include "treedecay/projection.hpp"
#include "treedecay/random_forest.hpp"

namespace treedecay {

struct AugmentConfig {
  bool rotation = true;
  double removal_fraction = 0.1;  // independent per-point drop probability
  double jitter_sigma = 0.02;     // m, iid Gaussian on x, y, z
  std::uint64_t seed = 0;

  void validate() const;
};

// Rotation about the vertical axis through the xy centroid, then
// removal, then jitter; channels stay untouched. Deterministic per
// seed. If every point gets dropped the draw retries once with a
// derived seed before giving up.
PointCloud augment(const PointCloud& cloud, const AugmentConfig& config);

// Stratified, group-atomic k folds: all members of a group land in one
// fold, and each label's groups spread across folds within a count of
// one. Every group must carry a single label, and every label needs at
// least k groups. Returns sample indices per fold.
std::vector<std::vector<std::size_t>> kfold_split(const std::vector<int>& labels,
                                                  const std::vector<int>& groups, int k,
                                                  std::uint64_t seed);

// Group-level label permutation (the chance-level control).
std::vector<int> shuffle_labels_by_group(const std::vector<int>& labels,
                                         const std::vector<int>& groups,
                                         std::uint64_t seed);

struct CrossvalRow {
  double oa = 0.0;
  double kappa = 0.0;
  std::vector<double> f1;  // per class
};

struct CrossvalReport {
  std::vector<CrossvalRow> folds;
  CrossvalRow mean;
  int n_classes = 0;
};

// K-fold cross-validation on precomputed feature rows (labels are
// 1-based class levels; groups keep the four views of one tree
// together).
CrossvalReport crossval_run(const std::vector<std::vector<double>>& features,
                            const std::vector<int>& labels, const std::vector<int>& groups,
                            const RfConfig& rf, int k, std::uint64_t seed, int jobs = 1);

// Cloud-level variant implementing the full protocol: training folds
// are augmented, re-projected and re-featurized every fold; held-out
// folds use their original clouds.
struct CloudSample {
  PointCloud cloud;  // height-normalized, unit channels
  int label = 0;     // decay level
  int group = 0;     // tree id
};

CrossvalReport crossval_run_clouds(const std::vector<CloudSample>& samples,
                                   const CanvasSpec& canvas, const FeatureOptions& fopts,
                                   const AugmentConfig& aug, const RfConfig& rf, int k,
                                   std::uint64_t seed, int jobs = 1);

// metrics.csv shaped like the result tables: one row per fold plus an
// average row; columns OA, kappa, F1 per level.
std::string metrics_csv(const CrossvalReport& report);
void write_metrics_csv(const CrossvalReport& report, const std::string& path);

}  // namespace treedecay
