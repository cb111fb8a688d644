#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace treedecay {

struct RfConfig {
  int n_estimators = 800;
  int max_depth = 64;
  std::uint64_t random_state = 42;
  enum class ClassWeight { uniform, balanced };
  ClassWeight class_weight = ClassWeight::balanced;
  int features_per_split = 0;  // 0 means ceil(sqrt(dim))
  int min_samples_leaf = 1;
  bool bootstrap = true;  // switched off only by tests

  void validate() const;
};

// w_c = N / (K * n_c); every class must be present.
std::vector<double> balanced_class_weights(const std::vector<std::size_t>& counts);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t leaf_offset = -1;  // K doubles into leaf_dist
};

struct DecisionTree {
  std::vector<TreeNode> nodes;    // preorder (node before left subtree before right)
  std::vector<double> leaf_dist;  // weight-normalized class distributions
  std::vector<double> split_gain;  // per-feature weighted Gini decrease

  const double* leaf_for(const std::vector<double>& x, std::size_t n_classes) const;
};

// CART with a seeded random feature subset per node. Splits minimize
// the summed weighted Gini impurity of the children; thresholds sit at
// midpoints between consecutive distinct sorted values; ties prefer
// the lowest feature index, then the lowest threshold.
DecisionTree fit_tree(const std::vector<std::vector<double>>& samples,
                      const std::vector<int>& class_indices,
                      const std::vector<double>& sample_weights, const RfConfig& config,
                      std::uint64_t seed, std::size_t n_classes);

struct ForestModel {
  RfConfig config;
  std::vector<int> classes;  // sorted original labels
  std::size_t dim = 0;
  std::vector<DecisionTree> trees;
  std::vector<double> importances;  // per feature, normalized to sum 1
};

// Bootstrap multiset for tree `index`: a pure function of
// (random_state, index), exposed so reproducibility is testable.
std::vector<std::uint32_t> bootstrap_counts(std::uint64_t random_state,
                                            std::uint64_t tree_index, std::size_t n);

ForestModel fit_forest(const std::vector<std::vector<double>>& samples,
                       const std::vector<int>& labels, const RfConfig& config,
                       int jobs = 1);

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;  // per class, in model.classes order
};

Prediction predict(const ForestModel& model, const std::vector<double>& features);

// Mean decrease in weighted Gini impurity, normalized to sum 1.
const std::vector<double>& feature_importance(const ForestModel& model);

struct GridSearchResult {
  RfConfig best;
  std::vector<std::pair<RfConfig, double>> table;  // config, mean CV accuracy
};

// Every grid cell scored by stratified k-fold mean overall accuracy on
// shared folds; ties keep the earliest grid entry.
GridSearchResult grid_search(const std::vector<std::vector<double>>& samples,
                             const std::vector<int>& labels,
                             const std::vector<RfConfig>& grid, int k, std::uint64_t seed,
                             int jobs = 1);

// Versioned flat binary: magic, config, class table, preorder nodes.
// Identical seeds and data produce identical bytes.
std::vector<std::uint8_t> serialize_model(const ForestModel& model);
ForestModel deserialize_model(const std::vector<std::uint8_t>& bytes);
void save_model(const ForestModel& model, const std::string& path);
ForestModel load_model(const std::string& path);

}  // namespace treedecay
