#include "treedecay/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "treedecay/point_cloud.hpp"
#include "treedecay/rng.hpp"

namespace treedecay {

void RfConfig::validate() const {
  if (n_estimators < 1) throw std::invalid_argument("rf: n_estimators must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("rf: max_depth must be >= 1");
  if (features_per_split < 0)
    throw std::invalid_argument("rf: features_per_split must be >= 0");
  if (min_samples_leaf < 1) throw std::invalid_argument("rf: min_samples_leaf must be >= 1");
}

std::vector<double> balanced_class_weights(const std::vector<std::size_t>& counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) {
    if (c == 0) throw std::invalid_argument("balanced weights: zero-count class");
    total += c;
  }
  std::vector<double> weights(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    weights[i] = static_cast<double>(total) /
                 (static_cast<double>(counts.size()) * static_cast<double>(counts[i]));
  return weights;
}

const double* DecisionTree::leaf_for(const std::vector<double>& x,
                                     std::size_t /*n_classes*/) const {
  std::int32_t node = 0;
  while (nodes[node].feature >= 0) {
    node = x[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                           : nodes[node].right;
  }
  return leaf_dist.data() + nodes[node].leaf_offset;
}

namespace {

// Feature-major copy of the sample matrix shared by all trees.
struct FeatureColumns {
  std::size_t n = 0, d = 0;
  std::vector<double> values;  // d x n

  double at(std::size_t feature, std::size_t sample) const {
    return values[feature * n + sample];
  }
};

FeatureColumns transpose(const std::vector<std::vector<double>>& samples) {
  FeatureColumns cols;
  cols.n = samples.size();
  cols.d = samples.empty() ? 0 : samples[0].size();
  cols.values.resize(cols.n * cols.d);
  for (std::size_t s = 0; s < cols.n; ++s) {
    if (samples[s].size() != cols.d)
      throw std::invalid_argument("rf: ragged sample matrix");
    for (std::size_t f = 0; f < cols.d; ++f) cols.values[f * cols.n + s] = samples[s][f];
  }
  return cols;
}

struct SplitChoice {
  double score = std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureColumns& cols, const std::vector<int>& y,
              const std::vector<double>& w, const std::vector<std::uint32_t>& counts,
              const RfConfig& config, std::uint64_t seed, std::size_t n_classes)
      : cols_(cols),
        y_(y),
        w_(w),
        counts_(counts),
        config_(config),
        rng_(seed),
        k_(n_classes) {
    feature_pool_.resize(cols_.d);
    std::iota(feature_pool_.begin(), feature_pool_.end(), 0u);
    m_ = config.features_per_split > 0
             ? std::min<std::size_t>(config.features_per_split, cols_.d)
             : static_cast<std::size_t>(
                   std::ceil(std::sqrt(static_cast<double>(cols_.d))));
    tree_.split_gain.assign(cols_.d, 0.0);
  }

  DecisionTree build() {
    std::vector<std::uint32_t> idx;
    for (std::uint32_t s = 0; s < cols_.n; ++s)
      if (counts_[s] > 0) idx.push_back(s);
    if (idx.empty()) throw std::invalid_argument("rf: empty training set");
    grow(idx.data(), idx.size(), 0);
    return std::move(tree_);
  }

 private:
  // Weighted Gini mass of a class-weight tally: W - sum(w_c^2)/W.
  static double gini_mass(const std::vector<double>& tally, double total) {
    if (total <= 0.0) return 0.0;
    double sq = 0.0;
    for (double t : tally) sq += t * t;
    return total - sq / total;
  }

  std::int32_t grow(std::uint32_t* idx, std::size_t n, int depth) {
    const auto node_id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    std::vector<double> tally(k_, 0.0);
    double total_w = 0.0;
    std::size_t total_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tally[y_[idx[i]]] += w_[idx[i]];
      total_w += w_[idx[i]];
      total_count += counts_[idx[i]];
    }
    int present = 0;
    for (double t : tally) present += t > 0.0 ? 1 : 0;

    const bool stop = depth >= config_.max_depth || present <= 1 ||
                      total_count <= static_cast<std::size_t>(config_.min_samples_leaf);
    SplitChoice best;
    if (!stop) best = best_split(idx, n, tally, total_w, total_count);

    if (stop || best.feature < 0) {
      make_leaf(node_id, tally, total_w);
      return node_id;
    }

    // stable partition (reusing one scratch buffer) keeps relative
    // order, so the recursion is fully deterministic
    part_buf_.clear();
    std::size_t n_left = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t s = idx[i];
      if (cols_.at(best.feature, s) <= best.threshold)
        idx[n_left++] = s;
      else
        part_buf_.push_back(s);
    }
    std::copy(part_buf_.begin(), part_buf_.end(), idx + n_left);

    // record impurity decrease for the importance ranking
    std::vector<double> left_tally(k_, 0.0);
    double left_w = 0.0;
    for (std::size_t i = 0; i < n_left; ++i) {
      left_tally[y_[idx[i]]] += w_[idx[i]];
      left_w += w_[idx[i]];
    }
    std::vector<double> right_tally(k_);
    for (std::size_t c = 0; c < k_; ++c) right_tally[c] = tally[c] - left_tally[c];
    const double gain = gini_mass(tally, total_w) - gini_mass(left_tally, left_w) -
                        gini_mass(right_tally, total_w - left_w);
    tree_.split_gain[best.feature] += std::max(0.0, gain);

    tree_.nodes[node_id].feature = best.feature;
    tree_.nodes[node_id].threshold = best.threshold;
    const std::int32_t left = grow(idx, n_left, depth + 1);
    tree_.nodes[node_id].left = left;
    const std::int32_t right = grow(idx + n_left, n - n_left, depth + 1);
    tree_.nodes[node_id].right = right;
    return node_id;
  }

  void make_leaf(std::int32_t node_id, const std::vector<double>& tally, double total_w) {
    tree_.nodes[node_id].leaf_offset = static_cast<std::int32_t>(tree_.leaf_dist.size());
    for (double t : tally) tree_.leaf_dist.push_back(total_w > 0 ? t / total_w : 0.0);
  }

  SplitChoice best_split(const std::uint32_t* idx, std::size_t n,
                         const std::vector<double>& tally, double total_w,
                         std::size_t total_count) {
    // Draw m distinct candidate features, then undo the swaps so the
    // pool stays an identity permutation.
    std::vector<std::uint32_t> candidates(m_);
    std::vector<std::pair<std::size_t, std::size_t>> swaps;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.uniform_index(cols_.d - i));
      std::swap(feature_pool_[i], feature_pool_[j]);
      swaps.emplace_back(i, j);
      candidates[i] = feature_pool_[i];
    }
    for (auto it = swaps.rbegin(); it != swaps.rend(); ++it)
      std::swap(feature_pool_[it->first], feature_pool_[it->second]);

    SplitChoice best;
    scratch_.resize(n);
    std::vector<double> left_tally(k_);
    for (std::uint32_t f : candidates) {
      for (std::size_t i = 0; i < n; ++i)
        scratch_[i] = {cols_.at(f, idx[i]), idx[i]};
      std::sort(scratch_.begin(), scratch_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (scratch_.front().first == scratch_.back().first) continue;  // constant

      std::fill(left_tally.begin(), left_tally.end(), 0.0);
      double left_w = 0.0;
      std::size_t left_count = 0;
      std::size_t i = 0;
      while (i < n) {
        // move one run of equal values to the left side
        const double v = scratch_[i].first;
        while (i < n && scratch_[i].first == v) {
          const std::uint32_t s = scratch_[i].second;
          left_tally[y_[s]] += w_[s];
          left_w += w_[s];
          left_count += counts_[s];
          ++i;
        }
        if (i >= n) break;
        if (left_count < static_cast<std::size_t>(config_.min_samples_leaf)) continue;
        if (total_count - left_count < static_cast<std::size_t>(config_.min_samples_leaf))
          break;

        double left_sq = 0.0, right_sq = 0.0;
        for (std::size_t c = 0; c < k_; ++c) {
          left_sq += left_tally[c] * left_tally[c];
          const double r = tally[c] - left_tally[c];
          right_sq += r * r;
        }
        const double right_w = total_w - left_w;
        const double score =
            (left_w - left_sq / left_w) + (right_w - right_sq / right_w);
        const double threshold = (v + scratch_[i].first) / 2.0;
        if (score < best.score ||
            (score == best.score &&
             (static_cast<int>(f) < best.feature ||
              (static_cast<int>(f) == best.feature && threshold < best.threshold)))) {
          best.score = score;
          best.feature = static_cast<int>(f);
          best.threshold = threshold;
        }
      }
    }
    return best;
  }

  const FeatureColumns& cols_;
  const std::vector<int>& y_;
  const std::vector<double>& w_;
  const std::vector<std::uint32_t>& counts_;
  const RfConfig& config_;
  Rng rng_;
  std::size_t k_;
  std::size_t m_ = 1;
  std::vector<std::uint32_t> feature_pool_;
  std::vector<std::pair<double, std::uint32_t>> scratch_;
  std::vector<std::uint32_t> part_buf_;
  DecisionTree tree_;
};

DecisionTree fit_tree_impl(const FeatureColumns& cols, const std::vector<int>& y,
                           const std::vector<double>& w,
                           const std::vector<std::uint32_t>& counts,
                           const RfConfig& config, std::uint64_t seed,
                           std::size_t n_classes) {
  return TreeBuilder(cols, y, w, counts, config, seed, n_classes).build();
}

}  // namespace

DecisionTree fit_tree(const std::vector<std::vector<double>>& samples,
                      const std::vector<int>& class_indices,
                      const std::vector<double>& sample_weights, const RfConfig& config,
                      std::uint64_t seed, std::size_t n_classes) {
  config.validate();
  if (samples.empty()) throw std::invalid_argument("fit_tree: no samples");
  if (samples.size() != class_indices.size() || samples.size() != sample_weights.size())
    throw std::invalid_argument("fit_tree: size mismatch");
  const FeatureColumns cols = transpose(samples);
  std::vector<std::uint32_t> counts(samples.size(), 1);
  return fit_tree_impl(cols, class_indices, sample_weights, counts, config, seed,
                       n_classes);
}

std::vector<std::uint32_t> bootstrap_counts(std::uint64_t random_state,
                                            std::uint64_t tree_index, std::size_t n) {
  Rng rng(mix_seed(random_state, tree_index));
  std::vector<std::uint32_t> counts(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[rng.uniform_index(n)];
  return counts;
}

ForestModel fit_forest(const std::vector<std::vector<double>>& samples,
                       const std::vector<int>& labels, const RfConfig& config, int jobs) {
  config.validate();
  if (samples.empty()) throw std::invalid_argument("fit_forest: no samples");
  if (samples.size() != labels.size())
    throw std::invalid_argument("fit_forest: label count mismatch");

  ForestModel model;
  model.config = config;
  model.dim = samples[0].size();

  std::map<int, std::size_t> class_counts;
  for (int label : labels) ++class_counts[label];
  if (class_counts.size() < 2)
    throw std::invalid_argument("fit_forest: need at least 2 classes");
  std::vector<std::size_t> counts_per_class;
  for (const auto& [label, count] : class_counts) {
    model.classes.push_back(label);
    counts_per_class.push_back(count);
  }

  std::vector<double> class_w(model.classes.size(), 1.0);
  if (config.class_weight == RfConfig::ClassWeight::balanced)
    class_w = balanced_class_weights(counts_per_class);

  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]);
    y[i] = static_cast<int>(it - model.classes.begin());
  }

  const FeatureColumns cols = transpose(samples);
  const std::size_t n = samples.size();
  const std::size_t k = model.classes.size();
  model.trees.resize(config.n_estimators);

  auto fit_range = [&](int begin, int end) {
    std::vector<double> w(n);
    for (int t = begin; t < end; ++t) {
      std::vector<std::uint32_t> counts =
          config.bootstrap ? bootstrap_counts(config.random_state, t, n)
                           : std::vector<std::uint32_t>(n, 1);
      for (std::size_t s = 0; s < n; ++s) w[s] = counts[s] * class_w[y[s]];
      model.trees[t] = fit_tree_impl(cols, y, w, counts, config,
                                     mix_seed(config.random_state, t), k);
    }
  };

  jobs = std::max(1, jobs);
  if (jobs == 1 || config.n_estimators == 1) {
    fit_range(0, config.n_estimators);
  } else {
    std::vector<std::thread> workers;
    const int per = (config.n_estimators + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j) {
      const int begin = j * per;
      const int end = std::min(config.n_estimators, begin + per);
      if (begin >= end) break;
      workers.emplace_back(fit_range, begin, end);
    }
    for (auto& worker : workers) worker.join();
  }

  model.importances.assign(model.dim, 0.0);
  for (const auto& tree : model.trees)
    for (std::size_t f = 0; f < model.dim; ++f) model.importances[f] += tree.split_gain[f];
  const double total = std::accumulate(model.importances.begin(), model.importances.end(), 0.0);
  if (total > 0.0)
    for (auto& v : model.importances) v /= total;
  return model;
}

Prediction predict(const ForestModel& model, const std::vector<double>& features) {
  if (features.size() != model.dim)
    throw std::invalid_argument("predict: feature dimension mismatch");
  const std::size_t k = model.classes.size();
  Prediction pred;
  pred.probabilities.assign(k, 0.0);
  for (const auto& tree : model.trees) {
    const double* dist = tree.leaf_for(features, k);
    for (std::size_t c = 0; c < k; ++c) pred.probabilities[c] += dist[c];
  }
  const double inv = 1.0 / static_cast<double>(model.trees.size());
  for (auto& p : pred.probabilities) p *= inv;
  std::size_t arg = 0;
  for (std::size_t c = 1; c < k; ++c)
    if (pred.probabilities[c] > pred.probabilities[arg]) arg = c;
  pred.label = model.classes[arg];
  return pred;
}

const std::vector<double>& feature_importance(const ForestModel& model) {
  return model.importances;
}

GridSearchResult grid_search(const std::vector<std::vector<double>>& samples,
                             const std::vector<int>& labels,
                             const std::vector<RfConfig>& grid, int k, std::uint64_t seed,
                             int jobs) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  if (k < 2) throw std::invalid_argument("grid_search: k must be >= 2");

  // Shared stratified folds: per class, shuffled then dealt round-robin.
  std::vector<int> fold_of(samples.size(), -1);
  {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    Rng rng(mix_seed(seed, 0x666f6c64));  // "fold"
    int next = 0;
    for (auto& [label, members] : by_class) {
      for (std::size_t i = members.size(); i > 1; --i)
        std::swap(members[i - 1], members[rng.uniform_index(i)]);
      for (std::size_t i = 0; i < members.size(); ++i)
        fold_of[members[i]] = (next + static_cast<int>(i)) % k;
      next = (next + static_cast<int>(members.size())) % k;
    }
  }

  GridSearchResult result;
  double best_score = -1.0;
  for (const auto& config : grid) {
    double accuracy_sum = 0.0;
    for (int fold = 0; fold < k; ++fold) {
      std::vector<std::vector<double>> train_x;
      std::vector<int> train_y;
      std::vector<std::size_t> test_idx;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (fold_of[i] == fold)
          test_idx.push_back(i);
        else {
          train_x.push_back(samples[i]);
          train_y.push_back(labels[i]);
        }
      }
      const ForestModel model = fit_forest(train_x, train_y, config, jobs);
      std::size_t correct = 0;
      for (std::size_t i : test_idx)
        if (predict(model, samples[i]).label == labels[i]) ++correct;
      accuracy_sum += test_idx.empty()
                          ? 0.0
                          : static_cast<double>(correct) / static_cast<double>(test_idx.size());
    }
    const double mean_accuracy = accuracy_sum / k;
    result.table.emplace_back(config, mean_accuracy);
    if (mean_accuracy > best_score) {
      best_score = mean_accuracy;
      result.best = config;
    }
  }
  return result;
}

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& bytes, T value) {
  const std::size_t at = bytes.size();
  bytes.resize(at + sizeof(T));
  std::memcpy(bytes.data() + at, &value, sizeof(T));
}

template <typename T>
T take(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw io_error("model: truncated file");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

constexpr std::uint32_t kModelMagic = 0x46524454;  // "TDRF"
constexpr std::uint32_t kModelVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize_model(const ForestModel& model) {
  std::vector<std::uint8_t> bytes;
  put(bytes, kModelMagic);
  put(bytes, kModelVersion);
  put(bytes, static_cast<std::int32_t>(model.config.n_estimators));
  put(bytes, static_cast<std::int32_t>(model.config.max_depth));
  put(bytes, model.config.random_state);
  put(bytes, static_cast<std::uint8_t>(model.config.class_weight));
  put(bytes, static_cast<std::int32_t>(model.config.features_per_split));
  put(bytes, static_cast<std::int32_t>(model.config.min_samples_leaf));
  put(bytes, static_cast<std::uint8_t>(model.config.bootstrap ? 1 : 0));
  put(bytes, static_cast<std::uint32_t>(model.classes.size()));
  for (int c : model.classes) put(bytes, static_cast<std::int32_t>(c));
  put(bytes, static_cast<std::uint64_t>(model.dim));
  for (double v : model.importances) put(bytes, v);
  put(bytes, static_cast<std::uint32_t>(model.trees.size()));
  for (const auto& tree : model.trees) {
    put(bytes, static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& node : tree.nodes) {
      put(bytes, node.feature);
      put(bytes, node.threshold);
      put(bytes, node.left);
      put(bytes, node.right);
      put(bytes, node.leaf_offset);
    }
    put(bytes, static_cast<std::uint64_t>(tree.leaf_dist.size()));
    for (double v : tree.leaf_dist) put(bytes, v);
  }
  return bytes;
}

ForestModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  if (take<std::uint32_t>(bytes, pos) != kModelMagic)
    throw io_error("model: bad magic");
  if (take<std::uint32_t>(bytes, pos) != kModelVersion)
    throw io_error("model: unsupported version");
  ForestModel model;
  model.config.n_estimators = take<std::int32_t>(bytes, pos);
  model.config.max_depth = take<std::int32_t>(bytes, pos);
  model.config.random_state = take<std::uint64_t>(bytes, pos);
  model.config.class_weight = static_cast<RfConfig::ClassWeight>(take<std::uint8_t>(bytes, pos));
  model.config.features_per_split = take<std::int32_t>(bytes, pos);
  model.config.min_samples_leaf = take<std::int32_t>(bytes, pos);
  model.config.bootstrap = take<std::uint8_t>(bytes, pos) != 0;
  const auto k = take<std::uint32_t>(bytes, pos);
  for (std::uint32_t i = 0; i < k; ++i)
    model.classes.push_back(take<std::int32_t>(bytes, pos));
  model.dim = take<std::uint64_t>(bytes, pos);
  model.importances.resize(model.dim);
  for (auto& v : model.importances) v = take<double>(bytes, pos);
  const auto n_trees = take<std::uint32_t>(bytes, pos);
  model.trees.resize(n_trees);
  for (auto& tree : model.trees) {
    const auto n_nodes = take<std::uint32_t>(bytes, pos);
    tree.nodes.resize(n_nodes);
    for (auto& node : tree.nodes) {
      node.feature = take<std::int32_t>(bytes, pos);
      node.threshold = take<double>(bytes, pos);
      node.left = take<std::int32_t>(bytes, pos);
      node.right = take<std::int32_t>(bytes, pos);
      node.leaf_offset = take<std::int32_t>(bytes, pos);
    }
    const auto n_dist = take<std::uint64_t>(bytes, pos);
    tree.leaf_dist.resize(n_dist);
    for (auto& v : tree.leaf_dist) v = take<double>(bytes, pos);
  }
  return model;
}

void save_model(const ForestModel& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("model: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("model: short write to " + path);
}

ForestModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("model: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace treedecay
