#include "treedecay/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include "treedecay/rng.hpp"

namespace treedecay {

void AugmentConfig::validate() const {
  if (removal_fraction < 0 || removal_fraction >= 1)
    throw std::invalid_argument("augment: removal fraction must be in [0,1)");
  if (jitter_sigma < 0) throw std::invalid_argument("augment: jitter sigma must be >= 0");
}

namespace {

PointCloud augment_once(const PointCloud& cloud, const AugmentConfig& config,
                        std::uint64_t seed) {
  Rng rng(seed);
  double cx = 0.0, cy = 0.0;
  for (const auto& p : cloud) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(cloud.size());
  cy /= static_cast<double>(cloud.size());

  double c = 1.0, s = 0.0;
  if (config.rotation) {
    const double angle = rng.uniform(0.0, 6.28318530717958647692);
    c = std::cos(angle);
    s = std::sin(angle);
  }

  std::vector<MultispectralPoint> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) {
    const bool keep = rng.uniform() >= config.removal_fraction;
    if (!keep) continue;
    MultispectralPoint q = p;
    if (config.rotation) {
      const double dx = p.x - cx, dy = p.y - cy;
      q.x = cx + c * dx - s * dy;
      q.y = cy + s * dx + c * dy;
    }
    out.push_back(q);
  }
  if (config.jitter_sigma > 0) {
    for (auto& q : out) {
      q.x += rng.normal(0.0, config.jitter_sigma);
      q.y += rng.normal(0.0, config.jitter_sigma);
      q.z += rng.normal(0.0, config.jitter_sigma);
    }
  }
  return PointCloud(std::move(out), cloud.channel_state());
}

}  // namespace

PointCloud augment(const PointCloud& cloud, const AugmentConfig& config) {
  config.validate();
  if (cloud.empty()) throw std::invalid_argument("augment: empty point cloud");
  PointCloud out = augment_once(cloud, config, config.seed);
  if (out.empty()) out = augment_once(cloud, config, mix_seed(config.seed, 1));
  if (out.empty()) throw std::runtime_error("augment: all points removed twice in a row");
  return out;
}

std::vector<std::vector<std::size_t>> kfold_split(const std::vector<int>& labels,
                                                  const std::vector<int>& groups, int k,
                                                  std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be >= 2");
  if (labels.size() != groups.size())
    throw std::invalid_argument("kfold: labels/groups length mismatch");

  // Group -> label (must be unique), groups listed per label in first
  // appearance order so the shuffle is the only randomness.
  std::map<int, int> group_label;
  std::map<int, std::vector<int>> label_groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = group_label.emplace(groups[i], labels[i]);
    if (inserted)
      label_groups[labels[i]].push_back(groups[i]);
    else if (it->second != labels[i])
      throw std::invalid_argument("kfold: group " + std::to_string(groups[i]) +
                                  " carries more than one label");
  }

  Rng rng(mix_seed(seed, 0x6b666f6cULL));
  std::map<int, int> fold_of_group;
  int next_fold = 0;
  for (auto& [label, members] : label_groups) {
    if (members.size() < static_cast<std::size_t>(k))
      throw std::invalid_argument("kfold: class " + std::to_string(label) + " has " +
                                  std::to_string(members.size()) + " groups, needs >= " +
                                  std::to_string(k));
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng.uniform_index(i)]);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold_of_group[members[i]] = (next_fold + static_cast<int>(i)) % k;
    next_fold = (next_fold + static_cast<int>(members.size())) % k;
  }

  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < groups.size(); ++i)
    folds[fold_of_group.at(groups[i])].push_back(i);
  return folds;
}

std::vector<int> shuffle_labels_by_group(const std::vector<int>& labels,
                                         const std::vector<int>& groups,
                                         std::uint64_t seed) {
  std::map<int, int> group_label;
  std::vector<int> order;  // groups in first-appearance order
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (group_label.emplace(groups[i], labels[i]).second) order.push_back(groups[i]);

  std::vector<int> pool;
  pool.reserve(order.size());
  for (int g : order) pool.push_back(group_label.at(g));
  Rng rng(mix_seed(seed, 0x73687566ULL));
  for (std::size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1], pool[rng.uniform_index(i)]);

  std::map<int, int> shuffled;
  for (std::size_t i = 0; i < order.size(); ++i) shuffled[order[i]] = pool[i];
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = shuffled.at(groups[i]);
  return out;
}

namespace {

CrossvalRow evaluate_fold(const std::vector<int>& truth, const std::vector<int>& predicted,
                          int n_classes) {
  const ConfusionMatrix cm = confusion_matrix(truth, predicted, n_classes);
  CrossvalRow row;
  row.oa = overall_accuracy(cm);
  row.kappa = cohens_kappa(cm);
  row.f1 = f1_per_class(cm);
  return row;
}

CrossvalReport finish_report(std::vector<CrossvalRow> rows, int n_classes) {
  CrossvalReport report;
  report.n_classes = n_classes;
  report.mean.f1.assign(n_classes, 0.0);
  for (const auto& row : rows) {
    report.mean.oa += row.oa;
    report.mean.kappa += row.kappa;
    for (int c = 0; c < n_classes; ++c) report.mean.f1[c] += row.f1[c];
  }
  const double k = static_cast<double>(rows.size());
  report.mean.oa /= k;
  report.mean.kappa /= k;
  for (auto& f : report.mean.f1) f /= k;
  report.folds = std::move(rows);
  return report;
}

}  // namespace

CrossvalReport crossval_run(const std::vector<std::vector<double>>& features,
                            const std::vector<int>& labels, const std::vector<int>& groups,
                            const RfConfig& rf, int k, std::uint64_t seed, int jobs) {
  if (features.size() != labels.size() || features.size() != groups.size())
    throw std::invalid_argument("crossval: input length mismatch");
  const int n_classes = *std::max_element(labels.begin(), labels.end());
  const auto folds = kfold_split(labels, groups, k, seed);

  std::vector<CrossvalRow> rows;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<char> in_test(features.size(), 0);
    for (std::size_t i : folds[fold]) in_test[i] = 1;

    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    for (std::size_t i = 0; i < features.size(); ++i)
      if (!in_test[i]) {
        train_x.push_back(features[i]);
        train_y.push_back(labels[i]);
      }
    const ForestModel model = fit_forest(train_x, train_y, rf, jobs);

    std::vector<int> truth, predicted;
    truth.reserve(folds[fold].size());
    predicted.resize(folds[fold].size());
    for (std::size_t i : folds[fold]) truth.push_back(labels[i]);
    // trees are fitted in parallel above; prediction splits across jobs
    const auto& test_idx = folds[fold];
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(test_idx.size())));
    auto predict_range = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i)
        predicted[i] = predict(model, features[test_idx[i]]).label;
    };
    if (workers == 1) {
      predict_range(0, test_idx.size());
    } else {
      std::vector<std::thread> pool;
      const std::size_t per = (test_idx.size() + workers - 1) / workers;
      for (int w = 0; w < workers; ++w) {
        const std::size_t begin = w * per;
        if (begin >= test_idx.size()) break;
        pool.emplace_back(predict_range, begin, std::min(test_idx.size(), begin + per));
      }
      for (auto& t : pool) t.join();
    }
    rows.push_back(evaluate_fold(truth, predicted, n_classes));
  }
  return finish_report(std::move(rows), n_classes);
}

CrossvalReport crossval_run_clouds(const std::vector<CloudSample>& samples,
                                   const CanvasSpec& canvas, const FeatureOptions& fopts,
                                   const AugmentConfig& aug, const RfConfig& rf, int k,
                                   std::uint64_t seed, int jobs) {
  if (samples.empty()) throw std::invalid_argument("crossval: no samples");
  std::vector<int> labels, groups;
  for (const auto& s : samples) {
    labels.push_back(s.label);
    groups.push_back(s.group);
  }
  const int n_classes = *std::max_element(labels.begin(), labels.end());
  const auto folds = kfold_split(labels, groups, k, seed);

  auto views_of = [&](const PointCloud& cloud) {
    TreeSegment seg;
    seg.points = cloud;
    return project_views(seg, canvas);
  };

  // Held-out folds always see the original clouds.
  std::vector<std::array<std::vector<double>, 4>> plain(samples.size());
  {
    const int workers = std::max(1, jobs);
    std::vector<std::thread> pool;
    auto run = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto views = views_of(samples[i].cloud);
        for (int v = 0; v < 4; ++v)
          plain[i][v] = global_feature_vector(views[v], fopts).values;
      }
    };
    const std::size_t per = (samples.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = w * per;
      if (begin >= samples.size()) break;
      pool.emplace_back(run, begin, std::min(samples.size(), begin + per));
    }
    for (auto& t : pool) t.join();
  }

  std::vector<CrossvalRow> rows;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<char> in_test(samples.size(), 0);
    for (std::size_t i : folds[fold]) in_test[i] = 1;

    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (!in_test[i]) train_idx.push_back(i);

    // Augment, re-project and re-featurize the training side only.
    std::vector<std::array<std::vector<double>, 4>> aug_rows(train_idx.size());
    {
      const int workers = std::max(1, jobs);
      std::vector<std::thread> pool;
      auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
          const std::size_t i = train_idx[t];
          AugmentConfig cfg = aug;
          cfg.seed = mix_seed(mix_seed(seed, fold), i);
          const auto views = views_of(augment(samples[i].cloud, cfg));
          for (int v = 0; v < 4; ++v)
            aug_rows[t][v] = global_feature_vector(views[v], fopts).values;
        }
      };
      const std::size_t per = (train_idx.size() + workers - 1) / workers;
      for (int w = 0; w < workers; ++w) {
        const std::size_t begin = w * per;
        if (begin >= train_idx.size()) break;
        pool.emplace_back(run, begin, std::min(train_idx.size(), begin + per));
      }
      for (auto& t : pool) t.join();
    }

    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    for (std::size_t t = 0; t < train_idx.size(); ++t)
      for (int v = 0; v < 4; ++v) {
        train_x.push_back(std::move(aug_rows[t][v]));
        train_y.push_back(samples[train_idx[t]].label);
      }
    const ForestModel model = fit_forest(train_x, train_y, rf, jobs);

    std::vector<int> truth, predicted;
    for (std::size_t i : folds[fold])
      for (int v = 0; v < 4; ++v) {
        truth.push_back(samples[i].label);
        predicted.push_back(predict(model, plain[i][v]).label);
      }
    rows.push_back(evaluate_fold(truth, predicted, n_classes));
  }
  return finish_report(std::move(rows), n_classes);
}

std::string metrics_csv(const CrossvalReport& report) {
  std::string out = "iteration,oa,kappa";
  char buf[64];
  for (int c = 1; c <= report.n_classes; ++c) {
    std::snprintf(buf, sizeof(buf), ",f1_level_%d", c);
    out += buf;
  }
  out += "\n";
  auto emit = [&](const std::string& name, const CrossvalRow& row) {
    out += name;
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", row.oa, row.kappa);
    out += buf;
    for (double f : row.f1) {
      std::snprintf(buf, sizeof(buf), ",%.6f", f);
      out += buf;
    }
    out += "\n";
  };
  for (std::size_t i = 0; i < report.folds.size(); ++i)
    emit(std::to_string(i + 1), report.folds[i]);
  emit("average", report.mean);
  return out;
}

void write_metrics_csv(const CrossvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("metrics: cannot open " + path + " for writing");
  out << metrics_csv(report);
  if (!out) throw io_error("metrics: short write to " + path);
}

}  // namespace treedecay
