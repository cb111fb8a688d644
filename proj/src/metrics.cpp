#include "treedecay/metrics.hpp"

#include <stdexcept>
#include <string>

namespace treedecay {

ConfusionMatrix::ConfusionMatrix(int k) : k_(k) {
  if (k < 1) throw std::invalid_argument("confusion matrix: k must be >= 1");
  counts_.assign(static_cast<std::size_t>(k) * k, 0);
}

void ConfusionMatrix::add(int truth, int prediction) {
  if (truth < 1 || truth > k_ || prediction < 1 || prediction > k_)
    throw std::out_of_range("confusion matrix: label outside [1," + std::to_string(k_) + "]");
  ++counts_[static_cast<std::size_t>(truth - 1) * k_ + (prediction - 1)];
  ++total_;
}

std::uint64_t ConfusionMatrix::at(int truth, int prediction) const {
  return counts_[static_cast<std::size_t>(truth - 1) * k_ + (prediction - 1)];
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
  std::uint64_t sum = 0;
  for (int j = 1; j <= k_; ++j) sum += at(truth, j);
  return sum;
}

std::uint64_t ConfusionMatrix::col_sum(int prediction) const {
  std::uint64_t sum = 0;
  for (int i = 1; i <= k_; ++i) sum += at(i, prediction);
  return sum;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& truth,
                                 const std::vector<int>& prediction, int k) {
  if (truth.size() != prediction.size())
    throw std::invalid_argument("confusion matrix: truth/prediction length mismatch");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], prediction[i]);
  return cm;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("overall_accuracy: empty matrix");
  std::uint64_t diag = 0;
  for (int i = 1; i <= cm.k(); ++i) diag += cm.at(i, i);
  return static_cast<double>(diag) / static_cast<double>(cm.total());
}

std::vector<double> f1_per_class(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("f1_per_class: empty matrix");
  std::vector<double> f1(cm.k(), 0.0);
  for (int c = 1; c <= cm.k(); ++c) {
    const double tp = static_cast<double>(cm.at(c, c));
    const double fp = static_cast<double>(cm.col_sum(c)) - tp;
    const double fn = static_cast<double>(cm.row_sum(c)) - tp;
    if (tp == 0.0 && fp == 0.0 && fn == 0.0) continue;  // degenerate class -> 0
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    f1[c - 1] = precision + recall > 0 ? 2.0 * recall * precision / (recall + precision) : 0.0;
  }
  return f1;
}

double cohens_kappa(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("cohens_kappa: empty matrix");
  const double n = static_cast<double>(cm.total());
  std::uint64_t diag = 0;
  double chance = 0.0;
  for (int i = 1; i <= cm.k(); ++i) {
    diag += cm.at(i, i);
    chance += static_cast<double>(cm.row_sum(i)) * static_cast<double>(cm.col_sum(i));
  }
  const double p_o = static_cast<double>(diag) / n;
  const double p_c = chance / (n * n);
  if (p_c >= 1.0)
    throw std::domain_error("cohens_kappa: undefined (all mass in one cell)");
  return (p_o - p_c) / (1.0 - p_c);
}

}  // namespace treedecay
