#pragma once

#include <cstdint>
#include <vector>

namespace treedecay {

// K x K counts, rows are truth, columns are prediction. Labels are
// 1-based (decay levels map directly).
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int k);

  void add(int truth, int prediction);
  std::uint64_t at(int truth, int prediction) const;

  int k() const { return k_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t row_sum(int truth) const;
  std::uint64_t col_sum(int prediction) const;

 private:
  int k_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& truth,
                                 const std::vector<int>& prediction, int k);

// Trace over total; equals (TP+TN)/(TP+TN+FP+FN) for K = 2.
double overall_accuracy(const ConfusionMatrix& cm);

// One-vs-rest F1 per class; a class with TP = FP = FN = 0 scores 0.
std::vector<double> f1_per_class(const ConfusionMatrix& cm);

// kappa = (p_o - p_c) / (1 - p_c); undefined (throws) when p_c == 1,
// i.e. all mass sits in a single cell.
double cohens_kappa(const ConfusionMatrix& cm);

}  // namespace treedecay
