#pragma once

#include <array>
#include <vector>

namespace treedecay {

struct PcaResult {
  std::array<std::vector<double>, 2> components;  // orthonormal, length d
  std::vector<std::array<double, 2>> projected;   // one 2D point per input
  std::array<double, 2> eigenvalues{};            // descending
  double total_variance = 0.0;                    // trace of the covariance
};

// Top-2 principal axes of the sample covariance (1/(n-1)), computed by
// a cyclic Jacobi eigensolve. Sign convention: the largest-magnitude
// entry of each component is positive. Throws on fewer than 2 samples
// or dimensions, or on zero-variance data.
PcaResult pca_2d(const std::vector<std::vector<double>>& vectors);

}  // namespace treedecay
