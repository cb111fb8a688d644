#include "treedecay/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace treedecay {

namespace {

// Cyclic Jacobi on a symmetric matrix; returns eigenvalues on the
// diagonal and accumulates rotations intoV (columns are eigenvectors).
void jacobi_eigen(std::vector<double>& a, std::vector<double>& v, std::size_t d) {
  v.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

  double frob = 0.0;
  for (double x : a) frob += x * x;
  const double tol = 1e-24 * std::max(frob, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
    if (off <= tol) break;

    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (apq == 0.0) continue;
        const double app = a[p * d + p];
        const double aqq = a[q * d + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a[k * d + p];
          const double akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a[p * d + k];
          const double aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v[k * d + p];
          const double vkq = v[k * d + q];
          v[k * d + p] = c * vkp - s * vkq;
          v[k * d + q] = s * vkp + c * vkq;
        }
      }
    }
  }
}

}  // namespace

PcaResult pca_2d(const std::vector<std::vector<double>>& vectors) {
  const std::size_t n = vectors.size();
  if (n < 2) throw std::invalid_argument("pca_2d: need at least 2 vectors");
  const std::size_t d = vectors[0].size();
  if (d < 2) throw std::invalid_argument("pca_2d: need at least 2 dimensions");
  for (const auto& v : vectors)
    if (v.size() != d) throw std::invalid_argument("pca_2d: ragged input");

  std::vector<double> mean(d, 0.0);
  for (const auto& v : vectors)
    for (std::size_t j = 0; j < d; ++j) mean[j] += v[j];
  for (auto& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < d; ++i) {
      const double vi = v[i] - mean[i];
      for (std::size_t j = i; j < d; ++j) cov[i * d + j] += vi * (v[j] - mean[j]);
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov[i * d + j] /= denom;
      cov[j * d + i] = cov[i * d + j];
    }

  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += cov[i * d + i];
  if (trace <= 0.0) throw std::invalid_argument("pca_2d: zero-variance data");

  std::vector<double> a = cov, v;
  jacobi_eigen(a, v, d);

  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * d + i] > a[j * d + j]; });

  PcaResult result;
  result.total_variance = trace;
  for (int comp = 0; comp < 2; ++comp) {
    const std::size_t col = idx[comp];
    result.eigenvalues[comp] = a[col * d + col];
    auto& vec = result.components[comp];
    vec.resize(d);
    for (std::size_t k = 0; k < d; ++k) vec[k] = v[k * d + col];
    // largest-magnitude entry positive (first such index on ties)
    std::size_t arg = 0;
    for (std::size_t k = 1; k < d; ++k)
      if (std::fabs(vec[k]) > std::fabs(vec[arg])) arg = k;
    if (vec[arg] < 0.0)
      for (auto& x : vec) x = -x;
  }

  result.projected.reserve(n);
  for (const auto& row : vectors) {
    std::array<double, 2> p{0.0, 0.0};
    for (int comp = 0; comp < 2; ++comp)
      for (std::size_t j = 0; j < d; ++j)
        p[comp] += (row[j] - mean[j]) * result.components[comp][j];
    result.projected.push_back(p);
  }
  return result;
}

}  // namespace treedecay
