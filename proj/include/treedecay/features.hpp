#pragma once

#include <array>
#include <string>
#include <vector>

#include "treedecay/projection.hpp"

namespace treedecay {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, [0,1]

  double at(int col, int row) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
};

// Channel mean; Hu and Haralick work on this plane.
GrayImage to_gray(const ViewImage& image);

// The seven Hu invariants of the gray plane (raw, uncompressed).
// Throws on a zero-mass image.
std::array<double, 7> hu_moments(const GrayImage& gray);

// sign(phi) * log10(|phi| + 1e-30): tames the dynamic range before the
// values enter the forest.
std::array<double, 7> hu_signed_log(const std::array<double, 7>& phi);

// Symmetrized, normalized gray-level co-occurrence matrix.
struct Glcm {
  int levels = 16;
  int dx = 1;
  int dy = 0;
  std::vector<double> p;  // levels x levels, sums to 1

  double at(int i, int j) const {
    return p[static_cast<std::size_t>(i) * levels + j];
  }
};

Glcm glcm(const GrayImage& gray, int levels, int dx, int dy);

// The 13 classical Haralick statistics of one GLCM, in the order
// asm, contrast, correlation, variance, idm, sum_average, sum_variance,
// sum_entropy, entropy, difference_variance, difference_entropy,
// imc1, imc2. Entropies are log2 with 0*log0 == 0; correlation of a
// constant image is 0.
std::array<double, 13> haralick_from_glcm(const Glcm& g);

// Distance-1 GLCMs in the four principal directions, statistics
// averaged over the directions.
std::array<double, 13> haralick_features(const ViewImage& image, int levels);

// 3D histogram over (H,S,V) of the non-background (V > 0) pixels,
// bins^3 values, L1-normalized. The channel triple (nir, r, g) is
// treated as RGB for the conversion. All-background yields all zeros.
std::vector<double> hsv_histogram(const ViewImage& image, int bins);

// 9 unsigned orientation bins, 8x8-pixel cells, 2x2-cell blocks with
// L2 normalization. Importance-ranking experiment only.
std::vector<double> hog_descriptor(const ViewImage& image);

// (corner count, mean positive response, max response) of the Harris
// response R = det(M) - 0.04 trace(M)^2. Importance-ranking only.
std::array<double, 3> harris_summary(const ViewImage& image);

struct FeatureOptions {
  int glcm_levels = 16;
  int hsv_bins = 8;
  bool include_optional = false;  // append HOG + Harris blocks
};

struct FeatureVector {
  std::vector<double> values;
};

// haralick(13) then hsv(bins^3) then hu(7), optional blocks last. The
// order is fixed; mixing it up would silently break stored models.
FeatureVector global_feature_vector(const ViewImage& image, const FeatureOptions& opts);

// hog_length: size of the HOG block when include_optional is set (it
// depends on the image size, so the caller passes the extracted
// length).
std::vector<std::string> feature_names(const FeatureOptions& opts,
                                       std::size_t hog_length = 0);

struct FeatureBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};
std::vector<FeatureBlock> feature_blocks(const FeatureOptions& opts);

// features.csv: "tree_id,azimuth,label,<names...>", one row per image.
// label 0 means unlabeled.
struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<std::string> tree_ids;
  std::vector<int> azimuths;
  std::vector<int> labels;
  std::vector<std::vector<double>> rows;
};

void write_feature_csv(const FeatureTable& table, const std::string& path);
FeatureTable read_feature_csv(const std::string& path);

}  // namespace treedecay
