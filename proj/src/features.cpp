#include "treedecay/features.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace treedecay {

GrayImage to_gray(const ViewImage& image) {
  GrayImage gray;
  gray.width = image.width;
  gray.height = image.height;
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  gray.values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    gray.values[i] =
        (static_cast<double>(image.planes[0][i]) + image.planes[1][i] + image.planes[2][i]) / 3.0;
  return gray;
}

std::array<double, 7> hu_moments(const GrayImage& gray) {
  // Raw moments up to order 3, central moments via the usual binomial
  // identities, then the scale-normalized eta and the invariants.
  double m00 = 0, m10 = 0, m01 = 0, m20 = 0, m02 = 0, m11 = 0;
  double m30 = 0, m03 = 0, m21 = 0, m12 = 0;
  for (int row = 0; row < gray.height; ++row) {
    const double y = row;
    for (int col = 0; col < gray.width; ++col) {
      const double x = col;
      const double v = gray.at(col, row);
      if (v == 0.0) continue;
      m00 += v;
      m10 += x * v;
      m01 += y * v;
      m20 += x * x * v;
      m02 += y * y * v;
      m11 += x * y * v;
      m30 += x * x * x * v;
      m03 += y * y * y * v;
      m21 += x * x * y * v;
      m12 += x * y * y * v;
    }
  }
  if (m00 <= 0.0) throw std::invalid_argument("hu_moments: zero-mass image");
  const double xc = m10 / m00, yc = m01 / m00;

  const double mu20 = m20 - xc * m10;
  const double mu02 = m02 - yc * m01;
  const double mu11 = m11 - xc * m01;
  const double mu30 = m30 - 3 * xc * m20 + 2 * xc * xc * m10;
  const double mu03 = m03 - 3 * yc * m02 + 2 * yc * yc * m01;
  const double mu21 = m21 - 2 * xc * m11 - yc * m20 + 2 * xc * xc * m01;
  const double mu12 = m12 - 2 * yc * m11 - xc * m02 + 2 * yc * yc * m10;

  const double s2 = std::pow(m00, 2.0);  // mu00^(1 + (p+q)/2), p+q = 2
  const double s3 = std::pow(m00, 2.5);  // p+q = 3
  const double n20 = mu20 / s2, n02 = mu02 / s2, n11 = mu11 / s2;
  const double n30 = mu30 / s3, n03 = mu03 / s3, n21 = mu21 / s3, n12 = mu12 / s3;

  std::array<double, 7> phi{};
  phi[0] = n20 + n02;
  phi[1] = (n20 - n02) * (n20 - n02) + 4 * n11 * n11;
  phi[2] = (n30 - 3 * n12) * (n30 - 3 * n12) + (3 * n21 - n03) * (3 * n21 - n03);
  phi[3] = (n30 + n12) * (n30 + n12) + (n21 + n03) * (n21 + n03);
  phi[4] = (n30 - 3 * n12) * (n30 + n12) *
               ((n30 + n12) * (n30 + n12) - 3 * (n21 + n03) * (n21 + n03)) +
           (3 * n21 - n03) * (n21 + n03) *
               (3 * (n30 + n12) * (n30 + n12) - (n21 + n03) * (n21 + n03));
  phi[5] = (n20 - n02) * ((n30 + n12) * (n30 + n12) - (n21 + n03) * (n21 + n03)) +
           4 * n11 * (n30 + n12) * (n21 + n03);
  phi[6] = (3 * n21 - n03) * (n30 + n12) *
               ((n30 + n12) * (n30 + n12) - 3 * (n21 + n03) * (n21 + n03)) -
           (n30 - 3 * n12) * (n21 + n03) *
               (3 * (n30 + n12) * (n30 + n12) - (n21 + n03) * (n21 + n03));
  return phi;
}

std::array<double, 7> hu_signed_log(const std::array<double, 7>& phi) {
  std::array<double, 7> out{};
  for (int i = 0; i < 7; ++i) {
    const double sign = phi[i] > 0 ? 1.0 : (phi[i] < 0 ? -1.0 : 0.0);
    out[i] = sign * std::log10(std::fabs(phi[i]) + 1e-30);
  }
  return out;
}

Glcm glcm(const GrayImage& gray, int levels, int dx, int dy) {
  if (levels < 2) throw std::invalid_argument("glcm: need at least 2 levels");
  Glcm g;
  g.levels = levels;
  g.dx = dx;
  g.dy = dy;
  g.p.assign(static_cast<std::size_t>(levels) * levels, 0.0);

  auto quantize = [&](double v) {
    int q = static_cast<int>(std::floor(v * levels));
    return std::clamp(q, 0, levels - 1);
  };

  double total = 0.0;
  for (int row = 0; row < gray.height; ++row) {
    const int nrow = row + dy;
    if (nrow < 0 || nrow >= gray.height) continue;
    for (int col = 0; col < gray.width; ++col) {
      const int ncol = col + dx;
      if (ncol < 0 || ncol >= gray.width) continue;
      const int a = quantize(gray.at(col, row));
      const int b = quantize(gray.at(ncol, nrow));
      // symmetrized: count the pair both ways
      g.p[static_cast<std::size_t>(a) * levels + b] += 1.0;
      g.p[static_cast<std::size_t>(b) * levels + a] += 1.0;
      total += 2.0;
    }
  }
  if (total == 0.0)
    throw std::invalid_argument("glcm: image smaller than the pixel offset");
  for (auto& v : g.p) v /= total;
  return g;
}

namespace {

double xlog2(double v) { return v > 0.0 ? v * std::log2(v) : 0.0; }

}  // namespace

std::array<double, 13> haralick_from_glcm(const Glcm& g) {
  const int n = g.levels;
  std::vector<double> px(n, 0.0);  // == py by symmetry
  std::vector<double> p_sum(2 * n - 1, 0.0);   // indexed by i+j
  std::vector<double> p_diff(n, 0.0);          // indexed by |i-j|
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = g.at(i, j);
      px[i] += v;
      p_sum[i + j] += v;
      p_diff[std::abs(i - j)] += v;
    }

  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += i * px[i];
  double var = 0.0;
  for (int i = 0; i < n; ++i) var += (i - mean) * (i - mean) * px[i];

  double asm_ = 0.0, contrast = 0.0, corr_num = 0.0, idm = 0.0, entropy = 0.0;
  double ssq_var = 0.0, hxy1 = 0.0, hxy2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = g.at(i, j);
      asm_ += v * v;
      contrast += (i - j) * (i - j) * v;
      corr_num += i * j * v;
      ssq_var += (i - mean) * (i - mean) * v;
      idm += v / (1.0 + (i - j) * (i - j));
      entropy -= xlog2(v);
      const double pp = px[i] * px[j];
      if (pp > 0.0) hxy1 -= v * std::log2(pp);
      hxy2 -= xlog2(pp);
    }
  const double correlation = var > 0.0 ? (corr_num - mean * mean) / var : 0.0;

  double sum_avg = 0.0, sum_entropy = 0.0;
  for (int k = 0; k < 2 * n - 1; ++k) {
    sum_avg += k * p_sum[k];
    sum_entropy -= xlog2(p_sum[k]);
  }
  double sum_var = 0.0;
  for (int k = 0; k < 2 * n - 1; ++k)
    sum_var += (k - sum_avg) * (k - sum_avg) * p_sum[k];

  double diff_avg = 0.0, diff_entropy = 0.0;
  for (int k = 0; k < n; ++k) {
    diff_avg += k * p_diff[k];
    diff_entropy -= xlog2(p_diff[k]);
  }
  double diff_var = 0.0;
  for (int k = 0; k < n; ++k) diff_var += (k - diff_avg) * (k - diff_avg) * p_diff[k];

  double hx = 0.0;
  for (int i = 0; i < n; ++i) hx -= xlog2(px[i]);
  const double imc1 = hx > 0.0 ? (entropy - hxy1) / hx : 0.0;
  const double imc2_arg = 1.0 - std::exp(-2.0 * (hxy2 - entropy));
  const double imc2 = imc2_arg > 0.0 ? std::sqrt(imc2_arg) : 0.0;

  return {asm_,    contrast,    correlation, ssq_var,      idm,
          sum_avg, sum_var,     sum_entropy, entropy,      diff_var,
          diff_entropy, imc1,   imc2};
}

std::array<double, 13> haralick_features(const ViewImage& image, int levels) {
  if (image.width < 2 || image.height < 2)
    throw std::invalid_argument("haralick: image must be at least 2x2");
  const GrayImage gray = to_gray(image);
  // distance 1 at 0, 45, 90, 135 degrees
  const int offsets[4][2] = {{1, 0}, {1, -1}, {0, 1}, {1, 1}};
  std::array<double, 13> acc{};
  for (const auto& off : offsets) {
    const auto f = haralick_from_glcm(glcm(gray, levels, off[0], off[1]));
    for (int i = 0; i < 13; ++i) acc[i] += f[i];
  }
  for (auto& v : acc) v /= 4.0;
  return acc;
}

std::vector<double> hsv_histogram(const ViewImage& image, int bins) {
  if (bins < 1) throw std::invalid_argument("hsv_histogram: need at least 1 bin");
  std::vector<double> hist(static_cast<std::size_t>(bins) * bins * bins, 0.0);
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  double count = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = image.planes[0][i];  // (nir, r, g) as an RGB triple
    const double g = image.planes[1][i];
    const double b = image.planes[2][i];
    const double v = std::max({r, g, b});
    if (v <= 0.0) continue;  // background
    const double lo = std::min({r, g, b});
    const double delta = v - lo;
    const double s = delta / v;
    double h = 0.0;
    if (delta > 0.0) {
      if (v == r)
        h = std::fmod((g - b) / delta + 6.0, 6.0);
      else if (v == g)
        h = (b - r) / delta + 2.0;
      else
        h = (r - g) / delta + 4.0;
      h *= 60.0;
    }
    const int hb = std::min(bins - 1, static_cast<int>(h / 360.0 * bins));
    const int sb = std::min(bins - 1, static_cast<int>(s * bins));
    const int vb = std::min(bins - 1, static_cast<int>(v * bins));
    hist[(static_cast<std::size_t>(hb) * bins + sb) * bins + vb] += 1.0;
    count += 1.0;
  }
  if (count > 0.0)
    for (auto& v : hist) v /= count;
  return hist;
}

namespace {

struct Gradients {
  std::vector<double> gx, gy;
};

Gradients central_gradients(const GrayImage& gray) {
  const int w = gray.width, h = gray.height;
  Gradients g;
  g.gx.resize(static_cast<std::size_t>(w) * h);
  g.gy.resize(static_cast<std::size_t>(w) * h);
  auto clampc = [&](int c) { return std::clamp(c, 0, w - 1); };
  auto clampr = [&](int r) { return std::clamp(r, 0, h - 1); };
  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col) {
      const std::size_t i = static_cast<std::size_t>(row) * w + col;
      g.gx[i] = (gray.at(clampc(col + 1), row) - gray.at(clampc(col - 1), row)) / 2.0;
      g.gy[i] = (gray.at(col, clampr(row + 1)) - gray.at(col, clampr(row - 1))) / 2.0;
    }
  return g;
}

}  // namespace

std::vector<double> hog_descriptor(const ViewImage& image) {
  constexpr int kCell = 8;
  constexpr int kBins = 9;
  constexpr double kEps = 1e-5;
  const GrayImage gray = to_gray(image);
  const Gradients grad = central_gradients(gray);

  const int cells_x = gray.width / kCell;
  const int cells_y = gray.height / kCell;
  if (cells_x < 1 || cells_y < 1)
    throw std::invalid_argument("hog: image smaller than one 8x8 cell");

  std::vector<double> cell_hist(static_cast<std::size_t>(cells_x) * cells_y * kBins, 0.0);
  for (int cy = 0; cy < cells_y; ++cy)
    for (int cx = 0; cx < cells_x; ++cx) {
      double* hist = &cell_hist[(static_cast<std::size_t>(cy) * cells_x + cx) * kBins];
      for (int row = cy * kCell; row < (cy + 1) * kCell; ++row)
        for (int col = cx * kCell; col < (cx + 1) * kCell; ++col) {
          const std::size_t i = static_cast<std::size_t>(row) * gray.width + col;
          const double mag = std::hypot(grad.gx[i], grad.gy[i]);
          if (mag == 0.0) continue;
          double angle = std::atan2(grad.gy[i], grad.gx[i]) * 180.0 / 3.14159265358979323846;
          if (angle < 0) angle += 180.0;
          if (angle >= 180.0) angle -= 180.0;
          const int bin = std::min(kBins - 1, static_cast<int>(angle / 20.0));
          hist[bin] += mag;
        }
    }

  // 2x2-cell blocks with stride 1, L2-normed and concatenated. Images
  // with a single cell row or column degrade to 1-cell blocks.
  const int span_x = cells_x >= 2 ? 2 : 1;
  const int span_y = cells_y >= 2 ? 2 : 1;
  const int blocks_x = cells_x - span_x + 1;
  const int blocks_y = cells_y - span_y + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(blocks_x) * blocks_y * span_x * span_y * kBins);
  for (int by = 0; by < blocks_y; ++by) {
    for (int bx = 0; bx < blocks_x; ++bx) {
      double block[4 * kBins] = {};
      int k = 0;
      for (int cy = by; cy < by + span_y; ++cy)
        for (int cx = bx; cx < bx + span_x; ++cx)
          for (int bin = 0; bin < kBins; ++bin)
            block[k++] = cell_hist[(static_cast<std::size_t>(cy) * cells_x + cx) * kBins + bin];
      double norm2 = 0.0;
      for (int i = 0; i < k; ++i) norm2 += block[i] * block[i];
      const double inv = 1.0 / std::sqrt(norm2 + kEps * kEps);
      for (int i = 0; i < k; ++i) out.push_back(block[i] * inv);
    }
  }
  return out;
}

std::array<double, 3> harris_summary(const ViewImage& image) {
  const GrayImage gray = to_gray(image);
  const Gradients grad = central_gradients(gray);
  const int w = gray.width, h = gray.height;

  std::vector<double> response(static_cast<std::size_t>(w) * h, 0.0);
  double max_r = 0.0;
  double positive_sum = 0.0;
  std::size_t positive_count = 0;
  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col) {
      double sxx = 0, syy = 0, sxy = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = row + dr, cc = col + dc;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const std::size_t i = static_cast<std::size_t>(rr) * w + cc;
          sxx += grad.gx[i] * grad.gx[i];
          syy += grad.gy[i] * grad.gy[i];
          sxy += grad.gx[i] * grad.gy[i];
        }
      const double det = sxx * syy - sxy * sxy;
      const double trace = sxx + syy;
      const double r = det - 0.04 * trace * trace;
      response[static_cast<std::size_t>(row) * w + col] = r;
      if (r > max_r) max_r = r;
      if (r > 0.0) {
        positive_sum += r;
        ++positive_count;
      }
    }

  std::size_t corners = 0;
  if (max_r > 0.0) {
    const double threshold = 0.01 * max_r;
    for (int row = 0; row < h; ++row)
      for (int col = 0; col < w; ++col) {
        const double r = response[static_cast<std::size_t>(row) * w + col];
        if (r <= threshold) continue;
        bool is_max = true;
        for (int dr = -1; dr <= 1 && is_max; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int rr = row + dr, cc = col + dc;
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            if (response[static_cast<std::size_t>(rr) * w + cc] >= r) {
              is_max = false;
              break;
            }
          }
        if (is_max) ++corners;
      }
  }
  const double mean_positive =
      positive_count > 0 ? positive_sum / static_cast<double>(positive_count) : 0.0;
  return {static_cast<double>(corners), mean_positive, max_r};
}

FeatureVector global_feature_vector(const ViewImage& image, const FeatureOptions& opts) {
  FeatureVector fv;
  const auto har = haralick_features(image, opts.glcm_levels);
  fv.values.insert(fv.values.end(), har.begin(), har.end());
  const auto hsv = hsv_histogram(image, opts.hsv_bins);
  fv.values.insert(fv.values.end(), hsv.begin(), hsv.end());
  const auto hu = hu_signed_log(hu_moments(to_gray(image)));
  fv.values.insert(fv.values.end(), hu.begin(), hu.end());
  if (opts.include_optional) {
    const auto hog = hog_descriptor(image);
    fv.values.insert(fv.values.end(), hog.begin(), hog.end());
    const auto harris = harris_summary(image);
    fv.values.insert(fv.values.end(), harris.begin(), harris.end());
  }
  return fv;
}

std::vector<std::string> feature_names(const FeatureOptions& opts,
                                       std::size_t hog_length) {
  static const char* kHaralick[13] = {
      "asm",         "contrast",       "correlation", "variance",
      "idm",         "sum_average",    "sum_variance", "sum_entropy",
      "entropy",     "difference_variance", "difference_entropy", "imc1", "imc2"};
  std::vector<std::string> names;
  for (const char* h : kHaralick) names.push_back(std::string("haralick_") + h);
  char buf[32];
  const int b3 = opts.hsv_bins * opts.hsv_bins * opts.hsv_bins;
  for (int i = 0; i < b3; ++i) {
    std::snprintf(buf, sizeof(buf), "hsv_%03d", i);
    names.push_back(buf);
  }
  for (int i = 1; i <= 7; ++i) {
    std::snprintf(buf, sizeof(buf), "hu_%d", i);
    names.push_back(buf);
  }
  if (opts.include_optional) {
    for (std::size_t i = 0; i < hog_length; ++i) {
      std::snprintf(buf, sizeof(buf), "hog_%04zu", i);
      names.push_back(buf);
    }
    names.push_back("harris_count");
    names.push_back("harris_mean");
    names.push_back("harris_max");
  }
  return names;
}

std::vector<FeatureBlock> feature_blocks(const FeatureOptions& opts) {
  std::vector<FeatureBlock> blocks;
  const std::size_t b3 = static_cast<std::size_t>(opts.hsv_bins) * opts.hsv_bins * opts.hsv_bins;
  blocks.push_back({"haralick", 0, 13});
  blocks.push_back({"hsv", 13, b3});
  blocks.push_back({"hu", 13 + b3, 7});
  return blocks;
}

void write_feature_csv(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("features: cannot open " + path + " for writing");
  out << "tree_id,azimuth,label";
  for (const auto& name : table.feature_names) out << "," << name;
  out << "\n";
  char buf[32];
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << table.tree_ids[r] << "," << table.azimuths[r] << "," << table.labels[r];
    for (double v : table.rows[r]) {
      std::snprintf(buf, sizeof(buf), ",%.9g", v);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw io_error("features: short write to " + path);
}

FeatureTable read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("features: cannot open " + path);
  FeatureTable table;
  std::string line;
  if (!std::getline(in, line)) throw io_error("features: empty csv " + path);

  std::vector<std::string> header;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 4 || header[0] != "tree_id" || header[1] != "azimuth" ||
      header[2] != "label")
    throw io_error("features: bad csv header in " + path);
  table.feature_names.assign(header.begin() + 3, header.end());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size())
      throw io_error("features: row " + std::to_string(line_no) + " has " +
                     std::to_string(cells.size()) + " columns, expected " +
                     std::to_string(header.size()));
    table.tree_ids.push_back(cells[0]);
    try {
      table.azimuths.push_back(std::stoi(cells[1]));
      table.labels.push_back(std::stoi(cells[2]));
      std::vector<double> row;
      row.reserve(cells.size() - 3);
      for (std::size_t i = 3; i < cells.size(); ++i) row.push_back(std::stod(cells[i]));
      table.rows.push_back(std::move(row));
    } catch (const std::exception&) {
      throw io_error("features: non-numeric value on row " + std::to_string(line_no));
    }
  }
  return table;
}

}  // namespace treedecay
