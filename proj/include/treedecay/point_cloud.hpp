#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace treedecay {

// Thrown for malformed or unreadable external inputs (files, streams).
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Bounds3 {
  Vec3 min;
  Vec3 max;
};

// One fused ALS point: geometry, laser intensity, and the three CIR
// channels. Channels hold raw 0-255 values at ingest and unit-range
// values after channel normalization.
struct MultispectralPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
  double nir = 0.0;
  double r = 0.0;
  double g = 0.0;
};

enum class ChannelState { raw, normalized };

class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<MultispectralPoint> points,
                      ChannelState state = ChannelState::raw)
      : points_(std::move(points)), state_(state) {
    recompute_bounds();
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const MultispectralPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<MultispectralPoint>& points() const { return points_; }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  // Bounds are kept equal to the exact min/max of the points; an empty
  // cloud has no bounds and queries on it throw.
  const Bounds3& bounds() const {
    if (points_.empty()) throw std::logic_error("bounds query on empty point cloud");
    return bounds_;
  }

  void add(const MultispectralPoint& p) {
    if (points_.empty()) {
      bounds_.min = bounds_.max = Vec3{p.x, p.y, p.z};
    } else {
      if (p.x < bounds_.min.x) bounds_.min.x = p.x;
      if (p.y < bounds_.min.y) bounds_.min.y = p.y;
      if (p.z < bounds_.min.z) bounds_.min.z = p.z;
      if (p.x > bounds_.max.x) bounds_.max.x = p.x;
      if (p.y > bounds_.max.y) bounds_.max.y = p.y;
      if (p.z > bounds_.max.z) bounds_.max.z = p.z;
    }
    points_.push_back(p);
  }

  ChannelState channel_state() const { return state_; }
  void set_channel_state(ChannelState s) { state_ = s; }

 private:
  void recompute_bounds() {
    if (points_.empty()) return;
    bounds_.min = bounds_.max = Vec3{points_[0].x, points_[0].y, points_[0].z};
    for (const auto& p : points_) {
      if (p.x < bounds_.min.x) bounds_.min.x = p.x;
      if (p.y < bounds_.min.y) bounds_.min.y = p.y;
      if (p.z < bounds_.min.z) bounds_.min.z = p.z;
      if (p.x > bounds_.max.x) bounds_.max.x = p.x;
      if (p.y > bounds_.max.y) bounds_.max.y = p.y;
      if (p.z > bounds_.max.z) bounds_.max.z = p.z;
    }
  }

  std::vector<MultispectralPoint> points_;
  Bounds3 bounds_;
  ChannelState state_ = ChannelState::raw;
};

// Tree condition class, 1 (live) through 5 (clean snag).
class DecayLevel {
 public:
  explicit DecayLevel(int level) : level_(level) {
    if (level < 1 || level > 5)
      throw std::invalid_argument("decay level must be in [1,5]");
  }
  int value() const { return level_; }
  int index() const { return level_ - 1; }

  friend bool operator==(DecayLevel a, DecayLevel b) { return a.level_ == b.level_; }
  friend bool operator!=(DecayLevel a, DecayLevel b) { return a.level_ != b.level_; }
  friend bool operator<(DecayLevel a, DecayLevel b) { return a.level_ < b.level_; }

 private:
  int level_;
};

}  // namespace treedecay
