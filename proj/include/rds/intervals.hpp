#pragma once

// Interval sets used as spatial targets in [0,1] and as mark sets in R \ {0}.

#include <limits>
#include <vector>

namespace rds {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Interval of [0,1] with explicit endpoint closedness.
struct SpatialInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool contains(double x) const noexcept {
    return (lo_closed ? x >= lo : x > lo) && (hi_closed ? x <= hi : x < hi);
  }
  double length() const noexcept { return hi > lo ? hi - lo : 0.0; }
};

/// Finite union of spatial intervals; parts are kept sorted and disjoint.
class SpatialSet {
 public:
  SpatialSet() = default;
  explicit SpatialSet(std::vector<SpatialInterval> parts);

  static SpatialSet whole() { return SpatialSet({SpatialInterval{}}); }
  static SpatialSet closed(double lo, double hi) { return SpatialSet({{lo, hi, true, true}}); }
  static SpatialSet half_open(double lo, double hi) { return SpatialSet({{lo, hi, true, false}}); }
  /// Open ball (x0 - r, x0 + r) clipped to [0,1].
  static SpatialSet ball(double x0, double r);

  bool contains(double x) const noexcept {
    for (const auto& p : parts_) {
      if (p.contains(x)) return true;
    }
    return false;
  }
  bool empty() const noexcept { return parts_.empty(); }
  double lebesgue() const noexcept;
  const std::vector<SpatialInterval>& parts() const noexcept { return parts_; }

 private:
  std::vector<SpatialInterval> parts_;
};

/// Mark interval (lo, hi]; hi may be +inf (then +inf itself is contained).
struct MarkInterval {
  double lo;
  double hi;

  bool contains(double v) const noexcept {
    return v > lo && (v <= hi || hi == kInf);
  }
};

/// Finite union of pairwise disjoint (x, y] avoiding a neighbourhood of 0.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  /// Throws DomainError if a part is empty, touches 0, or parts overlap.
  explicit IntervalUnion(std::vector<MarkInterval> parts);

  static IntervalUnion above(double x) { return IntervalUnion({{x, kInf}}); }

  bool contains(double v) const noexcept {
    for (const auto& p : parts_) {
      if (p.contains(v)) return true;
    }
    return false;
  }
  bool empty() const noexcept { return parts_.empty(); }
  bool overlaps(const IntervalUnion& other) const noexcept;
  /// Smallest |mark| any part admits (distance of the union from 0).
  double min_abs() const noexcept;
  const std::vector<MarkInterval>& parts() const noexcept { return parts_; }

 private:
  std::vector<MarkInterval> parts_;
};

}  // namespace rds
