#include "rds/intervals.hpp"

#include <algorithm>
#include <cmath>

#include "rds/error.hpp"

namespace rds {

SpatialSet::SpatialSet(std::vector<SpatialInterval> parts) {
  for (const auto& p : parts) {
    if (p.hi < p.lo) throw DomainError("spatial interval with hi < lo");
    if (p.hi > p.lo || (p.lo_closed && p.hi_closed)) parts_.push_back(p);
  }
  std::sort(parts_.begin(), parts_.end(),
            [](const SpatialInterval& a, const SpatialInterval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < parts_.size(); ++i) {
    const auto& a = parts_[i - 1];
    const auto& b = parts_[i];
    if (b.lo < a.hi || (b.lo == a.hi && a.hi_closed && b.lo_closed)) {
      throw DomainError("spatial set parts overlap");
    }
  }
}

SpatialSet SpatialSet::ball(double x0, double r) {
  if (r <= 0.0) return SpatialSet{};
  const double lo = x0 - r;
  const double hi = x0 + r;
  return SpatialSet({{std::max(lo, 0.0), std::min(hi, 1.0), lo <= 0.0, hi >= 1.0}});
}

double SpatialSet::lebesgue() const noexcept {
  double total = 0.0;
  for (const auto& p : parts_) total += p.length();
  return total;
}

IntervalUnion::IntervalUnion(std::vector<MarkInterval> parts) : parts_(std::move(parts)) {
  for (const auto& p : parts_) {
    if (!(p.lo < p.hi)) throw DomainError("mark interval (x, y] needs x < y");
    if (p.lo <= 0.0 && p.hi >= 0.0) {
      throw DomainError("mark interval must exclude a neighbourhood of 0");
    }
  }
  std::sort(parts_.begin(), parts_.end(),
            [](const MarkInterval& a, const MarkInterval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < parts_.size(); ++i) {
    if (parts_[i].lo < parts_[i - 1].hi) throw DomainError("mark intervals overlap");
  }
}

bool IntervalUnion::overlaps(const IntervalUnion& other) const noexcept {
  for (const auto& a : parts_) {
    for (const auto& b : other.parts_) {
      if (std::max(a.lo, b.lo) < std::min(a.hi, b.hi)) return true;
    }
  }
  return false;
}

double IntervalUnion::min_abs() const noexcept {
  double m = kInf;
  for (const auto& p : parts_) {
    m = std::min(m, p.lo >= 0.0 ? p.lo : std::abs(p.hi));
  }
  return m;
}

}  // namespace rds
