#include "rds/density.hpp"

#include <algorithm>
#include <cmath>

#include "rds/error.hpp"

namespace rds {

namespace {

// Integral of u^q over [u1, u2] for 0 <= u1 <= u2.
double power_segment(double u1, double u2, double q) {
  if (u2 <= u1) return 0.0;
  if (q == -1.0) {
    if (u1 <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log(u2 / u1);
  }
  if (u1 <= 0.0 && q < -1.0) return std::numeric_limits<double>::infinity();
  const double e = q + 1.0;
  return (std::pow(u2, e) - (u1 > 0.0 ? std::pow(u1, e) : 0.0)) / e;
}

}  // namespace

DensityVector::DensityVector(std::vector<double> cells) : cells_(std::move(cells)) {
  if (cells_.empty()) throw DomainError("density needs at least one cell");
  for (double v : cells_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("density cells must be finite and >= 0");
  }
}

std::size_t DensityVector::cell_of(double x) const noexcept {
  const double k = static_cast<double>(cells_.size());
  if (!(x > 0.0)) return 0;
  const auto i = static_cast<std::size_t>(x * k);
  return std::min(i, cells_.size() - 1);
}

double DensityVector::mass() const noexcept {
  double s = 0.0;
  for (double v : cells_) s += v;
  return s / static_cast<double>(cells_.size());
}

DensityVector DensityVector::normalized() const {
  const double m = mass();
  if (!(m > 0.0)) throw DomainError("cannot normalize a zero density");
  std::vector<double> out(cells_);
  for (double& v : out) v /= m;
  return DensityVector(std::move(out));
}

double DensityVector::integrate(double a, double b) const noexcept {
  a = std::max(a, 0.0);
  b = std::min(b, 1.0);
  if (b <= a) return 0.0;
  const double w = cell_width();
  const std::size_t i0 = cell_of(a);
  const std::size_t i1 = cell_of(b);
  if (i0 == i1) return cells_[i0] * (b - a);
  double total = cells_[i0] * ((static_cast<double>(i0) + 1.0) * w - a);
  for (std::size_t i = i0 + 1; i < i1; ++i) total += cells_[i] * w;
  total += cells_[i1] * (b - static_cast<double>(i1) * w);
  return total;
}

double DensityVector::power_integral(double x0, double q, double r_lo,
                                     double r_hi) const noexcept {
  r_lo = std::max(r_lo, 0.0);
  if (r_hi <= r_lo) return 0.0;
  const double w = cell_width();
  const double a = std::max(0.0, x0 - r_hi);
  const double b = std::min(1.0, x0 + r_hi);
  if (b <= a) return 0.0;
  double total = 0.0;
  for (std::size_t i = cell_of(a); i < cells_.size(); ++i) {
    const double lo = std::max(static_cast<double>(i) * w, a);
    const double hi = std::min(static_cast<double>(i + 1) * w, b);
    if (lo >= b) break;
    if (hi <= lo || cells_[i] == 0.0) continue;
    double part = 0.0;
    // left of x0: distances in [x0 - min(hi,x0), x0 - lo]
    if (lo < x0) {
      const double u1 = std::max(x0 - std::min(hi, x0), r_lo);
      const double u2 = std::min(x0 - lo, r_hi);
      part += power_segment(u1, u2, q);
    }
    if (hi > x0) {
      const double u1 = std::max(std::max(lo, x0) - x0, r_lo);
      const double u2 = std::min(hi - x0, r_hi);
      part += power_segment(u1, u2, q);
    }
    total += cells_[i] * part;
  }
  return total;
}

double DensityVector::l1_distance(const DensityVector& other) const {
  if (other.size() != size()) throw DomainError("density size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < cells_.size(); ++i) s += std::abs(cells_[i] - other.cells_[i]);
  return s * cell_width();
}

InverseCdfSampler::InverseCdfSampler(const DensityVector& density)
    : cumulative_(density.size() + 1, 0.0),
      cells_(density.values().begin(), density.values().end()),
      width_(density.cell_width()) {
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    cumulative_[i + 1] = cumulative_[i] + cells_[i] * width_;
  }
  const double total = cumulative_.back();
  if (!(total > 0.0)) throw DomainError("cannot sample from a zero density");
  for (double& c : cumulative_) c /= total;
  for (double& v : cells_) v /= total;
  cumulative_.back() = 1.0;
}

double InverseCdfSampler::operator()(double u) const noexcept {
  auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  const auto i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  const double lo = static_cast<double>(i) * width_;
  double x = lo + (u - cumulative_[i]) / (cells_[i] > 0.0 ? cells_[i] : 1.0);
  return std::clamp(x, lo, std::nextafter(lo + width_, lo));
}

}  // namespace rds
