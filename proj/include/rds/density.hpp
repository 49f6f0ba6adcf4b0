#pragma once

// Piecewise-constant densities on the uniform k-cell grid of [0,1].

#include <cstddef>
#include <span>
#include <vector>

namespace rds {

class DensityVector {
 public:
  DensityVector() = default;
  explicit DensityVector(std::vector<double> cells);

  static DensityVector constant(std::size_t k, double value = 1.0) {
    return DensityVector(std::vector<double>(k, value));
  }

  std::size_t size() const noexcept { return cells_.size(); }
  double operator[](std::size_t i) const { return cells_[i]; }
  std::span<const double> values() const noexcept { return cells_; }
  std::vector<double>& mutable_values() noexcept { return cells_; }

  double cell_width() const noexcept { return 1.0 / static_cast<double>(cells_.size()); }
  double midpoint(std::size_t i) const noexcept {
    return (static_cast<double>(i) + 0.5) * cell_width();
  }
  std::size_t cell_of(double x) const noexcept;

  /// Total integral, i.e. the mean of the cell values.
  double mass() const noexcept;
  DensityVector normalized() const;

  double value_at(double x) const noexcept { return cells_[cell_of(x)]; }
  /// Integral of the density over [a, b] intersected with [0,1].
  double integrate(double a, double b) const noexcept;
  /// Integral of h(x) |x - x0|^q over {r_lo <= |x - x0| < r_hi}, computed
  /// exactly cell by cell. Infinite when q <= -1 and the set reaches x0.
  double power_integral(double x0, double q, double r_lo, double r_hi) const noexcept;
  /// L1(m) distance.
  double l1_distance(const DensityVector& other) const;

 private:
  std::vector<double> cells_;
};

/// Inverse-CDF sampler for a piecewise-constant density.
class InverseCdfSampler {
 public:
  explicit InverseCdfSampler(const DensityVector& density);
  /// Maps u in [0,1) to a point of [0,1) distributed with the density.
  double operator()(double u) const noexcept;

 private:
  std::vector<double> cumulative_;  // cumulative_[i] = mass of cells < i, normalized
  std::vector<double> cells_;
  double width_ = 0.0;
};

}  // namespace rds
