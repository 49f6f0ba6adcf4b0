#pragma once

// Interval map families (LSV intermittent maps and beta-transformations) and
// their random compositions.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rds/driving.hpp"

namespace rds {

enum class MapKind { Lsv, Beta };

/// One monotonicity interval of a map, with endpoint closedness.
struct BranchInterval {
  double lo;
  double hi;
  bool lo_closed;
  bool hi_closed;
};

/// A single interval map T: [0,1] -> [0,1].
///
/// Boundary convention: the LSV left branch owns [0, 1/2] (so T(1/2) = 1) and
/// the right branch (1/2, 1]; beta-maps use T(x) = beta*x - floor(beta*x) on all
/// of [0,1], which gives T(1) = beta - floor(beta), i.e. 0 for integer beta.
/// Every branch is increasing.
class MapSpec {
 public:
  /// Liverani-Saussol-Vaienti map, gamma in (0,1).
  static MapSpec lsv(double gamma);
  /// beta-transformation x -> beta*x mod 1, beta > 1.
  static MapSpec beta(double beta);

  MapKind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }
  const std::vector<double>& branch_points() const noexcept { return points_; }
  std::size_t branch_count() const noexcept { return points_.size() - 1; }

  double operator()(double x) const noexcept {
    if (kind_ == MapKind::Beta) {
      const double y = param_ * x;
      return y - std::floor(y);
    }
    if (x <= 0.5) return x * (1.0 + std::pow(2.0 * x, param_));
    return 2.0 * x - 1.0;
  }

  /// T'(x); at a branch endpoint the value of the branch owning x.
  double derivative(double x) const noexcept;

  std::vector<BranchInterval> branch_partition() const;

  /// Index of the branch owning x under the boundary convention.
  std::size_t branch_of(double x) const noexcept;
  /// Branch b extended continuously to its closed interval.
  double branch_value(std::size_t b, double x) const noexcept;
  /// Inverse of branch b on its closed image; y is clamped to the image.
  double branch_inverse(std::size_t b, double y) const noexcept;
  /// Closed image [T_b(lo), T_b(hi)] of branch b.
  std::pair<double, double> branch_image(std::size_t b) const noexcept;

  /// "lsv:0.25" or "beta:2.1".
  std::string name() const;

 private:
  MapSpec(MapKind kind, double param, std::vector<double> points)
      : kind_(kind), param_(param), points_(std::move(points)) {}

  MapKind kind_;
  double param_;
  std::vector<double> points_;
};

inline double eval_map(const MapSpec& spec, double x) noexcept { return spec(x); }
inline double eval_derivative(const MapSpec& spec, double x) noexcept {
  return spec.derivative(x);
}
inline std::vector<BranchInterval> branch_partition(const MapSpec& spec) {
  return spec.branch_partition();
}

/// The m maps an omega symbol selects from.
class MapFamily {
 public:
  explicit MapFamily(std::vector<MapSpec> specs);

  std::size_t size() const noexcept { return specs_.size(); }
  const MapSpec& operator[](std::size_t i) const { return specs_[i]; }
  const std::vector<MapSpec>& specs() const noexcept { return specs_; }

  bool all_beta() const noexcept;
  bool all_lsv() const noexcept;
  /// Largest / smallest LSV gamma; 0 when the family has no LSV map.
  double gamma_max() const noexcept;
  double gamma_min() const noexcept;

  /// Branch endpoints of all compositions T_w, |w| <= max_len, that lie in
  /// (0,1): backward preimages of interior branch points, deduplicated and
  /// sorted. Stops early once max_points is reached.
  std::vector<double> discontinuity_probe(std::size_t max_len, std::size_t max_points) const;

  /// True if some word w with |w| < max_len moves x to within tol of an
  /// interior branch point of the next map, i.e. x is (numerically) in the
  /// discontinuity set of some T_w with |w| <= max_len.
  bool near_discontinuity(double x, std::size_t max_len, double tol) const;

  std::string name() const;

 private:
  std::vector<MapSpec> specs_;
};

/// orbit[j] = T_omega^j(x) for j = 0..n. Throws WindowError if omega's window
/// does not cover [0, n).
std::vector<double> cocycle_orbit(const MapFamily& family, const OmegaPath& omega, double x,
                                  std::size_t n);

/// Parse "lsv:0.25" / "beta:2.1".
MapSpec parse_map_spec(const std::string& text);

}  // namespace rds
