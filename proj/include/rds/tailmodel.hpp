#pragma once

// Regular-variation data of the observable phi*(x) = |x - x0|^(-1/alpha):
// scaling and centering constants, the Levy measure, truncated moments.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rds/density.hpp"
#include "rds/intervals.hpp"

namespace rds {

class TailModel {
 public:
  /// alpha in (0,2), x0 in [0,1], b_const > 0, p_pos in [0,1].
  TailModel(double alpha, double x0, double b_const, double p_pos = 1.0);

  double alpha() const noexcept { return alpha_; }
  double x0() const noexcept { return x0_; }
  double b_const() const noexcept { return b_const_; }
  double p_pos() const noexcept { return p_pos_; }
  double beta_skew() const noexcept { return 2.0 * p_pos_ - 1.0; }

  /// |x - x0|^(-1/alpha); +inf at x = x0.
  double phi_star(double x) const noexcept {
    const double d = std::abs(x - x0_);
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(d, -1.0 / alpha_);
  }

  /// b_n = (b n)^(1/alpha), the exact root of n * b * t^(-alpha) = 1.
  double scaling_bn(double n) const;

  /// Pi_alpha(J) = sum over parts of p (x^-a - y^-a) or (1-p)(|y|^-a - |x|^-a).
  double levy_measure(const IntervalUnion& marks) const;

  /// A = {x in [0,1] : phi*(x) in scale * J}. Negative mark parts are empty.
  SpatialSet preimage(const IntervalUnion& marks, double scale) const;

 private:
  double alpha_;
  double x0_;
  double b_const_;
  double p_pos_;
};

inline double phi_star(double x, const TailModel& model) noexcept { return model.phi_star(x); }

/// c_alpha(eps): 0 for alpha < 1, -beta ln eps for alpha = 1,
/// eps^(1-alpha) beta alpha / (alpha - 1) for alpha in (1,2).
double c_alpha_eps(double alpha, double beta_skew, double eps);

/// Default radii {0.1 * 2^-k : k = 0..6}.
std::vector<double> default_eps_grid();

struct LocalDensityEstimate {
  double value;                   // extrapolated limit
  std::vector<double> quotients;  // (1/eps) * nu(|x - x0| < eps) per grid entry
  double relative_spread;
};

/// Estimates b = lim (1/eps) * integral of h over |x - x0| < eps by a least
/// squares line in eps through the quotients, read off at eps = 0. Throws
/// ConvergenceError when the quotients spread by more than tol (relative).
LocalDensityEstimate estimate_local_density(const DensityVector& h, double x0,
                                            std::span<const double> eps_grid, double tol = 0.5);

inline double local_density_constant(const DensityVector& h, double x0,
                                     std::span<const double> eps_grid, double tol = 0.5) {
  return estimate_local_density(h, x0, eps_grid, tol).value;
}

/// Where the centering constant gets its expectations from.
struct MomentSource {
  std::optional<double> mean_phi;                     // E_nu(phi), alpha in (1,2)
  std::function<double(double)> truncated_mean;       // t -> E_nu(phi 1{|phi| <= t}), alpha = 1

  /// Both expectations by exact cell-wise integration against h.
  static MomentSource from_density(const TailModel& model, const DensityVector& h);
};

/// c_n = 0 (alpha < 1), (n/b_n) E(phi 1{|phi| <= b_n}) (alpha = 1),
/// (n/b_n) E(phi) (alpha in (1,2)).
double centering_cn(std::size_t n, const TailModel& model, const MomentSource& moments);

struct KaramataReport {
  double second_observed;  // E(phi^2 1{phi <= s}) / (s^2 nu(phi > s)), s = eps b_n
  double second_target;    // alpha / (2 - alpha)
  std::optional<double> first_observed;  // alpha < 1 only
  std::optional<double> first_target;    // alpha / (1 - alpha)
  double threshold;        // s
};

KaramataReport karamata_ratio_check(const TailModel& model, double eps, std::size_t n,
                                    const DensityVector& h);

/// Truncated moments of phi* against h, by exact cell-wise integration.
/// nu(phi* > t)
double tail_mass(const TailModel& model, const DensityVector& h, double t);
/// E(phi*^power 1{phi* <= t}); t = +inf gives the full moment.
double truncated_moment(const TailModel& model, const DensityVector& h, double power, double t);

}  // namespace rds
