#pragma once

// alpha-stable laws in Levy-Khintchine form, reference samplers and the
// distribution comparisons used for acceptance.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rds/density.hpp"
#include "rds/tailmodel.hpp"

namespace rds {

/// Stable law with Levy measure alpha (p 1{x>0} + (1-p) 1{x<0}) |x|^(-alpha-1) dx
/// and shift a_alpha = beta alpha / (1 - alpha) (0 when alpha = 1).
class StableLaw {
 public:
  StableLaw(double alpha, double p_pos = 1.0);

  double alpha() const noexcept { return alpha_; }
  double p_pos() const noexcept { return p_pos_; }
  double beta_skew() const noexcept { return 2.0 * p_pos_ - 1.0; }
  double a_alpha() const noexcept;

 private:
  double alpha_;
  double p_pos_;
};

struct QuadratureConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double series_cutoff = 1e-4;  // |x| below which the integrand is expanded
  std::size_t workspace = 2000;
};

/// log E[exp(itX)]: i t a_alpha + integral (e^{itx} - 1 - itx 1{|x|<=1}) Pi_alpha(dx).
std::complex<double> lk_exponent(const StableLaw& law, double t, const QuadratureConfig& cfg = {});
inline std::complex<double> stable_cf(const StableLaw& law, double t,
                                      const QuadratureConfig& cfg = {}) {
  return std::exp(lk_exponent(law, t, cfg));
}

enum class Provenance { Dynamical, IidOracle, Cms };
const char* to_string(Provenance p) noexcept;

struct SampleSet {
  std::vector<double> values;  // finite values only
  Provenance provenance = Provenance::Dynamical;
  std::uint64_t seed = 0;
  std::size_t excluded = 0;    // non-finite draws dropped
};

/// Per trial: (1/b_n) sum_{i<n} phi*(Y_i) - c_n with Y_i iid from `density`.
/// Trial t uses derive_seed(seed, "iid", t).
SampleSet iid_oracle(const TailModel& tail, const DensityVector& density, std::size_t n,
                     std::size_t trials, std::uint64_t seed, double bn, double cn,
                     std::size_t threads = 1);

struct CmsCalibration {
  double scale = 1.0;     // sigma
  double shift = 0.0;     // mu
  double residual = 0.0;  // rms |psi_LK - psi_model| / rms |psi_LK| over the grid
  bool flagged = false;
};

struct CmsSamples {
  SampleSet samples;
  CmsCalibration calibration;
};

/// Chambers-Mallows-Stuck draws in the S1 parametrization, then scaled and
/// shifted so their characteristic function matches the Levy-Khintchine one
/// on the calibration grid (least squares on the log-CF). alpha = 1 is not
/// supported.
CmsSamples cms_sampler(const StableLaw& law, std::size_t count, std::uint64_t seed,
                       std::span<const double> calibration_grid, double flag_threshold = 1e-6);

/// Default calibration grid: +-0.1, +-0.2, ..., +-2.
std::vector<double> default_calibration_grid();

/// Sup-distance between empirical CDFs (exact, merge-scan over sorted copies).
double ks_two_sample(std::span<const double> a, std::span<const double> b);
inline double ks_two_sample(const SampleSet& a, const SampleSet& b) {
  return ks_two_sample(a.values, b.values);
}

std::vector<std::complex<double>> empirical_cf(std::span<const double> samples,
                                               std::span<const double> t_grid);

}  // namespace rds
