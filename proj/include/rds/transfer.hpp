#pragma once

// Ulam discretizations of transfer operators: per-map and annealed operators,
// quenched pullback densities, cone and decay diagnostics.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rds/density.hpp"
#include "rds/driving.hpp"
#include "rds/intervals.hpp"
#include "rds/maps.hpp"
#include "rds/stats.hpp"

namespace rds {

/// Row-stochastic k x k matrix, stored sparse by rows. Entry (i, j) is the
/// fraction of cell I_i that the map sends into cell I_j.
class UlamOperator {
 public:
  struct Entry {
    std::uint32_t col;
    double value;
  };

  UlamOperator() = default;
  /// rows[i] lists the nonzero entries of row i.
  UlamOperator(std::size_t k, const std::vector<std::vector<Entry>>& rows, std::string label);

  std::size_t k() const noexcept { return k_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }

  std::span<const Entry> row(std::size_t i) const noexcept {
    return {entries_.data() + row_start_[i], row_start_[i + 1] - row_start_[i]};
  }
  double entry(std::size_t i, std::size_t j) const noexcept;
  double row_sum(std::size_t i) const noexcept;
  double max_row_sum_error() const noexcept;

  /// Transfer operator on densities: out_j = sum_i f_i P_ij.
  DensityVector push(const DensityVector& f) const;
  void push_into(std::span<const double> f, std::span<double> out) const noexcept;
  /// Koopman action on functions: (P g)_i = sum_j P_ij g_j.
  std::vector<double> pull(std::span<const double> g) const;

  /// Matrix product first * second (apply first, then second).
  static UlamOperator compose(const UlamOperator& first, const UlamOperator& second);
  static UlamOperator convex_combination(std::span<const UlamOperator> ops,
                                         std::span<const double> weights, std::string label);

 private:
  std::size_t k_ = 0;
  std::vector<std::size_t> row_start_;
  std::vector<Entry> entries_;
  std::string label_;
};

/// Exact Ulam matrix of one map: entries are preimage lengths computed by
/// branch-inverse interval arithmetic.
UlamOperator ulam_matrix(const MapSpec& spec, std::size_t k);

/// Ulam matrices of every map in a family at a common resolution.
class FamilyOperators {
 public:
  FamilyOperators(const MapFamily& family, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return ops_.size(); }
  const UlamOperator& operator[](std::size_t i) const { return ops_[i]; }
  std::span<const UlamOperator> operators() const noexcept { return ops_; }

 private:
  std::size_t k_;
  std::vector<UlamOperator> ops_;
};

/// P = sum_i p_i P_i.
UlamOperator annealed_operator(const FamilyOperators& ops, const ProbabilityVector& probs);
UlamOperator annealed_operator(const MapFamily& family, const ProbabilityVector& probs,
                               std::size_t k);

struct StationaryResult {
  DensityVector density;
  double residual;  // L1 distance between density and density * P
  std::size_t iterations;
};

/// Power iteration from the uniform density, replacing the iterate by the
/// mean of the last 100 iterates every 100 steps. Throws ConvergenceError
/// after max_iter steps without reaching tol.
StationaryResult stationary_density(const UlamOperator& op, double tol = 1e-12,
                                    std::size_t max_iter = 400000);

/// h_n(omega) = P_{omega_-1} ... P_{omega_-n} 1. Needs omega to cover [-n, 0).
DensityVector pullback_density(const FamilyOperators& ops, const OmegaPath& omega,
                               std::size_t n);

/// Pullback depth used to stand in for the fiber measure at horizon n:
/// 50 for uniformly expanding families, ceil(sqrt n) capped at 400 otherwise.
std::size_t pullback_depth(const MapFamily& family, std::size_t n);

struct ConeReport {
  bool in_cone = true;
  std::size_t monotonicity_violations = 0;  // f_i < f_{i+1}
  std::size_t growth_violations = 0;        // x^(g+1) f decreases
  std::size_t bound_violations = 0;         // f_i > a x^-g m(f)
  std::size_t first_violation = 0;          // cell index, valid when !in_cone
  double worst_bound_ratio = 0.0;           // max f_i / (x_i^-g m(f))
};

/// Discrete cone test on cell midpoints. Comparisons allow a relative slack
/// of 1e-12 for rounding.
ConeReport cone_check(const DensityVector& f, double gamma_max, double a);

/// max over cells in [delta, 1] of max(f/m(f), m(f)/f).
double comparability_constant(const DensityVector& f, double delta);

struct DecayReport {
  std::vector<double> correlations;  // index n-1 holds lag n
  LinearFit geometric;               // log|c_n| against n
  LinearFit power;                   // log|c_n| against log n
  double geometric_ratio = 0.0;      // exp(geometric.slope)
};

/// |integral f g(U^n) dnu - integral f dnu integral g dnu| for n = 1..n_max,
/// computed with the annealed Koopman action. Fits use lags in
/// [fit_from, n_max] whose correlation exceeds floor.
DecayReport decay_estimate(const UlamOperator& annealed, const DensityVector& stationary,
                           std::span<const double> f, std::span<const double> g,
                           std::size_t n_max, std::size_t fit_from = 1, double floor = 1e-13);

/// Sum over j = floor(ns)+1 .. floor(nt) of nu^{sigma^j omega}(A), each fiber
/// measure replaced by the pullback density of the given depth.
double fiber_measure_sum(const FamilyOperators& ops, const OmegaPath& omega, const SpatialSet& set,
                         double s, double t, std::size_t n, std::size_t depth,
                         std::size_t threads = 1);

/// nu(A) for a piecewise-constant density.
double density_measure(const DensityVector& h, const SpatialSet& set) noexcept;

}  // namespace rds
