#pragma once

// Rescaled point patterns of large observable values, hitting and return
// times, and the exponential-law and Poisson experiments built from them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rds/density.hpp"
#include "rds/driving.hpp"
#include "rds/intervals.hpp"
#include "rds/maps.hpp"
#include "rds/tailmodel.hpp"
#include "rds/transfer.hpp"

namespace rds {

struct PatternPoint {
  double time;  // j / n
  double mark;  // phi*(T^{j-1} x) / b_n, possibly +inf
};

/// Points (j/n, phi*(orbit[j-1]) / b_n), j >= 1, with mark above mark_floor.
struct PointPattern {
  std::size_t n = 0;
  std::vector<PatternPoint> points;
};

PointPattern build_pattern(std::span<const double> orbit, std::size_t n, double bn,
                           const TailModel& model, double mark_floor);

/// Rectangle (s, t] x J.
struct Rect {
  double s;
  double t;
  IntervalUnion marks;
};

/// Number of points in the union of rectangles. Throws DomainError when two
/// rectangles overlap.
std::size_t count_in(const PointPattern& pattern, std::span<const Rect> rects);

struct HittingRecord {
  std::optional<std::uint64_t> hit_time;  // empty when censored at the cap
  std::uint64_t cap = 0;
  std::int64_t start_fiber = 0;

  bool censored() const noexcept { return !hit_time.has_value(); }
};

/// R_U = min{k >= 1 : T_omega^k(x) in U}, searched up to cap.
HittingRecord hitting_time(const MapFamily& family, const OmegaPath& omega, double x,
                           const SpatialSet& target, std::uint64_t cap);

/// Lower estimate of the shortest return time of V: the least j <= max_len
/// such that some word of length j maps a grid point of V back into V.
/// Words are enumerated exhaustively while m^j <= exhaustive_limit and drawn
/// at random (mc_words of them, from seed) beyond. Returns max_len + 1 when
/// no return was found.
std::size_t shortest_return(const MapFamily& family, const SpatialSet& region, std::size_t max_len,
                            std::size_t grid_n, std::size_t exhaustive_limit = 1u << 16,
                            std::size_t mc_words = 4096, std::uint64_t seed = 0);

struct PeriodicityVerdict {
  bool periodic = false;
  std::vector<int> word;  // witness when periodic
  double distance = 0.0;  // |T_w x0 - x0| of the witness, or closest approach
};

/// Searches all words of length 1..max_len for |T_w(x0) - x0| <= tol.
PeriodicityVerdict periodicity_probe(const MapFamily& family, double x0, std::size_t max_len,
                                     double tol);

/// Grid estimate of m{x : |T_omega^n x - x| <= eps} from grid midpoints.
double short_return_set_measure(const MapFamily& family, const OmegaPath& omega, std::size_t n,
                                double eps, std::size_t grid);

enum class StartMeasure { Fiber, Lebesgue };

/// Inputs shared by the exponential-law and Poisson experiments.
struct TrialSetup {
  const MapFamily* family = nullptr;
  const FamilyOperators* fiber_ops = nullptr;  // Ulam matrices for the start density
  OmegaPath omega;                             // fixed driving sequence
  TailModel tail;
  std::size_t n = 0;
  std::size_t trials = 0;
  StartMeasure start = StartMeasure::Fiber;
  std::size_t fiber_depth = 50;
  std::uint64_t seed = 0;     // start points are drawn from derive_seed(seed, "start", trial)
  std::size_t threads = 1;
};

struct ExponentialLawResult {
  double target_mass;             // Pi_alpha(J)
  std::vector<double> tau;        // grid on [0, tau_max]
  std::vector<double> empirical;  // P(R > floor(n tau))
  std::vector<double> target;     // exp(-tau Pi)
  double sup_distance;
  std::size_t censored;
  std::uint64_t cap;
  double target_lebesgue;         // m(A_n)
  std::vector<double> hit_over_n; // R / n per trial (censored as +inf)
};

/// Survival of R_{A_n}/n started at fiber floor(ns), A_n = phi*^-1(b_n J),
/// against exp(-tau Pi_alpha(J)) on tau in [0, tau_max].
ExponentialLawResult exponential_law_experiment(const TrialSetup& setup, const IntervalUnion& marks,
                                                double s = 0.0, double tau_max = 3.0,
                                                std::size_t tau_points = 3001);

struct RectSetStatistics {
  double target_mean;          // (Leb x Pi)(union)
  double mean;
  double void_probability;
  double target_void;          // exp(-target_mean)
  double total_variation;      // vs Poisson(target_mean)
  std::vector<std::size_t> counts;  // per trial
};

struct PoissonResult {
  std::vector<RectSetStatistics> sets;
  /// Spearman correlation of counts, row-major over set pairs (i < j).
  std::vector<double> rank_correlations;
  std::size_t pole_points = 0;
};

/// For each union of rectangles, the distribution over trials of N_n(union).
PoissonResult poisson_experiment(const TrialSetup& setup,
                                 std::span<const std::vector<Rect>> rect_sets);

/// Draws a start point for trial `trial` from the configured start measure.
class StartSampler {
 public:
  StartSampler(const TrialSetup& setup, std::int64_t fiber);
  double operator()(std::size_t trial) const noexcept;

 private:
  std::optional<InverseCdfSampler> sampler_;
  std::uint64_t seed_;
};

}  // namespace rds
