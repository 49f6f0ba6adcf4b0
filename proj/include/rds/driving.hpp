#pragma once

// Bernoulli driving system: counter-based random symbols indexed by Z.

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

namespace rds {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Keyed hash of (seed, index); the basis of every random draw in the project.
constexpr std::uint64_t hash_index(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed + kGoldenGamma) ^ (index * kGoldenGamma + 0x632BE59BD9B4E019ULL));
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Seed for a named sub-stream, e.g. derive_seed(master, "trial", 17).
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t index = 0) noexcept;

/// Counter-based generator: draw number i of a stream depends only on (seed, i).
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return hash_index(seed_, counter_++); }
  double uniform() noexcept { return to_unit((*this)()); }
  /// Uniform in (0, 1), never exactly zero.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Probability vector p_1..p_m over the map symbols.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& values() const noexcept { return probs_; }

  /// Inverse CDF: the symbol s with cum[s-1] <= u < cum[s].
  int symbol_for(double u) const noexcept;

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// A two-sided iid symbol sequence omega, viewed from a shift position.
///
/// Symbol at relative index j is a pure function of (seed, offset + j). A
/// materialized window [lo, hi) caches symbols for hot loops; indices outside
/// it are regenerated on demand and yield the same values.
class OmegaPath {
 public:
  static OmegaPath sample(ProbabilityVector probs, std::uint64_t seed,
                          std::int64_t lo, std::int64_t hi);

  int symbol(std::int64_t j) const noexcept {
    const std::int64_t abs = offset_ + j;
    if (abs >= abs_lo_ && abs < abs_hi_) {
      return (*window_)[static_cast<std::size_t>(abs - abs_lo_)];
    }
    return generate(abs);
  }

  /// Left shift by k: new symbol at j is the old symbol at j + k.
  OmegaPath shift(std::int64_t k) const;

  /// Same sequence with the cached window regenerated to cover [lo, hi).
  OmegaPath with_window(std::int64_t lo, std::int64_t hi) const;

  std::int64_t lo() const noexcept { return abs_lo_ - offset_; }
  std::int64_t hi() const noexcept { return abs_hi_ - offset_; }
  bool covers(std::int64_t lo, std::int64_t hi) const noexcept {
    return lo >= this->lo() && hi <= this->hi();
  }
  /// Throws WindowError unless [lo, hi) is covered.
  void require(std::int64_t lo, std::int64_t hi) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::int64_t origin_offset() const noexcept { return offset_; }
  const ProbabilityVector& probs() const noexcept { return probs_; }
  std::size_t alphabet_size() const noexcept { return probs_.size(); }

  /// Symbols at relative indices [0, count).
  std::vector<int> prefix(std::size_t count) const;

 private:
  OmegaPath(ProbabilityVector probs, std::uint64_t seed, std::int64_t offset)
      : probs_(std::move(probs)), seed_(seed), offset_(offset) {}

  int generate(std::int64_t abs) const noexcept {
    return probs_.symbol_for(to_unit(hash_index(seed_, static_cast<std::uint64_t>(abs))));
  }

  ProbabilityVector probs_;
  std::uint64_t seed_;
  std::int64_t offset_ = 0;
  std::int64_t abs_lo_ = 0;
  std::int64_t abs_hi_ = 0;
  std::shared_ptr<const std::vector<std::uint8_t>> window_;
};

inline OmegaPath sample_omega(ProbabilityVector probs, std::uint64_t seed,
                              std::int64_t lo, std::int64_t hi) {
  return OmegaPath::sample(std::move(probs), seed, lo, hi);
}

inline OmegaPath shift(const OmegaPath& omega, std::int64_t k) { return omega.shift(k); }

}  // namespace rds
