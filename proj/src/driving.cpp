#include "rds/driving.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rds/error.hpp"

namespace rds {

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t index) noexcept {
  // FNV-1a over the stream name
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return hash_index(hash_index(master, h), index);
}

ProbabilityVector::ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty() || probs_.size() > 256) {
    throw DomainError("probability vector must have between 1 and 256 entries");
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DomainError("probability vector entries must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probability vector sums to " << total << ", expected 1";
    throw DomainError(msg.str());
  }
  cumulative_.resize(probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    acc += probs_[i];
    cumulative_[i] = acc;
  }
  // u in [0,1) must always land on the last symbol with positive mass
  for (std::size_t i = probs_.size(); i-- > 0;) {
    if (probs_[i] > 0.0) {
      for (std::size_t j = i; j < probs_.size(); ++j) cumulative_[j] = 1.0;
      break;
    }
  }
}

int ProbabilityVector::symbol_for(double u) const noexcept {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<int>(it - cumulative_.begin());
}

OmegaPath OmegaPath::sample(ProbabilityVector probs, std::uint64_t seed, std::int64_t lo,
                            std::int64_t hi) {
  if (!(lo <= 0 && 0 < hi)) {
    throw DomainError("omega window must satisfy lo <= 0 < hi");
  }
  OmegaPath path(std::move(probs), seed, 0);
  return path.with_window(lo, hi);
}

OmegaPath OmegaPath::shift(std::int64_t k) const {
  OmegaPath out = *this;
  out.offset_ += k;
  return out;
}

OmegaPath OmegaPath::with_window(std::int64_t lo, std::int64_t hi) const {
  if (hi < lo) throw DomainError("omega window must satisfy lo <= hi");
  OmegaPath out = *this;
  out.abs_lo_ = offset_ + lo;
  out.abs_hi_ = offset_ + hi;
  auto symbols = std::make_shared<std::vector<std::uint8_t>>(static_cast<std::size_t>(hi - lo));
  for (std::int64_t abs = out.abs_lo_; abs < out.abs_hi_; ++abs) {
    (*symbols)[static_cast<std::size_t>(abs - out.abs_lo_)] =
        static_cast<std::uint8_t>(generate(abs));
  }
  out.window_ = std::move(symbols);
  return out;
}

void OmegaPath::require(std::int64_t lo, std::int64_t hi) const {
  if (!covers(lo, hi)) {
    std::ostringstream msg;
    msg << "omega window [" << this->lo() << ", " << this->hi() << ") does not cover [" << lo
        << ", " << hi << ")";
    throw WindowError(msg.str());
  }
}

std::vector<int> OmegaPath::prefix(std::size_t count) const {
  std::vector<int> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = symbol(static_cast<std::int64_t>(j));
  return out;
}

}  // namespace rds
