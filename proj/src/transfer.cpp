#include "rds/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rds/error.hpp"
#include "rds/parallel.hpp"

namespace rds {

UlamOperator::UlamOperator(std::size_t k, const std::vector<std::vector<Entry>>& rows,
                           std::string label)
    : k_(k), row_start_(k + 1, 0), label_(std::move(label)) {
  if (rows.size() != k) throw DomainError("Ulam operator needs exactly k rows");
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<Entry> row = rows[i];
    std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
    std::size_t first = entries_.size();
    for (const auto& e : row) {
      if (e.col >= k) throw DomainError("Ulam entry column out of range");
      if (!(e.value >= 0.0)) throw DomainError("Ulam entries must be nonnegative");
      if (e.value == 0.0) continue;
      if (entries_.size() > first && entries_.back().col == e.col) {
        entries_.back().value += e.value;
      } else {
        entries_.push_back(e);
      }
    }
    row_start_[i + 1] = entries_.size();
  }
}

double UlamOperator::entry(std::size_t i, std::size_t j) const noexcept {
  for (const auto& e : row(i)) {
    if (e.col == j) return e.value;
  }
  return 0.0;
}

double UlamOperator::row_sum(std::size_t i) const noexcept {
  double s = 0.0;
  for (const auto& e : row(i)) s += e.value;
  return s;
}

double UlamOperator::max_row_sum_error() const noexcept {
  double worst = 0.0;
  for (std::size_t i = 0; i < k_; ++i) worst = std::max(worst, std::abs(row_sum(i) - 1.0));
  return worst;
}

void UlamOperator::push_into(std::span<const double> f, std::span<double> out) const noexcept {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < k_; ++i) {
    const double fi = f[i];
    if (fi == 0.0) continue;
    for (const auto& e : row(i)) out[e.col] += fi * e.value;
  }
}

DensityVector UlamOperator::push(const DensityVector& f) const {
  if (f.size() != k_) throw DomainError("density size does not match operator");
  std::vector<double> out(k_);
  push_into(f.values(), out);
  return DensityVector(std::move(out));
}

std::vector<double> UlamOperator::pull(std::span<const double> g) const {
  if (g.size() != k_) throw DomainError("function size does not match operator");
  std::vector<double> out(k_, 0.0);
  for (std::size_t i = 0; i < k_; ++i) {
    double s = 0.0;
    for (const auto& e : row(i)) s += e.value * g[e.col];
    out[i] = s;
  }
  return out;
}

UlamOperator UlamOperator::compose(const UlamOperator& first, const UlamOperator& second) {
  if (first.k_ != second.k_) throw DomainError("cannot compose operators of different size");
  const std::size_t k = first.k_;
  std::vector<std::vector<Entry>> rows(k);
  std::vector<double> acc(k, 0.0);
  std::vector<std::uint32_t> touched;
  for (std::size_t i = 0; i < k; ++i) {
    touched.clear();
    for (const auto& a : first.row(i)) {
      for (const auto& b : second.row(a.col)) {
        if (acc[b.col] == 0.0) touched.push_back(b.col);
        acc[b.col] += a.value * b.value;
      }
    }
    for (auto c : touched) {
      rows[i].push_back({c, acc[c]});
      acc[c] = 0.0;
    }
  }
  return UlamOperator(k, rows, first.label_ + "*" + second.label_);
}

UlamOperator UlamOperator::convex_combination(std::span<const UlamOperator> ops,
                                              std::span<const double> weights, std::string label) {
  if (ops.empty() || ops.size() != weights.size()) {
    throw DomainError("convex combination needs one weight per operator");
  }
  const std::size_t k = ops.front().k();
  std::vector<std::vector<Entry>> rows(k);
  for (std::size_t m = 0; m < ops.size(); ++m) {
    if (ops[m].k() != k) throw DomainError("operator dimension mismatch");
    if (weights[m] == 0.0) continue;
    for (std::size_t i = 0; i < k; ++i) {
      for (const auto& e : ops[m].row(i)) rows[i].push_back({e.col, weights[m] * e.value});
    }
  }
  return UlamOperator(k, rows, std::move(label));
}

UlamOperator ulam_matrix(const MapSpec& spec, std::size_t k) {
  if (k < 2) throw DomainError("Ulam grid needs k >= 2");
  const double kd = static_cast<double>(k);
  std::vector<std::vector<UlamOperator::Entry>> rows(k);
  const auto& points = spec.branch_points();
  for (std::size_t b = 0; b < spec.branch_count(); ++b) {
    const double d0 = points[b];
    const double d1 = points[b + 1];
    const auto [y0, y1] = spec.branch_image(b);
    // breakpoints of the image on the grid and their preimages
    std::vector<double> ys{y0};
    for (auto j = static_cast<std::size_t>(std::floor(y0 * kd)) + 1;
         static_cast<double>(j) / kd < y1; ++j) {
      ys.push_back(static_cast<double>(j) / kd);
    }
    ys.push_back(y1);
    std::vector<double> xs(ys.size());
    xs.front() = d0;
    xs.back() = d1;
    for (std::size_t m = 1; m + 1 < ys.size(); ++m) {
      xs[m] = std::clamp(spec.branch_inverse(b, ys[m]), d0, d1);
    }
    for (std::size_t m = 0; m + 1 < ys.size(); ++m) {
      const double a = xs[m];
      const double c = xs[m + 1];
      if (c <= a) continue;
      const auto j = static_cast<std::uint32_t>(
          std::min(k - 1, static_cast<std::size_t>(0.5 * (ys[m] + ys[m + 1]) * kd)));
      for (auto i = std::min(k - 1, static_cast<std::size_t>(a * kd)); i < k; ++i) {
        const double lo = std::max(a, static_cast<double>(i) / kd);
        const double hi = std::min(c, static_cast<double>(i + 1) / kd);
        if (lo >= c) break;
        if (hi > lo) rows[i].push_back({j, (hi - lo) * kd});
      }
    }
  }
  return UlamOperator(k, rows, spec.name());
}

FamilyOperators::FamilyOperators(const MapFamily& family, std::size_t k) : k_(k) {
  ops_.reserve(family.size());
  for (const auto& spec : family.specs()) ops_.push_back(ulam_matrix(spec, k));
}

UlamOperator annealed_operator(const FamilyOperators& ops, const ProbabilityVector& probs) {
  if (ops.size() != probs.size()) throw DomainError("one probability per map required");
  return UlamOperator::convex_combination(ops.operators(), probs.values(), "annealed");
}

UlamOperator annealed_operator(const MapFamily& family, const ProbabilityVector& probs,
                               std::size_t k) {
  return annealed_operator(FamilyOperators(family, k), probs);
}

StationaryResult stationary_density(const UlamOperator& op, double tol, std::size_t max_iter) {
  const std::size_t k = op.k();
  const double width = 1.0 / static_cast<double>(k);
  std::vector<double> v(k, 1.0), w(k), sum(k, 0.0);
  std::size_t it = 0;
  for (;;) {
    op.push_into(v, w);
    double res = 0.0;
    for (std::size_t i = 0; i < k; ++i) res += std::abs(w[i] - v[i]);
    res *= width;
    if (res <= tol) {
      return {DensityVector(v).normalized(), res, it};
    }
    if (it >= max_iter) {
      std::ostringstream msg;
      msg << "power iteration for " << op.label() << " stalled at residual " << res << " after "
          << it << " steps";
      throw ConvergenceError(msg.str());
    }
    v.swap(w);
    for (std::size_t i = 0; i < k; ++i) sum[i] += v[i];
    ++it;
    if (it % 100 == 0) {
      double mass = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        v[i] = sum[i] / 100.0;
        mass += v[i];
        sum[i] = 0.0;
      }
      mass *= width;
      for (double& x : v) x /= mass;
    }
  }
}

DensityVector pullback_density(const FamilyOperators& ops, const OmegaPath& omega, std::size_t n) {
  const auto depth = static_cast<std::int64_t>(n);
  omega.require(-depth, 0);
  std::vector<double> v(ops.k(), 1.0), w(ops.k());
  for (std::int64_t j = -depth; j < 0; ++j) {
    ops[static_cast<std::size_t>(omega.symbol(j))].push_into(v, w);
    v.swap(w);
  }
  return DensityVector(std::move(v));
}

std::size_t pullback_depth(const MapFamily& family, std::size_t n) {
  if (family.all_beta()) return 50;
  const auto d = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  return std::min<std::size_t>(std::max<std::size_t>(d, 1), 400);
}

ConeReport cone_check(const DensityVector& f, double gamma_max, double a) {
  ConeReport r;
  const double m = f.mass();
  const double slack = 1e-12;
  auto flag = [&r](std::size_t i) {
    if (r.in_cone) r.first_violation = i;
    r.in_cone = false;
  };
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = f.midpoint(i);
    const double bound = std::pow(x, -gamma_max) * m;
    r.worst_bound_ratio = std::max(r.worst_bound_ratio, f[i] / bound);
    if (f[i] > a * bound * (1.0 + slack)) {
      ++r.bound_violations;
      flag(i);
    }
    if (i + 1 < f.size()) {
      if (f[i + 1] > f[i] * (1.0 + slack)) {
        ++r.monotonicity_violations;
        flag(i);
      }
      const double g0 = std::pow(x, gamma_max + 1.0) * f[i];
      const double g1 = std::pow(f.midpoint(i + 1), gamma_max + 1.0) * f[i + 1];
      if (g1 < g0 * (1.0 - slack)) {
        ++r.growth_violations;
        flag(i);
      }
    }
  }
  return r;
}

double comparability_constant(const DensityVector& f, double delta) {
  const double m = f.mass();
  double c = 1.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.midpoint(i) < delta) continue;
    if (f[i] <= 0.0) return kInf;
    c = std::max({c, f[i] / m, m / f[i]});
  }
  return c;
}

DecayReport decay_estimate(const UlamOperator& annealed, const DensityVector& stationary,
                           std::span<const double> f, std::span<const double> g,
                           std::size_t n_max, std::size_t fit_from, double floor) {
  const std::size_t k = annealed.k();
  if (stationary.size() != k || f.size() != k || g.size() != k) {
    throw DomainError("decay estimate inputs must match the operator size");
  }
  const DensityVector h = stationary.normalized();
  const double w = h.cell_width();
  double ef = 0.0, eg = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    ef += f[i] * h[i] * w;
    eg += g[i] * h[i] * w;
  }
  std::vector<double> fh(k), gk(k);
  for (std::size_t i = 0; i < k; ++i) {
    fh[i] = (f[i] - ef) * h[i] * w;
    gk[i] = g[i] - eg;
  }
  DecayReport r;
  for (std::size_t n = 1; n <= n_max; ++n) {
    gk = annealed.pull(gk);
    double c = 0.0;
    for (std::size_t i = 0; i < k; ++i) c += fh[i] * gk[i];
    r.correlations.push_back(std::abs(c));
  }
  std::vector<double> lag, loglag, logc;
  for (std::size_t n = std::max<std::size_t>(fit_from, 1); n <= n_max; ++n) {
    const double c = r.correlations[n - 1];
    if (!(c > floor)) continue;
    lag.push_back(static_cast<double>(n));
    loglag.push_back(std::log(static_cast<double>(n)));
    logc.push_back(std::log(c));
  }
  if (lag.size() >= 2) {
    r.geometric = linear_fit(lag, logc);
    r.power = linear_fit(loglag, logc);
    r.geometric_ratio = std::exp(r.geometric.slope);
  }
  return r;
}

double density_measure(const DensityVector& h, const SpatialSet& set) noexcept {
  double total = 0.0;
  for (const auto& p : set.parts()) total += h.integrate(p.lo, p.hi);
  return total;
}

double fiber_measure_sum(const FamilyOperators& ops, const OmegaPath& omega, const SpatialSet& set,
                         double s, double t, std::size_t n, std::size_t depth,
                         std::size_t threads) {
  if (!(0.0 <= s && s < t)) throw DomainError("fiber sum needs 0 <= s < t");
  if (set.empty()) return 0.0;
  const auto first = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * s)) + 1;
  const auto last = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * t));
  if (last < first) return 0.0;
  omega.require(first - static_cast<std::int64_t>(depth), last);
  std::vector<double> terms(static_cast<std::size_t>(last - first + 1));
  parallel_for(terms.size(), threads, [&](std::size_t idx) {
    const auto j = first + static_cast<std::int64_t>(idx);
    terms[idx] = density_measure(pullback_density(ops, omega.shift(j), depth), set);
  });
  double total = 0.0;
  for (double v : terms) total += v;
  return total;
}

}  // namespace rds
