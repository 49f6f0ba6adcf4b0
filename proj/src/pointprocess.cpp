#include "rds/pointprocess.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rds/error.hpp"
#include "rds/parallel.hpp"
#include "rds/stats.hpp"

namespace rds {

PointPattern build_pattern(std::span<const double> orbit, std::size_t n, double bn,
                           const TailModel& model, double mark_floor) {
  if (n == 0) throw DomainError("pattern needs n >= 1");
  PointPattern pattern;
  pattern.n = n;
  // phi*(x)/b_n > floor  <=>  |x - x0| < (floor b_n)^(-alpha)
  const double radius =
      mark_floor > 0.0 ? std::pow(mark_floor * bn, -model.alpha()) : kInf;
  const double nd = static_cast<double>(n);
  for (std::size_t j = 1; j < orbit.size(); ++j) {
    const double x = orbit[j - 1];
    if (!(std::abs(x - model.x0()) <= radius)) continue;
    const double mark = model.phi_star(x) / bn;
    if (mark > mark_floor) pattern.points.push_back({static_cast<double>(j) / nd, mark});
  }
  return pattern;
}

std::size_t count_in(const PointPattern& pattern, std::span<const Rect> rects) {
  for (std::size_t a = 0; a < rects.size(); ++a) {
    if (!(rects[a].s < rects[a].t)) throw DomainError("rectangle needs s < t");
    for (std::size_t b = a + 1; b < rects.size(); ++b) {
      const bool time_overlap =
          std::max(rects[a].s, rects[b].s) < std::min(rects[a].t, rects[b].t);
      if (time_overlap && rects[a].marks.overlaps(rects[b].marks)) {
        throw DomainError("rectangles overlap");
      }
    }
  }
  std::size_t count = 0;
  for (const auto& p : pattern.points) {
    for (const auto& r : rects) {
      if (p.time > r.s && p.time <= r.t && r.marks.contains(p.mark)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

HittingRecord hitting_time(const MapFamily& family, const OmegaPath& omega, double x,
                           const SpatialSet& target, std::uint64_t cap) {
  if (cap < 1) throw DomainError("hitting time cap must be >= 1");
  HittingRecord rec;
  rec.cap = cap;
  rec.start_fiber = omega.origin_offset();
  for (std::uint64_t k = 1; k <= cap; ++k) {
    x = family[static_cast<std::size_t>(omega.symbol(static_cast<std::int64_t>(k - 1)))](x);
    if (target.contains(x)) {
      rec.hit_time = k;
      return rec;
    }
  }
  return rec;
}

namespace {

std::vector<double> grid_points(const SpatialSet& region, std::size_t grid_n) {
  std::vector<double> pts;
  for (const auto& part : region.parts()) {
    if (part.length() == 0.0) {
      pts.push_back(part.lo);
      continue;
    }
    for (std::size_t i = 0; i < grid_n; ++i) {
      pts.push_back(part.lo + (static_cast<double>(i) + 0.5) / static_cast<double>(grid_n) *
                                  part.length());
    }
  }
  return pts;
}

}  // namespace

std::size_t shortest_return(const MapFamily& family, const SpatialSet& region, std::size_t max_len,
                            std::size_t grid_n, std::size_t exhaustive_limit,
                            std::size_t mc_words, std::uint64_t seed) {
  if (region.empty()) throw DomainError("shortest return needs a nonempty set");
  const auto start = grid_points(region, std::max<std::size_t>(grid_n, 1));
  const std::size_t m = family.size();

  std::size_t exhaustive_len = 0;
  for (double words = 1.0; exhaustive_len < max_len;) {
    words *= static_cast<double>(m);
    if (words > static_cast<double>(exhaustive_limit)) break;
    ++exhaustive_len;
  }

  std::size_t best = max_len + 1;
  std::function<void(const std::vector<double>&, std::size_t)> dfs =
      [&](const std::vector<double>& pts, std::size_t depth) {
        if (depth + 1 >= best || depth >= exhaustive_len) return;
        std::vector<double> next(pts.size());
        for (std::size_t s = 0; s < m; ++s) {
          bool hit = false;
          for (std::size_t i = 0; i < pts.size(); ++i) {
            next[i] = family[s](pts[i]);
            hit = hit || region.contains(next[i]);
          }
          if (hit) {
            best = std::min(best, depth + 1);
            return;
          }
          dfs(next, depth + 1);
        }
      };
  dfs(start, 0);
  if (best <= exhaustive_len || exhaustive_len >= max_len) return best;

  CounterRng rng(derive_seed(seed, "shortest-return"));
  std::vector<int> word(max_len);
  for (std::size_t w = 0; w < mc_words; ++w) {
    for (auto& s : word) s = static_cast<int>(rng() % m);
    for (double x : start) {
      for (std::size_t j = 1; j < best; ++j) {
        x = family[static_cast<std::size_t>(word[j - 1])](x);
        if (j > exhaustive_len && region.contains(x)) {
          best = j;
          break;
        }
      }
    }
  }
  return best;
}

PeriodicityVerdict periodicity_probe(const MapFamily& family, double x0, std::size_t max_len,
                                     double tol) {
  PeriodicityVerdict verdict;
  verdict.distance = kInf;
  std::vector<int> word;
  std::function<bool(double)> dfs = [&](double x) {
    for (std::size_t s = 0; s < family.size(); ++s) {
      const double y = family[s](x);
      word.push_back(static_cast<int>(s));
      const double d = std::abs(y - x0);
      if (d <= tol) {
        verdict.periodic = true;
        verdict.word = word;
        verdict.distance = d;
        return true;
      }
      verdict.distance = std::min(verdict.distance, d);
      if (word.size() < max_len && dfs(y)) return true;
      word.pop_back();
    }
    return false;
  };
  if (max_len > 0) dfs(x0);
  return verdict;
}

double short_return_set_measure(const MapFamily& family, const OmegaPath& omega, std::size_t n,
                                double eps, std::size_t grid) {
  if (grid == 0) throw DomainError("grid must be positive");
  if (eps >= 1.0) return 1.0;
  omega.require(0, static_cast<std::int64_t>(n));
  std::size_t count = 0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double x0 = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
    double x = x0;
    for (std::size_t j = 0; j < n; ++j) {
      x = family[static_cast<std::size_t>(omega.symbol(static_cast<std::int64_t>(j)))](x);
    }
    if (std::abs(x - x0) <= eps) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(grid);
}

StartSampler::StartSampler(const TrialSetup& setup, std::int64_t fiber)
    : seed_(derive_seed(setup.seed, "start")) {
  if (setup.start == StartMeasure::Fiber) {
    if (setup.fiber_ops == nullptr) throw DomainError("fiber start needs Ulam operators");
    const auto depth = static_cast<std::int64_t>(setup.fiber_depth);
    const OmegaPath local = setup.omega.shift(fiber).with_window(-depth, 0);
    sampler_.emplace(pullback_density(*setup.fiber_ops, local, setup.fiber_depth));
  }
}

double StartSampler::operator()(std::size_t trial) const noexcept {
  const double u = to_unit(hash_index(seed_, trial));
  return sampler_ ? (*sampler_)(u) : u;
}

ExponentialLawResult exponential_law_experiment(const TrialSetup& setup, const IntervalUnion& marks,
                                                double s, double tau_max,
                                                std::size_t tau_points) {
  if (setup.family == nullptr || setup.n == 0 || setup.trials == 0) {
    throw DomainError("exponential law experiment needs a family, n >= 1 and trials >= 1");
  }
  const double nd = static_cast<double>(setup.n);
  const double bn = setup.tail.scaling_bn(nd);
  const SpatialSet target = setup.tail.preimage(marks, bn);
  ExponentialLawResult r{};
  r.target_mass = setup.tail.levy_measure(marks);
  r.target_lebesgue = target.lebesgue();
  if (target.empty() || !(r.target_lebesgue > 0.0) || !(r.target_mass > 0.0)) {
    throw DomainError("degenerate target set A_n");
  }
  r.cap = static_cast<std::uint64_t>(std::ceil(50.0 * nd / r.target_mass));

  const auto fiber = static_cast<std::int64_t>(std::floor(nd * s));
  const StartSampler start(setup, fiber);
  const OmegaPath omega =
      setup.omega.shift(fiber).with_window(0, static_cast<std::int64_t>(r.cap));

  std::vector<double> hits(setup.trials);
  parallel_for(setup.trials, setup.threads, [&](std::size_t trial) {
    const auto rec = hitting_time(*setup.family, omega, start(trial), target, r.cap);
    hits[trial] = rec.censored() ? kInf : static_cast<double>(*rec.hit_time);
  });
  r.censored = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), kInf));
  r.hit_over_n.resize(hits.size());
  std::transform(hits.begin(), hits.end(), r.hit_over_n.begin(), [nd](double h) { return h / nd; });

  std::vector<double> sorted = hits;
  std::sort(sorted.begin(), sorted.end());
  r.sup_distance = 0.0;
  const std::size_t points = std::max<std::size_t>(tau_points, 2);
  for (std::size_t i = 0; i < points; ++i) {
    const double tau = tau_max * static_cast<double>(i) / static_cast<double>(points - 1);
    const double steps = std::floor(nd * tau);
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), steps);
    const double emp = static_cast<double>(above) / static_cast<double>(setup.trials);
    const double tgt = std::exp(-tau * r.target_mass);
    r.tau.push_back(tau);
    r.empirical.push_back(emp);
    r.target.push_back(tgt);
    r.sup_distance = std::max(r.sup_distance, std::abs(emp - tgt));
  }
  return r;
}

PoissonResult poisson_experiment(const TrialSetup& setup,
                                 std::span<const std::vector<Rect>> rect_sets) {
  if (setup.family == nullptr || setup.n == 0 || setup.trials == 0 || rect_sets.empty()) {
    throw DomainError("Poisson experiment needs a family, n, trials and rectangles");
  }
  double horizon = 0.0;
  double floor = kInf;
  for (const auto& set : rect_sets) {
    for (const auto& r : set) {
      if (!(r.s >= 0.0 && r.s < r.t)) throw DomainError("rectangle needs 0 <= s < t");
      horizon = std::max(horizon, r.t);
      floor = std::min(floor, r.marks.min_abs());
    }
  }
  if (!(floor > 0.0)) throw DomainError("rectangle marks must avoid 0");
  const double nd = static_cast<double>(setup.n);
  const double bn = setup.tail.scaling_bn(nd);
  const auto steps = static_cast<std::size_t>(std::floor(horizon * nd));

  PoissonResult result;
  result.sets.resize(rect_sets.size());
  for (std::size_t k = 0; k < rect_sets.size(); ++k) {
    double mass = 0.0;
    for (const auto& r : rect_sets[k]) mass += (r.t - r.s) * setup.tail.levy_measure(r.marks);
    result.sets[k].target_mean = mass;
    result.sets[k].target_void = std::exp(-mass);
    result.sets[k].counts.resize(setup.trials);
  }

  const StartSampler start(setup, 0);
  const OmegaPath omega = setup.omega.with_window(0, static_cast<std::int64_t>(steps));
  std::vector<std::size_t> poles(setup.trials, 0);
  parallel_for(setup.trials, setup.threads, [&](std::size_t trial) {
    const auto orbit = cocycle_orbit(*setup.family, omega, start(trial), steps);
    const auto pattern = build_pattern(orbit, setup.n, bn, setup.tail, floor);
    for (const auto& p : pattern.points) {
      if (std::isinf(p.mark)) ++poles[trial];
    }
    for (std::size_t k = 0; k < rect_sets.size(); ++k) {
      result.sets[k].counts[trial] = count_in(pattern, rect_sets[k]);
    }
  });
  for (auto p : poles) result.pole_points += p;

  for (auto& st : result.sets) {
    double sum = 0.0;
    std::size_t voids = 0;
    for (auto c : st.counts) {
      sum += static_cast<double>(c);
      if (c == 0) ++voids;
    }
    st.mean = sum / static_cast<double>(setup.trials);
    st.void_probability = static_cast<double>(voids) / static_cast<double>(setup.trials);
    st.total_variation = poisson_total_variation(st.counts, st.target_mean);
  }
  for (std::size_t a = 0; a < result.sets.size(); ++a) {
    for (std::size_t b = a + 1; b < result.sets.size(); ++b) {
      std::vector<double> ca(result.sets[a].counts.begin(), result.sets[a].counts.end());
      std::vector<double> cb(result.sets[b].counts.begin(), result.sets[b].counts.end());
      result.rank_correlations.push_back(spearman(ca, cb));
    }
  }
  return result;
}

}  // namespace rds
