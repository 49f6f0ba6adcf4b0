#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rds/driving.hpp"
#include "rds/error.hpp"
#include "rds/maps.hpp"
#include "rds/pointprocess.hpp"
#include "rds/tailmodel.hpp"
#include "rds/transfer.hpp"

using namespace rds;

namespace {

// Recount by definition: j in 1..len-1 with phi*(orbit[j-1]) / bn in (s n, t n] x J.
std::size_t recount(const std::vector<double>& orbit, std::size_t n, double bn, const TailModel& m,
                    const std::vector<Rect>& rects) {
  std::size_t c = 0;
  for (std::size_t j = 1; j < orbit.size(); ++j) {
    const double time = static_cast<double>(j) / static_cast<double>(n);
    const double mark = m.phi_star(orbit[j - 1]) / bn;
    for (const auto& r : rects) {
      if (time > r.s && time <= r.t && r.marks.contains(mark)) {
        ++c;
        break;
      }
    }
  }
  return c;
}

// Iterative enumeration of all words up to max_len; true if some T_w x0 returns within tol.
bool brute_force_periodic(const MapFamily& fam, double x0, std::size_t max_len, double tol) {
  std::vector<double> layer = {x0};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<double> next;
    next.reserve(layer.size() * fam.size());
    for (double x : layer) {
      for (std::size_t s = 0; s < fam.size(); ++s) {
        const double y = fam[s](x);
        if (std::abs(y - x0) <= tol) return true;
        next.push_back(y);
      }
    }
    layer.swap(next);
  }
  return false;
}

}  // namespace

TEST_CASE("build_pattern") {
  const TailModel m(0.75, 0.3, 2.0);
  SUBCASE("orbit of one point gives no points") {
    const std::vector<double> orbit = {0.3};
    CHECK(build_pattern(orbit, 10, 1.0, m, 0.5).points.empty());
  }
  SUBCASE("exact pole gives an infinite mark") {
    const std::vector<double> orbit = {0.9, 0.3, 0.5};
    const auto p = build_pattern(orbit, 2, 1.0, m, 0.5);
    REQUIRE(p.points.size() >= 1);
    bool found = false;
    for (const auto& pt : p.points) {
      if (pt.time == 1.0) {
        CHECK(std::isinf(pt.mark));
        found = true;
      }
    }
    CHECK(found);
  }
  SUBCASE("n = 0 is rejected") {
    const std::vector<double> orbit = {0.1, 0.2};
    CHECK_THROWS_AS(build_pattern(orbit, 0, 1.0, m, 0.5), DomainError);
  }
  SUBCASE("recount agrees on random orbits") {
    const MapFamily fam({MapSpec::beta(2.1), MapSpec::beta(3.3)});
    const auto omega = sample_omega(ProbabilityVector({0.5, 0.5}), 4, 0, 5000);
    const std::size_t n = 2000;
    const double bn = m.scaling_bn(n);
    const std::vector<std::vector<Rect>> sets = {
        {{0.0, 1.0, IntervalUnion::above(1.0)}},
        {{0.0, 0.5, IntervalUnion({{0.5, 2.0}})}, {0.5, 2.5, IntervalUnion::above(0.7)}},
        {{0.1, 0.2, IntervalUnion({{0.3, 0.4}, {1.0, 3.0}})}},
    };
    for (int start = 0; start < 20; ++start) {
      const auto orbit = cocycle_orbit(fam, omega, (start + 0.37) / 20.0, 5000);
      const auto pattern = build_pattern(orbit, n, bn, m, 0.3);
      for (const auto& rects : sets) CHECK(count_in(pattern, rects) == recount(orbit, n, bn, m, rects));
    }
  }
}

TEST_CASE("count_in") {
  PointPattern p;
  p.n = 10;
  p.points = {{0.1, 2.0}, {0.2, 0.5}, {0.5, kInf}, {1.0, 1.5}};
  const std::vector<Rect> none;
  CHECK(count_in(p, none) == 0);
  const std::vector<Rect> strip = {{0.0, 1.0, IntervalUnion::above(0.1)}};
  CHECK(count_in(p, strip) == 4);
  const std::vector<Rect> left = {{0.0, 0.3, IntervalUnion::above(1.0)}};
  const std::vector<Rect> right = {{0.3, 1.0, IntervalUnion::above(1.0)}};
  const std::vector<Rect> both = {left[0], right[0]};
  CHECK(count_in(p, both) == count_in(p, left) + count_in(p, right));
  CHECK(count_in(p, right) == 2);  // +inf mark counts for (1, inf]
  const std::vector<Rect> overlapping = {{0.0, 0.5, IntervalUnion::above(1.0)},
                                         {0.4, 1.0, IntervalUnion({{2.0, 5.0}})}};
  CHECK_THROWS_AS(count_in(p, overlapping), DomainError);
  const std::vector<Rect> disjoint_marks = {{0.0, 0.5, IntervalUnion({{1.0, 2.0}})},
                                            {0.4, 1.0, IntervalUnion({{2.0, 5.0}})}};
  CHECK_NOTHROW(count_in(p, disjoint_marks));
  const std::vector<Rect> empty_time = {{0.5, 0.5, IntervalUnion::above(1.0)}};
  CHECK_THROWS_AS(count_in(p, empty_time), DomainError);
}

TEST_CASE("hitting times") {
  const MapFamily doubling({MapSpec::beta(2.0)});
  const auto omega = sample_omega(ProbabilityVector({1.0}), 1, 0, 100);
  SUBCASE("doubling examples") {
    // 0.1 -> 0.2 -> 0.4 -> 0.8
    auto r = hitting_time(doubling, omega, 0.1, SpatialSet::closed(0.75, 0.85), 10);
    REQUIRE(r.hit_time.has_value());
    CHECK(*r.hit_time == 3);
    // the start point itself does not count
    r = hitting_time(doubling, omega, 0.8, SpatialSet::closed(0.75, 0.85), 10);
    CHECK(r.hit_time.value_or(0) != 0);
    r = hitting_time(doubling, omega, 0.0, SpatialSet::closed(0.5, 1.0), 50);
    CHECK(r.censored());
    CHECK(r.cap == 50);
  }
  SUBCASE("cap must be positive") {
    CHECK_THROWS_AS(hitting_time(doubling, omega, 0.2, SpatialSet::whole(), 0), DomainError);
  }
  SUBCASE("censoring is monotone in the cap and agrees with a direct loop") {
    const MapFamily fam({MapSpec::lsv(0.2), MapSpec::lsv(0.25)});
    const auto w = sample_omega(ProbabilityVector({0.5, 0.5}), 8, 0, 5000);
    const auto target = SpatialSet::ball(0.61, 0.002);
    for (int i = 0; i < 50; ++i) {
      const double x = (i + 0.5) / 50.0;
      std::uint64_t direct = 0;
      double y = x;
      for (std::uint64_t k = 1; k <= 5000; ++k) {
        y = fam[static_cast<std::size_t>(w.symbol(static_cast<std::int64_t>(k - 1)))](y);
        if (target.contains(y)) {
          direct = k;
          break;
        }
      }
      const auto small = hitting_time(fam, w, x, target, 100);
      const auto large = hitting_time(fam, w, x, target, 5000);
      if (!large.censored()) {
        CHECK(*large.hit_time == direct);
      } else {
        CHECK(direct == 0);
      }
      if (large.censored()) CHECK(small.censored());
      if (!small.censored()) CHECK(*small.hit_time == *large.hit_time);
    }
  }
}

TEST_CASE("shortest return") {
  const MapFamily beta({MapSpec::beta(2.1), MapSpec::beta(3.3)});
  CHECK(shortest_return(beta, SpatialSet::closed(0.0, 1.0), 10, 16) == 1);
  // 0 is fixed by every beta map
  CHECK(shortest_return(beta, SpatialSet::closed(0.0, 1e-9), 10, 16) == 1);
  std::size_t prev = 0;
  for (double r : {0.2, 0.05, 0.01, 0.002}) {
    const auto v = SpatialSet::ball(1.0 / std::sqrt(2.0), r);
    const std::size_t got = shortest_return(beta, v, 14, 32);
    CHECK(got >= prev);
    prev = got;
  }
  // one step of either map sends the smallest ball far from itself
  CHECK(prev >= 2);
  CHECK_THROWS_AS(shortest_return(beta, SpatialSet{}, 4, 4), DomainError);
}

TEST_CASE("periodicity probe") {
  const MapFamily lsv({MapSpec::lsv(0.2), MapSpec::lsv(0.25)});
  const MapFamily b2({MapSpec::beta(2.0)});
  const MapFamily b23({MapSpec::beta(2.0), MapSpec::beta(3.0)});
  auto v = periodicity_probe(lsv, 0.0, 4, 1e-9);
  CHECK(v.periodic);
  CHECK(v.word.size() == 1);
  v = periodicity_probe(b2, 0.0, 4, 1e-9);
  CHECK(v.periodic);
  v = periodicity_probe(b2, 1.0 / 3.0, 4, 1e-9);  // 1/3 -> 2/3 -> 1/3
  CHECK(v.periodic);
  CHECK(v.word.size() == 2);
  v = periodicity_probe(b23, 1.0 / std::sqrt(2.0), 12, 1e-9);
  CHECK_FALSE(v.periodic);
  CHECK(v.distance > 1e-9);
  CHECK_FALSE(periodicity_probe(b23, 0.3, 0, 1.0).periodic);
  // brute-force oracle over a handful of points and both families
  for (const MapFamily* fam : {&lsv, &b23}) {
    for (double x0 : {0.0, 0.125, 0.2, 0.5, 1.0 / 3.0, 0.7071, 0.9}) {
      for (double tol : {1e-9, 1e-3}) {
        CHECK(periodicity_probe(*fam, x0, 8, tol).periodic == brute_force_periodic(*fam, x0, 8, tol));
      }
    }
  }
}

TEST_CASE("short return set measure") {
  const MapFamily doubling({MapSpec::beta(2.0)});
  const auto w = sample_omega(ProbabilityVector({1.0}), 1, 0, 20);
  CHECK(short_return_set_measure(doubling, w, 5, 2.0, 100) == 1.0);
  // |2x mod 1 - x| <= eps on [0,1] has measure 2 eps for small eps
  CHECK(short_return_set_measure(doubling, w, 1, 0.01, 100000) == doctest::Approx(0.02).epsilon(0.02));
  // n steps of doubling: |2^n x mod 1 - x| <= eps has measure about 2 eps
  CHECK(short_return_set_measure(doubling, w, 6, 0.01, 200000) == doctest::Approx(0.02).epsilon(0.05));
  CHECK_THROWS_AS(short_return_set_measure(doubling, w, 30, 0.1, 10), WindowError);
  CHECK_THROWS_AS(short_return_set_measure(doubling, w, 3, 0.1, 0), DomainError);
}

TEST_CASE("exponential law for the tripling map") {
  // tripling keeps floating-point orbits alive; doubling collapses to 0
  const MapFamily tripling({MapSpec::beta(3.0)});
  TrialSetup setup{.family = &tripling,
                   .fiber_ops = nullptr,
                   .omega = sample_omega(ProbabilityVector({1.0}), 1, 0, 1),
                   .tail = TailModel(0.75, 1.0 / std::sqrt(2.0), 2.0),
                   .n = 1000,
                   .trials = 4000,
                   .start = StartMeasure::Lebesgue,
                   .fiber_depth = 50,
                   .seed = 5,
                   .threads = 2};
  const auto r = exponential_law_experiment(setup, IntervalUnion::above(1.0), 0.0, 3.0, 301);
  CHECK(r.target_mass == doctest::Approx(1.0));
  CHECK(r.target_lebesgue == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(r.empirical.front() == 1.0);
  CHECK(r.target.back() == doctest::Approx(std::exp(-3.0)));
  CHECK(r.sup_distance <= 0.05);
  CHECK(r.censored == 0);
  CHECK(r.cap == 50000);
  for (std::size_t i = 1; i < r.empirical.size(); ++i) CHECK(r.empirical[i] <= r.empirical[i - 1]);
  // survival at tau is the fraction of R/n above tau
  for (std::size_t i : {std::size_t{50}, std::size_t{150}}) {
    const double tau = r.tau[i];
    const double steps = std::floor(1000.0 * tau);
    const auto above = std::count_if(r.hit_over_n.begin(), r.hit_over_n.end(),
                                     [&](double h) { return h * 1000.0 > steps; });
    CHECK(r.empirical[i] == doctest::Approx(static_cast<double>(above) / 4000.0));
  }
}

TEST_CASE("Poisson experiment") {
  // tripling keeps floating-point orbits alive; doubling collapses to 0
  const MapFamily tripling({MapSpec::beta(3.0)});
  TrialSetup setup{.family = &tripling,
                   .fiber_ops = nullptr,
                   .omega = sample_omega(ProbabilityVector({1.0}), 1, 0, 1),
                   .tail = TailModel(0.75, 1.0 / std::sqrt(2.0), 2.0),
                   .n = 2000,
                   .trials = 3000,
                   .start = StartMeasure::Lebesgue,
                   .fiber_depth = 50,
                   .seed = 9,
                   .threads = 2};
  const std::vector<std::vector<Rect>> sets = {
      {{0.0, 1.0, IntervalUnion::above(1.0)}},
      {{0.0, 1.0, IntervalUnion::above(2.0)}},
      {{0.0, 1.0, IntervalUnion::above(1e12)}},
  };
  const auto r = poisson_experiment(setup, sets);
  REQUIRE(r.sets.size() == 3);
  CHECK(r.sets[0].target_mean == doctest::Approx(1.0));
  CHECK(r.sets[1].target_mean == doctest::Approx(std::pow(2.0, -0.75)));
  CHECK(std::abs(r.sets[0].mean - 1.0) <= 0.1);
  CHECK(std::abs(r.sets[0].void_probability - std::exp(-1.0)) <= 0.04);
  CHECK(r.sets[0].total_variation <= 0.05);
  for (std::size_t t = 0; t < setup.trials; ++t) {
    CHECK(r.sets[1].counts[t] <= r.sets[0].counts[t]);
    CHECK(r.sets[2].counts[t] == 0);
  }
  CHECK(r.rank_correlations.size() == 3);
  CHECK(r.pole_points == 0);

  const std::vector<std::vector<Rect>> bad = {{{0.5, 0.5, IntervalUnion::above(1.0)}}};
  CHECK_THROWS_AS(poisson_experiment(setup, bad), DomainError);
}

TEST_CASE("start sampler") {
  const MapFamily fam({MapSpec::beta(2.1), MapSpec::beta(3.3)});
  const FamilyOperators ops(fam, 256);
  TrialSetup setup{.family = &fam,
                   .fiber_ops = &ops,
                   .omega = sample_omega(ProbabilityVector({0.5, 0.5}), 2, -60, 10),
                   .tail = TailModel(0.75, 0.5, 1.0),
                   .n = 10,
                   .trials = 1,
                   .start = StartMeasure::Fiber,
                   .fiber_depth = 50,
                   .seed = 3,
                   .threads = 1};
  const StartSampler a(setup, 0), b(setup, 0);
  for (std::size_t t = 0; t < 100; ++t) {
    CHECK(a(t) == b(t));
    CHECK(a(t) >= 0.0);
    CHECK(a(t) < 1.0);
  }
  setup.start = StartMeasure::Lebesgue;
  const StartSampler leb(setup, 0);
  CHECK(leb(7) == to_unit(hash_index(derive_seed(3, "start"), 7)));
  setup.start = StartMeasure::Fiber;
  setup.fiber_ops = nullptr;
  CHECK_THROWS_AS(StartSampler(setup, 0), DomainError);
}
