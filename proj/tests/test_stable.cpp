#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "rds/density.hpp"
#include "rds/driving.hpp"
#include "rds/error.hpp"
#include "rds/stable.hpp"
#include "rds/stats.hpp"
#include "rds/tailmodel.hpp"

using namespace rds;
using cplx = std::complex<double>;

namespace {

// Closed form of the Levy-Khintchine exponent for the one-sided measure,
// extended to general p by conjugation on the negative half line.
cplx closed_form(double alpha, double p, double t) {
  cplx one_sided;
  if (t == 0.0) return 0.0;
  if (alpha == 1.0) {
    constexpr double euler_gamma = 0.57721566490153286061;
    one_sided = cplx(-std::numbers::pi / 2.0 * std::abs(t), -t * std::log(std::abs(t)) + t * (1.0 - euler_gamma));
  } else {
    const cplx minus_it(0.0, -t);
    one_sided = alpha * std::tgamma(-alpha) * std::pow(minus_it, alpha);
  }
  return p * one_sided + (1.0 - p) * std::conj(one_sided);
}

double brute_force_ks(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : pts) {
    const double fa = static_cast<double>(std::count_if(a.begin(), a.end(), [x](double v) { return v <= x; })) / a.size();
    const double fb = static_cast<double>(std::count_if(b.begin(), b.end(), [x](double v) { return v <= x; })) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

}  // namespace

TEST_CASE("StableLaw parameters") {
  CHECK(StableLaw(0.5).a_alpha() == doctest::Approx(1.0));
  CHECK(StableLaw(1.5).a_alpha() == doctest::Approx(-3.0));
  CHECK(StableLaw(1.0, 0.8).a_alpha() == 0.0);
  CHECK(StableLaw(0.5, 0.5).a_alpha() == 0.0);
  CHECK(StableLaw(0.75, 0.25).beta_skew() == doctest::Approx(-0.5));
  CHECK_THROWS_AS(StableLaw(2.0), DomainError);
  CHECK_THROWS_AS(StableLaw(0.0), DomainError);
  CHECK_THROWS_AS(StableLaw(0.5, 1.5), DomainError);
}

TEST_CASE("characteristic function basics") {
  for (double alpha : {0.3, 0.75, 1.0, 1.5, 1.9}) {
    const StableLaw law(alpha);
    CHECK(std::abs(stable_cf(law, 0.0) - cplx(1.0, 0.0)) <= 1e-14);
    for (double t : {-5.0, -1.0, -0.01, 0.01, 0.3, 2.0, 17.0}) {
      CHECK(std::abs(stable_cf(law, t)) <= 1.0 + 1e-12);
      const cplx a = lk_exponent(law, t), b = lk_exponent(law, -t);
      CHECK(std::abs(a - std::conj(b)) <= 1e-9 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("exponent matches the closed form") {
  for (double alpha : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.8}) {
    for (double p : {1.0, 0.7, 0.5, 0.0}) {
      const StableLaw law(alpha, p);
      for (double t : {-8.0, -1.0, -0.2, 0.05, 0.5, 1.0, 3.0, 20.0}) {
        const cplx got = lk_exponent(law, t);
        const cplx want = closed_form(alpha, p, t);
        CHECK(std::abs(got - want) <= 1e-8 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST_CASE("log modulus is linear in |t|^alpha") {
  for (double alpha : {0.5, 1.2}) {
    const StableLaw law(alpha, 0.6);
    std::vector<double> x, y;
    for (int i = 1; i <= 30; ++i) {
      const double t = 0.1 * i;
      x.push_back(std::pow(t, alpha));
      y.push_back(std::log(std::abs(stable_cf(law, t))));
    }
    const auto fit = linear_fit(x, y);
    CHECK(fit.r2 >= 0.999);
    CHECK(fit.slope < 0.0);
  }
}

TEST_CASE("iid oracle") {
  const double alpha = 0.75;
  const TailModel tail(alpha, 0.5, 2.0);
  const auto uniform = DensityVector::constant(64);
  SUBCASE("one term follows the exact tail") {
    // P(phi*(U) > l) = m(|U - 1/2| < l^-alpha) = 2 l^-alpha
    const auto s = iid_oracle(tail, uniform, 1, 200000, 3, 1.0, 0.0);
    CHECK(s.provenance == Provenance::IidOracle);
    for (double l : {5.0, 20.0, 100.0}) {  // ball radius l^-alpha stays inside [0,1]
      const double frac = static_cast<double>(std::count_if(s.values.begin(), s.values.end(),
                                                            [l](double v) { return v > l; })) /
                          static_cast<double>(s.values.size());
      const double want = 2.0 * std::pow(l, -alpha);
      CHECK(std::abs(frac - want) <= 5.0 * std::sqrt(want / 200000.0));
    }
  }
  SUBCASE("determinism and thread independence") {
    const auto a = iid_oracle(tail, uniform, 500, 2000, 11, tail.scaling_bn(500), 0.0, 1);
    const auto b = iid_oracle(tail, uniform, 500, 2000, 11, tail.scaling_bn(500), 0.0, 4);
    CHECK(a.values == b.values);
    const auto c = iid_oracle(tail, uniform, 500, 2000, 12, tail.scaling_bn(500), 0.0, 4);
    CHECK(a.values != c.values);
  }
  SUBCASE("different seeds give the same law") {
    const double bn = tail.scaling_bn(1000);
    const auto a = iid_oracle(tail, uniform, 1000, 5000, 1, bn, 0.0, 4);
    const auto b = iid_oracle(tail, uniform, 1000, 5000, 2, bn, 0.0, 4);
    CHECK(ks_two_sample(a, b) <= 0.03);
  }
  SUBCASE("rescaled sums are stable in n") {
    const auto a = iid_oracle(tail, uniform, 1000, 20000, 4, tail.scaling_bn(1000), 0.0, 4);
    const auto b = iid_oracle(tail, uniform, 2000, 20000, 5, tail.scaling_bn(2000), 0.0, 4);
    CHECK(ks_two_sample(a, b) <= 0.03);
  }
  SUBCASE("tail of the sum has index alpha") {
    const auto s = iid_oracle(tail, uniform, 200, 50000, 6, tail.scaling_bn(200), 0.0, 4);
    std::vector<double> lx, ly;
    for (double l = 4.0; l <= 64.0; l *= 1.5) {
      const double frac = static_cast<double>(std::count_if(s.values.begin(), s.values.end(),
                                                            [l](double v) { return v > l; })) /
                          static_cast<double>(s.values.size());
      lx.push_back(std::log(l));
      ly.push_back(std::log(frac));
    }
    CHECK(linear_fit(lx, ly).slope == doctest::Approx(-alpha).epsilon(0.1 / alpha));
  }
  SUBCASE("no draws are excluded away from the pole") {
    const auto s = iid_oracle(tail, uniform, 10, 1000, 7, 1.0, 0.0);
    CHECK(s.excluded == 0);
    CHECK(s.values.size() == 1000);
  }
}

TEST_CASE("CMS sampler") {
  const auto grid = default_calibration_grid();
  REQUIRE(grid.size() == 40);
  CHECK(grid.front() == doctest::Approx(-2.0));
  CHECK(grid.back() == doctest::Approx(2.0));
  for (double alpha : {0.5, 1.5}) {
    for (double p : {1.0, 0.3}) {
      const StableLaw law(alpha, p);
      const auto s = cms_sampler(law, 1000000, 8, grid);
      CHECK(s.samples.provenance == Provenance::Cms);
      CHECK(s.calibration.residual <= 1e-6);
      CHECK_FALSE(s.calibration.flagged);
      const std::vector<double> ts = {-2.0, -0.5, 0.3, 1.0, 1.7};
      const auto emp = empirical_cf(s.samples.values, ts);
      for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(emp[i] - stable_cf(law, ts[i])) <= 0.02);
      if (p == 1.0 && alpha < 1.0) {
        CHECK(*std::min_element(s.samples.values.begin(), s.samples.values.end()) >= 0.0);
      }
    }
  }
  CHECK_THROWS_AS(cms_sampler(StableLaw(1.0), 10, 1, grid), DomainError);
  CHECK_THROWS_AS(cms_sampler(StableLaw(0.5), 10, 1, std::vector<double>{}), DomainError);
}

TEST_CASE("two-sample KS") {
  const std::vector<double> a = {0.1, 0.5, 0.5, 0.9};
  CHECK(ks_two_sample(a, a) == 0.0);
  const std::vector<double> low = {1.0, 2.0}, high = {3.0, 4.0, 5.0};
  CHECK(ks_two_sample(low, high) == 1.0);
  CHECK(ks_two_sample(high, low) == 1.0);
  CHECK_THROWS_AS(ks_two_sample(std::vector<double>{}, a), DomainError);

  CounterRng rng(99);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> x(7 + rep), y(13 + 2 * rep);
    // coarse values force ties within and across samples
    for (auto& v : x) v = std::floor(rng.uniform() * 6.0);
    for (auto& v : y) v = std::floor(rng.uniform() * 5.0);
    CHECK(ks_two_sample(x, y) == doctest::Approx(brute_force_ks(x, y)).epsilon(1e-14));
    CHECK(ks_two_sample(x, y) == ks_two_sample(y, x));
  }
  std::vector<double> u(5000), v(5000);
  for (auto& e : u) e = rng.uniform();
  for (auto& e : v) e = rng.uniform();
  CHECK(ks_two_sample(u, v) <= 0.0384);
}

TEST_CASE("empirical characteristic function") {
  const std::vector<double> s = {0.0, 1.0, -1.0};
  const std::vector<double> ts = {0.0, 1.0, std::numbers::pi};
  const auto cf = empirical_cf(s, ts);
  CHECK(cf[0] == cplx(1.0, 0.0));
  CHECK(cf[1].real() == doctest::Approx((1.0 + 2.0 * std::cos(1.0)) / 3.0));
  CHECK(std::abs(cf[1].imag()) <= 1e-15);
  CHECK(cf[2].real() == doctest::Approx(-1.0 / 3.0));
  CHECK_THROWS_AS(empirical_cf(std::vector<double>{}, ts), DomainError);
}
