#include "rds/selftest.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>

#include "rds/driving.hpp"
#include "rds/error.hpp"
#include "rds/maps.hpp"
#include "rds/stable.hpp"
#include "rds/tailmodel.hpp"
#include "rds/transfer.hpp"

namespace rds {

namespace {

struct LevyParams {
  double alpha;
  double weight;
};

double levy_density(double x, void* p) {
  const auto& q = *static_cast<LevyParams*>(p);
  return q.weight * q.alpha * std::pow(std::abs(x), -q.alpha - 1.0);
}

/// Pi_alpha((lo, hi]) by adaptive quadrature of the Levy density.
double levy_quadrature(double alpha, double p, double lo, double hi) {
  gsl_set_error_handler_off();
  std::unique_ptr<gsl_integration_workspace, void (*)(gsl_integration_workspace*)> ws(
      gsl_integration_workspace_alloc(1000), gsl_integration_workspace_free);
  LevyParams params{alpha, lo > 0.0 ? p : 1.0 - p};
  gsl_function f{&levy_density, &params};
  double value = 0.0, err = 0.0;
  int status;
  if (hi == kInf) {
    status = gsl_integration_qagiu(&f, lo, 1e-14, 1e-12, 1000, ws.get(), &value, &err);
  } else {
    status = gsl_integration_qags(&f, lo, hi, 1e-14, 1e-12, 1000, ws.get(), &value, &err);
  }
  if (status != GSL_SUCCESS && status != GSL_EROUND) {
    throw ConvergenceError(std::string("Levy quadrature: ") + gsl_strerror(status));
  }
  return value;
}

}  // namespace

ExperimentReport run_selftest(bool quick) {
  ExperimentReport rep("selftest");
  rep.info()["quick"] = quick;

  // Ulam row sums over both families and several resolutions
  double row_err = 0.0;
  for (const auto& name : {"beta:2", "beta:2.1", "beta:2.5", "beta:3.3", "lsv:0.2", "lsv:0.25",
                           "lsv:0.5", "lsv:0.75"}) {
    for (std::size_t k : {2u, 17u, 512u, 4096u}) {
      row_err = std::max(row_err, ulam_matrix(parse_map_spec(name), k).max_row_sum_error());
    }
  }
  rep.add(Statistic::at_most("ulam_row_sum_error", row_err, 1e-10));

  // doubling map leaves Lebesgue invariant
  const auto doubling = stationary_density(ulam_matrix(MapSpec::beta(2.0), 4096), 1e-12);
  double dev = 0.0;
  for (double v : doubling.density.values()) dev = std::max(dev, std::abs(v - 1.0));
  rep.add(Statistic::at_most("doubling_density_sup_error", dev, 1e-8));

  // Levy measure closed form against quadrature on 50 random intervals
  CounterRng rng(derive_seed(12345, "selftest-levy"));
  double levy_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double alpha = 0.1 + 1.8 * rng.uniform();
    const double p = rng.uniform();
    const double a = 0.05 + 5.0 * rng.uniform();
    const double len = 10.0 * rng.uniform() + 1e-3;
    const bool negative = rng.uniform() < 0.3;
    const bool unbounded = !negative && rng.uniform() < 0.3;
    const double lo = negative ? -(a + len) : a;
    const double hi = negative ? -a : (unbounded ? kInf : a + len);
    const TailModel model(alpha, 0.5, 1.0, p);
    const double closed = model.levy_measure(IntervalUnion({{lo, hi}}));
    const double quad = levy_quadrature(alpha, p, lo, hi);
    levy_err = std::max(levy_err, std::abs(closed - quad));
  }
  rep.add(Statistic::at_most("levy_measure_max_error", levy_err, 1e-8));

  rep.add(Statistic::within("c_alpha_0.5", c_alpha_eps(0.5, 1.0, 0.3), 0.0, 0.0));
  rep.add(Statistic::within("c_alpha_1", c_alpha_eps(1.0, 1.0, std::exp(-1.0)), 1.0, 0.0));
  rep.add(Statistic::within("c_alpha_1.5", c_alpha_eps(1.5, 1.0, 1.0), 3.0, 0.0));

  // CF of a probability law: value 1 at 0, modulus at most 1
  double cf0_err = 0.0;
  double cf_excess = 0.0;
  for (double alpha : {0.5, 0.75, 1.0, 1.5}) {
    const StableLaw law(alpha, 1.0);
    cf0_err = std::max(cf0_err, std::abs(stable_cf(law, 0.0) - std::complex<double>(1.0, 0.0)));
    for (int i = 0; i < 200; ++i) {
      const double t = -20.0 + 40.0 * i / 199.0;
      cf_excess = std::max(cf_excess, std::abs(stable_cf(law, t)) - 1.0);
    }
  }
  rep.add(Statistic::within("stable_cf_at_0", cf0_err, 0.0, 0.0));
  rep.add(Statistic::at_most("stable_cf_modulus_excess", cf_excess, 1e-12));

  if (!quick) {
    const TailModel lebesgue(0.5, 0.5, 2.0);
    const auto kr = karamata_ratio_check(lebesgue, 0.5, 1000000, DensityVector::constant(4096));
    rep.add(Statistic::within("karamata_second_rel", kr.second_observed / kr.second_target - 1.0,
                              0.0, 0.02));
    rep.add(Statistic::within("karamata_first_rel", *kr.first_observed / *kr.first_target - 1.0,
                              0.0, 0.02));
  }
  return rep;
}

}  // namespace rds
