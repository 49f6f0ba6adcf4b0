#include "rds/stable.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "rds/driving.hpp"
#include "rds/error.hpp"
#include "rds/parallel.hpp"

namespace rds {

StableLaw::StableLaw(double alpha, double p_pos) : alpha_(alpha), p_pos_(p_pos) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable index alpha must lie in (0,2)");
  if (!(p_pos >= 0.0 && p_pos <= 1.0)) throw DomainError("p must lie in [0,1]");
}

double StableLaw::a_alpha() const noexcept {
  if (alpha_ == 1.0) return 0.0;
  return beta_skew() * alpha_ / (1.0 - alpha_);
}

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Dynamical: return "dynamical";
    case Provenance::IidOracle: return "iid-oracle";
    case Provenance::Cms: return "cms";
  }
  return "unknown";
}

namespace {

struct GslWorkspace {
  explicit GslWorkspace(std::size_t n)
      : main(gsl_integration_workspace_alloc(n), gsl_integration_workspace_free),
        cycle(gsl_integration_workspace_alloc(n), gsl_integration_workspace_free) {}
  std::unique_ptr<gsl_integration_workspace, void (*)(gsl_integration_workspace*)> main;
  std::unique_ptr<gsl_integration_workspace, void (*)(gsl_integration_workspace*)> cycle;
};

struct IntegrandParams {
  double alpha;
  double t;
};

void check_status(int status, const char* what) {
  if (status == GSL_SUCCESS || status == GSL_EROUND) return;
  std::ostringstream msg;
  msg << what << " quadrature failed: " << gsl_strerror(status);
  throw ConvergenceError(msg.str());
}

// alpha x^(-alpha-1) (cos(tx) - 1) written without cancellation
double real_near(double x, void* p) {
  const auto& q = *static_cast<IntegrandParams*>(p);
  const double s = std::sin(0.5 * q.t * x);
  return -2.0 * s * s * q.alpha * std::pow(x, -q.alpha - 1.0);
}

// alpha x^(-alpha-1) (sin(tx) - tx)
double imag_near(double x, void* p) {
  const auto& q = *static_cast<IntegrandParams*>(p);
  const double u = q.t * x;
  double d;
  if (std::abs(u) < 1e-2) {
    const double u2 = u * u;
    d = -u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0));
  } else {
    d = std::sin(u) - u;
  }
  return d * q.alpha * std::pow(x, -q.alpha - 1.0);
}

double tail_weight(double x, void* p) {
  const auto& q = *static_cast<IntegrandParams*>(p);
  return q.alpha * std::pow(x, -q.alpha - 1.0);
}

// integral over (0, inf) of (e^{itx} - 1 - itx 1{x<=1}) alpha x^(-alpha-1) dx
std::complex<double> positive_part(double alpha, double t, const QuadratureConfig& cfg) {
  if (t == 0.0) return {0.0, 0.0};
  gsl_set_error_handler_off();
  GslWorkspace ws(cfg.workspace);
  IntegrandParams params{alpha, t};

  // [0, delta]: Taylor expansion of the integrand
  const double delta = cfg.series_cutoff / std::max(1.0, std::abs(t));
  const double t2 = t * t;
  double re = -alpha * t2 * std::pow(delta, 2.0 - alpha) / (2.0 * (2.0 - alpha)) +
              alpha * t2 * t2 * std::pow(delta, 4.0 - alpha) / (24.0 * (4.0 - alpha));
  double im = -alpha * t2 * t * std::pow(delta, 3.0 - alpha) / (6.0 * (3.0 - alpha)) +
              alpha * t2 * t2 * t * std::pow(delta, 5.0 - alpha) / (120.0 * (5.0 - alpha));

  // [delta, 1]
  double value = 0.0, err = 0.0;
  gsl_function f{&real_near, &params};
  check_status(gsl_integration_qags(&f, delta, 1.0, cfg.abs_tol, cfg.rel_tol, cfg.workspace,
                                    ws.main.get(), &value, &err),
               "near-field real");
  re += value;
  f.function = &imag_near;
  check_status(gsl_integration_qags(&f, delta, 1.0, cfg.abs_tol, cfg.rel_tol, cfg.workspace,
                                    ws.main.get(), &value, &err),
               "near-field imaginary");
  im += value;

  // [1, inf): oscillatory Fourier integrals, and -integral of the weight = -1
  const double w = std::abs(t);
  f.function = &tail_weight;
  const double tail_tol = std::max(cfg.abs_tol, 1e-11);
  auto* cos_table = gsl_integration_qawo_table_alloc(w, 1.0, GSL_INTEG_COSINE, 50);
  const int cs = gsl_integration_qawf(&f, 1.0, tail_tol, cfg.workspace, ws.main.get(),
                                      ws.cycle.get(), cos_table, &value, &err);
  gsl_integration_qawo_table_free(cos_table);
  check_status(cs, "far-field cosine");
  re += value - 1.0;
  auto* sin_table = gsl_integration_qawo_table_alloc(w, 1.0, GSL_INTEG_SINE, 50);
  const int ss = gsl_integration_qawf(&f, 1.0, tail_tol, cfg.workspace, ws.main.get(),
                                      ws.cycle.get(), sin_table, &value, &err);
  gsl_integration_qawo_table_free(sin_table);
  check_status(ss, "far-field sine");
  im += t > 0.0 ? value : -value;
  return {re, im};
}

}  // namespace

std::complex<double> lk_exponent(const StableLaw& law, double t, const QuadratureConfig& cfg) {
  if (t == 0.0) return {0.0, 0.0};
  const std::complex<double> pos = positive_part(law.alpha(), t, cfg);
  // the negative half-line contributes the conjugate of the positive one
  const double p = law.p_pos();
  return std::complex<double>(0.0, t * law.a_alpha()) + p * pos + (1.0 - p) * std::conj(pos);
}

SampleSet iid_oracle(const TailModel& tail, const DensityVector& density, std::size_t n,
                     std::size_t trials, std::uint64_t seed, double bn, double cn,
                     std::size_t threads) {
  const InverseCdfSampler sampler(density);
  std::vector<double> sums(trials);
  parallel_for(trials, threads, [&](std::size_t trial) {
    CounterRng rng(derive_seed(seed, "iid", trial));
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += tail.phi_star(sampler(rng.uniform()));
    sums[trial] = s / bn - cn;
  });
  SampleSet out;
  out.provenance = Provenance::IidOracle;
  out.seed = seed;
  for (double v : sums) {
    if (std::isfinite(v)) {
      out.values.push_back(v);
    } else {
      ++out.excluded;
    }
  }
  return out;
}

std::vector<double> default_calibration_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) {
    grid.push_back(-0.1 * i);
    grid.push_back(0.1 * i);
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

CmsSamples cms_sampler(const StableLaw& law, std::size_t count, std::uint64_t seed,
                       std::span<const double> calibration_grid, double flag_threshold) {
  const double alpha = law.alpha();
  if (alpha == 1.0) throw DomainError("CMS sampler does not support alpha = 1");
  if (calibration_grid.empty()) throw DomainError("calibration grid is empty");
  const double beta = law.beta_skew();
  const double zeta = beta * std::tan(std::numbers::pi * alpha / 2.0);

  // psi_model(t) = -c |t|^a (1 - i beta sgn(t) tan(pi a/2)) + i mu t, c = sigma^a
  CmsCalibration cal;
  double num = 0.0, den = 0.0;
  std::vector<std::complex<double>> psi;
  for (double t : calibration_grid) {
    psi.push_back(lk_exponent(law, t));
    const double ta = std::pow(std::abs(t), alpha);
    num += -psi.back().real() * ta;
    den += ta * ta;
  }
  const double c = num / den;
  if (!(c > 0.0)) throw ConvergenceError("CMS calibration produced a non-positive scale");
  double mnum = 0.0, mden = 0.0;
  for (std::size_t i = 0; i < calibration_grid.size(); ++i) {
    const double t = calibration_grid[i];
    const double skew = c * zeta * (t > 0 ? 1.0 : -1.0) * std::pow(std::abs(t), alpha);
    mnum += (psi[i].imag() - skew) * t;
    mden += t * t;
  }
  cal.scale = std::pow(c, 1.0 / alpha);
  cal.shift = mnum / mden;
  double rn = 0.0, rd = 0.0;
  for (std::size_t i = 0; i < calibration_grid.size(); ++i) {
    const double t = calibration_grid[i];
    const double ta = std::pow(std::abs(t), alpha);
    const std::complex<double> model(-c * ta, c * zeta * (t > 0 ? 1.0 : -1.0) * ta + cal.shift * t);
    rn += std::norm(psi[i] - model);
    rd += std::norm(psi[i]);
  }
  cal.residual = rd > 0.0 ? std::sqrt(rn / rd) : 0.0;
  cal.flagged = !(cal.residual <= flag_threshold);

  const double b_shift = std::atan(zeta) / alpha;
  const double s_scale = std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * alpha));
  CounterRng rng(derive_seed(seed, "cms"));
  CmsSamples out;
  out.calibration = cal;
  out.samples.provenance = Provenance::Cms;
  out.samples.seed = seed;
  out.samples.values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = std::numbers::pi * (rng.uniform_open() - 0.5);
    const double w = -std::log(rng.uniform_open());
    const double x = s_scale * std::sin(alpha * (v + b_shift)) / std::pow(std::cos(v), 1.0 / alpha) *
                     std::pow(std::cos(v - alpha * (v + b_shift)) / w, (1.0 - alpha) / alpha);
    const double y = cal.scale * x + cal.shift;
    if (std::isfinite(y)) {
      out.samples.values.push_back(y);
    } else {
      ++out.samples.excluded;
    }
  }
  return out;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

std::vector<std::complex<double>> empirical_cf(std::span<const double> samples,
                                               std::span<const double> t_grid) {
  if (samples.empty()) throw DomainError("empirical CF needs samples");
  std::vector<std::complex<double>> out;
  out.reserve(t_grid.size());
  const double n = static_cast<double>(samples.size());
  for (double t : t_grid) {
    if (t == 0.0) {
      out.emplace_back(1.0, 0.0);
      continue;
    }
    double c = 0.0, s = 0.0;
    for (double x : samples) {
      c += std::cos(t * x);
      s += std::sin(t * x);
    }
    out.emplace_back(c / n, s / n);
  }
  return out;
}

}  // namespace rds
