#include "rds/tailmodel.hpp"

#include <algorithm>
#include <sstream>

#include "rds/error.hpp"

namespace rds {

TailModel::TailModel(double alpha, double x0, double b_const, double p_pos)
    : alpha_(alpha), x0_(x0), b_const_(b_const), p_pos_(p_pos) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0,2)");
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("x0 must lie in [0,1]");
  if (!(b_const > 0.0) || !std::isfinite(b_const)) throw DomainError("b must be finite and > 0");
  if (!(p_pos >= 0.0 && p_pos <= 1.0)) throw DomainError("p must lie in [0,1]");
}

double TailModel::scaling_bn(double n) const {
  if (!(n >= 1.0)) throw DomainError("scaling constant needs n >= 1");
  return std::pow(b_const_ * n, 1.0 / alpha_);
}

double TailModel::levy_measure(const IntervalUnion& marks) const {
  double total = 0.0;
  for (const auto& part : marks.parts()) {
    if (part.lo >= 0.0) {
      const double upper = part.hi == kInf ? 0.0 : std::pow(part.hi, -alpha_);
      total += p_pos_ * (std::pow(part.lo, -alpha_) - upper);
    } else {
      const double outer = part.lo == -kInf ? 0.0 : std::pow(-part.lo, -alpha_);
      total += (1.0 - p_pos_) * (std::pow(-part.hi, -alpha_) - outer);
    }
  }
  return total;
}

SpatialSet TailModel::preimage(const IntervalUnion& marks, double scale) const {
  std::vector<SpatialInterval> parts;
  for (const auto& part : marks.parts()) {
    if (part.lo < 0.0) continue;  // phi* > 0
    const double r_out = std::pow(scale * part.lo, -alpha_);
    const double r_in = part.hi == kInf ? 0.0 : std::pow(scale * part.hi, -alpha_);
    if (r_in == 0.0) {
      const SpatialSet ball = SpatialSet::ball(x0_, r_out);
      for (const auto& p : ball.parts()) parts.push_back(p);
      continue;
    }
    // (x0 - r_out, x0 - r_in] and [x0 + r_in, x0 + r_out)
    const double l_lo = x0_ - r_out;
    const double l_hi = x0_ - r_in;
    if (l_hi >= 0.0) parts.push_back({std::max(l_lo, 0.0), l_hi, l_lo <= 0.0, true});
    const double h_lo = x0_ + r_in;
    const double h_hi = x0_ + r_out;
    if (h_lo <= 1.0) parts.push_back({h_lo, std::min(h_hi, 1.0), true, h_hi >= 1.0});
  }
  return SpatialSet(std::move(parts));
}

double c_alpha_eps(double alpha, double beta_skew, double eps) {
  if (!(eps > 0.0)) throw DomainError("c_alpha(eps) needs eps > 0");
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0,2)");
  if (alpha < 1.0) return 0.0;
  if (alpha == 1.0) return -beta_skew * std::log(eps);
  return std::pow(eps, 1.0 - alpha) * beta_skew * alpha / (alpha - 1.0);
}

std::vector<double> default_eps_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 6; ++k) grid.push_back(0.1 * std::ldexp(1.0, -k));
  return grid;
}

LocalDensityEstimate estimate_local_density(const DensityVector& h, double x0,
                                            std::span<const double> eps_grid, double tol) {
  if (eps_grid.empty()) throw DomainError("eps grid is empty");
  LocalDensityEstimate out{};
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw DomainError("eps grid entries must be > 0");
    out.quotients.push_back(h.integrate(x0 - eps, x0 + eps) / eps);
  }
  const auto [mn, mx] = std::minmax_element(out.quotients.begin(), out.quotients.end());
  double mean = 0.0;
  for (double q : out.quotients) mean += q;
  mean /= static_cast<double>(out.quotients.size());
  out.relative_spread = mean > 0.0 ? (*mx - *mn) / mean : kInf;
  if (!(out.relative_spread <= tol)) {
    std::ostringstream msg;
    msg << "local density quotients at x0=" << x0 << " spread by " << out.relative_spread
        << " (tolerance " << tol << ")";
    throw ConvergenceError(msg.str());
  }
  if (eps_grid.size() == 1) {
    out.value = out.quotients.front();
    return out;
  }
  double se = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    se += eps_grid[i];
    sq += out.quotients[i];
  }
  const double ne = static_cast<double>(eps_grid.size());
  const double me = se / ne;
  const double mq = sq / ne;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    sxx += (eps_grid[i] - me) * (eps_grid[i] - me);
    sxy += (eps_grid[i] - me) * (out.quotients[i] - mq);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  out.value = mq - slope * me;
  if (!(out.value > 0.0)) throw ConvergenceError("extrapolated local density is not positive");
  return out;
}

double tail_mass(const TailModel& model, const DensityVector& h, double t) {
  if (!(t > 0.0)) return h.mass();
  return h.power_integral(model.x0(), 0.0, 0.0, std::pow(t, -model.alpha()));
}

double truncated_moment(const TailModel& model, const DensityVector& h, double power, double t) {
  const double r_lo = t == kInf ? 0.0 : std::pow(t, -model.alpha());
  return h.power_integral(model.x0(), -power / model.alpha(), r_lo, kInf);
}

MomentSource MomentSource::from_density(const TailModel& model, const DensityVector& h) {
  MomentSource src;
  const double mean = truncated_moment(model, h, 1.0, kInf);
  if (std::isfinite(mean)) src.mean_phi = mean;
  src.truncated_mean = [model, h](double t) { return truncated_moment(model, h, 1.0, t); };
  return src;
}

double centering_cn(std::size_t n, const TailModel& model, const MomentSource& moments) {
  const double alpha = model.alpha();
  if (alpha < 1.0) return 0.0;
  const double nd = static_cast<double>(n);
  const double bn = model.scaling_bn(nd);
  if (alpha == 1.0) {
    if (!moments.truncated_mean) throw DomainError("alpha = 1 centering needs a truncated mean");
    return nd / bn * moments.truncated_mean(bn);
  }
  if (!moments.mean_phi || !std::isfinite(*moments.mean_phi)) {
    throw DomainError("alpha in (1,2) centering needs a finite mean of phi");
  }
  return nd / bn * *moments.mean_phi;
}

KaramataReport karamata_ratio_check(const TailModel& model, double eps, std::size_t n,
                                    const DensityVector& h) {
  if (!(eps > 0.0)) throw DomainError("truncation level must be > 0");
  const double alpha = model.alpha();
  const double s = eps * model.scaling_bn(static_cast<double>(n));
  const double tail = tail_mass(model, h, s);
  if (!(tail > 0.0)) throw DomainError("no mass above the truncation level");
  KaramataReport r{};
  r.threshold = s;
  r.second_observed = truncated_moment(model, h, 2.0, s) / (s * s * tail);
  r.second_target = alpha / (2.0 - alpha);
  if (alpha < 1.0) {
    r.first_observed = truncated_moment(model, h, 1.0, s) / (s * tail);
    r.first_target = alpha / (1.0 - alpha);
  }
  return r;
}

}  // namespace rds
