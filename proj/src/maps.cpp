#include "rds/maps.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include "rds/error.hpp"

namespace rds {

MapSpec MapSpec::lsv(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("LSV gamma must lie in (0,1)");
  return MapSpec(MapKind::Lsv, gamma, {0.0, 0.5, 1.0});
}

MapSpec MapSpec::beta(double beta) {
  if (!(beta > 1.0) || !std::isfinite(beta)) throw DomainError("beta must be > 1");
  std::vector<double> points{0.0};
  const auto last = static_cast<int>(std::ceil(beta)) - 1;
  for (int j = 1; j <= last; ++j) points.push_back(j / beta);
  points.push_back(1.0);
  return MapSpec(MapKind::Beta, beta, std::move(points));
}

double MapSpec::derivative(double x) const noexcept {
  if (kind_ == MapKind::Beta) return param_;
  if (x <= 0.5) return 1.0 + std::pow(2.0, param_) * (1.0 + param_) * std::pow(x, param_);
  return 2.0;
}

std::vector<BranchInterval> MapSpec::branch_partition() const {
  std::vector<BranchInterval> out;
  const std::size_t count = branch_count();
  for (std::size_t b = 0; b < count; ++b) {
    const bool last = b + 1 == count;
    if (kind_ == MapKind::Lsv) {
      out.push_back({points_[b], points_[b + 1], b == 0, true});
    } else {
      out.push_back({points_[b], points_[b + 1], true, last});
    }
  }
  return out;
}

std::size_t MapSpec::branch_of(double x) const noexcept {
  if (kind_ == MapKind::Lsv) return x <= 0.5 ? 0 : 1;
  const double f = std::floor(param_ * x);
  if (f <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(f), branch_count() - 1);
}

double MapSpec::branch_value(std::size_t b, double x) const noexcept {
  if (kind_ == MapKind::Beta) return param_ * x - static_cast<double>(b);
  if (b == 0) return x * (1.0 + std::pow(2.0 * x, param_));
  return 2.0 * x - 1.0;
}

std::pair<double, double> MapSpec::branch_image(std::size_t b) const noexcept {
  if (kind_ == MapKind::Beta) {
    return {0.0, std::min(1.0, param_ - static_cast<double>(b))};
  }
  return {0.0, 1.0};
}

double MapSpec::branch_inverse(std::size_t b, double y) const noexcept {
  const auto [ylo, yhi] = branch_image(b);
  y = std::clamp(y, ylo, yhi);
  if (kind_ == MapKind::Beta) {
    return std::min((y + static_cast<double>(b)) / param_, points_[b + 1]);
  }
  if (b == 1) return (y + 1.0) / 2.0;
  if (y >= 1.0) return 0.5;
  // monotone bisection on the left branch
  double lo = 0.0;
  double hi = 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (branch_value(0, mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::string MapSpec::name() const {
  // shortest text that parses back to the same double
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, param_);
  return std::string(kind_ == MapKind::Lsv ? "lsv:" : "beta:") + std::string(buf, res.ptr);
}

MapSpec parse_map_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw DomainError("map spec must look like lsv:0.25 or beta:2.1");
  std::string kind = text.substr(0, colon);
  kind.erase(std::remove_if(kind.begin(), kind.end(), ::isspace), kind.end());
  double value = 0.0;
  try {
    std::size_t used = 0;
    const std::string rest = text.substr(colon + 1);
    value = std::stod(rest, &used);
    if (rest.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(rest);
  } catch (const std::exception&) {
    throw DomainError("bad map parameter in '" + text + "'");
  }
  if (kind == "lsv") return MapSpec::lsv(value);
  if (kind == "beta") return MapSpec::beta(value);
  throw DomainError("unknown map family '" + kind + "'");
}

MapFamily::MapFamily(std::vector<MapSpec> specs) : specs_(std::move(specs)) {
  if (specs_.empty()) throw DomainError("map family needs at least one map");
  if (specs_.size() > 256) throw DomainError("map family supports at most 256 maps");
}

bool MapFamily::all_beta() const noexcept {
  return std::all_of(specs_.begin(), specs_.end(),
                     [](const MapSpec& s) { return s.kind() == MapKind::Beta; });
}

bool MapFamily::all_lsv() const noexcept {
  return std::all_of(specs_.begin(), specs_.end(),
                     [](const MapSpec& s) { return s.kind() == MapKind::Lsv; });
}

double MapFamily::gamma_max() const noexcept {
  double g = 0.0;
  for (const auto& s : specs_) {
    if (s.kind() == MapKind::Lsv) g = std::max(g, s.parameter());
  }
  return g;
}

double MapFamily::gamma_min() const noexcept {
  double g = 0.0;
  bool any = false;
  for (const auto& s : specs_) {
    if (s.kind() == MapKind::Lsv) {
      g = any ? std::min(g, s.parameter()) : s.parameter();
      any = true;
    }
  }
  return g;
}

std::string MapFamily::name() const {
  std::string out;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (i) out += ",";
    out += specs_[i].name();
  }
  return out;
}

namespace {

void dedup_sorted(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [](double a, double b) { return std::abs(a - b) <= 1e-15; }),
          v.end());
}

}  // namespace

std::vector<double> MapFamily::discontinuity_probe(std::size_t max_len,
                                                   std::size_t max_points) const {
  std::vector<double> base;
  for (const auto& s : specs_) {
    const auto& pts = s.branch_points();
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) base.push_back(pts[i]);
  }
  dedup_sorted(base);
  std::vector<double> all = base;
  std::vector<double> frontier = base;
  for (std::size_t len = 1; len < max_len && !frontier.empty() && all.size() < max_points;
       ++len) {
    std::vector<double> next;
    for (const auto& s : specs_) {
      for (std::size_t b = 0; b < s.branch_count(); ++b) {
        const auto [ylo, yhi] = s.branch_image(b);
        for (double y : frontier) {
          if (y < ylo || y > yhi) continue;
          const double x = s.branch_inverse(b, y);
          if (x > 0.0 && x < 1.0) next.push_back(x);
        }
      }
    }
    dedup_sorted(next);
    all.insert(all.end(), next.begin(), next.end());
    dedup_sorted(all);
    frontier = std::move(next);
  }
  if (all.size() > max_points) all.resize(max_points);
  return all;
}

bool MapFamily::near_discontinuity(double x, std::size_t max_len, double tol) const {
  std::function<bool(double, std::size_t)> visit = [&](double y, std::size_t depth) {
    for (const auto& s : specs_) {
      const auto& pts = s.branch_points();
      for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        if (std::abs(y - pts[i]) <= tol) return true;
      }
    }
    if (depth + 1 >= max_len) return false;
    for (const auto& s : specs_) {
      if (visit(s(y), depth + 1)) return true;
    }
    return false;
  };
  return max_len > 0 && visit(x, 0);
}

std::vector<double> cocycle_orbit(const MapFamily& family, const OmegaPath& omega, double x,
                                  std::size_t n) {
  omega.require(0, static_cast<std::int64_t>(n));
  std::vector<double> orbit(n + 1);
  orbit[0] = x;
  for (std::size_t j = 0; j < n; ++j) {
    x = family[static_cast<std::size_t>(omega.symbol(static_cast<std::int64_t>(j)))](x);
    orbit[j + 1] = x;
  }
  return orbit;
}

}  // namespace rds
