#include "rds/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "rds/error.hpp"
#include "rds/maps.hpp"
#include "rds/report.hpp"

namespace rds {

const char* to_string(Mode m) noexcept {
  switch (m) {
    case Mode::Stable: return "stable";
    case Mode::Functional: return "functional";
    case Mode::Poisson: return "poisson";
    case Mode::Hitting: return "hitting";
    case Mode::Annealed: return "annealed";
    case Mode::TransferReport: return "transfer-report";
    case Mode::Karamata: return "karamata";
  }
  return "unknown";
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::Stable, Mode::Functional, Mode::Poisson, Mode::Hitting, Mode::Annealed,
                 Mode::TransferReport, Mode::Karamata}) {
    if (text == to_string(m)) return m;
  }
  if (text == "transfer") return Mode::TransferReport;
  throw ConfigError("unknown mode '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': cannot parse number '" + t + "'");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int v{};
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec == std::errc() && res.ptr == t.data() + t.size()) return v;
  // accept integral values written as 1e4 or 2e4
  const double d = parse_double(key, t);
  if (std::floor(d) == d && std::abs(d) < 9e15) {
    if constexpr (std::is_unsigned_v<Int>) {
      if (d < 0) throw ConfigError("key '" + key + "' must be nonnegative");
    }
    return static_cast<Int>(d);
  }
  throw ConfigError("key '" + key + "': expected an integer, got '" + t + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

MarkInterval parse_mark(const std::string& key, const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ConfigError("key '" + key + "': mark interval must be lo:hi");
  return {parse_double(key, parts[0]), parse_double(key, parts[1])};
}

std::string mark_text(const MarkInterval& m) {
  return format_double(m.lo) + ":" + (m.hi == kInf ? std::string("inf") : format_double(m.hi));
}

std::vector<MarkInterval> parse_marks(const std::string& key, const std::string& text) {
  std::vector<MarkInterval> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_mark(key, item));
  // validates disjointness and distance from 0
  try {
    IntervalUnion check(out);
  } catch (const Error& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
  return out;
}

std::vector<std::vector<Rect>> parse_rect_sets(const std::string& key, const std::string& text) {
  std::vector<std::vector<Rect>> sets;
  for (const auto& set_text : split(text, ';')) {
    std::vector<Rect> set;
    for (const auto& rect_text : split(set_text, '+')) {
      const auto f = split(rect_text, ':');
      if (f.size() != 4) throw ConfigError("key '" + key + "': rectangle must be s:t:lo:hi");
      try {
        set.push_back(Rect{parse_double(key, f[0]), parse_double(key, f[1]),
                           IntervalUnion({{parse_double(key, f[2]), parse_double(key, f[3])}})});
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError("key '" + key + "': " + e.what());
      }
    }
    if (!set.empty()) sets.push_back(std::move(set));
  }
  return sets;
}

std::string rect_sets_text(const std::vector<std::vector<Rect>>& sets) {
  std::string out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (i) out += "; ";
    for (std::size_t j = 0; j < sets[i].size(); ++j) {
      const auto& r = sets[i][j];
      if (j) out += " + ";
      out += format_double(r.s) + ":" + format_double(r.t) + ":" + mark_text(r.marks.parts().front());
    }
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  const char* key;
  Setter set;
  Getter get;
};

template <class T>
Field int_field(const char* key, T ExperimentConfig::*member) {
  return {key,
          [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_int<T>(k, v);
          },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(const char* key, double ExperimentConfig::*member) {
  return {key,
          [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_double(k, v);
          },
          [member](const ExperimentConfig& c) { return format_double(c.*member); }};
}

Field tol_field(const char* key, double Tolerances::*member) {
  return {key,
          [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.tol.*member = parse_double(k, v);
          },
          [member](const ExperimentConfig& c) { return format_double(c.tol.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"mode", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.mode = parse_mode(trim(v)); },
       [](const ExperimentConfig& c) { return std::string(to_string(c.mode)); }},
      {"family",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         auto specs = split(v, ',');
         if (specs.empty()) throw ConfigError("key '" + k + "' needs at least one map");
         for (const auto& s : specs) {
           try {
             (void)parse_map_spec(s);
           } catch (const Error& e) {
             throw ConfigError("key '" + k + "': " + e.what());
           }
         }
         c.family = specs;
       },
       [](const ExperimentConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.family.size(); ++i) out += (i ? ", " : "") + c.family[i];
         return out;
       }},
      {"probs", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.probs = parse_list(k, v); },
       [](const ExperimentConfig& c) { return join(c.probs); }},
      double_field("alpha", &ExperimentConfig::alpha),
      {"x0",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (trim(v) == "draw-lebesgue") {
           c.x0.reset();
         } else {
           c.x0 = parse_double(k, v);
         }
       },
       [](const ExperimentConfig& c) { return c.x0 ? format_double(*c.x0) : std::string("draw-lebesgue"); }},
      int_field("n", &ExperimentConfig::n),
      int_field("trials", &ExperimentConfig::trials),
      {"t_grid", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.t_grid = parse_list(k, v); },
       [](const ExperimentConfig& c) { return join(c.t_grid); }},
      {"start_measure",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto t = trim(v);
         if (t == "fiber") {
           c.start_measure = StartMeasure::Fiber;
         } else if (t == "lebesgue") {
           c.start_measure = StartMeasure::Lebesgue;
         } else {
           throw ConfigError("key '" + k + "' must be fiber or lebesgue");
         }
       },
       [](const ExperimentConfig& c) {
         return std::string(c.start_measure == StartMeasure::Fiber ? "fiber" : "lebesgue");
       }},
      int_field("master_seed", &ExperimentConfig::master_seed),
      {"output_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = trim(v); },
       [](const ExperimentConfig& c) { return c.output_dir; }},
      int_field("k", &ExperimentConfig::k),
      int_field("k_fiber", &ExperimentConfig::k_fiber),
      {"eps_grid", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.eps_grid = parse_list(k, v); },
       [](const ExperimentConfig& c) { return join(c.eps_grid); }},
      double_field("trunc_eps", &ExperimentConfig::trunc_eps),
      {"J", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.J = parse_marks(k, v); },
       [](const ExperimentConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.J.size(); ++i) out += (i ? ", " : "") + mark_text(c.J[i]);
         return out;
       }},
      double_field("s", &ExperimentConfig::s),
      double_field("tau_max", &ExperimentConfig::tau_max),
      int_field("tau_points", &ExperimentConfig::tau_points),
      {"rect_sets",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rect_sets = parse_rect_sets(k, v); },
       [](const ExperimentConfig& c) { return rect_sets_text(c.rect_sets); }},
      int_field("periodicity_depth", &ExperimentConfig::periodicity_depth),
      double_field("periodicity_tol", &ExperimentConfig::periodicity_tol),
      int_field("discontinuity_depth", &ExperimentConfig::discontinuity_depth),
      double_field("cone_a", &ExperimentConfig::cone_a),
      int_field("cone_n_max", &ExperimentConfig::cone_n_max),
      int_field("decay_n_max", &ExperimentConfig::decay_n_max),
      int_field("pullback_n_max", &ExperimentConfig::pullback_n_max),
      {"omega_window",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto w = parse_list(k, v);
         if (w.size() != 2) throw ConfigError("key '" + k + "' must be lo, hi");
         c.omega_lo = parse_int<std::int64_t>(k, format_double(w[0]));
         c.omega_hi = parse_int<std::int64_t>(k, format_double(w[1]));
       },
       [](const ExperimentConfig& c) {
         return std::to_string(c.omega_lo) + ", " + std::to_string(c.omega_hi);
       }},
      int_field("omega_replicas", &ExperimentConfig::omega_replicas),
      {"lebesgue_density",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto t = trim(v);
         if (t != "true" && t != "false") throw ConfigError("key '" + k + "' must be true or false");
         c.lebesgue_density = t == "true";
       },
       [](const ExperimentConfig& c) { return std::string(c.lebesgue_density ? "true" : "false"); }},
      {"transfer_report",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto t = trim(v);
         if (t != "all" && t != "stationary" && t != "pullback" && t != "decay" && t != "cone") {
           throw ConfigError("key '" + k + "' must be all, stationary, pullback, decay or cone");
         }
         c.transfer_report = t;
       },
       [](const ExperimentConfig& c) { return c.transfer_report; }},
      int_field("decay_fit_from", &ExperimentConfig::decay_fit_from),
      tol_field("tol_ks", &Tolerances::ks),
      tol_field("tol_marginal_ks", &Tolerances::marginal_ks),
      tol_field("tol_increment_ks", &Tolerances::increment_ks),
      tol_field("tol_increment_corr", &Tolerances::increment_corr),
      tol_field("tol_annealed_ks", &Tolerances::annealed_ks),
      tol_field("tol_survival", &Tolerances::survival),
      tol_field("tol_mean", &Tolerances::mean),
      tol_field("tol_void", &Tolerances::void_prob),
      tol_field("tol_tv", &Tolerances::tv),
      tol_field("tol_strip_corr", &Tolerances::strip_corr),
      tol_field("tol_karamata", &Tolerances::karamata),
      tol_field("tol_decay_r2", &Tolerances::decay_r2),
      tol_field("tol_decay_slope", &Tolerances::decay_slope),
  };
  return table;
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  for (const auto& f : fields()) {
    if (k == f.key) {
      f.set(cfg, k, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + k + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("alpha must lie in (0,2)");
  if (family.empty()) throw ConfigError("family must name at least one map");
  if (probs.size() != family.size()) throw ConfigError("probs must have one entry per map");
  try {
    ProbabilityVector check(probs);
  } catch (const Error& e) {
    throw ConfigError(std::string("probs: ") + e.what());
  }
  if (x0 && !(*x0 >= 0.0 && *x0 <= 1.0)) throw ConfigError("x0 must lie in [0,1]");
  if (t_grid.empty()) throw ConfigError("t_grid must be nonempty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw ConfigError("t_grid must be strictly increasing in (0, l]");
    }
  }
  if (k < 2 || k_fiber < 2) throw ConfigError("k and k_fiber must be >= 2");
  for (double e : eps_grid) {
    if (!(e > 0.0)) throw ConfigError("eps_grid entries must be positive");
  }
  if (!(trunc_eps > 0.0)) throw ConfigError("trunc_eps must be positive");
  if (J.empty()) throw ConfigError("J must be nonempty");
  if (!(s >= 0.0)) throw ConfigError("s must be >= 0");
  if (!(tau_max > 0.0) || tau_points < 2) throw ConfigError("tau grid must be nondegenerate");
  if (periodicity_depth > 20) throw ConfigError("periodicity_depth must be <= 20");
  if (!(cone_a > 0.0)) throw ConfigError("cone_a must be positive");
  if (omega_lo > 0 || (omega_hi != 0 && omega_hi <= 0)) {
    throw ConfigError("omega_window must satisfy lo <= 0 < hi");
  }
  if (omega_replicas < 1) throw ConfigError("omega_replicas must be >= 1");
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

std::vector<std::vector<Rect>> default_rect_sets() {
  return {{Rect{0.0, 1.0, IntervalUnion::above(1.0)}},
          {Rect{0.0, 0.5, IntervalUnion::above(1.0)}},
          {Rect{0.5, 1.0, IntervalUnion::above(1.0)}}};
}

}  // namespace rds
