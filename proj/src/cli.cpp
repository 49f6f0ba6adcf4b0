#include "rds/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "rds/config.hpp"
#include "rds/error.hpp"
#include "rds/experiments.hpp"
#include "rds/report.hpp"
#include "rds/selftest.hpp"
#include "rds/stable.hpp"

namespace rds {

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<std::string> output, family, probs, x0, n, trials, alpha, seed, k, report;
  std::optional<double> p;
  std::optional<std::string> cf_grid;
  std::optional<std::size_t> samples;
  bool quick = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "Experiment config file (key = value lines)");
  sub->add_option("--set", o.settings, "Override one config key, key=value (repeatable)");
  sub->add_option("--output", o.output, "Output directory for CSV and summary.json");
  sub->add_option("--family", o.family, "Maps, e.g. \"beta:2.1, beta:3.3\"");
  sub->add_option("--probs", o.probs, "Map probabilities, e.g. \"0.5, 0.5\"");
  sub->add_option("--alpha", o.alpha, "Stable index in (0,2)");
  sub->add_option("--x0", o.x0, "Pole location or draw-lebesgue");
  sub->add_option("--n", o.n, "Horizon n");
  sub->add_option("--trials", o.trials, "Number of trials");
  sub->add_option("--seed", o.seed, "Master seed");
}

ExperimentConfig build_config(const Options& o, Mode mode) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  cfg.mode = mode;
  auto set = [&cfg](const char* key, const std::optional<std::string>& v) {
    if (v) apply_setting(cfg, key, *v);
  };
  set("output_dir", o.output);
  set("family", o.family);
  set("probs", o.probs);
  set("alpha", o.alpha);
  set("x0", o.x0);
  set("n", o.n);
  set("trials", o.trials);
  set("master_seed", o.seed);
  set("k", o.k);
  set("transfer_report", o.report);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.family && !o.probs && cfg.probs.size() != cfg.family.size()) {
    // uniform weights when only the family was overridden
    cfg.probs.assign(cfg.family.size(), 1.0 / static_cast<double>(cfg.family.size()));
  }
  cfg.validate();
  return cfg;
}

void emit(const ExperimentReport& rep, const ExperimentConfig* cfg, std::ostream& out,
          std::ostream& err) {
  for (const auto& s : rep.statistics()) {
    err << (s.rule == Statistic::Rule::Info ? "INFO " : (s.pass ? "PASS " : "FAIL ")) << s.name
        << " = " << format_double(s.value);
    if (s.rule != Statistic::Rule::Info) {
      err << " (" << to_string(s.rule) << " target " << format_double(s.target) << ", tol "
          << format_double(s.tolerance) << ")";
    }
    err << "\n";
  }
  if (cfg && !cfg->output_dir.empty()) {
    rep.write(cfg->output_dir);
  } else {
    out << rep.summary_text();
  }
}

/// "lo:hi:count" or a comma list.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo = 0, hi = 0;
    std::size_t count = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 2 ||
        !(hi > lo)) {
      throw ConfigError("--cf-grid expects lo:hi:count");
    }
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return out;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--cf-grid: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--cf-grid is empty");
  return out;
}

int run_stable_law(const Options& o, std::ostream& out, std::ostream& err) {
  const double alpha = o.alpha ? std::stod(*o.alpha) : 0.75;
  const StableLaw law(alpha, o.p.value_or(1.0));
  const std::uint64_t seed = o.seed ? std::stoull(*o.seed) : 1;
  ExperimentReport rep("stable-law");
  rep.info()["alpha"] = json_number(law.alpha());
  rep.info()["p"] = json_number(law.p_pos());
  rep.info()["a_alpha"] = json_number(law.a_alpha());
  if (o.cf_grid) {
    CsvTable cf({"t", "re_cf", "im_cf"});
    for (double t : parse_grid(*o.cf_grid)) {
      const auto v = stable_cf(law, t);
      cf.add_numbers({t, v.real(), v.imag()});
    }
    rep.add_table("cf.csv", std::move(cf));
  }
  if (o.samples) {
    const auto grid = default_calibration_grid();
    const auto cms = cms_sampler(law, *o.samples, seed, grid);
    rep.info()["cms_scale"] = json_number(cms.calibration.scale);
    rep.info()["cms_shift"] = json_number(cms.calibration.shift);
    rep.add(Statistic::at_most("cms_calibration_residual", cms.calibration.residual, 1e-6));
    CsvTable dump({"index", "value"});
    for (std::size_t i = 0; i < cms.samples.values.size(); ++i) {
      dump.add_row({std::to_string(i), format_double(cms.samples.values[i])});
    }
    rep.add_table("cms_samples.csv", std::move(dump));
  }
  if (o.output) {
    rep.write(*o.output);
    err << "wrote " << *o.output << "\n";
  } else {
    for (const auto& [name, table] : rep.tables()) out << "# " << name << "\n" << table.str();
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random dynamical systems: stable limits, Poisson and hitting-time laws"};
  app.require_subcommand(1);
  Options o;
  struct Sub {
    const char* name;
    const char* help;
    Mode mode;
  };
  const Sub subs[] = {
      {"stable", "Quenched stable law (or, with --cf-grid/--samples, the law itself)", Mode::Stable},
      {"functional", "Functional-marginal and increment tests", Mode::Functional},
      {"poisson", "Point-process counts on rectangles", Mode::Poisson},
      {"hitting", "Exponential hitting-time law", Mode::Hitting},
      {"annealed", "Annealed stable law against quenched and iid samples", Mode::Annealed},
      {"transfer", "Ulam transfer-operator diagnostics", Mode::TransferReport},
      {"karamata", "Truncated-moment (Karamata) ratios", Mode::Karamata},
  };
  std::vector<std::pair<CLI::App*, Mode>> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, o);
    apps.emplace_back(sub, s.mode);
    if (s.mode == Mode::Stable) {
      sub->add_option("--p", o.p, "Tail balance p in [0,1] (law mode)");
      sub->add_option("--cf-grid", o.cf_grid, "CF grid lo:hi:count or comma list (law mode)");
      sub->add_option("--samples", o.samples, "Number of CMS samples to dump (law mode)");
    }
    if (s.mode == Mode::TransferReport) {
      sub->add_option("--k", o.k, "Ulam grid resolution");
      sub->add_option("--report", o.report, "all, stationary, pullback, decay or cone");
    }
  }
  CLI::App* selftest = app.add_subcommand("selftest", "Analytic invariants suite");
  selftest->add_flag("--quick", o.quick, "Skip the slower checks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    if (selftest->parsed()) {
      const auto rep = run_selftest(o.quick);
      emit(rep, nullptr, out, err);
      return rep.all_pass() ? 0 : 3;
    }
    for (const auto& [sub, mode] : apps) {
      if (!sub->parsed()) continue;
      if (mode == Mode::Stable && (o.cf_grid || o.samples)) return run_stable_law(o, out, err);
      const ExperimentConfig cfg = build_config(o, mode);
      const auto rep = run_experiment(cfg);
      emit(rep, &cfg, out, err);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      // runtime stays out of the outputs so they remain byte-identical across runs
      err << "runtime_seconds = " << secs << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace rds
