#include "rds/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rds/driving.hpp"
#include "rds/error.hpp"
#include "rds/parallel.hpp"
#include "rds/stats.hpp"

namespace rds {

namespace {

constexpr double kPoleRadius = 1e-15;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MapFamily make_family(const ExperimentConfig& cfg) {
  std::vector<MapSpec> specs;
  for (const auto& s : cfg.family) specs.push_back(parse_map_spec(s));
  return MapFamily(std::move(specs));
}

std::vector<double> eps_grid_of(const ExperimentConfig& cfg) {
  return cfg.eps_grid.empty() ? default_eps_grid() : cfg.eps_grid;
}

std::string omega_prefix(const OmegaPath& omega, std::size_t count) {
  std::string out;
  for (int s : omega.prefix(count)) out += std::to_string(s);
  return out;
}

ExperimentReport new_report(const ExperimentConfig& cfg, Mode mode) {
  ExperimentReport rep(to_string(mode));
  rep.set_config(config_entries(cfg));
  return rep;
}

/// x0, b, c_n and the x0 checks.
void describe_system(const System& sys, const ExperimentConfig& cfg, ExperimentReport& rep) {
  Json& info = rep.info();
  info["family"] = sys.family.name();
  info["x0"] = json_number(sys.x0);
  info["x0_drawn"] = sys.x0_drawn;
  info["b"] = json_number(sys.b.value);
  info["b_relative_spread"] = json_number(sys.b.relative_spread);
  info["b_n"] = json_number(sys.bn);
  info["c_n"] = json_number(sys.cn);
  info["stationary_residual"] = json_number(sys.stationary.residual);
  info["fiber_depth"] = sys.fiber_depth;

  const auto verdict = periodicity_probe(sys.family, sys.x0, cfg.periodicity_depth,
                                         cfg.periodicity_tol);
  info["x0_periodic"] = verdict.periodic;
  info["x0_closest_return"] = json_number(verdict.distance);
  const bool near_disc =
      sys.family.near_discontinuity(sys.x0, cfg.discontinuity_depth, cfg.periodicity_tol);
  info["x0_near_discontinuity"] = near_disc;
  if (sys.family.all_beta() && !sys.x0_drawn) {
    // the expanding theorems need a non-periodic x0 off the discontinuity set
    rep.add(Statistic::at_most("x0_periodic", verdict.periodic ? 1.0 : 0.0, 0.0));
    rep.add(Statistic::at_most("x0_near_discontinuity", near_disc ? 1.0 : 0.0, 0.0));
  }
  if (cfg.alpha < 1.0) {
    rep.add(Statistic::at_most("c_n_abs", std::abs(sys.cn), 0.0));
  } else {
    rep.add(Statistic::info("c_n", sys.cn));
  }
}

void add_sample_tail_fit(ExperimentReport& rep, const std::string& prefix,
                         std::span<const double> values, double alpha) {
  std::vector<double> lx, ly;
  for (double lambda = 2.0; lambda <= 64.0; lambda *= 2.0) {
    const auto above = std::count_if(values.begin(), values.end(),
                                     [lambda](double v) { return v > lambda; });
    if (above < 10) break;
    lx.push_back(std::log(lambda));
    ly.push_back(std::log(static_cast<double>(above) / static_cast<double>(values.size())));
  }
  if (lx.size() >= 2) {
    const auto fit = linear_fit(lx, ly);
    rep.add(Statistic::info(prefix + "tail_slope", fit.slope));
    rep.info()[prefix + "tail_slope_target"] = json_number(-alpha);
  }
}

/// KS distance, NaN (a failing statistic) when every draw of a side hit the pole.
double ks_or_nan(const SampleSet& a, const SampleSet& b) {
  if (a.values.empty() || b.values.empty()) return kNaN;
  return ks_two_sample(a, b);
}

CsvTable sample_table(const std::vector<std::string>& names,
                      const std::vector<const std::vector<double>*>& columns) {
  std::vector<std::string> header = {"trial"};
  header.insert(header.end(), names.begin(), names.end());
  CsvTable table(header);
  const std::size_t rows = columns.empty() ? 0 : columns.front()->size();
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<std::string> cells = {std::to_string(i)};
    for (const auto* c : columns) cells.push_back(format_double((*c)[i]));
    table.add_row(std::move(cells));
  }
  return table;
}

TrialSetup trial_setup(const System& sys, const ExperimentConfig& cfg, OmegaPath omega,
                       std::uint64_t seed) {
  return TrialSetup{.family = &sys.family,
                    .fiber_ops = &sys.fiber_ops,
                    .omega = std::move(omega),
                    .tail = sys.tail,
                    .n = cfg.n,
                    .trials = cfg.trials,
                    .start = cfg.start_measure,
                    .fiber_depth = sys.fiber_depth,
                    .seed = seed,
                    .threads = default_thread_count()};
}

/// Accumulates X_n(t_i) along one orbit; returns false on a pole hit.
bool birkhoff_marginals(const System& sys, const OmegaPath& omega, double x,
                        std::span<const std::size_t> steps, std::span<const double> t_grid,
                        std::span<double> out) {
  const double inv_alpha = -1.0 / sys.tail.alpha();
  const double x0 = sys.x0;
  const std::size_t total = steps.back();
  double acc = 0.0;
  std::size_t next = 0;
  for (std::size_t j = 0; j <= total; ++j) {
    while (next < steps.size() && steps[next] == j) {
      out[next] = acc / sys.bn - t_grid[next] * sys.cn;
      ++next;
    }
    if (j == total) break;
    const double d = std::abs(x - x0);
    if (d < kPoleRadius) return false;
    acc += std::pow(d, inv_alpha);
    x = sys.family[static_cast<std::size_t>(omega.symbol(static_cast<std::int64_t>(j)))](x);
  }
  return true;
}

}  // namespace

double draw_x0(std::uint64_t master_seed) {
  return to_unit(hash_index(derive_seed(master_seed, "x0"), 0));
}

std::size_t steps_for(std::size_t n, double t) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * t));
}

System build_system(const ExperimentConfig& cfg) {
  cfg.validate();
  MapFamily family = make_family(cfg);
  ProbabilityVector probs(cfg.probs);
  FamilyOperators ops(family, cfg.k);
  FamilyOperators fiber_ops(family, cfg.k_fiber);
  const UlamOperator annealed = annealed_operator(ops, probs);
  StationaryResult stationary = stationary_density(annealed, 1e-12);
  const bool drawn = !cfg.x0.has_value();
  const double x0 = drawn ? draw_x0(cfg.master_seed) : *cfg.x0;
  const auto grid = eps_grid_of(cfg);
  LocalDensityEstimate b = estimate_local_density(stationary.density, x0, grid);
  if (!(b.value > 0.0)) throw ConvergenceError("local density constant b is not positive");
  TailModel tail(cfg.alpha, x0, b.value);
  const double bn = tail.scaling_bn(static_cast<double>(cfg.n));
  const double cn = centering_cn(cfg.n, tail, MomentSource::from_density(tail, stationary.density));
  const std::size_t depth = pullback_depth(family, cfg.n);
  return System{std::move(family), std::move(probs), std::move(ops), std::move(fiber_ops),
                std::move(stationary), x0, drawn, std::move(b), tail, bn, cn, depth};
}

OmegaPath quenched_omega(const System& sys, const ExperimentConfig& cfg, std::size_t replica) {
  std::size_t horizon = steps_for(cfg.n, std::max(1.0, cfg.t_grid.back()));
  const auto lo = std::min<std::int64_t>(cfg.omega_lo, -static_cast<std::int64_t>(sys.fiber_depth));
  const auto hi = std::max<std::int64_t>(cfg.omega_hi, static_cast<std::int64_t>(horizon) + 1);
  return OmegaPath::sample(sys.probs, derive_seed(cfg.master_seed, "omega", replica), lo, hi);
}

std::uint64_t replica_seed(const ExperimentConfig& cfg, std::size_t replica) {
  return replica == 0 ? cfg.master_seed : derive_seed(cfg.master_seed, "replica", replica);
}

std::vector<std::vector<double>> quenched_marginals(const System& sys, const ExperimentConfig& cfg,
                                                    const OmegaPath& omega,
                                                    std::span<const double> t_grid,
                                                    std::uint64_t start_seed) {
  std::vector<std::size_t> steps;
  for (double t : t_grid) steps.push_back(steps_for(cfg.n, t));
  omega.require(-static_cast<std::int64_t>(sys.fiber_depth), static_cast<std::int64_t>(steps.back()));
  const TrialSetup setup = trial_setup(sys, cfg, omega, start_seed);
  const StartSampler start(setup, 0);
  std::vector<std::vector<double>> out(t_grid.size(), std::vector<double>(cfg.trials));
  parallel_for(cfg.trials, setup.threads, [&](std::size_t trial) {
    std::vector<double> row(t_grid.size());
    const bool ok = birkhoff_marginals(sys, omega, start(trial), steps, t_grid, row);
    for (std::size_t i = 0; i < t_grid.size(); ++i) out[i][trial] = ok ? row[i] : kNaN;
  });
  return out;
}

std::vector<double> annealed_sums(const System& sys, const ExperimentConfig& cfg) {
  const std::size_t steps = steps_for(cfg.n, 1.0);
  const double t_one[] = {1.0};
  const std::size_t step_list[] = {steps};
  const auto depth = static_cast<std::int64_t>(sys.fiber_depth);
  std::vector<double> out(cfg.trials);
  parallel_for(cfg.trials, default_thread_count(), [&](std::size_t trial) {
    // a fresh omega per trial; with one map this coincides with the quenched path
    const OmegaPath omega = OmegaPath::sample(
        sys.probs, derive_seed(cfg.master_seed, "annealed-omega", trial), -depth,
        static_cast<std::int64_t>(steps) + 1);
    TrialSetup setup = trial_setup(sys, cfg, omega, cfg.master_seed);
    setup.trials = 1;
    const StartSampler start(setup, 0);
    double value = 0.0;
    const bool ok = birkhoff_marginals(sys, omega, start(trial), step_list, t_one, {&value, 1});
    out[trial] = ok ? value : kNaN;
  });
  return out;
}

SampleSet oracle_for(const System& sys, const ExperimentConfig& cfg, double t) {
  const std::size_t terms = steps_for(cfg.n, t);
  return iid_oracle(sys.tail, sys.stationary.density, terms, cfg.trials,
                    derive_seed(cfg.master_seed, "iid", terms), sys.bn, t * sys.cn,
                    default_thread_count());
}

SampleSet finite_samples(std::span<const double> v, std::uint64_t seed) {
  SampleSet s;
  s.provenance = Provenance::Dynamical;
  s.seed = seed;
  for (double x : v) {
    if (std::isfinite(x)) {
      s.values.push_back(x);
    } else {
      ++s.excluded;
    }
  }
  return s;
}

ExperimentReport run_quenched_stable(const ExperimentConfig& cfg) {
  const System sys = build_system(cfg);
  ExperimentReport rep = new_report(cfg, Mode::Stable);
  describe_system(sys, cfg, rep);
  const double t_one[] = {1.0};
  const SampleSet oracle = oracle_for(sys, cfg, 1.0);
  rep.info()["oracle_excluded"] = oracle.excluded;

  std::vector<std::vector<double>> columns;
  std::vector<std::string> names;
  Json omegas = Json::array();
  for (std::size_t r = 0; r < cfg.omega_replicas; ++r) {
    const OmegaPath omega = quenched_omega(sys, cfg, r);
    auto marg = quenched_marginals(sys, cfg, omega, t_one, replica_seed(cfg, r));
    const SampleSet dyn = finite_samples(marg[0], replica_seed(cfg, r));
    const std::string tag = "omega" + std::to_string(r);
    Json o;
    o["seed"] = omega.seed();
    o["prefix"] = omega_prefix(omega, 64);
    o["pole_hits"] = dyn.excluded;
    omegas.push_back(o);
    rep.add(Statistic::at_most("ks_vs_iid_" + tag, ks_or_nan(dyn, oracle), cfg.tol.ks));
    add_sample_tail_fit(rep, tag + "_", dyn.values, cfg.alpha);
    names.push_back(tag);
    columns.push_back(std::move(marg[0]));
  }
  rep.info()["omegas"] = omegas;
  add_sample_tail_fit(rep, "oracle_", oracle.values, cfg.alpha);

  std::vector<const std::vector<double>*> ptrs;
  for (const auto& c : columns) ptrs.push_back(&c);
  rep.add_table("samples.csv", sample_table(names, ptrs));
  rep.add_table("oracle.csv", sample_table({"iid_oracle"}, {&oracle.values}));
  return rep;
}

ExperimentReport run_functional_marginals(const ExperimentConfig& cfg) {
  const System sys = build_system(cfg);
  ExperimentReport rep = new_report(cfg, Mode::Functional);
  describe_system(sys, cfg, rep);
  const OmegaPath omega = quenched_omega(sys, cfg, 0);
  rep.info()["omega_prefix"] = omega_prefix(omega, 64);
  const auto& grid = cfg.t_grid;
  const auto marg = quenched_marginals(sys, cfg, omega, grid, replica_seed(cfg, 0));

  std::vector<std::string> names;
  std::vector<const std::vector<double>*> ptrs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::string tag = "t=" + format_double(grid[i]);
    const SampleSet dyn = finite_samples(marg[i], cfg.master_seed);
    const SampleSet oracle = oracle_for(sys, cfg, grid[i]);
    rep.add(Statistic::at_most("marginal_ks_" + tag, ks_or_nan(dyn, oracle),
                               cfg.tol.marginal_ks));
    names.push_back("X(" + format_double(grid[i]) + ")");
    ptrs.push_back(&marg[i]);
  }

  // increments between consecutive grid times; X(0) = 0
  std::vector<std::vector<double>> inc(grid.size(), std::vector<double>(cfg.trials));
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      inc[i][trial] = marg[i][trial] - (i ? marg[i - 1][trial] : 0.0);
    }
  }
  // stationarity: X(t_b) - X(t_a) against X(t_b - t_a) whenever that time is on the grid
  for (std::size_t b = 1; b < grid.size(); ++b) {
    const double gap = grid[b] - grid[b - 1];
    for (std::size_t c = 0; c < grid.size(); ++c) {
      if (std::abs(grid[c] - gap) > 1e-12) continue;
      const SampleSet lhs = finite_samples(inc[b], cfg.master_seed);
      const SampleSet rhs = finite_samples(marg[c], cfg.master_seed);
      rep.add(Statistic::at_most("increment_ks_" + format_double(grid[b - 1]) + "_" +
                                     format_double(grid[b]),
                                 ks_or_nan(lhs, rhs), cfg.tol.increment_ks));
    }
  }
  // independence: rank correlation of adjacent increments over finite trials
  for (std::size_t b = 1; b < grid.size(); ++b) {
    std::vector<double> u, v;
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      if (std::isfinite(inc[b - 1][trial]) && std::isfinite(inc[b][trial])) {
        u.push_back(inc[b - 1][trial]);
        v.push_back(inc[b][trial]);
      }
    }
    if (u.size() >= 3) {
      rep.add(Statistic::at_most("increment_rank_corr_" + format_double(grid[b]),
                                 std::abs(spearman(u, v)), cfg.tol.increment_corr));
    }
  }
  rep.add_table("marginals.csv", sample_table(names, ptrs));
  return rep;
}

ExperimentReport run_annealed(const ExperimentConfig& cfg) {
  const System sys = build_system(cfg);
  ExperimentReport rep = new_report(cfg, Mode::Annealed);
  describe_system(sys, cfg, rep);
  const double t_one[] = {1.0};
  const std::vector<double> annealed = annealed_sums(sys, cfg);
  const OmegaPath omega = quenched_omega(sys, cfg, 0);
  rep.info()["quenched_omega_prefix"] = omega_prefix(omega, 64);
  const auto quenched = quenched_marginals(sys, cfg, omega, t_one, replica_seed(cfg, 0));
  const SampleSet a = finite_samples(annealed, cfg.master_seed);
  const SampleSet q = finite_samples(quenched[0], cfg.master_seed);
  const SampleSet oracle = oracle_for(sys, cfg, 1.0);
  rep.info()["annealed_pole_hits"] = a.excluded;
  rep.add(Statistic::at_most("ks_annealed_vs_quenched", ks_or_nan(a, q), cfg.tol.annealed_ks));
  rep.add(Statistic::at_most("ks_annealed_vs_iid", ks_or_nan(a, oracle), cfg.tol.ks));
  add_sample_tail_fit(rep, "annealed_", a.values, cfg.alpha);
  rep.add_table("samples.csv", sample_table({"annealed", "quenched"}, {&annealed, &quenched[0]}));
  return rep;
}

ExperimentReport run_hitting(const ExperimentConfig& cfg) {
  const System sys = build_system(cfg);
  ExperimentReport rep = new_report(cfg, Mode::Hitting);
  describe_system(sys, cfg, rep);
  const OmegaPath omega = quenched_omega(sys, cfg, 0);
  rep.info()["omega_prefix"] = omega_prefix(omega, 64);
  const TrialSetup setup = trial_setup(sys, cfg, omega, cfg.master_seed);
  const IntervalUnion marks(cfg.J);
  const auto res = exponential_law_experiment(setup, marks, cfg.s, cfg.tau_max, cfg.tau_points);
  // the target must be exactly the Levy measure of J
  rep.add(Statistic::within("target_mass", res.target_mass, sys.tail.levy_measure(marks), 0.0));
  rep.add(Statistic::at_most("survival_sup_distance", res.sup_distance, cfg.tol.survival));
  rep.add(Statistic::info("censored", static_cast<double>(res.censored)));
  rep.add(Statistic::info("censor_rate",
                          static_cast<double>(res.censored) / static_cast<double>(cfg.trials)));
  rep.info()["cap"] = res.cap;
  rep.info()["target_lebesgue"] = json_number(res.target_lebesgue);
  CsvTable curve({"tau", "empirical", "target"});
  for (std::size_t i = 0; i < res.tau.size(); ++i) {
    curve.add_numbers({res.tau[i], res.empirical[i], res.target[i]});
  }
  rep.add_table("survival.csv", std::move(curve));
  return rep;
}

ExperimentReport run_poisson(const ExperimentConfig& cfg) {
  const System sys = build_system(cfg);
  ExperimentReport rep = new_report(cfg, Mode::Poisson);
  describe_system(sys, cfg, rep);
  const OmegaPath omega = quenched_omega(sys, cfg, 0);
  rep.info()["omega_prefix"] = omega_prefix(omega, 64);
  const auto sets = cfg.rect_sets.empty() ? default_rect_sets() : cfg.rect_sets;
  const TrialSetup setup = trial_setup(sys, cfg, omega, cfg.master_seed);
  const auto res = poisson_experiment(setup, sets);
  // the multi-strip statements are only claimed for uniformly expanding families
  const bool full = sys.family.all_beta();
  rep.info()["pole_points"] = res.pole_points;
  rep.info()["multi_strip_checks"] = full;

  CsvTable hist({"set", "count", "freq", "poisson_pmf"});
  for (std::size_t k = 0; k < res.sets.size(); ++k) {
    const auto& st = res.sets[k];
    const std::string tag = "set" + std::to_string(k);
    const bool checked = k == 0 || full;
    if (checked) {
      rep.add(Statistic::within(tag + "_mean", st.mean, st.target_mean, cfg.tol.mean));
    } else {
      rep.add(Statistic::info(tag + "_mean", st.mean));
    }
    if (checked && full) {
      rep.add(Statistic::within(tag + "_void", st.void_probability, st.target_void,
                                cfg.tol.void_prob));
      rep.add(Statistic::at_most(tag + "_tv", st.total_variation, cfg.tol.tv));
    } else {
      rep.add(Statistic::info(tag + "_void", st.void_probability));
      rep.add(Statistic::info(tag + "_tv", st.total_variation));
    }
    rep.info()[tag + "_target_mean"] = json_number(st.target_mean);
    std::size_t max_count = 0;
    for (auto c : st.counts) max_count = std::max(max_count, c);
    std::vector<std::size_t> freq(max_count + 1, 0);
    for (auto c : st.counts) ++freq[c];
    for (std::size_t c = 0; c <= max_count; ++c) {
      hist.add_row({std::to_string(k), std::to_string(c),
                    format_double(static_cast<double>(freq[c]) / static_cast<double>(cfg.trials)),
                    format_double(poisson_pmf(c, st.target_mean))});
    }
  }
  // correlations between pairwise disjoint strips
  std::size_t pair = 0;
  for (std::size_t a = 0; a < sets.size(); ++a) {
    for (std::size_t b = a + 1; b < sets.size(); ++b, ++pair) {
      bool disjoint = true;
      for (const auto& ra : sets[a]) {
        for (const auto& rb : sets[b]) {
          if (ra.s < rb.t && rb.s < ra.t && ra.marks.overlaps(rb.marks)) disjoint = false;
        }
      }
      if (!disjoint) continue;
      const std::string name = "rank_corr_set" + std::to_string(a) + "_set" + std::to_string(b);
      const double corr = std::abs(res.rank_correlations[pair]);
      if (full) {
        rep.add(Statistic::at_most(name, corr, cfg.tol.strip_corr));
      } else {
        rep.add(Statistic::info(name, corr));
      }
    }
  }
  rep.add_table("counts.csv", std::move(hist));
  return rep;
}

ExperimentReport run_transfer_report(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport rep = new_report(cfg, Mode::TransferReport);
  const MapFamily family = make_family(cfg);
  const ProbabilityVector probs(cfg.probs);
  const FamilyOperators ops(family, cfg.k);
  const UlamOperator annealed = annealed_operator(ops, probs);
  const auto& what = cfg.transfer_report;
  const bool all = what == "all";
  rep.info()["family"] = family.name();

  double row_err = annealed.max_row_sum_error();
  for (const auto& op : ops.operators()) row_err = std::max(row_err, op.max_row_sum_error());
  rep.add(Statistic::at_most("max_row_sum_error", row_err, 1e-10));

  const StationaryResult st = stationary_density(annealed, 1e-12);
  if (all || what == "stationary") {
    rep.add(Statistic::info("stationary_residual", st.residual));
    const auto v = st.density.values();
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    rep.add(Statistic::info("density_min", lo));
    rep.add(Statistic::info("density_max", hi));
    rep.add(Statistic::info("density_bound_C", std::max(hi, 1.0 / lo)));
    rep.add(Statistic::info("comparability_C_0.1", comparability_constant(st.density, 0.1)));
    CsvTable table({"cell_index", "x_mid", "density"});
    for (std::size_t i = 0; i < st.density.size(); ++i) {
      table.add_row({std::to_string(i), format_double(st.density.midpoint(i)),
                     format_double(st.density[i])});
    }
    rep.add_table("stationary.csv", std::move(table));
  }

  const FamilyOperators fiber_ops(family, cfg.k_fiber);
  const std::size_t n_max = std::max(cfg.pullback_n_max, cfg.cone_n_max);
  const OmegaPath omega = OmegaPath::sample(
      probs, derive_seed(cfg.master_seed, "omega", 0),
      std::min<std::int64_t>(cfg.omega_lo, -static_cast<std::int64_t>(n_max) - 10), 1);
  rep.info()["omega_seed"] = omega.seed();

  if (all || what == "pullback") {
    // ||h_n - h_{n+5}|| from the running pullback h_{n+j} = h_n pushed from further back
    const std::size_t span = 5;
    const std::size_t n_top = cfg.pullback_n_max;
    std::vector<DensityVector> h;
    h.reserve(n_top + span + 1);
    for (std::size_t n = 0; n <= n_top + span; ++n) h.push_back(pullback_density(fiber_ops, omega, n));
    CsvTable table({"n", "l1_diff"});
    std::vector<double> xs, ys;
    std::size_t increases = 0;
    double prev = kInf;
    for (std::size_t n = 1; n <= n_top; ++n) {
      const double d = h[n].l1_distance(h[n + span]);
      table.add_numbers({static_cast<double>(n), d});
      if (d > 1e-13) {
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(d));
      }
      if (d > 1.1 * prev && d > 1e-13) ++increases;
      prev = d;
    }
    rep.add_table("pullback.csv", std::move(table));
    rep.add(Statistic::info("pullback_cauchy_increases", static_cast<double>(increases)));
    if (xs.size() >= 3) {
      const auto fit = linear_fit(xs, ys);
      if (family.all_beta()) {
        rep.add(Statistic::at_most("pullback_geometric_ratio", std::exp(fit.slope), 1.0 - 1e-12));
        rep.add(Statistic::at_least("pullback_fit_r2", fit.r2, cfg.tol.decay_r2));
      } else {
        rep.add(Statistic::info("pullback_geometric_ratio", std::exp(fit.slope)));
        rep.add(Statistic::info("pullback_fit_r2", fit.r2));
      }
      rep.info()["pullback_fit_points"] = fit.points;
    }
  }

  if ((all || what == "cone") && family.all_lsv()) {
    const double g = family.gamma_max();
    std::size_t failures = 0;
    double worst = 0.0;
    CsvTable table({"n", "in_cone", "worst_bound_ratio"});
    for (std::size_t n = 0; n <= cfg.cone_n_max; ++n) {
      const auto report = cone_check(pullback_density(fiber_ops, omega, n), g, cfg.cone_a);
      if (!report.in_cone) ++failures;
      worst = std::max(worst, report.worst_bound_ratio);
      table.add_numbers({static_cast<double>(n), report.in_cone ? 1.0 : 0.0,
                         report.worst_bound_ratio});
    }
    rep.add(Statistic::at_most("cone_failures", static_cast<double>(failures), 0.0));
    rep.add(Statistic::info("cone_worst_bound_ratio", worst));
    rep.info()["cone_a"] = json_number(cfg.cone_a);
    rep.add_table("cone.csv", std::move(table));
  }

  if (all || what == "decay") {
    // f = x (Lipschitz), g = indicator of [0, 1/2]
    const std::size_t k = cfg.k;
    std::vector<double> f(k), gv(k);
    for (std::size_t i = 0; i < k; ++i) {
      f[i] = st.density.midpoint(i);
      gv[i] = st.density.midpoint(i) < 0.5 ? 1.0 : 0.0;
    }
    const auto decay = decay_estimate(annealed, st.density, f, gv, cfg.decay_n_max,
                                      cfg.decay_fit_from);
    CsvTable table({"n", "correlation"});
    for (std::size_t i = 0; i < decay.correlations.size(); ++i) {
      table.add_numbers({static_cast<double>(i + 1), decay.correlations[i]});
    }
    rep.add_table("decay.csv", std::move(table));
    if (family.all_beta()) {
      rep.add(Statistic::at_most("decay_geometric_ratio", decay.geometric_ratio, 1.0 - 1e-12));
      rep.add(Statistic::info("decay_geometric_r2", decay.geometric.r2));
    } else if (family.all_lsv()) {
      rep.add(Statistic::at_most("decay_loglog_slope", decay.power.slope, cfg.tol.decay_slope));
      rep.add(Statistic::info("decay_loglog_r2", decay.power.r2));
      rep.info()["decay_slope_target"] = json_number(1.0 - 1.0 / family.gamma_min());
    }
  }
  return rep;
}

ExperimentReport run_karamata(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport rep = new_report(cfg, Mode::Karamata);
  const double x0 = cfg.x0 ? *cfg.x0 : draw_x0(cfg.master_seed);
  DensityVector h;
  if (cfg.lebesgue_density) {
    h = DensityVector::constant(cfg.k);
  } else {
    const MapFamily family = make_family(cfg);
    h = stationary_density(annealed_operator(family, ProbabilityVector(cfg.probs), cfg.k), 1e-12)
            .density;
  }
  const auto grid = eps_grid_of(cfg);
  const auto b = estimate_local_density(h, x0, grid);
  const TailModel tail(cfg.alpha, x0, b.value);
  rep.info()["x0"] = json_number(x0);
  rep.info()["b"] = json_number(b.value);
  rep.info()["lebesgue_density"] = cfg.lebesgue_density;

  const auto kr = karamata_ratio_check(tail, cfg.trunc_eps, cfg.n, h);
  rep.add(Statistic::within("second_moment_ratio_rel_error",
                            kr.second_observed / kr.second_target - 1.0, 0.0, cfg.tol.karamata));
  rep.info()["second_observed"] = json_number(kr.second_observed);
  rep.info()["second_target"] = json_number(kr.second_target);
  if (kr.first_observed) {
    rep.add(Statistic::within("first_moment_ratio_rel_error",
                              *kr.first_observed / *kr.first_target - 1.0, 0.0,
                              cfg.tol.karamata));
    rep.info()["first_observed"] = json_number(*kr.first_observed);
    rep.info()["first_target"] = json_number(*kr.first_target);
  }
  rep.info()["threshold"] = json_number(kr.threshold);

  CsvTable table({"n", "b_n", "c_n", "second_observed", "second_target", "first_observed",
                  "first_target"});
  const auto moments = MomentSource::from_density(tail, h);
  for (std::size_t n = 100; n <= cfg.n; n *= 10) {
    const auto r = karamata_ratio_check(tail, cfg.trunc_eps, n, h);
    table.add_numbers({static_cast<double>(n), tail.scaling_bn(static_cast<double>(n)),
                       centering_cn(n, tail, moments), r.second_observed, r.second_target,
                       r.first_observed.value_or(kNaN), r.first_target.value_or(kNaN)});
  }
  rep.add_table("karamata.csv", std::move(table));
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case Mode::Stable: return run_quenched_stable(cfg);
    case Mode::Functional: return run_functional_marginals(cfg);
    case Mode::Poisson: return run_poisson(cfg);
    case Mode::Hitting: return run_hitting(cfg);
    case Mode::Annealed: return run_annealed(cfg);
    case Mode::TransferReport: return run_transfer_report(cfg);
    case Mode::Karamata: return run_karamata(cfg);
  }
  throw ConfigError("unknown mode");
}

}  // namespace rds
