#pragma once

// Experiment configuration: a flat "key = value" text format with '#'
// comments. Keys are order-insensitive; unknown keys are rejected.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rds/intervals.hpp"
#include "rds/pointprocess.hpp"

namespace rds {

enum class Mode { Stable, Functional, Poisson, Hitting, Annealed, TransferReport, Karamata };

const char* to_string(Mode m) noexcept;
Mode parse_mode(const std::string& text);

struct Tolerances {
  double ks = 0.05;             // dynamical vs iid oracle
  double marginal_ks = 0.06;    // functional marginals
  double increment_ks = 0.06;   // increment stationarity
  double increment_corr = 0.08; // |rank correlation| of increments
  double annealed_ks = 0.05;    // annealed vs quenched
  double survival = 0.05;       // sup |S_emp - exp(-tau Pi)|
  double mean = 0.1;            // |mean count - target|
  double void_prob = 0.04;
  double tv = 0.05;
  double strip_corr = 0.1;
  double karamata = 0.02;       // relative
  double decay_r2 = 0.98;
  double decay_slope = -2.0;    // LSV log-log slope must not exceed this
};

struct ExperimentConfig {
  Mode mode = Mode::Stable;
  std::vector<std::string> family = {"beta:2.1", "beta:3.3"};
  std::vector<double> probs = {0.5, 0.5};
  double alpha = 0.75;
  std::optional<double> x0 = 0.70710678118654752;  // empty: draw from Lebesgue
  std::size_t n = 10000;
  std::size_t trials = 4000;
  std::vector<double> t_grid = {1.0};
  StartMeasure start_measure = StartMeasure::Fiber;
  std::uint64_t master_seed = 1;
  std::string output_dir;  // empty: no files written
  std::size_t k = 4096;        // stationary density, b, iid oracle
  std::size_t k_fiber = 1024;  // start densities and fiber sums
  std::vector<double> eps_grid;  // empty: default grid
  double trunc_eps = 0.5;
  std::vector<MarkInterval> J = {{1.0, kInf}};
  double s = 0.0;
  double tau_max = 3.0;
  std::size_t tau_points = 301;
  std::vector<std::vector<Rect>> rect_sets;  // empty: default strips
  std::size_t periodicity_depth = 12;
  double periodicity_tol = 1e-9;
  std::size_t discontinuity_depth = 20;
  double cone_a = 2.0;
  std::size_t cone_n_max = 200;
  std::size_t decay_n_max = 24;
  std::size_t pullback_n_max = 60;
  std::int64_t omega_lo = 0;  // minimum materialized window
  std::int64_t omega_hi = 0;
  std::size_t omega_replicas = 2;  // stable mode: independent omegas
  bool lebesgue_density = false;   // karamata: use h = 1 instead of the Ulam density
  std::string transfer_report = "all";  // all | stationary | pullback | decay | cone
  std::size_t decay_fit_from = 4;  // skips the transient, ends before Ulam truncation
  Tolerances tol;

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

/// Applies one "key = value" assignment. Throws ConfigError on unknown keys
/// or unparsable values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// The canonical "key = value" form of every setting, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);

/// Rectangles (0,1] x (1,inf); (0,1/2] x (1,inf); (1/2,1] x (1,inf).
std::vector<std::vector<Rect>> default_rect_sets();

}  // namespace rds
