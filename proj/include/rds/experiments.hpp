#pragma once

// Experiment runners behind the CLI subcommands. Each returns a report whose
// statistics carry their own targets and tolerances.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rds/config.hpp"
#include "rds/maps.hpp"
#include "rds/pointprocess.hpp"
#include "rds/report.hpp"
#include "rds/stable.hpp"
#include "rds/tailmodel.hpp"
#include "rds/transfer.hpp"

namespace rds {

/// Everything an experiment derives from the map family before any trial:
/// operators, the stationary density, x0, the constant b and the tail model.
struct System {
  MapFamily family;
  ProbabilityVector probs;
  FamilyOperators ops;        // resolution k
  FamilyOperators fiber_ops;  // resolution k_fiber
  StationaryResult stationary;
  double x0;
  bool x0_drawn;
  LocalDensityEstimate b;
  TailModel tail;
  double bn;
  double cn;
  std::size_t fiber_depth;
};

System build_system(const ExperimentConfig& cfg);

/// x0 drawn from Lebesgue with the master seed.
double draw_x0(std::uint64_t master_seed);

/// Steps covered by time t at horizon n: floor(n t).
std::size_t steps_for(std::size_t n, double t);

/// The fixed omega of quenched replica r.
OmegaPath quenched_omega(const System& sys, const ExperimentConfig& cfg, std::size_t replica);
/// The seed keying start points of replica r (replica 0 uses the master seed).
std::uint64_t replica_seed(const ExperimentConfig& cfg, std::size_t replica);

/// X_n(t_i) per trial along one fixed omega: out[i][trial]. Trials whose
/// orbit hits the pole (|x - x0| < 1e-15) are NaN.
std::vector<std::vector<double>> quenched_marginals(const System& sys, const ExperimentConfig& cfg,
                                                    const OmegaPath& omega,
                                                    std::span<const double> t_grid,
                                                    std::uint64_t start_seed);

/// X_n(1) per trial with a fresh omega per trial.
std::vector<double> annealed_sums(const System& sys, const ExperimentConfig& cfg);

/// iid oracle matched to X_n(t): floor(nt) terms, scale b_n, centering t c_n.
SampleSet oracle_for(const System& sys, const ExperimentConfig& cfg, double t);

/// Finite entries of v as a dynamical sample set.
SampleSet finite_samples(std::span<const double> v, std::uint64_t seed);

ExperimentReport run_quenched_stable(const ExperimentConfig& cfg);
ExperimentReport run_functional_marginals(const ExperimentConfig& cfg);
ExperimentReport run_annealed(const ExperimentConfig& cfg);
ExperimentReport run_hitting(const ExperimentConfig& cfg);
ExperimentReport run_poisson(const ExperimentConfig& cfg);
ExperimentReport run_transfer_report(const ExperimentConfig& cfg);
ExperimentReport run_karamata(const ExperimentConfig& cfg);

/// Dispatches on cfg.mode.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace rds
