#pragma once

#include "rds/report.hpp"

namespace rds {

/// Analytic invariants: Ulam row sums, the doubling-map density, the Levy
/// measure against quadrature, c_alpha(eps) values and stable CF bounds. The
/// full suite adds the Lebesgue Karamata ratios.
ExperimentReport run_selftest(bool quick);

}  // namespace rds
