#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cubefit/sample_set.hpp"

namespace cubefit {

struct FactResult {
  std::string name;
  std::string detail;  // config summary (d, delta, t, ...)
  double value = 0.0;
  double bound_lo = 0.0;
  double bound_hi = 0.0;
  double se = 0.0;
  bool bounded_below = false;
  bool bounded_above = false;
  bool pass = true;
};

struct FittedConstant {
  std::string name;
  double value = 0.0;
};

struct FactsReport {
  std::vector<FactResult> checks;
  std::vector<FittedConstant> fitted;
  bool all_pass = true;
};

// Monte-Carlo verification of the cube facts the estimators lean on: slab
// escape-fraction bounds, slab mass, section volume, band-intersection
// products, tail mass past 1 + delta/2, the truncated mean gap, the truncated
// mean offset, the slab mean projection, and the slab coordinate variance.
// All inequality checks carry 3-standard-error slack; scale-free constants
// are reported as fits.
FactsReport run_facts_suite(std::uint64_t seed, Index budget = 1000000,
                            int configs_per_fact = 20);

}  // namespace cubefit
