#pragma once

#include <cstdint>
#include <vector>

namespace cubefit {

// d subsets of a ground set [n], stored as sorted index sets.
struct SetSystem {
  std::int64_t ground_size = 0;
  std::vector<std::vector<std::int64_t>> sets;

  double frac(std::size_t i) const;
  double union_frac() const;
  double pairwise_frac(std::size_t i, std::size_t j) const;
};

struct IntersectionSumResult {
  bool applicable = false;  // alpha * eps < 1 and every pairwise condition holds
  bool holds = false;       // sum frac(S_i) <= eps / (1 - alpha eps)
  double lhs = 0.0;         // sum of frac(S_i)
  double rhs = 0.0;         // eps / (1 - alpha eps)
  double eps = 0.0;         // frac(union)
};

// Checks sum_i frac(S_i) <= eps/(1 - alpha eps) given frac(S_i ∩ S_j) <=
// alpha frac(S_i) frac(S_j) for all i != j, where eps = frac(union S_i).
// Counting is exact integers; only the final comparison divides.
IntersectionSumResult intersection_sum_check(const SetSystem& sys, double alpha);

struct PairwiseExpectationResult {
  bool applicable = false;  // E X_i X_j <= eps E X_i E X_j for all i != j
  bool holds = false;       // sum E X_i <= 1/(1 - eps)
  double lhs = 0.0;         // sum of E X_i
  double rhs = 0.0;
};

// Rows of `samples` are draws of X in {0,1}^d (n rows, d columns, row-major).
PairwiseExpectationResult pairwise_expectation_check(
    const std::vector<std::uint8_t>& samples, std::int64_t n, int d, double eps);

// --- randomized suite -------------------------------------------------------

struct SetSystemGenConfig {
  std::int64_t ground_size = 1000;
  int max_sets = 20;
  double density_lo = 0.002;
  double density_hi = 0.08;
  double alpha_lo = 2.0;
  double alpha_hi = 50.0;
  // probability an instance is built as a near-partition (always applicable)
  double partition_prob = 0.5;
  // probability of injecting extra correlation between one pair of sets
  double correlate_prob = 0.25;
};

struct GeneratedSystem {
  SetSystem sys;
  double alpha = 0.0;
};

GeneratedSystem generate_set_system(const SetSystemGenConfig& cfg, std::uint64_t seed);

struct LemmaSuiteResult {
  std::int64_t requested = 0;
  std::int64_t applicable = 0;
  std::int64_t violations = 0;
  bool pass() const { return violations == 0 && applicable > 0; }
};

// Draws systems until `count` applicable ones were checked (every generated
// inapplicable instance still exercises the applicability filter).
LemmaSuiteResult run_intersection_sum_suite(std::int64_t count, std::uint64_t seed,
                                            const SetSystemGenConfig& cfg = {});

// Same for the indicator-matrix form; draws Bernoulli matrices with mild
// negative association so most instances are applicable.
LemmaSuiteResult run_pairwise_expectation_suite(std::int64_t count, std::uint64_t seed);

}  // namespace cubefit
