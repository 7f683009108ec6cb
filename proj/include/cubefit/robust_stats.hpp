#pragma once

#include <cstdint>
#include <optional>

#include "cubefit/geometry.hpp"
#include "cubefit/sample_set.hpp"

namespace cubefit {

struct FilterParams {
  double c_filter = 4.0;          // slack multiplier on the trigger threshold
  double removal_cap_factor = 2.0;  // removal budget = factor * eps * n
  int max_iterations = 60;
};

struct RobustMeanReport {
  Vector estimate;
  std::vector<Index> removed_indices;
  int filter_iterations = 0;
  double final_top_eigenvalue = 0.0;
  bool capped = false;  // budget exhausted with the trigger still firing
};

struct RobustCovarianceReport {
  Matrix covariance;
  std::vector<Index> removed_indices;
  int filter_iterations = 0;
  bool capped = false;
};

// Iterative spectral filtering for bounded-covariance contamination: while the
// top eigenvalue exceeds (1 + c_filter sqrt(eps)) times a median-based scale,
// drop the tail with the largest squared projection onto the top eigenvector.
RobustMeanReport robust_mean(const SampleView& s, double eps,
                             const FilterParams& params = {});

// Same loop, triggered by the fourth moment of projections onto the top
// eigenvector instead of the eigenvalue itself.
RobustCovarianceReport robust_covariance(const SampleView& s, double eps,
                                         const FilterParams& params = {});

// --- warm start ---------------------------------------------------------------

enum class WarmStartMode { moment, oracle };

struct WarmStartParams {
  int restarts = 6;
  int iterations = 120;
  double initial_step = 0.5;
  double trim = -1.0;        // <0: use max(2 eps, 0.01)
  Index subsample = 50000;   // cap on points fed to the moment optimizer
  FilterParams filter;
};

struct WarmStartReport {
  Matrix normals;  // d x d, unit rows
  WarmStartMode mode = WarmStartMode::moment;
  Vector per_row_alignment;  // squared inner products vs matched truth; NaN without truth
  bool converged = true;
  int restarts_used = 0;
};

// moment mode: estimates the facet-normal directions by minimizing the trimmed
// directional fourth moment of internally whitened data (deflation across rows,
// random restarts). oracle mode: perturbs the true normals by exactly
// oracle_delta in chord distance; used to isolate downstream components.
WarmStartReport warm_start(const SampleView& s, double eps, WarmStartMode mode,
                           const WarmStartParams& params, std::uint64_t seed,
                           const Parallelopiped* oracle_truth = nullptr,
                           double oracle_delta = 0.0);

// empirical mean of (u . x)^4 over active points, dropping the ceil(trim * k)
// largest values; trim = 0 gives the plain moment (exposed for unit checks)
double directional_fourth_moment(const SampleView& s, const Vector& u, double trim = 0.0);

}  // namespace cubefit
