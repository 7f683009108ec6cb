#pragma once

#include <cstdint>
#include <vector>

#include "cubefit/geometry.hpp"
#include "cubefit/robust_stats.hpp"
#include "cubefit/rotation.hpp"
#include "cubefit/sample_set.hpp"
#include "cubefit/shift_scale.hpp"

namespace cubefit {

struct AffineConfig {
  double eps_min = 1e-3;
  double eps_max = 1.0 / 16.0;
  double c_stop = 1024.0;         // stopping rule inside count >= (1 - c_stop eps) n
  double round_cap_factor = 10.0;  // cap = ceil(factor * log(d / eps))
  int round_cap_override = 0;      // > 0 replaces the formula
  double cond_guard = 100.0;       // documented model-input guard, not enforced
  WarmStartMode warm_mode = WarmStartMode::moment;
  double oracle_delta = 0.05;
  ShiftScaleConfig shift;
  RotationConfig rot;
  WarmStartParams warm;
  FilterParams filter;
};

// image of `body` under `map`
Parallelopiped transform_body(const Parallelopiped& body, const AffineMap& map);

struct NormalizedFrame {
  Matrix points;   // transformed sample, one row per point
  AffineMap map;   // x -> Sigma^{-1/2} (x - mean)
};

// Centers by `mean` and whitens by cov^{-1/2}; the model cube maps to (about)
// sqrt(3) times a rotated standard cube, which step (b) of the round loop
// rescales per direction.
NormalizedFrame normalize_frame(const SampleView& s, const Vector& mean,
                                const Matrix& cov);

struct AffineRound {
  Matrix normals;  // rows, in the whitened frame
  Vector lower;
  Vector upper;
  double inside_fraction = 0.0;
};

struct AffineResult {
  Parallelopiped body;   // original coordinates
  AffineMap frame;       // whitening map used internally
  std::vector<AffineRound> rounds;
  int best_round = 0;    // index into rounds
  bool stopped_early = false;
  int warm_restarts = 0;
  Index mean_removed = 0;
  Index cov_removed = 0;
};

// Algorithm: robust mean/covariance normalization, warm start, then rounds of
// (a) scalar certificate fitting along the current normals and (b) rotation
// refinement in the per-direction rescaled frame, until the inside count
// passes (1 - c_stop eps) n or the round cap; the round with the highest
// inside fraction is returned. `oracle_truth` (original coordinates) is only
// consulted in oracle warm-start mode.
AffineResult estimate_affine(const SampleView& s, double eps, const AffineConfig& cfg,
                             std::uint64_t seed,
                             const Parallelopiped* oracle_truth = nullptr);

}  // namespace cubefit
