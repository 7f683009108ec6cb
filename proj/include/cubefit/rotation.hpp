#pragma once

#include <vector>

#include "cubefit/geometry.hpp"
#include "cubefit/robust_stats.hpp"
#include "cubefit/sample_set.hpp"

namespace cubefit {

struct RotationConfig {
  double c1 = 8.0;           // band-intersection threshold multiplier
  double c2 = 1.0 / 32.0;    // step-size constant
  double beta_max = 0.5;
  double threshold = 1.0;    // slab boundary (unit offsets)
  int iter_cap = 5000;       // per-row; effective T = min(ceil(2^12 d ln d), iter_cap)
  double mu_norm_floor = 1e-9;
  double eps_local_cap = 0.25;
  // points of a rotated standard cube satisfy |x| <= sqrt(d) * threshold, so
  // anything past this multiple of that radius is dropped at module entry
  double norm_clip_factor = 2.0;
  FilterParams filter;       // robust mean inside the gradient step
};

struct GdStepResult {
  Vector a_next;
  double beta = 0.0;
  Index slab_size = 0;
  double mu_norm = 0.0;
  double eps_local = 0.0;
  bool converged_empty = false;  // slab empty, a returned unchanged
  bool degenerate = false;       // |mu| under the floor, a returned unchanged
};

struct RowIteration {
  Vector a;             // iterate after this step (a^t)
  double beta = 0.0;
  Index slab_size = 0;
  Index escape_count = 0;  // s^t measured on the restored sample
  Index filtered = 0;      // points removed by step 2(a) before this step
};

struct RowTrace {
  Vector a0;
  Index escape0 = 0;
  std::vector<RowIteration> steps;
  int best_t = 0;  // 0 refers to a0
  Index best_escape = 0;
  bool converged_empty = false;
  bool failed = false;
};

struct RotationTrace {
  std::vector<RowTrace> rows;
};

struct RotationResult {
  Parallelopiped body;  // learned normals, offsets +-1 (threshold-scaled)
  RotationTrace trace;
};

// Step 2(a): for every fixed row, deactivate the points in the symmetrized
// slab intersection when its normalized size exceeds 2 c1 times the product of
// the normalized slab sizes. Returns the deactivated indices for restoring.
std::vector<Index> band_intersection_filter(SampleView& s, const Vector& a_current,
                                            const std::vector<Vector>& fixed_rows,
                                            double c1, double threshold, Index n_total);

// Algorithm step 2(b): robust mean of the symmetrized escape set, then
// a' = normalize(a - beta mu~) with beta = c2 |S| / (|mu~|^2 n).
GdStepResult robust_gd_step(const SampleView& s, const Vector& a, double threshold,
                            double eps_local, const RotationConfig& cfg, Index n_total);

// Full per-row loop: filter, step, measure the escape count on the restored
// sample, keep the iterate with the smallest count.
RowTrace improve_row(const SampleView& s, const Vector& a0,
                     const std::vector<Vector>& fixed_rows, double eps,
                     const RotationConfig& cfg);

// Rows improved in order, each filtered against the previously finalized ones.
RotationResult estimate_rotation(const SampleView& s, double eps,
                                 const RotationConfig& cfg,
                                 const WarmStartReport* warm = nullptr,
                                 std::uint64_t warm_seed = 0);

// fraction of active points escaping the symmetrized band of any row
double escape_fraction(const SampleView& s, const Matrix& rows, double threshold);

}  // namespace cubefit
