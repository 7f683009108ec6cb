#pragma once

#include <vector>

#include "cubefit/geometry.hpp"
#include "cubefit/sample_set.hpp"

namespace cubefit {

// Optimal permutation + sign matching of estimated rows to truth rows
// (assignment DP for d <= 12, greedy above; same policy as column_error).
struct RowMatching {
  std::vector<int> perm;       // est row i matches truth row perm[i]
  std::vector<double> signs;   // +1 or -1
  std::vector<double> row_errors;
  double total = 0.0;
};

RowMatching match_rows(const Matrix& est_rows, const Matrix& truth_rows);

// fraction of the given indices whose hidden label is `outlier`
double outlier_fraction(const SampleSet& s, const std::vector<Index>& indices);

// Hidden-label slab accounting for the rotation analysis: outliers inside the
// symmetrized slab, and original (clean) sample points in the slab that are no
// longer active inliers of the corrupted set.
struct SlabNoiseCounts {
  Index slab_size = 0;           // active points of `corrupted` in the slab
  Index outliers_in_slab = 0;    // of those, labeled outlier
  Index clean_in_slab = 0;       // clean-sample points inside the slab
  Index clean_surviving = 0;     // of those, still active inliers

  double eps_per_slab() const {
    return slab_size ? static_cast<double>(outliers_in_slab) / slab_size : 0.0;
  }
  double eta_removed() const {
    return static_cast<double>(clean_in_slab - clean_surviving);
  }
};

SlabNoiseCounts slab_noise(const SampleSet& clean, const SampleSet& corrupted,
                           const std::vector<std::uint8_t>& active_mask,
                           const Vector& a, double threshold);

// per-direction errors of a hypothesis (normals/lower/upper) against a truth
// body in the same frame, after row matching
struct RoundDeltas {
  std::vector<double> rotation;  // || a_i - sign * t_perm(i) ||
  std::vector<double> scale;     // (|u_i - u*| + |l_i - l*|) / (u* - l*)
};

RoundDeltas round_deltas(const Matrix& normals, const Vector& lower, const Vector& upper,
                         const Parallelopiped& truth_same_frame);

}  // namespace cubefit
