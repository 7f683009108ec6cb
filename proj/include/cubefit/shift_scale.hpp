#pragma once

#include <cstdint>
#include <vector>

#include "cubefit/geometry.hpp"
#include "cubefit/sample_set.hpp"

namespace cubefit {

struct ShiftScaleConfig {
  double eps_min = 1e-3;
  double eps_max = 1.0 / 16.0;
  double expand_factor = 4.0;        // range-finding expansion about the window center
  double iter_cap_factor = 10.0;     // boundary-update cap = factor * d^2 / eps
  double deletion_cap_factor = 2.0;  // deletion budget = factor * eps * n
  double n_min_factor = 0.5;         // n_min = ceil(factor * d^2 / eps^2)
  double two_d_factor = 10.0;        // Eq. (3) threshold multiplier
};

struct ShiftScaleDeletion {
  Index index;
  int i, j, k1, k2;
};

// Certificate state: the current box, the deletion log, and the constants the
// density checks are evaluated against.
struct ShiftScaleState {
  AxisBox box;
  double eps;
  Index n0;  // active count at estimator entry; check thresholds scale with it
  double two_d_factor = 10.0;
  std::vector<ShiftScaleDeletion> deletions;
  // points outside the initial range-found box, dropped at entry; the box
  // contains the true box with high probability, so these are outliers under
  // the model and sit outside the 2 eps n certificate-deletion budget
  std::vector<Index> range_filtered;
  int iterations = 0;
  bool deletion_capped = false;
  bool iteration_capped = false;
  bool ok = false;

  ShiftScaleState(AxisBox b, double e, Index n)
      : box(std::move(b)), eps(e), n0(n) {}
};

struct OneDCheckResult {
  bool upper_ok = false;
  bool lower_ok = false;
  Index upper_count = 0;
  Index lower_count = 0;
  double required = 0.0;  // (k eps / 2d) * n0
};

struct TwoDCheckResult {
  bool pass = true;
  std::vector<Index> violating;  // indices in the violating intersections
  double threshold = 0.0;        // (10 k1 k2 eps^2 / d^2) * n0
};

// Eq. (1)/(2): counts of the depth-(k eps/d) top and bottom slabs of
// coordinate i against (k eps / 2d) n.
OneDCheckResult one_d_density_check(const SampleView& s, const ShiftScaleState& st,
                                    int i, int k);

// Eq. (3): all four sign combinations of the (i,k1)x(j,k2) slab intersections
// against 10 k1 k2 eps^2 / d^2 n.
TwoDCheckResult two_d_density_check(const SampleView& s, const ShiftScaleState& st,
                                    int i, int j, int k1, int k2);

// Per coordinate: minimum-length window covering ceil((1/2+eps) n) consecutive
// order statistics, expanded about its own center by expand_factor.
AxisBox robust_range_find(const SampleView& s, double eps,
                          const ShiftScaleConfig& cfg = {});

struct ShiftScaleResult {
  AxisBox box;
  ShiftScaleState state;
};

// Full certificate loop: range finding, then 1-d boundary updates and 2-d
// deletions until every check passes (or a cap flags the state).
ShiftScaleResult estimate_shift_scale(const SampleView& s, double eps,
                                      const ShiftScaleConfig& cfg = {});

// Same machinery on arbitrary scalar coordinates (one column per direction);
// the affine pipeline feeds projections onto its current normals through this.
ShiftScaleResult estimate_shift_scale_coords(const Matrix& coords,
                                             const std::vector<std::uint8_t>& active,
                                             double eps, const ShiftScaleConfig& cfg = {});

}  // namespace cubefit
