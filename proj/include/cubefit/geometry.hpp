#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cubefit/sample_set.hpp"

namespace cubefit {

// Relative tolerance for body-membership tests. Kept in one place so the
// estimators and the TV estimators agree about boundary points.
inline constexpr double kMembershipRtol = 1e-9;

struct AffineMap;

// Axis-aligned box, lower[i] < upper[i] for every coordinate.
struct AxisBox {
  Vector lower;
  Vector upper;

  AxisBox(Vector lo, Vector up);
  int dim() const { return static_cast<int>(lower.size()); }
  double side(int i) const { return upper[i] - lower[i]; }
  double log_volume() const;
  bool contains(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                double rtol = kMembershipRtol) const;
  static AxisBox standard_cube(int d);
};

// {x : lower[i] <= normals.row(i) . x <= upper[i]}, rows unit length and
// jointly invertible. Equivalently the image of [-1,1]^d under an affine map.
struct Parallelopiped {
  Matrix normals;  // d x d, row i is the i-th facet normal
  Vector lower;
  Vector upper;

  Parallelopiped(Matrix n, Vector lo, Vector up, double max_condition = 1e8);

  int dim() const { return static_cast<int>(normals.rows()); }
  bool contains(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                double rtol = kMembershipRtol) const;
  double log_volume() const;

  // map sending [-1,1]^d onto this body
  AffineMap to_affine() const;

  static Parallelopiped standard_cube(int d);
  static Parallelopiped axis_aligned(const AxisBox& box);
  static Parallelopiped from_affine(const AffineMap& map);
};

// x -> matrix * x + shift, matrix invertible.
struct AffineMap {
  Matrix matrix;
  Vector shift;

  AffineMap(Matrix m, Vector s);
  int dim() const { return static_cast<int>(matrix.rows()); }
  Vector apply(const Vector& x) const { return matrix * x + shift; }
  Matrix apply_rows(const Matrix& pts) const;  // one point per row
  AffineMap inverse() const;
  // (this ∘ other)(x) = this(other(x))
  AffineMap compose(const AffineMap& other) const;
  static AffineMap identity(int d);
};

// Escape set S(a): indices with x.a > threshold (sign +1) or x.a < -threshold
// (sign -1, standing for the reflected point -x).
struct SlabSet {
  std::vector<Index> indices;
  std::vector<std::int8_t> signs;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

struct TvEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

// --- sampling -------------------------------------------------------------

// n i.i.d. uniform points on [-1,1]^d, all active, all labeled inlier.
SampleSet sample_standard_cube(int d, Index n, std::uint64_t seed);

// raw matrix version used by the Monte-Carlo estimators
Matrix standard_cube_points(int d, Index n, std::uint64_t seed);

SampleSet apply_affine(const AffineMap& map, const SampleSet& s);

// --- slab statistics --------------------------------------------------------

SlabSet slab_outside(const SampleView& s, const Vector& a, double threshold);

// mean and variance of (sign * x) . direction over the slab's points
std::pair<double, double> truncated_direction_stats(const SampleView& s,
                                                    const SlabSet& slab,
                                                    const Vector& direction);

// empirical E(x.a | x.a >= t) over active points
double truncated_mean_along(const SampleView& s, const Vector& a, double t);

// --- total variation --------------------------------------------------------

// 1 - vol(h1 ∩ h2) / max(vol(h1), vol(h2)), computed in log space
double tv_exact_axis_aligned(const AxisBox& h1, const AxisBox& h2);

// max of the two escape-fraction estimates vol(p\q)/vol(p), vol(q\p)/vol(q),
// each from m points mapped through the body's affine map. Uses one shared
// base sample so the result is symmetric in (p, q) for a fixed seed.
TvEstimate tv_monte_carlo(const Parallelopiped& p, const Parallelopiped& q,
                          Index m, std::uint64_t seed);

// --- row matching -----------------------------------------------------------

// sum_i || est.row(i) - sign * truth.row(pi(i)) || minimized over permutations
// and per-row signs; exact subset-DP assignment for d <= 12, greedy
// maximal-|inner-product| matching above.
double column_error(const Matrix& est_rows, const Matrix& truth_rows);
double column_error(const Parallelopiped& est, const Parallelopiped& truth);

// unit helpers
bool is_unit(const Vector& a, double tol = 1e-12);

}  // namespace cubefit
