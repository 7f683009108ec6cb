#include "cubefit/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cubefit/rng.hpp"

namespace cubefit {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double membership_tol(double lo, double hi, double rtol) {
  return rtol * std::max({1.0, std::abs(lo), std::abs(hi)});
}

}  // namespace

// --- AxisBox ----------------------------------------------------------------

AxisBox::AxisBox(Vector lo, Vector up) : lower(std::move(lo)), upper(std::move(up)) {
  require(lower.size() == upper.size() && lower.size() >= 1, "AxisBox: bad dimensions");
  for (Index i = 0; i < lower.size(); ++i) {
    require(std::isfinite(lower[i]) && std::isfinite(upper[i]), "AxisBox: non-finite bound");
    require(lower[i] < upper[i], "AxisBox: lower must be < upper");
  }
}

AxisBox AxisBox::standard_cube(int d) {
  return AxisBox(Vector::Constant(d, -1.0), Vector::Constant(d, 1.0));
}

double AxisBox::log_volume() const {
  double s = 0.0;
  for (Index i = 0; i < lower.size(); ++i) s += std::log(upper[i] - lower[i]);
  return s;
}

bool AxisBox::contains(const Eigen::Ref<const Eigen::RowVectorXd>& x, double rtol) const {
  for (Index i = 0; i < lower.size(); ++i) {
    const double tol = membership_tol(lower[i], upper[i], rtol);
    if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
  }
  return true;
}

// --- AffineMap ----------------------------------------------------------------

AffineMap::AffineMap(Matrix m, Vector s) : matrix(std::move(m)), shift(std::move(s)) {
  require(matrix.rows() == matrix.cols() && matrix.rows() == shift.size(),
          "AffineMap: shape mismatch");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(matrix);
  require(lu.isInvertible(), "AffineMap: singular matrix");
}

Matrix AffineMap::apply_rows(const Matrix& pts) const {
  Matrix out = pts * matrix.transpose();
  out.rowwise() += shift.transpose();
  return out;
}

AffineMap AffineMap::inverse() const {
  Matrix inv = matrix.inverse();
  return AffineMap(inv, Vector(-inv * shift));
}

AffineMap AffineMap::compose(const AffineMap& other) const {
  return AffineMap(Matrix(matrix * other.matrix), Vector(matrix * other.shift + shift));
}

AffineMap AffineMap::identity(int d) {
  return AffineMap(Matrix::Identity(d, d), Vector::Zero(d));
}

// --- Parallelopiped -----------------------------------------------------------

Parallelopiped::Parallelopiped(Matrix n, Vector lo, Vector up, double max_condition)
    : normals(std::move(n)), lower(std::move(lo)), upper(std::move(up)) {
  const Index d = normals.rows();
  require(normals.cols() == d && lower.size() == d && upper.size() == d,
          "Parallelopiped: shape mismatch");
  for (Index i = 0; i < d; ++i) {
    require(std::abs(normals.row(i).norm() - 1.0) <= 1e-12, "Parallelopiped: non-unit normal");
    require(lower[i] < upper[i], "Parallelopiped: lower must be < upper");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normals);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  require(smin > 0.0 && smax / smin <= max_condition,
          "Parallelopiped: normal matrix singular or ill-conditioned");
}

Parallelopiped Parallelopiped::standard_cube(int d) {
  return Parallelopiped(Matrix::Identity(d, d), Vector::Constant(d, -1.0),
                        Vector::Constant(d, 1.0));
}

Parallelopiped Parallelopiped::axis_aligned(const AxisBox& box) {
  const int d = box.dim();
  return Parallelopiped(Matrix::Identity(d, d), box.lower, box.upper);
}

bool Parallelopiped::contains(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                              double rtol) const {
  for (Index i = 0; i < normals.rows(); ++i) {
    const double p = normals.row(i).dot(x);
    const double tol = membership_tol(lower[i], upper[i], rtol);
    if (p < lower[i] - tol || p > upper[i] + tol) return false;
  }
  return true;
}

double Parallelopiped::log_volume() const {
  // vol = prod(upper - lower) / |det(normals)|
  double s = 0.0;
  for (Index i = 0; i < lower.size(); ++i) s += std::log(upper[i] - lower[i]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(normals);
  double log_det = 0.0;
  for (Index i = 0; i < normals.rows(); ++i)
    log_det += std::log(std::abs(lu.matrixLU()(i, i)));
  return s - log_det;
}

AffineMap Parallelopiped::to_affine() const {
  // N (A s + b) = D s + m with D = diag((u-l)/2), m = (u+l)/2
  const Index d = normals.rows();
  Matrix ninv = normals.inverse();
  Matrix a = ninv * Vector((upper - lower) / 2.0).asDiagonal();
  Vector b = ninv * Vector((upper + lower) / 2.0);
  return AffineMap(std::move(a), std::move(b));
}

Parallelopiped Parallelopiped::from_affine(const AffineMap& map) {
  const Index d = map.dim();
  Matrix rows = map.matrix.inverse();
  Matrix n(d, d);
  Vector lo(d), up(d);
  for (Index i = 0; i < d; ++i) {
    const double s = rows.row(i).norm();
    require(s > 0.0, "from_affine: degenerate map");
    n.row(i) = rows.row(i) / s;
    const double c = rows.row(i).dot(map.shift) / s;
    lo[i] = -1.0 / s + c;
    up[i] = 1.0 / s + c;
  }
  return Parallelopiped(std::move(n), std::move(lo), std::move(up));
}

// --- sampling -------------------------------------------------------------

Matrix standard_cube_points(int d, Index n, std::uint64_t seed) {
  require(d >= 1, "standard_cube_points: d must be >= 1");
  require(n >= 1, "standard_cube_points: n must be >= 1");
  Rng rng(seed);
  Matrix pts(n, d);
  for (Index i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) pts(i, j) = rng.uniform(-1.0, 1.0);
  return pts;
}

SampleSet sample_standard_cube(int d, Index n, std::uint64_t seed) {
  return SampleSet::from_points(standard_cube_points(d, n, seed));
}

SampleSet apply_affine(const AffineMap& map, const SampleSet& s) {
  require(map.dim() == s.d(), "apply_affine: dimension mismatch");
  return SampleSet(map.apply_rows(s.points()), s.active(), s.labels());
}

// --- slab statistics --------------------------------------------------------

bool is_unit(const Vector& a, double tol) { return std::abs(a.norm() - 1.0) <= tol; }

SlabSet slab_outside(const SampleView& s, const Vector& a, double threshold) {
  require(is_unit(a, 1e-9), "slab_outside: direction must be unit");
  require(threshold > 0.0, "slab_outside: threshold must be positive");
  require(a.size() == s.d(), "slab_outside: dimension mismatch");
  SlabSet out;
  const Vector proj = (*s.points) * a;
  for (Index i = 0; i < s.n(); ++i) {
    if (!s.is_active(i)) continue;
    if (proj[i] > threshold) {
      out.indices.push_back(i);
      out.signs.push_back(+1);
    } else if (proj[i] < -threshold) {
      out.indices.push_back(i);
      out.signs.push_back(-1);
    }
  }
  return out;
}

std::pair<double, double> truncated_direction_stats(const SampleView& s,
                                                    const SlabSet& slab,
                                                    const Vector& direction) {
  require(!slab.empty(), "truncated_direction_stats: empty slab");
  double sum = 0.0, sumsq = 0.0;
  const Index k = static_cast<Index>(slab.size());
  for (std::size_t j = 0; j < slab.size(); ++j) {
    const double v = slab.signs[j] * s.point(slab.indices[j]).dot(direction.transpose());
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / static_cast<double>(k);
  const double var = std::max(0.0, sumsq / static_cast<double>(k) - mean * mean);
  return {mean, var};
}

double truncated_mean_along(const SampleView& s, const Vector& a, double t) {
  require(is_unit(a, 1e-9), "truncated_mean_along: direction must be unit");
  const Vector proj = (*s.points) * a;
  double sum = 0.0;
  Index k = 0;
  for (Index i = 0; i < s.n(); ++i) {
    if (!s.is_active(i)) continue;
    if (proj[i] >= t) {
      sum += proj[i];
      ++k;
    }
  }
  require(k > 0, "truncated_mean_along: empty conditioning event");
  return sum / static_cast<double>(k);
}

// --- total variation --------------------------------------------------------

double tv_exact_axis_aligned(const AxisBox& h1, const AxisBox& h2) {
  require(h1.dim() == h2.dim(), "tv_exact_axis_aligned: dimension mismatch");
  double log_overlap = 0.0;
  bool disjoint = false;
  for (int i = 0; i < h1.dim(); ++i) {
    const double lo = std::max(h1.lower[i], h2.lower[i]);
    const double hi = std::min(h1.upper[i], h2.upper[i]);
    if (hi <= lo) {
      disjoint = true;
      break;
    }
    log_overlap += std::log(hi - lo);
  }
  if (disjoint) return 1.0;
  const double log_max = std::max(h1.log_volume(), h2.log_volume());
  const double ratio = std::exp(log_overlap - log_max);
  return std::clamp(1.0 - ratio, 0.0, 1.0);
}

TvEstimate tv_monte_carlo(const Parallelopiped& p, const Parallelopiped& q,
                          Index m, std::uint64_t seed) {
  require(p.dim() == q.dim(), "tv_monte_carlo: dimension mismatch");
  require(m >= 1, "tv_monte_carlo: sample count must be >= 1");
  const Matrix base = standard_cube_points(p.dim(), m, seed);
  const Matrix in_p = p.to_affine().apply_rows(base);
  const Matrix in_q = q.to_affine().apply_rows(base);
  Index esc_p = 0, esc_q = 0;
  for (Index i = 0; i < m; ++i) {
    if (!q.contains(in_p.row(i))) ++esc_p;
    if (!p.contains(in_q.row(i))) ++esc_q;
  }
  const double fp = static_cast<double>(esc_p) / static_cast<double>(m);
  const double fq = static_cast<double>(esc_q) / static_cast<double>(m);
  const double est = std::max(fp, fq);
  const double se = std::sqrt(std::max(fp * (1.0 - fp), fq * (1.0 - fq)) /
                              static_cast<double>(m));
  return TvEstimate{est, se};
}

// --- row matching -----------------------------------------------------------

namespace {

// cost of pairing est row i with truth row j under the best sign
double row_cost(const Matrix& est, const Matrix& truth, Index i, Index j) {
  const double plus = (est.row(i) - truth.row(j)).norm();
  const double minus = (est.row(i) + truth.row(j)).norm();
  return std::min(plus, minus);
}

double assignment_exact(const Matrix& est, const Matrix& truth) {
  // subset DP over truth rows, O(d * 2^d)
  const int d = static_cast<int>(est.rows());
  const std::size_t full = (std::size_t{1} << d);
  std::vector<double> dp(full, std::numeric_limits<double>::infinity());
  dp[0] = 0.0;
  std::vector<int> popcount(full, 0);
  for (std::size_t mask = 1; mask < full; ++mask)
    popcount[mask] = popcount[mask >> 1] + static_cast<int>(mask & 1);
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (!std::isfinite(dp[mask])) continue;
    const int i = popcount[mask];  // next est row to assign
    if (i >= d) continue;
    for (int j = 0; j < d; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const std::size_t next = mask | (std::size_t{1} << j);
      const double c = dp[mask] + row_cost(est, truth, i, j);
      if (c < dp[next]) dp[next] = c;
    }
  }
  return dp[full - 1];
}

double assignment_greedy(const Matrix& est, const Matrix& truth) {
  const int d = static_cast<int>(est.rows());
  std::vector<bool> used_e(d, false), used_t(d, false);
  double total = 0.0;
  for (int step = 0; step < d; ++step) {
    double best = -1.0;
    int bi = -1, bj = -1;
    for (int i = 0; i < d; ++i) {
      if (used_e[i]) continue;
      for (int j = 0; j < d; ++j) {
        if (used_t[j]) continue;
        const double ip = std::abs(est.row(i).dot(truth.row(j)));
        if (ip > best) {
          best = ip;
          bi = i;
          bj = j;
        }
      }
    }
    used_e[bi] = used_t[bj] = true;
    total += row_cost(est, truth, bi, bj);
  }
  return total;
}

}  // namespace

double column_error(const Matrix& est_rows, const Matrix& truth_rows) {
  require(est_rows.rows() == truth_rows.rows() && est_rows.cols() == truth_rows.cols(),
          "column_error: dimension mismatch");
  const int d = static_cast<int>(est_rows.rows());
  return d <= 12 ? assignment_exact(est_rows, truth_rows)
                 : assignment_greedy(est_rows, truth_rows);
}

double column_error(const Parallelopiped& est, const Parallelopiped& truth) {
  return column_error(est.normals, truth.normals);
}

}  // namespace cubefit
