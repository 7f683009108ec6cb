#include "cubefit/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cubefit {

namespace {

double signed_cost(const Matrix& est, const Matrix& truth, int i, int j, double* sign) {
  const double plus = (est.row(i) - truth.row(j)).norm();
  const double minus = (est.row(i) + truth.row(j)).norm();
  if (sign) *sign = plus <= minus ? 1.0 : -1.0;
  return std::min(plus, minus);
}

}  // namespace

RowMatching match_rows(const Matrix& est_rows, const Matrix& truth_rows) {
  if (est_rows.rows() != truth_rows.rows() || est_rows.cols() != truth_rows.cols())
    throw std::invalid_argument("match_rows: dimension mismatch");
  const int d = static_cast<int>(est_rows.rows());
  RowMatching m;
  m.perm.assign(d, -1);
  m.signs.assign(d, 1.0);
  m.row_errors.assign(d, 0.0);

  if (d <= 12) {
    const std::size_t full = std::size_t{1} << d;
    std::vector<double> dp(full, std::numeric_limits<double>::infinity());
    std::vector<int> choice(full, -1);
    dp[0] = 0.0;
    std::vector<int> pop(full, 0);
    for (std::size_t mask = 1; mask < full; ++mask)
      pop[mask] = pop[mask >> 1] + static_cast<int>(mask & 1);
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (!std::isfinite(dp[mask]) || pop[mask] >= d) continue;
      const int i = pop[mask];
      for (int j = 0; j < d; ++j) {
        if (mask & (std::size_t{1} << j)) continue;
        const double c = dp[mask] + signed_cost(est_rows, truth_rows, i, j, nullptr);
        const std::size_t next = mask | (std::size_t{1} << j);
        if (c < dp[next]) {
          dp[next] = c;
          choice[next] = j;
        }
      }
    }
    std::size_t mask = full - 1;
    for (int i = d - 1; i >= 0; --i) {
      const int j = choice[mask];
      m.perm[static_cast<std::size_t>(i)] = j;
      mask ^= (std::size_t{1} << j);
    }
  } else {
    std::vector<bool> used(d, false);
    for (int step = 0; step < d; ++step) {
      double best = -1.0;
      int bi = -1, bj = -1;
      for (int i = 0; i < d; ++i) {
        if (m.perm[static_cast<std::size_t>(i)] >= 0) continue;
        for (int j = 0; j < d; ++j) {
          if (used[static_cast<std::size_t>(j)]) continue;
          const double ip = std::abs(est_rows.row(i).dot(truth_rows.row(j)));
          if (ip > best) {
            best = ip;
            bi = i;
            bj = j;
          }
        }
      }
      m.perm[static_cast<std::size_t>(bi)] = bj;
      used[static_cast<std::size_t>(bj)] = true;
    }
  }

  for (int i = 0; i < d; ++i) {
    double sign = 1.0;
    m.row_errors[static_cast<std::size_t>(i)] =
        signed_cost(est_rows, truth_rows, i, m.perm[static_cast<std::size_t>(i)], &sign);
    m.signs[static_cast<std::size_t>(i)] = sign;
    m.total += m.row_errors[static_cast<std::size_t>(i)];
  }
  return m;
}

double outlier_fraction(const SampleSet& s, const std::vector<Index>& indices) {
  if (indices.empty()) return 0.0;
  Index c = 0;
  for (Index i : indices)
    if (s.labels()[static_cast<std::size_t>(i)] == TruthLabel::outlier) ++c;
  return static_cast<double>(c) / static_cast<double>(indices.size());
}

SlabNoiseCounts slab_noise(const SampleSet& clean, const SampleSet& corrupted,
                           const std::vector<std::uint8_t>& active_mask,
                           const Vector& a, double threshold) {
  SlabNoiseCounts c;
  const Vector proj_cor = corrupted.points() * a;
  for (Index i = 0; i < corrupted.n(); ++i) {
    if (!active_mask[static_cast<std::size_t>(i)]) continue;
    if (std::abs(proj_cor[i]) > threshold) {
      ++c.slab_size;
      if (corrupted.labels()[static_cast<std::size_t>(i)] == TruthLabel::outlier)
        ++c.outliers_in_slab;
    }
  }
  const Vector proj_cl = clean.points() * a;
  for (Index i = 0; i < clean.n(); ++i)
    if (std::abs(proj_cl[i]) > threshold) ++c.clean_in_slab;
  for (Index i = 0; i < corrupted.n(); ++i) {
    if (!active_mask[static_cast<std::size_t>(i)]) continue;
    if (corrupted.labels()[static_cast<std::size_t>(i)] != TruthLabel::inlier) continue;
    if (std::abs(proj_cor[i]) > threshold) ++c.clean_surviving;
  }
  return c;
}

RoundDeltas round_deltas(const Matrix& normals, const Vector& lower, const Vector& upper,
                         const Parallelopiped& truth) {
  const RowMatching m = match_rows(normals, truth.normals);
  const int d = static_cast<int>(normals.rows());
  RoundDeltas out;
  out.rotation = m.row_errors;
  out.scale.resize(d);
  for (int i = 0; i < d; ++i) {
    const int j = m.perm[static_cast<std::size_t>(i)];
    double tl = truth.lower[j];
    double tu = truth.upper[j];
    if (m.signs[static_cast<std::size_t>(i)] < 0) {
      // negated normal flips and swaps the true offsets
      const double nl = -tu, nu = -tl;
      tl = nl;
      tu = nu;
    }
    out.scale[static_cast<std::size_t>(i)] =
        (std::abs(upper[i] - tu) + std::abs(lower[i] - tl)) / (tu - tl);
  }
  return out;
}

}  // namespace cubefit
