#include "cubefit/robust_stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cubefit/rng.hpp"

namespace cubefit {

namespace {

constexpr double kMadToSigma = 1.4826;  // Gaussian consistency factor

std::vector<Index> active_indices(const SampleView& s) {
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(s.n()));
  for (Index i = 0; i < s.n(); ++i)
    if (s.is_active(i)) idx.push_back(i);
  return idx;
}

double median_inplace(std::vector<double>& v) {
  const std::size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  double hi = v[k];
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
    return 0.5 * (lo + hi);
  }
  return hi;
}

// median-based scale of the values (squared); robust stand-in for the inlier
// variance along the filter direction
double mad_scale_sq(const std::vector<double>& values) {
  std::vector<double> tmp = values;
  const double med = median_inplace(tmp);
  for (auto& x : tmp) x = std::abs(x - med);
  const double mad = median_inplace(tmp);
  const double sigma = kMadToSigma * mad;
  return sigma * sigma;
}

struct MeanCov {
  Vector mean;
  Matrix cov;
};

MeanCov mean_cov(const Matrix& pts, const std::vector<Index>& idx) {
  const int d = static_cast<int>(pts.cols());
  Vector mean = Vector::Zero(d);
  for (Index i : idx) mean += pts.row(i).transpose();
  mean /= static_cast<double>(idx.size());
  Matrix cov = Matrix::Zero(d, d);
  for (Index i : idx) {
    const Vector c = pts.row(i).transpose() - mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(idx.size());
  return {std::move(mean), std::move(cov)};
}

// shared filtering loop; `score` maps the centered projection p to the removal
// score, `trigger` decides from (statistic, scale^2) whether to keep filtering
template <typename StatFn>
void filter_loop(const Matrix& pts, std::vector<Index>& idx, double eps,
                 const FilterParams& params, StatFn&& statistic, int& iterations,
                 std::vector<Index>& removed, bool& capped, double& last_top) {
  const auto n0 = static_cast<double>(idx.size());
  const auto cap = static_cast<Index>(std::floor(params.removal_cap_factor * eps * n0));
  const double slack = 1.0 + params.c_filter * std::sqrt(eps);

  for (iterations = 0; iterations < params.max_iterations; ++iterations) {
    const MeanCov mc = mean_cov(pts, idx);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mc.cov);
    const Index top = mc.cov.rows() - 1;
    const Vector v = eig.eigenvectors().col(top);
    last_top = eig.eigenvalues()[top];

    std::vector<double> proj(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
      proj[k] = (pts.row(idx[k]).transpose() - mc.mean).dot(v);

    const double scale_sq = mad_scale_sq(proj);
    const auto [stat, bound] = statistic(proj, scale_sq, last_top);
    if (stat <= slack * bound) return;

    const Index budget = cap - static_cast<Index>(removed.size());
    if (budget <= 0) {
      capped = true;
      return;
    }
    // tail mass proportional to the relative excess, in units of eps*n
    const double excess = std::min(1.0, (stat - slack * bound) / stat);
    auto r = static_cast<Index>(std::ceil(0.5 * excess * eps * n0));
    r = std::clamp<Index>(r, 1, budget);
    r = std::min<Index>(r, static_cast<Index>(idx.size()) - 1);
    if (r <= 0) {
      capped = true;
      return;
    }

    std::vector<std::size_t> order(idx.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r),
                     order.end(), [&](std::size_t a, std::size_t b) {
                       return proj[a] * proj[a] > proj[b] * proj[b];
                     });
    std::vector<std::size_t> doomed(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r));
    std::sort(doomed.begin(), doomed.end(), std::greater<>());
    for (std::size_t k : doomed) {
      removed.push_back(idx[k]);
      idx[k] = idx.back();
      idx.pop_back();
    }
  }
  capped = true;
}

}  // namespace

RobustMeanReport robust_mean(const SampleView& s, double eps, const FilterParams& params) {
  if (eps < 0.0 || eps >= 0.25) throw std::invalid_argument("robust_mean: eps must be in [0, 1/4)");
  std::vector<Index> idx = active_indices(s);
  const Index min_pts = std::max<Index>(s.d() + 1, 10);
  if (static_cast<Index>(idx.size()) < min_pts)
    throw std::invalid_argument("robust_mean: too few active points");

  RobustMeanReport rep;
  if (eps == 0.0) {
    const MeanCov mc = mean_cov(*s.points, idx);
    rep.estimate = mc.mean;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mc.cov);
    rep.final_top_eigenvalue = eig.eigenvalues()[s.d() - 1];
    return rep;
  }

  filter_loop(
      *s.points, idx, eps, params,
      [](const std::vector<double>&, double scale_sq, double top_eig) {
        return std::pair<double, double>{top_eig, scale_sq};
      },
      rep.filter_iterations, rep.removed_indices, rep.capped, rep.final_top_eigenvalue);

  rep.estimate = mean_cov(*s.points, idx).mean;
  return rep;
}

RobustCovarianceReport robust_covariance(const SampleView& s, double eps,
                                         const FilterParams& params) {
  if (eps < 0.0 || eps >= 0.25)
    throw std::invalid_argument("robust_covariance: eps must be in [0, 1/4)");
  std::vector<Index> idx = active_indices(s);
  const Index min_pts = std::max<Index>(s.d() + 1, 10);
  if (static_cast<Index>(idx.size()) < min_pts)
    throw std::invalid_argument("robust_covariance: too few active points");

  RobustCovarianceReport rep;
  if (eps > 0.0) {
    double last_top = 0.0;
    filter_loop(
        *s.points, idx, eps, params,
        [](const std::vector<double>& proj, double scale_sq, double) {
          double m4 = 0.0;
          for (double p : proj) m4 += p * p * p * p;
          m4 /= static_cast<double>(proj.size());
          // 3 sigma^4 bounds the fourth moment of the flat-ish inlier marginals
          return std::pair<double, double>{m4, 3.0 * scale_sq * scale_sq};
        },
        rep.filter_iterations, rep.removed_indices, rep.capped, last_top);
  }

  rep.covariance = mean_cov(*s.points, idx).cov;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rep.covariance);
  if (eig.eigenvalues()[0] <= 0.0)
    throw std::runtime_error("robust_covariance: result not positive definite");
  return rep;
}

// --- warm start ---------------------------------------------------------------

double directional_fourth_moment(const SampleView& s, const Vector& u, double trim) {
  if (!is_unit(u, 1e-9)) throw std::invalid_argument("directional_fourth_moment: non-unit u");
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(s.n()));
  const Vector proj = (*s.points) * u;
  for (Index i = 0; i < s.n(); ++i)
    if (s.is_active(i)) {
      const double p = proj[i];
      vals.push_back(p * p * p * p);
    }
  if (vals.empty()) throw std::invalid_argument("directional_fourth_moment: no active points");
  std::size_t keep = vals.size();
  if (trim > 0.0) {
    const auto drop = static_cast<std::size_t>(std::ceil(trim * static_cast<double>(vals.size())));
    keep = vals.size() - std::min(drop, vals.size() - 1);
    std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(keep), vals.end());
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < keep; ++k) sum += vals[k];
  return sum / static_cast<double>(keep);
}

namespace {

// fourth moment of projections and its Euclidean gradient
std::pair<double, Vector> m4_grad(const Matrix& z, const Vector& u) {
  const Index n = z.rows();
  const Vector proj = z * u;
  double f = 0.0;
  Vector g = Vector::Zero(z.cols());
  for (Index i = 0; i < n; ++i) {
    const double p = proj[i];
    const double p2 = p * p;
    f += p2 * p2;
    g.noalias() += (4.0 * p2 * p) * z.row(i).transpose();
  }
  f /= static_cast<double>(n);
  g /= static_cast<double>(n);
  return {f, std::move(g)};
}

Vector project_out(const Vector& v, const std::vector<Vector>& basis) {
  Vector out = v;
  for (const auto& b : basis) out -= b.dot(out) * b;
  return out;
}

}  // namespace

WarmStartReport warm_start(const SampleView& s, double eps, WarmStartMode mode,
                           const WarmStartParams& params, std::uint64_t seed,
                           const Parallelopiped* oracle_truth, double oracle_delta) {
  const int d = s.d();
  WarmStartReport rep;
  rep.mode = mode;
  rep.per_row_alignment = Vector::Constant(d, std::numeric_limits<double>::quiet_NaN());

  if (mode == WarmStartMode::oracle) {
    if (oracle_truth == nullptr)
      throw std::invalid_argument("warm_start: oracle mode requires oracle_truth");
    if (oracle_delta < 0.0 || oracle_delta >= 2.0)
      throw std::invalid_argument("warm_start: oracle_delta must be in [0, 2)");
    Rng rng(seed);
    rep.normals = Matrix(d, d);
    // rotate each true row by the exact chord distance oracle_delta
    const double theta = 2.0 * std::asin(oracle_delta / 2.0);
    for (int i = 0; i < d; ++i) {
      const Vector a = oracle_truth->normals.row(i).transpose();
      Vector g(d);
      if (d == 1) {
        rep.normals.row(i) = a.transpose();
        rep.per_row_alignment[i] = 1.0;
        continue;
      }
      do {
        for (int c = 0; c < d; ++c) g[c] = rng.normal();
        g -= g.dot(a) * a;
      } while (g.norm() < 1e-12);
      g.normalize();
      const Vector row = std::cos(theta) * a + std::sin(theta) * g;
      rep.normals.row(i) = row.transpose();
      rep.per_row_alignment[i] = std::cos(theta) * std::cos(theta);
    }
    return rep;
  }

  // moment mode: center and whiten internally, then minimize the trimmed
  // directional fourth moment (flat marginals make component directions the
  // minimizers); deflation keeps rows orthogonal in the whitened frame
  const auto mean_rep = robust_mean(s, eps, params.filter);
  const auto cov_rep = robust_covariance(s, eps, params.filter);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_rep.covariance);
  if (eig.eigenvalues()[0] <= 0.0) throw std::runtime_error("warm_start: whitening failure");
  const Matrix whiten = eig.eigenvectors() *
                        eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                        eig.eigenvectors().transpose();

  std::vector<Index> idx = active_indices(s);
  Rng rng(seed);
  if (params.subsample > 0 && static_cast<Index>(idx.size()) > params.subsample) {
    // deterministic partial shuffle, then keep the prefix
    for (Index i = 0; i < params.subsample; ++i) {
      const auto j =
          i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(idx.size()) - i));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(params.subsample));
  }
  Matrix z0(idx.size(), d);
  for (std::size_t k = 0; k < idx.size(); ++k)
    z0.row(k) = (whiten * (s.point(idx[k]).transpose() - mean_rep.estimate)).transpose();

  // trim by norm, once: whitened inliers live inside radius ~ sqrt(3d), so the
  // largest-norm slice holds the outliers while the survivors keep the clean
  // fourth-moment landscape in every direction
  const double trim = params.trim < 0.0 ? std::max(2.0 * eps, 0.01) : params.trim;
  Matrix z;
  {
    const Index nz = z0.rows();
    const auto drop = std::min<Index>(
        static_cast<Index>(std::ceil(trim * static_cast<double>(nz))), nz - 1);
    std::vector<Index> order(static_cast<std::size_t>(nz));
    std::iota(order.begin(), order.end(), Index{0});
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nz - drop),
                     order.end(), [&](Index a, Index b) {
                       return z0.row(a).squaredNorm() < z0.row(b).squaredNorm();
                     });
    z.resize(nz - drop, d);
    for (Index k = 0; k < nz - drop; ++k) z.row(k) = z0.row(order[static_cast<std::size_t>(k)]);
  }

  std::vector<Vector> found;
  rep.normals = Matrix(d, d);

  for (int row = 0; row < d; ++row) {
    Vector best_u;
    double best_f = std::numeric_limits<double>::infinity();
    const int restarts = row + 1 < d ? params.restarts : 1;  // last row is determined
    for (int r = 0; r < restarts; ++r) {
      Vector u(d);
      do {
        for (int c = 0; c < d; ++c) u[c] = rng.normal();
        u = project_out(u, found);
      } while (u.norm() < 1e-9);
      u.normalize();

      double step = params.initial_step;
      auto [f, g] = trimmed_m4_grad(z, u, trim);
      for (int it = 0; it < params.iterations; ++it) {
        Vector dir = project_out(g, found);
        dir -= dir.dot(u) * u;
        const double dn = dir.norm();
        if (dn < 1e-13) break;
        dir /= dn;
        bool accepted = false;
        for (int bt = 0; bt < 25; ++bt) {
          Vector cand = u - step * dir;
          cand = project_out(cand, found);
          if (cand.norm() < 1e-12) break;
          cand.normalize();
          auto [fc, gc] = trimmed_m4_grad(z, cand, trim);
          if (fc < f) {
            u = cand;
            f = fc;
            g = gc;
            step *= 1.3;
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        if (!accepted || step < 1e-12) break;
      }
      if (f < best_f) {
        best_f = f;
        best_u = u;
      }
      ++rep.restarts_used;
    }
    if (!best_u.size()) {
      rep.converged = false;
      best_u = Vector::Unit(d, row);
    }
    found.push_back(best_u);
  }

  // map whitened directions back to input-frame facet normals
  for (int i = 0; i < d; ++i) {
    Vector w = whiten.transpose() * found[static_cast<std::size_t>(i)];
    w.normalize();
    rep.normals.row(i) = w.transpose();
  }

  if (oracle_truth != nullptr) {
    // evaluation-only alignment diagnostics against the matched truth rows
    for (int i = 0; i < d; ++i) {
      double best = 0.0;
      for (int j = 0; j < d; ++j) {
        const double ip = rep.normals.row(i).dot(oracle_truth->normals.row(j));
        best = std::max(best, ip * ip);
      }
      rep.per_row_alignment[i] = best;
    }
  }
  return rep;
}

}  // namespace cubefit
