#include "cubefit/affine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cubefit/rng.hpp"

namespace cubefit {

Parallelopiped transform_body(const Parallelopiped& body, const AffineMap& map) {
  return Parallelopiped::from_affine(map.compose(body.to_affine()));
}

NormalizedFrame normalize_frame(const SampleView& s, const Vector& mean,
                                const Matrix& cov) {
  if (mean.size() != s.d() || cov.rows() != s.d() || cov.cols() != s.d())
    throw std::invalid_argument("normalize_frame: shape mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.eigenvalues()[0] <= 0.0)
    throw std::invalid_argument("normalize_frame: covariance not positive definite");
  const Matrix whiten = eig.eigenvectors() *
                        eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                        eig.eigenvectors().transpose();
  AffineMap map(whiten, Vector(-whiten * mean));
  NormalizedFrame out{map.apply_rows(*s.points), std::move(map)};
  return out;
}

namespace {

double inside_fraction_of(const Matrix& pts, const std::vector<std::uint8_t>& active,
                          const Matrix& normals, const Vector& lower,
                          const Vector& upper) {
  const Matrix proj = pts * normals.transpose();
  Index inside = 0, act = 0;
  for (Index p = 0; p < pts.rows(); ++p) {
    if (!active[static_cast<std::size_t>(p)]) continue;
    ++act;
    bool in = true;
    for (Index i = 0; i < normals.rows() && in; ++i) {
      const double tol =
          kMembershipRtol * std::max({1.0, std::abs(lower[i]), std::abs(upper[i])});
      if (proj(p, i) < lower[i] - tol || proj(p, i) > upper[i] + tol) in = false;
    }
    if (in) ++inside;
  }
  return act == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(act);
}

}  // namespace

AffineResult estimate_affine(const SampleView& s, double eps, const AffineConfig& cfg,
                             std::uint64_t seed, const Parallelopiped* oracle_truth) {
  if (eps < cfg.eps_min || eps > cfg.eps_max)
    throw std::invalid_argument("estimate_affine: eps outside [eps_min, eps_max]");
  const int d = s.d();

  // step 1: robust location/scale and the whitening frame
  const auto mean_rep = robust_mean(s, eps, cfg.filter);
  const auto cov_rep = robust_covariance(s, eps, cfg.filter);
  NormalizedFrame frame = normalize_frame(s, mean_rep.estimate, cov_rep.covariance);
  SampleView y{&frame.points, s.active};

  // step 2: warm start for the rotation rows, in the whitened frame
  WarmStartReport warm;
  if (cfg.warm_mode == WarmStartMode::oracle) {
    if (oracle_truth == nullptr)
      throw std::invalid_argument("estimate_affine: oracle warm start needs truth");
    const Parallelopiped truth_y = transform_body(*oracle_truth, frame.map);
    warm = warm_start(y, eps, WarmStartMode::oracle, cfg.warm,
                      seed_split(seed, 1), &truth_y, cfg.oracle_delta);
  } else {
    warm = warm_start(y, eps, WarmStartMode::moment, cfg.warm, seed_split(seed, 1));
  }

  AffineResult res{Parallelopiped::standard_cube(d), frame.map, {}, 0, false,
                   warm.restarts_used, static_cast<Index>(mean_rep.removed_indices.size()),
                   static_cast<Index>(cov_rep.removed_indices.size())};

  Matrix normals = warm.normals;
  int cap = cfg.round_cap_override > 0
                ? cfg.round_cap_override
                : static_cast<int>(std::ceil(cfg.round_cap_factor *
                                             std::log(std::max(2.0, d / eps))));
  const double stop_at = 1.0 - cfg.c_stop * eps;
  double best_inside = -1.0;

  for (int round = 0; round < cap; ++round) {
    // (a) certificate fitting of the per-direction ranges
    const Matrix proj = frame.points * normals.transpose();
    ShiftScaleResult ss = estimate_shift_scale_coords(proj, y.active, eps, cfg.shift);

    // (b) rotation refinement in the frame where the fitted box is standard
    const Vector sides = ss.box.upper - ss.box.lower;
    const Vector mid = 0.5 * (ss.box.upper + ss.box.lower);
    Matrix w_pts(proj.rows(), d);
    for (int c = 0; c < d; ++c)
      w_pts.col(c) = (proj.col(c).array() - mid[c]) * (2.0 / sides[c]);
    SampleView w_view{&w_pts, y.active};

    WarmStartReport identity_warm;
    identity_warm.mode = WarmStartMode::oracle;
    identity_warm.normals = Matrix::Identity(d, d);
    identity_warm.per_row_alignment = Vector::Ones(d);
    RotationResult rot = estimate_rotation(w_view, eps, cfg.rot, &identity_warm);

    // fold the rescale map and the new rotation back into y-frame normals:
    // w = D A y - D m, so a w-space row r becomes the y-space direction
    // (D A)^T r and offsets -1/+1 shift by r . D m
    const Matrix t_lin =
        Vector(2.0 / sides.array()).asDiagonal() * normals;  // w = t_lin y - D m
    const Vector dm = Vector((2.0 / sides.array()) * mid.array());
    Matrix new_normals(d, d);
    Vector lo(d), up(d);
    for (int i = 0; i < d; ++i) {
      const Vector r = rot.body.normals.row(i).transpose();
      Vector g = t_lin.transpose() * r;
      const double gn = g.norm();
      if (gn < 1e-12) throw std::runtime_error("estimate_affine: degenerate round map");
      const double c = r.dot(dm);
      new_normals.row(i) = (g / gn).transpose();
      lo[i] = (-1.0 + c) / gn;
      up[i] = (1.0 + c) / gn;
    }
    normals = new_normals;

    AffineRound snap{normals, lo, up,
                     inside_fraction_of(frame.points, y.active, normals, lo, up)};
    res.rounds.push_back(snap);
    if (snap.inside_fraction >= best_inside) {
      best_inside = snap.inside_fraction;
      res.best_round = round;
    }
    if (snap.inside_fraction >= stop_at) {
      res.stopped_early = true;
      break;
    }
  }

  const AffineRound& best = res.rounds[static_cast<std::size_t>(res.best_round)];
  Parallelopiped body_y(best.normals, best.lower, best.upper);
  res.body = transform_body(body_y, res.frame.inverse());
  return res;
}

}  // namespace cubefit
