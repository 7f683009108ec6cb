#include "cubefit/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cubefit {

namespace {

Index count_escapes(const SampleView& s, const Vector& a, double threshold) {
  const Vector proj = (*s.points) * a;
  Index c = 0;
  for (Index i = 0; i < s.n(); ++i)
    if (s.is_active(i) && std::abs(proj[i]) > threshold) ++c;
  return c;
}

}  // namespace

double escape_fraction(const SampleView& s, const Matrix& rows, double threshold) {
  const Matrix proj = (*s.points) * rows.transpose();
  Index esc = 0, act = 0;
  for (Index i = 0; i < s.n(); ++i) {
    if (!s.is_active(i)) continue;
    ++act;
    for (Index r = 0; r < rows.rows(); ++r) {
      if (std::abs(proj(i, r)) > threshold) {
        ++esc;
        break;
      }
    }
  }
  return act == 0 ? 0.0 : static_cast<double>(esc) / static_cast<double>(act);
}

std::vector<Index> band_intersection_filter(SampleView& s, const Vector& a_current,
                                            const std::vector<Vector>& fixed_rows,
                                            double c1, double threshold, Index n_total) {
  if (!is_unit(a_current, 1e-9))
    throw std::invalid_argument("band_intersection_filter: non-unit direction");
  std::vector<Index> removed;
  if (fixed_rows.empty() || n_total == 0) return removed;

  const double nn = static_cast<double>(n_total);
  const SlabSet cur = slab_outside(s, a_current, threshold);
  if (cur.empty()) return removed;

  for (const Vector& fixed : fixed_rows) {
    const SlabSet other = slab_outside(s, fixed, threshold);
    if (other.empty()) continue;
    // same-sign membership marks a shared symmetrized point
    std::vector<std::int8_t> sign_of(static_cast<std::size_t>(s.n()), 0);
    for (std::size_t k = 0; k < other.size(); ++k)
      sign_of[static_cast<std::size_t>(other.indices[k])] = other.signs[k];
    std::vector<Index> inter;
    for (std::size_t k = 0; k < cur.size(); ++k) {
      const Index idx = cur.indices[k];
      if (sign_of[static_cast<std::size_t>(idx)] == cur.signs[k]) inter.push_back(idx);
    }
    const double lhs = static_cast<double>(inter.size()) / nn;
    const double rhs = 2.0 * c1 * (static_cast<double>(cur.size()) / nn) *
                       (static_cast<double>(other.size()) / nn);
    if (lhs > rhs) {
      for (Index idx : inter) {
        if (s.is_active(idx)) {
          s.deactivate(idx);
          removed.push_back(idx);
        }
      }
    }
  }
  return removed;
}

GdStepResult robust_gd_step(const SampleView& s, const Vector& a, double threshold,
                            double eps_local, const RotationConfig& cfg, Index n_total) {
  if (!is_unit(a, 1e-9)) throw std::invalid_argument("robust_gd_step: non-unit direction");
  GdStepResult out;
  out.a_next = a;
  out.eps_local = eps_local;

  const SlabSet slab = slab_outside(s, a, threshold);
  out.slab_size = static_cast<Index>(slab.size());
  if (slab.empty()) {
    out.converged_empty = true;
    return out;
  }

  // symmetrized slab points; the robust mean sees sign * x
  Matrix pts(slab.size(), s.d());
  for (std::size_t k = 0; k < slab.size(); ++k)
    pts.row(static_cast<Index>(k)) =
        static_cast<double>(slab.signs[k]) * s.point(slab.indices[k]);

  Vector mu;
  if (static_cast<Index>(slab.size()) < std::max<Index>(s.d() + 1, 10)) {
    // too small for the filter; plain mean of the handful of points
    mu = pts.colwise().mean().transpose();
  } else {
    SampleView slab_view{&pts, std::vector<std::uint8_t>(slab.size(), 1)};
    mu = robust_mean(slab_view, std::min(eps_local, 0.2499), cfg.filter).estimate;
  }

  out.mu_norm = mu.norm();
  if (out.mu_norm < cfg.mu_norm_floor) {
    out.degenerate = true;
    return out;
  }

  const double beta_raw = cfg.c2 * static_cast<double>(slab.size()) /
                          (out.mu_norm * out.mu_norm * static_cast<double>(n_total));
  out.beta = std::clamp(beta_raw, 0.0, cfg.beta_max);
  Vector next = a - out.beta * mu;
  const double nn = next.norm();
  if (nn < 1e-12) {
    out.degenerate = true;
    return out;
  }
  out.a_next = next / nn;
  return out;
}

RowTrace improve_row(const SampleView& s, const Vector& a0,
                     const std::vector<Vector>& fixed_rows, double eps,
                     const RotationConfig& cfg) {
  if (!is_unit(a0, 1e-9)) throw std::invalid_argument("improve_row: non-unit start");
  const int d = s.d();
  const Index n_total = s.active_count();

  RowTrace trace;
  trace.a0 = a0;
  trace.escape0 = count_escapes(s, a0, cfg.threshold);
  trace.best_t = 0;
  trace.best_escape = trace.escape0;

  const double theory_cap = 4096.0 * d * std::log(std::max(2, d));
  const int T = std::min<int>(cfg.iter_cap, static_cast<int>(std::ceil(theory_cap)));

  SampleView work{s.points, s.active};  // private mask; filter removals are restored below
  Vector a = a0;
  const double outlier_budget = eps * static_cast<double>(n_total);

  for (int t = 1; t <= T; ++t) {
    const std::vector<Index> removed =
        band_intersection_filter(work, a, fixed_rows, cfg.c1, cfg.threshold, n_total);

    const SlabSet slab = slab_outside(work, a, cfg.threshold);
    const double eps_local =
        slab.empty() ? 0.0
                     : std::min(cfg.eps_local_cap,
                                outlier_budget / static_cast<double>(slab.size()));
    const GdStepResult step =
        robust_gd_step(work, a, cfg.threshold, eps_local, cfg, n_total);

    for (Index idx : removed) work.reactivate(idx);

    if (step.converged_empty) {
      trace.converged_empty = true;
      break;
    }
    if (step.degenerate) {
      trace.failed = true;
      break;
    }

    a = step.a_next;
    RowIteration it;
    it.a = a;
    it.beta = step.beta;
    it.slab_size = step.slab_size;
    it.filtered = static_cast<Index>(removed.size());
    it.escape_count = count_escapes(work, a, cfg.threshold);
    trace.steps.push_back(std::move(it));
    if (trace.steps.back().escape_count < trace.best_escape) {
      trace.best_escape = trace.steps.back().escape_count;
      trace.best_t = t;
    }
    if (trace.best_escape == 0) break;
  }
  return trace;
}

RotationResult estimate_rotation(const SampleView& s, double eps,
                                 const RotationConfig& cfg, const WarmStartReport* warm,
                                 std::uint64_t warm_seed) {
  const int d = s.d();
  WarmStartReport local;
  if (warm == nullptr) {
    local = warm_start(s, eps, WarmStartMode::moment, WarmStartParams{}, warm_seed);
    warm = &local;
  }
  if (warm->normals.rows() != d)
    throw std::invalid_argument("estimate_rotation: warm start dimension mismatch");

  // model-sound entry clip: the rotated cube lies inside radius sqrt(d), so
  // far mass can never masquerade as slab density
  SampleView work{s.points, s.active};
  if (cfg.norm_clip_factor > 0.0) {
    const double clip =
        cfg.norm_clip_factor * std::sqrt(static_cast<double>(d)) * cfg.threshold;
    for (Index p = 0; p < work.n(); ++p)
      if (work.is_active(p) && work.point(p).norm() > clip) work.deactivate(p);
  }

  RotationTrace trace;
  std::vector<Vector> fixed;
  Matrix rows(d, d);
  for (int i = 0; i < d; ++i) {
    RowTrace rt = improve_row(work, warm->normals.row(i).transpose(), fixed, eps, cfg);
    const Vector best =
        rt.best_t == 0 ? rt.a0 : rt.steps[static_cast<std::size_t>(rt.best_t - 1)].a;
    rows.row(i) = best.transpose();
    fixed.push_back(best);
    trace.rows.push_back(std::move(rt));
  }
  Parallelopiped body(rows, Vector::Constant(d, -cfg.threshold),
                      Vector::Constant(d, cfg.threshold));
  return RotationResult{std::move(body), std::move(trace)};
}

}  // namespace cubefit
