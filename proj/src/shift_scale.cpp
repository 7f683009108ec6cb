#include "cubefit/shift_scale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cubefit {

namespace {

constexpr double kCountSlack = 1e-9;  // guards integer-vs-threshold float compares

double upper_threshold(const AxisBox& box, double eps, int d, int i, int k) {
  return box.upper[i] - (static_cast<double>(k) * eps / d) * box.side(i);
}

double lower_threshold(const AxisBox& box, double eps, int d, int i, int k) {
  return box.lower[i] + (static_cast<double>(k) * eps / d) * box.side(i);
}

AxisBox range_find_coords(const Matrix& coords, const std::vector<std::uint8_t>& active,
                          double eps, const ShiftScaleConfig& cfg) {
  const int d = static_cast<int>(coords.cols());
  Index n_act = 0;
  for (auto a : active) n_act += (a != 0);
  const auto w = static_cast<Index>(std::ceil((0.5 + eps) * static_cast<double>(n_act)));
  if (w < 2 || n_act < w) throw std::invalid_argument("robust_range_find: too few points");
  Vector lo(d), hi(d);
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(n_act));
  for (int c = 0; c < d; ++c) {
    vals.clear();
    for (Index i = 0; i < coords.rows(); ++i)
      if (active[static_cast<std::size_t>(i)]) vals.push_back(coords(i, c));
    std::sort(vals.begin(), vals.end());
    double best_len = std::numeric_limits<double>::infinity();
    Index best_start = 0;
    for (Index s = 0; s + w <= static_cast<Index>(vals.size()); ++s) {
      const double len = vals[static_cast<std::size_t>(s + w - 1)] -
                         vals[static_cast<std::size_t>(s)];
      if (len < best_len) {
        best_len = len;
        best_start = s;
      }
    }
    if (best_len <= 0.0)
      throw std::runtime_error("robust_range_find: degenerate (zero-length) window");
    const double wlo = vals[static_cast<std::size_t>(best_start)];
    const double whi = vals[static_cast<std::size_t>(best_start + w - 1)];
    const double center = 0.5 * (wlo + whi);
    const double half = 0.5 * cfg.expand_factor * best_len;
    lo[c] = center - half;
    hi[c] = center + half;
  }
  return AxisBox(std::move(lo), std::move(hi));
}

// --- the certificate engine -------------------------------------------------
//
// Runs on an n x d matrix of scalar coordinates (the points themselves, or
// projections onto the current normals in the general pipeline). Keeps one
// sorted array per coordinate for the 1-d counts; the arrays are rebuilt only
// when a 2-d violation deletes points.
class Engine {
 public:
  Engine(const Matrix& coords, std::vector<std::uint8_t> active, double eps,
         const ShiftScaleConfig& cfg)
      : coords_(coords),
        active_(std::move(active)),
        eps_(eps),
        cfg_(cfg),
        d_(static_cast<int>(coords.cols())) {
    n0_ = 0;
    for (auto a : active_) n0_ += (a != 0);
  }

  ShiftScaleResult run() {
    {
      const AxisBox box = range_find_coords(coords_, active_, eps_, cfg_);
      lower_ = box.lower;
      upper_ = box.upper;
    }
    ShiftScaleState st(boxed(), eps_, n0_);
    st.two_d_factor = cfg_.two_d_factor;
    // the initial box contains the truth whp, so points outside it are
    // outliers; drop them or far mass would keep the one-sided slab counts
    // satisfied forever
    for (Index p = 0; p < coords_.rows(); ++p) {
      if (!active_[static_cast<std::size_t>(p)]) continue;
      bool in = true;
      for (int c = 0; c < d_ && in; ++c)
        if (coords_(p, c) < lower_[c] || coords_(p, c) > upper_[c]) in = false;
      if (!in) {
        active_[static_cast<std::size_t>(p)] = 0;
        st.range_filtered.push_back(p);
      }
    }
    rebuild_sorted();

    const auto iter_cap =
        static_cast<int>(std::ceil(cfg_.iter_cap_factor * d_ * d_ / eps_));
    const auto del_cap = static_cast<Index>(
        std::floor(cfg_.deletion_cap_factor * eps_ * static_cast<double>(n0_)));

    while (st.iterations < iter_cap) {
      if (one_d_update()) {
        ++st.iterations;
        continue;
      }
      Violation v = find_two_d_violation();
      if (!v.found) {
        st.ok = true;
        break;
      }
      const auto used = static_cast<Index>(st.deletions.size());
      if (used >= del_cap) {
        st.deletion_capped = true;
        st.ok = verify();
        break;
      }
      const Index budget = del_cap - used;
      if (static_cast<Index>(v.indices.size()) > budget)
        v.indices.resize(static_cast<std::size_t>(budget));
      for (Index idx : v.indices) {
        active_[static_cast<std::size_t>(idx)] = 0;
        st.deletions.push_back({idx, v.i, v.j, v.k1, v.k2});
      }
      rebuild_sorted();
      ++st.iterations;
    }
    if (st.iterations >= iter_cap && !st.ok) {
      st.iteration_capped = true;
      st.ok = verify();
    }
    st.box = boxed();
    return ShiftScaleResult{st.box, std::move(st)};
  }

 private:
  struct Violation {
    bool found = false;
    int i = 0, j = 0, k1 = 0, k2 = 0;
    std::vector<Index> indices;
  };

  AxisBox boxed() const { return AxisBox(lower_, upper_); }

  void rebuild_sorted() {
    sorted_.assign(static_cast<std::size_t>(d_), {});
    for (int c = 0; c < d_; ++c) {
      auto& v = sorted_[static_cast<std::size_t>(c)];
      v.reserve(static_cast<std::size_t>(coords_.rows()));
      for (Index i = 0; i < coords_.rows(); ++i)
        if (active_[static_cast<std::size_t>(i)]) v.push_back(coords_(i, c));
      std::sort(v.begin(), v.end());
    }
  }

  Index count_upper(int i, double thr) const {
    const auto& v = sorted_[static_cast<std::size_t>(i)];
    return static_cast<Index>(v.end() - std::lower_bound(v.begin(), v.end(), thr));
  }

  Index count_lower(int i, double thr) const {
    const auto& v = sorted_[static_cast<std::size_t>(i)];
    return static_cast<Index>(std::upper_bound(v.begin(), v.end(), thr) - v.begin());
  }

  double required(int k) const {
    return static_cast<double>(k) * eps_ / (2.0 * d_) * static_cast<double>(n0_);
  }

  double two_d_threshold(int k1, int k2) const {
    return cfg_.two_d_factor * k1 * k2 * eps_ * eps_ /
           (static_cast<double>(d_) * d_) * static_cast<double>(n0_);
  }

  // first failing slab, scanning k from the deepest down so one update makes
  // the largest certified move; returns true if a boundary moved
  bool one_d_update() {
    const AxisBox box = boxed();
    for (int i = 0; i < d_; ++i) {
      for (int k = d_; k >= 1; --k) {
        if (static_cast<double>(count_upper(i, upper_threshold(box, eps_, d_, i, k))) +
                kCountSlack < required(k)) {
          upper_[i] -= (static_cast<double>(k) * eps_ / d_) * box.side(i);
          return true;
        }
      }
    }
    for (int i = 0; i < d_; ++i) {
      for (int k = d_; k >= 1; --k) {
        if (static_cast<double>(count_lower(i, lower_threshold(box, eps_, d_, i, k))) +
                kCountSlack < required(k)) {
          lower_[i] += (static_cast<double>(k) * eps_ / d_) * box.side(i);
          return true;
        }
      }
    }
    return false;
  }

  // smallest k with the point inside the depth-k top (resp. bottom) slab;
  // d_+1 when outside all of them
  int bucket_upper(const AxisBox& box, int i, double c) const {
    for (int k = 1; k <= d_; ++k)
      if (c >= upper_threshold(box, eps_, d_, i, k)) return k;
    return d_ + 1;
  }

  int bucket_lower(const AxisBox& box, int i, double c) const {
    for (int k = 1; k <= d_; ++k)
      if (c <= lower_threshold(box, eps_, d_, i, k)) return k;
    return d_ + 1;
  }

  Violation find_two_d_violation() {
    const AxisBox box = boxed();
    const int nb = d_ + 2;
    const auto n = coords_.rows();
    std::vector<int> bu(static_cast<std::size_t>(n) * d_);
    std::vector<int> bl(static_cast<std::size_t>(n) * d_);
    for (Index p = 0; p < n; ++p) {
      if (!active_[static_cast<std::size_t>(p)]) continue;
      for (int c = 0; c < d_; ++c) {
        bu[static_cast<std::size_t>(p) * d_ + c] = bucket_upper(box, c, coords_(p, c));
        bl[static_cast<std::size_t>(p) * d_ + c] = bucket_lower(box, c, coords_(p, c));
      }
    }
    std::vector<std::int64_t> hist;
    Violation v;
    for (int i = 0; i < d_ && !v.found; ++i) {
      for (int j = i + 1; j < d_ && !v.found; ++j) {
        for (int combo = 0; combo < 4 && !v.found; ++combo) {
          hist.assign(static_cast<std::size_t>(nb) * nb, 0);
          for (Index p = 0; p < n; ++p) {
            if (!active_[static_cast<std::size_t>(p)]) continue;
            const int b1 = (combo & 2) ? bl[static_cast<std::size_t>(p) * d_ + i]
                                       : bu[static_cast<std::size_t>(p) * d_ + i];
            const int b2 = (combo & 1) ? bl[static_cast<std::size_t>(p) * d_ + j]
                                       : bu[static_cast<std::size_t>(p) * d_ + j];
            ++hist[static_cast<std::size_t>(b1 - 1) * nb + (b2 - 1)];
          }
          // prefix sums turn the bucket histogram into intersection counts
          for (int a = 0; a < nb; ++a)
            for (int b = 1; b < nb; ++b)
              hist[static_cast<std::size_t>(a) * nb + b] +=
                  hist[static_cast<std::size_t>(a) * nb + b - 1];
          for (int b = 0; b < nb; ++b)
            for (int a = 1; a < nb; ++a)
              hist[static_cast<std::size_t>(a) * nb + b] +=
                  hist[static_cast<std::size_t>(a - 1) * nb + b];
          for (int k1 = 1; k1 <= d_ && !v.found; ++k1) {
            for (int k2 = 1; k2 <= d_ && !v.found; ++k2) {
              const auto count = hist[static_cast<std::size_t>(k1 - 1) * nb + (k2 - 1)];
              if (static_cast<double>(count) > two_d_threshold(k1, k2) + kCountSlack) {
                v.found = true;
                v.i = i;
                v.j = j;
                v.k1 = k1;
                v.k2 = k2;
                for (Index p = 0; p < n; ++p) {
                  if (!active_[static_cast<std::size_t>(p)]) continue;
                  const int b1 = (combo & 2) ? bl[static_cast<std::size_t>(p) * d_ + i]
                                             : bu[static_cast<std::size_t>(p) * d_ + i];
                  const int b2 = (combo & 1) ? bl[static_cast<std::size_t>(p) * d_ + j]
                                             : bu[static_cast<std::size_t>(p) * d_ + j];
                  if (b1 <= k1 && b2 <= k2) v.indices.push_back(p);
                }
              }
            }
          }
        }
      }
    }
    return v;
  }

  bool verify() {
    const AxisBox box = boxed();
    for (int i = 0; i < d_; ++i)
      for (int k = 1; k <= d_; ++k) {
        if (static_cast<double>(count_upper(i, upper_threshold(box, eps_, d_, i, k))) +
                kCountSlack < required(k))
          return false;
        if (static_cast<double>(count_lower(i, lower_threshold(box, eps_, d_, i, k))) +
                kCountSlack < required(k))
          return false;
      }
    return !find_two_d_violation().found;
  }

  const Matrix& coords_;
  std::vector<std::uint8_t> active_;
  double eps_;
  ShiftScaleConfig cfg_;
  int d_;
  Index n0_ = 0;
  Vector lower_, upper_;
  std::vector<std::vector<double>> sorted_;
};

void check_eps(double eps, const ShiftScaleConfig& cfg) {
  if (eps < cfg.eps_min || eps > cfg.eps_max)
    throw std::invalid_argument("shift_scale: eps outside [eps_min, eps_max]");
}

void check_n(Index n_act, int d, double eps, const ShiftScaleConfig& cfg) {
  const auto n_min =
      static_cast<Index>(std::ceil(cfg.n_min_factor * d * d / (eps * eps)));
  if (n_act < n_min) throw std::invalid_argument("shift_scale: fewer than n_min points");
}

}  // namespace

AxisBox robust_range_find(const SampleView& s, double eps, const ShiftScaleConfig& cfg) {
  return range_find_coords(*s.points, s.active, eps, cfg);
}

OneDCheckResult one_d_density_check(const SampleView& s, const ShiftScaleState& st,
                                    int i, int k) {
  const int d = s.d();
  if (i < 0 || i >= d || k < 1 || k > d)
    throw std::invalid_argument("one_d_density_check: index out of range");
  OneDCheckResult r;
  const double thr_up = upper_threshold(st.box, st.eps, d, i, k);
  const double thr_lo = lower_threshold(st.box, st.eps, d, i, k);
  for (Index p = 0; p < s.n(); ++p) {
    if (!s.is_active(p)) continue;
    const double c = (*s.points)(p, i);
    if (c >= thr_up) ++r.upper_count;
    if (c <= thr_lo) ++r.lower_count;
  }
  r.required = static_cast<double>(k) * st.eps / (2.0 * d) * static_cast<double>(st.n0);
  r.upper_ok = static_cast<double>(r.upper_count) + kCountSlack >= r.required;
  r.lower_ok = static_cast<double>(r.lower_count) + kCountSlack >= r.required;
  return r;
}

TwoDCheckResult two_d_density_check(const SampleView& s, const ShiftScaleState& st,
                                    int i, int j, int k1, int k2) {
  const int d = s.d();
  if (i == j) throw std::invalid_argument("two_d_density_check: i == j");
  if (i < 0 || i >= d || j < 0 || j >= d || k1 < 1 || k1 > d || k2 < 1 || k2 > d)
    throw std::invalid_argument("two_d_density_check: index out of range");
  TwoDCheckResult r;
  r.threshold = st.two_d_factor * k1 * k2 * st.eps * st.eps /
                (static_cast<double>(d) * d) * static_cast<double>(st.n0);
  const double up_i = upper_threshold(st.box, st.eps, d, i, k1);
  const double lo_i = lower_threshold(st.box, st.eps, d, i, k1);
  const double up_j = upper_threshold(st.box, st.eps, d, j, k2);
  const double lo_j = lower_threshold(st.box, st.eps, d, j, k2);
  for (int combo = 0; combo < 4; ++combo) {
    std::vector<Index> members;
    for (Index p = 0; p < s.n(); ++p) {
      if (!s.is_active(p)) continue;
      const double ci = (*s.points)(p, i);
      const double cj = (*s.points)(p, j);
      const bool in_i = (combo & 2) ? (ci <= lo_i) : (ci >= up_i);
      const bool in_j = (combo & 1) ? (cj <= lo_j) : (cj >= up_j);
      if (in_i && in_j) members.push_back(p);
    }
    if (static_cast<double>(members.size()) > r.threshold + kCountSlack) {
      r.pass = false;
      for (Index m : members) r.violating.push_back(m);
    }
  }
  std::sort(r.violating.begin(), r.violating.end());
  r.violating.erase(std::unique(r.violating.begin(), r.violating.end()), r.violating.end());
  return r;
}

ShiftScaleResult estimate_shift_scale_coords(const Matrix& coords,
                                             const std::vector<std::uint8_t>& active,
                                             double eps, const ShiftScaleConfig& cfg) {
  check_eps(eps, cfg);
  Index n_act = 0;
  for (auto a : active) n_act += (a != 0);
  check_n(n_act, static_cast<int>(coords.cols()), eps, cfg);
  Engine eng(coords, active, eps, cfg);
  return eng.run();
}

ShiftScaleResult estimate_shift_scale(const SampleView& s, double eps,
                                      const ShiftScaleConfig& cfg) {
  return estimate_shift_scale_coords(*s.points, s.active, eps, cfg);
}

}  // namespace cubefit
