#include "cubefit/facts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cubefit/rng.hpp"

namespace cubefit {

namespace {

const int kDims[] = {2, 5, 10};

Vector random_unit(Rng& rng, int d) {
  Vector v(d);
  double n = 0.0;
  do {
    for (int c = 0; c < d; ++c) v[c] = rng.normal();
    n = v.norm();
  } while (n < 1e-12);
  return v / n;
}

// unit vector at exact chord distance delta from axis e_i
Vector off_axis(Rng& rng, int d, int axis, double delta) {
  const Vector e = Vector::Unit(d, axis);
  if (d == 1) return e;
  Vector g;
  do {
    g = random_unit(rng, d);
    g -= g.dot(e) * e;
  } while (g.norm() < 1e-9);
  g.normalize();
  const double theta = 2.0 * std::asin(delta / 2.0);
  return std::cos(theta) * e + std::sin(theta) * g;
}

double binom_se(double p, Index m) {
  return std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(m)) /
                   static_cast<double>(m));
}

std::string fmt(int d, double a, const char* an, double b = 0.0, const char* bn = nullptr) {
  std::ostringstream os;
  os << "d=" << d << " " << an << "=" << a;
  if (bn) os << " " << bn << "=" << b;
  return os.str();
}

// one uniform point of the standard cube per call, streamed
struct CubeStream {
  Rng rng;
  int d;
  Vector x;
  explicit CubeStream(std::uint64_t seed, int dim) : rng(seed), d(dim), x(dim) {}
  const Vector& next() {
    for (int c = 0; c < d; ++c) x[c] = rng.uniform(-1.0, 1.0);
    return x;
  }
};

}  // namespace

FactsReport run_facts_suite(std::uint64_t seed, Index budget, int configs_per_fact) {
  FactsReport rep;
  std::uint64_t stream = 0;
  auto next_seed = [&] { return seed_split(seed, stream++); };

  auto push = [&rep](FactResult r) {
    rep.all_pass = rep.all_pass && r.pass;
    rep.checks.push_back(std::move(r));
  };

  // --- escape fraction of {|x.a| > 1} for ||a - e_i|| = delta ------------------
  // delta stays in the warm-start regime (<= 0.1): the delta/5 lower constant
  // is tight as delta -> 0 and measurably fails past delta ~ 0.2
  for (int c = 0; c < configs_per_fact; ++c) {
    const int d = kDims[c % 3];
    Rng setup(next_seed());
    const double delta = setup.uniform(0.01, 0.1);
    const int axis = static_cast<int>(setup.below(static_cast<std::uint64_t>(d)));
    const Vector a = off_axis(setup, d, axis, delta);
    CubeStream cs(next_seed(), d);
    Index hit = 0;
    for (Index i = 0; i < budget; ++i)
      if (std::abs(cs.next().dot(a)) > 1.0) ++hit;
    FactResult r;
    r.name = "escape_fraction";
    r.detail = fmt(d, delta, "delta");
    r.value = static_cast<double>(hit) / static_cast<double>(budget);
    r.se = binom_se(r.value, budget);
    r.bound_lo = delta / 5.0;
    r.bound_hi = (1.0 + delta) * delta / 4.0;
    r.bounded_below = r.bounded_above = true;
    r.pass = r.value >= r.bound_lo - 3.0 * r.se && r.value <= r.bound_hi + 3.0 * r.se;
    push(std::move(r));
  }

  // --- slab mass on the volume-1 cube: frac(|x.a| > t/2) <= 1 - t --------------
  for (int c = 0; c < configs_per_fact; ++c) {
    const int d = kDims[c % 3];
    Rng setup(next_seed());
    const Vector a = random_unit(setup, d);
    const double ts[] = {0.1, 0.25, 0.4, 0.55, 0.7, 0.75};
    Index hits[6] = {0, 0, 0, 0, 0, 0};
    CubeStream cs(next_seed(), d);
    for (Index i = 0; i < budget; ++i) {
      const double p = std::abs(cs.next().dot(a)) * 0.5;  // rescale to side 1
      for (int k = 0; k < 6; ++k)
        if (p > ts[k] / 2.0) ++hits[k];
    }
    FactResult r;
    r.name = "slab_mass";
    r.detail = fmt(d, 0.75, "t_max");
    r.bounded_above = true;
    double worst = -1.0;
    bool pass = true;
    for (int k = 0; k < 6; ++k) {
      const double frac = static_cast<double>(hits[k]) / static_cast<double>(budget);
      const double se = binom_se(frac, budget);
      const double margin = frac - (1.0 - ts[k]);
      if (margin > worst) {
        worst = margin;
        r.value = frac;
        r.bound_hi = 1.0 - ts[k];
        r.se = se;
      }
      pass = pass && frac <= 1.0 - ts[k] + 3.0 * se;
    }
    r.pass = pass;
    push(std::move(r));
  }

  // --- section volume via thin-slab quotient, d in {2,3} -----------------------
  for (int c = 0; c < configs_per_fact; ++c) {
    const int d = (c % 2) ? 3 : 2;
    Rng setup(next_seed());
    const Vector a = random_unit(setup, d);
    const double t = setup.uniform(-0.2, 0.2);
    const double h = 0.02;
    CubeStream cs(next_seed(), d);
    Index hit = 0;
    for (Index i = 0; i < budget; ++i)
      if (std::abs(cs.next().dot(a) * 0.5 - t) <= h / 2.0) ++hit;
    const double frac = static_cast<double>(hit) / static_cast<double>(budget);
    FactResult r;
    r.name = "section_volume";
    r.detail = fmt(d, t, "t");
    r.value = frac / h;
    r.se = binom_se(frac, budget) / h;
    r.bound_hi = std::sqrt(2.0);
    r.bounded_above = true;
    r.pass = r.value <= r.bound_hi + 3.0 * r.se + 0.02;
    push(std::move(r));
  }

  // --- band intersection: nu(H_u ∩ H_v) <= C nu(H_u) nu(H_v) -------------------
  {
    double fit_by_d[3] = {0.0, 0.0, 0.0};
    for (int c = 0; c < configs_per_fact; ++c) {
      const int di = c % 3;
      const int d = kDims[di];
      Rng setup(next_seed());
      Vector u, v;
      double au = 0.0, av = 0.0;
      Index n_u = 0, n_v = 0, n_uv = 0, win_u = 0, win_v = 0;
      const double h = 0.05;
      for (int attempt = 0; attempt < 50; ++attempt) {
        do {
          u = random_unit(setup, d);
          v = random_unit(setup, d);
        } while (std::abs(u.dot(v)) > 0.5);
        au = setup.uniform(0.2, 0.5);
        av = setup.uniform(0.2, 0.5);
        CubeStream probe(next_seed(), d);
        n_u = n_v = n_uv = win_u = win_v = 0;
        for (Index i = 0; i < budget; ++i) {
          const Vector& x = probe.next();
          const double pu = x.dot(u);
          const double pv = x.dot(v);
          if (pu >= au) ++n_u;
          if (pv >= av) ++n_v;
          if (pu >= au && pv >= av) ++n_uv;
          if (std::abs(pu - au) <= h / 2.0) ++win_u;
          if (std::abs(pv - av) <= h / 2.0) ++win_v;
        }
        const double fu = static_cast<double>(win_u) / (h * static_cast<double>(budget));
        const double fv = static_cast<double>(win_v) / (h * static_cast<double>(budget));
        if (fu >= 0.45 && fv >= 0.45) break;  // marginal density precondition
      }
      const double pu = static_cast<double>(n_u) / static_cast<double>(budget);
      const double pv = static_cast<double>(n_v) / static_cast<double>(budget);
      const double puv = static_cast<double>(n_uv) / static_cast<double>(budget);
      const double C = puv / std::max(pu * pv, 1e-12);
      fit_by_d[di] = std::max(fit_by_d[di], C);
      FactResult r;
      r.name = "band_intersection";
      r.detail = fmt(d, au, "a_u", av, "a_v");
      r.value = C;
      r.se = C * std::sqrt(1.0 / std::max<double>(1.0, static_cast<double>(n_uv)) +
                           1.0 / std::max<double>(1.0, static_cast<double>(n_u)) +
                           1.0 / std::max<double>(1.0, static_cast<double>(n_v)));
      r.bound_hi = 6.0;  // frozen from the fitted range across dimensions
      r.bounded_above = true;
      r.pass = C <= r.bound_hi + 3.0 * r.se;
      push(std::move(r));
    }
    for (int di = 0; di < 3; ++di) {
      std::ostringstream os;
      os << "band_intersection_C_d" << kDims[di];
      rep.fitted.push_back({os.str(), fit_by_d[di]});
    }
  }

  // --- tail mass past 1 + delta/2 ----------------------------------------------
  for (int c = 0; c < configs_per_fact; ++c) {
    const int d = kDims[c % 3];
    Rng setup(next_seed());
    const double delta = setup.uniform(0.05, 0.3);
    const int axis = static_cast<int>(setup.below(static_cast<std::uint64_t>(d)));
    const Vector a = off_axis(setup, d, axis, delta);
    CubeStream cs(next_seed(), d);
    Index hit = 0;
    for (Index i = 0; i < budget; ++i)
      if (std::abs(cs.next().dot(a)) > 1.0 + delta / 2.0) ++hit;
    FactResult r;
    r.name = "tail_mass";
    r.detail = fmt(d, delta, "delta");
    r.value = static_cast<double>(hit) / static_cast<double>(budget);
    r.se = binom_se(r.value, budget);
    r.bound_lo = delta / 64.0;
    r.bounded_below = true;
    r.pass = r.value >= r.bound_lo - 3.0 * r.se;
    push(std::move(r));
  }

  // --- truncated mean gap: mu.a - mu.e_i >= delta/64 over {x.a > 1 + Delta} ----
  for (int c = 0; c < configs_per_fact; ++c) {
    const int d = kDims[c % 3];
    Rng setup(next_seed());
    const double delta = setup.uniform(0.05, 0.3);
    const int axis = static_cast<int>(setup.below(static_cast<std::uint64_t>(d)));
    const Vector a = off_axis(setup, d, axis, delta);
    const double shift = setup.uniform(-delta / 2.0, delta / 2.0);
    CubeStream cs(next_seed(), d);
    double sum = 0.0, sumsq = 0.0;
    Index k = 0;
    for (Index i = 0; i < budget; ++i) {
      const Vector& x = cs.next();
      const double pa = x.dot(a);
      if (pa > 1.0 + shift) {
        const double g = pa - x[axis];
        sum += g;
        sumsq += g * g;
        ++k;
      }
    }
    FactResult r;
    r.name = "mean_gap";
    r.detail = fmt(d, delta, "delta", shift, "Delta");
    if (k >= 2) {
      const double mean = sum / static_cast<double>(k);
      const double var = std::max(0.0, sumsq / static_cast<double>(k) - mean * mean);
      r.value = mean;
      r.se = std::sqrt(var / static_cast<double>(k));
    }
    r.bound_lo = delta / 64.0;
    r.bounded_below = true;
    r.pass = k >= 2 && r.value >= r.bound_lo - 3.0 * r.se;
    push(std::move(r));
  }

  // --- truncated mean offset: E(x.a | x.a >= t) - t, fitted c ------------------
  {
    double fit = 1e9;
    for (int c = 0; c < configs_per_fact; ++c) {
      const int d = kDims[c % 3];
      Rng setup(next_seed());
      const Vector a = random_unit(setup, d);
      const double t = setup.uniform(0.0, 0.5);
      CubeStream cs(next_seed(), d);
      double sum = 0.0, sumsq = 0.0;
      Index k = 0;
      for (Index i = 0; i < budget; ++i) {
        const double p = cs.next().dot(a);
        if (p >= t) {
          sum += p;
          sumsq += p * p;
          ++k;
        }
      }
      FactResult r;
      r.name = "truncated_mean_offset";
      r.detail = fmt(d, t, "t");
      if (k >= 2) {
        const double mean = sum / static_cast<double>(k);
        const double var = std::max(0.0, sumsq / static_cast<double>(k) - mean * mean);
        r.value = mean - t;
        r.se = std::sqrt(var / static_cast<double>(k));
        fit = std::min(fit, r.value);
      }
      r.bound_lo = 0.0;
      r.bounded_below = true;
      r.pass = k >= 2 && r.value - 3.0 * r.se > 0.0;
      push(std::move(r));
    }
    rep.fitted.push_back({"truncated_mean_c", fit});
  }

  // --- slab mean projection: mu.e_i <= 1 - delta/32 over {x.a > 1} -------------
  for (int c = 0; c < configs_per_fact; ++c) {
    const int d = kDims[c % 3];
    Rng setup(next_seed());
    const double delta = setup.uniform(0.05, 0.3);
    const int axis = static_cast<int>(setup.below(static_cast<std::uint64_t>(d)));
    const Vector a = off_axis(setup, d, axis, delta);
    CubeStream cs(next_seed(), d);
    double sum = 0.0, sumsq = 0.0;
    Index k = 0;
    for (Index i = 0; i < budget; ++i) {
      const Vector& x = cs.next();
      if (x.dot(a) > 1.0) {
        sum += x[axis];
        sumsq += x[axis] * x[axis];
        ++k;
      }
    }
    FactResult r;
    r.name = "mean_projection";
    r.detail = fmt(d, delta, "delta");
    if (k >= 2) {
      const double mean = sum / static_cast<double>(k);
      const double var = std::max(0.0, sumsq / static_cast<double>(k) - mean * mean);
      r.value = mean;
      r.se = std::sqrt(var / static_cast<double>(k));
    }
    r.bound_hi = 1.0 - delta / 32.0;
    r.bounded_above = true;
    r.pass = k >= 2 && r.value <= r.bound_hi + 3.0 * r.se;
    push(std::move(r));
  }

  // --- slab coordinate variance: var(x_i | x.a > 1) <= c delta^2, fitted c -----
  {
    double fit = 0.0;
    for (int c = 0; c < configs_per_fact; ++c) {
      const int d = kDims[c % 3];
      Rng setup(next_seed());
      const double delta = setup.uniform(0.05, 0.3);
      const int axis = static_cast<int>(setup.below(static_cast<std::uint64_t>(d)));
      const Vector a = off_axis(setup, d, axis, delta);
      CubeStream cs(next_seed(), d);
      double sum = 0.0, sumsq = 0.0;
      Index k = 0;
      for (Index i = 0; i < budget; ++i) {
        const Vector& x = cs.next();
        if (x.dot(a) > 1.0) {
          sum += x[axis];
          sumsq += x[axis] * x[axis];
          ++k;
        }
      }
      FactResult r;
      r.name = "coordinate_variance";
      r.detail = fmt(d, delta, "delta");
      if (k >= 2) {
        const double mean = sum / static_cast<double>(k);
        const double var = std::max(0.0, sumsq / static_cast<double>(k) - mean * mean);
        r.value = var / (delta * delta);
        fit = std::max(fit, r.value);
      }
      r.bound_hi = 1.0;  // frozen from the fitted range
      r.bounded_above = true;
      r.pass = k >= 2 && r.value <= r.bound_hi;
      push(std::move(r));
    }
    rep.fitted.push_back({"coordinate_variance_c", fit});
  }

  return rep;
}

}  // namespace cubefit
