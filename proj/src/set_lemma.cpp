#include "cubefit/set_lemma.hpp"

#include <algorithm>
#include <stdexcept>

#include "cubefit/rng.hpp"

namespace cubefit {

namespace {

std::int64_t intersection_count(const std::vector<std::int64_t>& a,
                                const std::vector<std::int64_t>& b) {
  std::int64_t c = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else {
      ++c;
      ++ia;
      ++ib;
    }
  }
  return c;
}

}  // namespace

double SetSystem::frac(std::size_t i) const {
  return static_cast<double>(sets[i].size()) / static_cast<double>(ground_size);
}

double SetSystem::union_frac() const {
  std::vector<std::int64_t> u;
  for (const auto& s : sets) u.insert(u.end(), s.begin(), s.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return static_cast<double>(u.size()) / static_cast<double>(ground_size);
}

double SetSystem::pairwise_frac(std::size_t i, std::size_t j) const {
  return static_cast<double>(intersection_count(sets[i], sets[j])) /
         static_cast<double>(ground_size);
}

IntersectionSumResult intersection_sum_check(const SetSystem& sys, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("intersection_sum_check: alpha must be > 0");
  IntersectionSumResult r;
  r.eps = sys.union_frac();
  const std::size_t d = sys.sets.size();

  // The pairwise condition is needed for i != j only; the i = j case would
  // read frac(S_i) <= alpha frac(S_i)^2 and exclude every small set.
  bool pairwise_ok = true;
  for (std::size_t i = 0; i < d && pairwise_ok; ++i)
    for (std::size_t j = i + 1; j < d && pairwise_ok; ++j)
      if (sys.pairwise_frac(i, j) > alpha * sys.frac(i) * sys.frac(j)) pairwise_ok = false;

  r.applicable = pairwise_ok && alpha * r.eps < 1.0;
  for (std::size_t i = 0; i < d; ++i) r.lhs += sys.frac(i);
  if (r.applicable) {
    r.rhs = r.eps / (1.0 - alpha * r.eps);
    r.holds = r.lhs <= r.rhs + 1e-12;
  }
  return r;
}

PairwiseExpectationResult pairwise_expectation_check(
    const std::vector<std::uint8_t>& samples, std::int64_t n, int d, double eps) {
  if (eps < 0.0 || eps >= 1.0)
    throw std::invalid_argument("pairwise_expectation_check: eps must be in [0,1)");
  if (static_cast<std::int64_t>(samples.size()) != n * d || n <= 0 || d <= 0)
    throw std::invalid_argument("pairwise_expectation_check: bad matrix shape");

  std::vector<std::int64_t> col(d, 0);
  std::vector<std::int64_t> pair(static_cast<std::size_t>(d) * d, 0);
  for (std::int64_t r = 0; r < n; ++r) {
    const std::uint8_t* row = samples.data() + r * d;
    for (int i = 0; i < d; ++i) {
      if (!row[i]) continue;
      ++col[i];
      for (int j = i + 1; j < d; ++j)
        if (row[j]) ++pair[static_cast<std::size_t>(i) * d + j];
    }
  }

  PairwiseExpectationResult res;
  const double nn = static_cast<double>(n);
  bool ok = true;
  for (int i = 0; i < d && ok; ++i)
    for (int j = i + 1; j < d && ok; ++j) {
      const double eij = pair[static_cast<std::size_t>(i) * d + j] / nn;
      const double ei = col[i] / nn;
      const double ej = col[j] / nn;
      if (eij > eps * ei * ej) ok = false;
    }
  res.applicable = ok;
  for (int i = 0; i < d; ++i) res.lhs += col[i] / nn;
  if (ok) {
    res.rhs = 1.0 / (1.0 - eps);
    res.holds = res.lhs <= res.rhs + 1e-12;
  }
  return res;
}

// --- generators ---------------------------------------------------------------

GeneratedSystem generate_set_system(const SetSystemGenConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  GeneratedSystem out;
  out.alpha = rng.uniform(cfg.alpha_lo, cfg.alpha_hi);
  out.sys.ground_size = cfg.ground_size;
  const int d = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_sets - 1)));
  out.sys.sets.resize(d);

  if (rng.uniform01() < cfg.partition_prob) {
    // near-partition: each element joins at most one set
    for (std::int64_t e = 0; e < cfg.ground_size; ++e) {
      const double u = rng.uniform01();
      const double total = rng.uniform(cfg.density_lo, cfg.density_hi) * d;
      if (u < total) {
        const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
        out.sys.sets[k].push_back(e);
      }
    }
  } else {
    // independent memberships
    std::vector<double> dens(d);
    for (int k = 0; k < d; ++k) dens[k] = rng.uniform(cfg.density_lo, cfg.density_hi);
    for (std::int64_t e = 0; e < cfg.ground_size; ++e)
      for (int k = 0; k < d; ++k)
        if (rng.uniform01() < dens[k]) out.sys.sets[k].push_back(e);
    if (d >= 2 && rng.uniform01() < cfg.correlate_prob) {
      // overlap injection: copy a slice of set 0 into set 1
      const auto& src = out.sys.sets[0];
      auto& dst = out.sys.sets[1];
      for (std::size_t t = 0; t < src.size(); t += 2) dst.push_back(src[t]);
      std::sort(dst.begin(), dst.end());
      dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
    }
  }
  return out;
}

LemmaSuiteResult run_intersection_sum_suite(std::int64_t count, std::uint64_t seed,
                                            const SetSystemGenConfig& cfg) {
  LemmaSuiteResult res;
  res.requested = count;
  std::int64_t stream = 0;
  while (res.applicable < count) {
    auto gen = generate_set_system(cfg, seed_split(seed, static_cast<std::uint64_t>(stream++)));
    auto check = intersection_sum_check(gen.sys, gen.alpha);
    if (!check.applicable) continue;
    ++res.applicable;
    if (!check.holds) ++res.violations;
  }
  return res;
}

LemmaSuiteResult run_pairwise_expectation_suite(std::int64_t count, std::uint64_t seed) {
  LemmaSuiteResult res;
  res.requested = count;
  std::int64_t stream = 0;
  while (res.applicable < count) {
    Rng rng(seed_split(seed, static_cast<std::uint64_t>(stream++)));
    const std::int64_t n = 500 + static_cast<std::int64_t>(rng.below(1500));
    const int d = 2 + static_cast<int>(rng.below(15));
    const double eps = rng.uniform(0.05, 0.9);
    std::vector<std::uint8_t> m(static_cast<std::size_t>(n) * d, 0);
    // sparse one-hot-leaning rows keep cross moments below eps * E X_i E X_j
    for (std::int64_t r = 0; r < n; ++r) {
      if (rng.uniform01() < 0.6) {
        const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
        m[static_cast<std::size_t>(r) * d + k] = 1;
      }
    }
    auto check = pairwise_expectation_check(m, n, d, eps);
    if (!check.applicable) continue;
    ++res.applicable;
    if (!check.holds) ++res.violations;
  }
  return res;
}

}  // namespace cubefit
