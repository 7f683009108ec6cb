#include "cubefit/corruption.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cubefit/rng.hpp"

namespace cubefit {

Adversary adversary_from_string(const std::string& s) {
  if (s == "none") return Adversary::none;
  if (s == "corner_shift") return Adversary::corner_shift;
  if (s == "facet_cluster") return Adversary::facet_cluster;
  if (s == "band_intersection") return Adversary::band_intersection;
  if (s == "far_uniform") return Adversary::far_uniform;
  if (s == "delete_only") return Adversary::delete_only;
  throw std::invalid_argument("unknown adversary: " + s);
}

std::string adversary_to_string(Adversary a) {
  switch (a) {
    case Adversary::none: return "none";
    case Adversary::corner_shift: return "corner_shift";
    case Adversary::facet_cluster: return "facet_cluster";
    case Adversary::band_intersection: return "band_intersection";
    case Adversary::far_uniform: return "far_uniform";
    case Adversary::delete_only: return "delete_only";
  }
  return "?";
}

namespace {

void validate(const CorruptionSpec& spec, Index n, int d) {
  if (spec.epsilon < 0.0 || spec.epsilon >= 0.5)
    throw std::invalid_argument("corrupt: epsilon must be in [0, 0.5)");
  const auto m = static_cast<Index>(std::ceil(spec.epsilon * static_cast<double>(n)));
  if (2 * m > n) throw std::invalid_argument("corrupt: epsilon*n exceeds n/2");
  switch (spec.adversary) {
    case Adversary::none:
      if (m > 0) throw std::invalid_argument("corrupt: adversary 'none' requires epsilon = 0");
      break;
    case Adversary::corner_shift:
    case Adversary::facet_cluster:
      if (spec.offset <= 0.0)
        throw std::invalid_argument("corrupt: offset must place the cluster outside the body");
      if (spec.adversary == Adversary::facet_cluster && (spec.facet < 0 || spec.facet >= d))
        throw std::invalid_argument("corrupt: facet index out of range");
      break;
    case Adversary::band_intersection: {
      if (spec.band_i == spec.band_j) throw std::invalid_argument("corrupt: band_i == band_j");
      if (spec.band_i < 0 || spec.band_i >= d || spec.band_j < 0 || spec.band_j >= d)
        throw std::invalid_argument("corrupt: band coordinate out of range");
      const int k1 = spec.band_k1 == 0 ? d : spec.band_k1;
      const int k2 = spec.band_k2 == 0 ? d : spec.band_k2;
      if (k1 < 1 || k1 > d || k2 < 1 || k2 > d)
        throw std::invalid_argument("corrupt: band grid index out of range");
      if (spec.band_multiplier <= 0.0)
        throw std::invalid_argument("corrupt: band_multiplier must be positive");
      break;
    }
    case Adversary::far_uniform:
      if (spec.radius <= 0.0) throw std::invalid_argument("corrupt: radius must be positive");
      break;
    case Adversary::delete_only:
      break;
  }
}

// adversary points in the standard-cube frame; mapped through truth afterwards
Matrix place_standard(const CorruptionSpec& spec, Index m, Index n, int d, Rng& rng) {
  Matrix pts(m, d);
  switch (spec.adversary) {
    case Adversary::corner_shift: {
      // cluster on the all-ones diagonal just past the corner
      const double diag = 1.0 / std::sqrt(static_cast<double>(d));
      for (Index r = 0; r < m; ++r) {
        const double t = spec.offset + spec.jitter * rng.uniform01();
        for (int c = 0; c < d; ++c) pts(r, c) = 1.0 + t * diag;
      }
      break;
    }
    case Adversary::facet_cluster: {
      for (Index r = 0; r < m; ++r) {
        for (int c = 0; c < d; ++c) pts(r, c) = spec.jitter * rng.uniform(-1.0, 1.0);
        pts(r, spec.facet) = 1.0 + spec.offset * (0.5 + 0.5 * rng.uniform01());
      }
      break;
    }
    case Adversary::band_intersection: {
      const int k1 = spec.band_k1 == 0 ? d : spec.band_k1;
      const int k2 = spec.band_k2 == 0 ? d : spec.band_k2;
      const double dd = static_cast<double>(d);
      const double depth1 = 2.0 * k1 * spec.epsilon / dd;  // side length is 2
      const double depth2 = 2.0 * k2 * spec.epsilon / dd;
      for (Index r = 0; r < m; ++r)
        for (int c = 0; c < d; ++c) pts(r, c) = rng.uniform(-1.0, 1.0);
      // first chunk: stuffed into the (i,k1)x(j,k2) top-slab intersection just
      // past the density threshold; the rest stays uniform inside the body
      const double threshold =
          10.0 * k1 * k2 * spec.epsilon * spec.epsilon / (dd * dd);
      const auto target = static_cast<Index>(
          std::ceil(spec.band_multiplier * threshold * static_cast<double>(n)));
      const Index stuffed = std::min(m, target);
      for (Index r = 0; r < stuffed; ++r) {
        pts(r, spec.band_i) = 1.0 - depth1 * rng.uniform01();
        pts(r, spec.band_j) = 1.0 - depth2 * rng.uniform01();
      }
      break;
    }
    default:
      throw std::logic_error("place_standard: unexpected adversary");
  }
  return pts;
}

}  // namespace

SampleSet corrupt(const SampleSet& clean, const CorruptionSpec& spec,
                  const Parallelopiped& truth) {
  const Index n = clean.n();
  const int d = clean.d();
  if (truth.dim() != d) throw std::invalid_argument("corrupt: truth dimension mismatch");
  validate(spec, n, d);

  const auto m = static_cast<Index>(std::ceil(spec.epsilon * static_cast<double>(n)));
  Matrix points = clean.points();
  std::vector<std::uint8_t> active = clean.active();
  std::vector<TruthLabel> labels = clean.labels();

  Rng rng(spec.seed);
  if (m > 0) {
    // pick the replaced subset: partial Fisher-Yates over [0, n)
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < m; ++i) {
      const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }

    if (spec.adversary == Adversary::delete_only) {
      for (Index i = 0; i < m; ++i) {
        const Index r = idx[static_cast<std::size_t>(i)];
        active[static_cast<std::size_t>(r)] = 0;
        labels[static_cast<std::size_t>(r)] = TruthLabel::deleted_by_adversary;
      }
    } else if (spec.adversary == Adversary::far_uniform) {
      const Vector center = truth.to_affine().shift;
      for (Index i = 0; i < m; ++i) {
        Vector g(d);
        for (int c = 0; c < d; ++c) g[c] = rng.normal();
        g.normalize();
        const Index r = idx[static_cast<std::size_t>(i)];
        points.row(r) = (center + spec.radius * g).transpose();
        labels[static_cast<std::size_t>(r)] = TruthLabel::outlier;
      }
    } else {
      const Matrix placed = truth.to_affine().apply_rows(place_standard(spec, m, n, d, rng));
      for (Index i = 0; i < m; ++i) {
        const Index r = idx[static_cast<std::size_t>(i)];
        points.row(r) = placed.row(i);
        labels[static_cast<std::size_t>(r)] = TruthLabel::outlier;
      }
    }
  }

  // full shuffle so outliers are not positionally identifiable
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  Matrix out_points(n, d);
  std::vector<std::uint8_t> out_active(static_cast<std::size_t>(n));
  std::vector<TruthLabel> out_labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index src = perm[static_cast<std::size_t>(i)];
    out_points.row(i) = points.row(src);
    out_active[static_cast<std::size_t>(i)] = active[static_cast<std::size_t>(src)];
    out_labels[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(src)];
  }
  return SampleSet(std::move(out_points), std::move(out_active), std::move(out_labels));
}

}  // namespace cubefit
