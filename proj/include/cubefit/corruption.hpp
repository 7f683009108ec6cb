#pragma once

#include <cstdint>
#include <string>

#include "cubefit/geometry.hpp"
#include "cubefit/sample_set.hpp"

namespace cubefit {

enum class Adversary {
  none,
  corner_shift,
  facet_cluster,
  band_intersection,
  far_uniform,
  delete_only,
};

Adversary adversary_from_string(const std::string& s);
std::string adversary_to_string(Adversary a);

struct CorruptionSpec {
  double epsilon = 0.0;
  Adversary adversary = Adversary::none;
  std::uint64_t seed = 0;

  // corner_shift / facet_cluster
  double offset = 0.1;   // outward distance past the boundary, in cube units
  double jitter = 0.05;  // spread of the placed cluster
  int facet = 0;         // facet_cluster target facet

  // band_intersection: stuff S^+_{i,k1} ∩ S^+_{j,k2} to multiplier × the
  // 10 k1 k2 eps^2 / d^2 density threshold
  int band_i = 0;
  int band_j = 1;
  int band_k1 = 0;  // 0 means "use d"
  int band_k2 = 0;
  double band_multiplier = 1.5;

  // far_uniform
  double radius = 100.0;
};

// Replaces exactly ceil(eps*n) points of `clean` with adversary points
// (delete_only deactivates instead). Placement is relative to `truth`, the
// body the clean sample was drawn from. Output row order is shuffled;
// deterministic for a fixed spec.seed.
SampleSet corrupt(const SampleSet& clean, const CorruptionSpec& spec,
                  const Parallelopiped& truth);

}  // namespace cubefit
