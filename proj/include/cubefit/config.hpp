#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "cubefit/affine.hpp"
#include "cubefit/corruption.hpp"
#include "cubefit/geometry.hpp"

namespace cubefit {

using Json = nlohmann::json;

enum class TruthMode { shift_scale, rotation, affine };

TruthMode truth_mode_from_string(const std::string& s);
std::string truth_mode_to_string(TruthMode m);

struct TruthSpec {
  TruthMode mode = TruthMode::shift_scale;
  double condition_number = 5.0;  // affine mode singular-value spread
  double scale_lo = 0.5;
  double scale_hi = 2.0;
  double shift_range = 2.0;
  std::optional<Json> explicit_body;  // serialized Parallelopiped overrides the draw
};

// All the constants the algorithms leave symbolic, with their defaults.
struct EstimatorConfig {
  AffineConfig affine;  // embeds shift_scale, rotation, warm start and filter knobs
  Index tv_mc_samples = 200000;
};

struct ExperimentConfig {
  std::string mode = "shift-scale";  // shift-scale | rotation | affine
  int d = 2;
  Index n = 100000;
  TruthSpec truth;
  CorruptionSpec corruption;
  EstimatorConfig estimator;
  std::uint64_t master_seed = 1;
};

Json to_json(const FilterParams& p);
Json to_json(const WarmStartParams& p);
Json to_json(const ShiftScaleConfig& p);
Json to_json(const RotationConfig& p);
Json to_json(const AffineConfig& p);
Json to_json(const CorruptionSpec& p);
Json to_json(const TruthSpec& p);
Json to_json(const EstimatorConfig& p);
Json to_json(const ExperimentConfig& p);

// Missing keys keep defaults; unknown keys are a config error.
ExperimentConfig experiment_from_json(const Json& j);

Json body_to_json(const Parallelopiped& body);
Parallelopiped body_from_json(const Json& j);

// truth drawn from the spec (or decoded from explicit_body)
Parallelopiped make_truth(const TruthSpec& spec, int d, std::uint64_t seed);

}  // namespace cubefit
