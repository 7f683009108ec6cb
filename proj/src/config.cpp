#include "cubefit/config.hpp"

#include <Eigen/Dense>
#include <stdexcept>

#include "cubefit/rng.hpp"

namespace cubefit {

namespace {

// pull a key if present, complain about unknown keys
template <typename T>
void get_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok)
      throw std::invalid_argument(std::string("config: unknown key '") + it.key() +
                                  "' in " + where);
  }
}

Matrix random_orthogonal(int d, Rng& rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Matrix q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

}  // namespace

TruthMode truth_mode_from_string(const std::string& s) {
  if (s == "shift_scale") return TruthMode::shift_scale;
  if (s == "rotation") return TruthMode::rotation;
  if (s == "affine") return TruthMode::affine;
  throw std::invalid_argument("unknown truth mode: " + s);
}

std::string truth_mode_to_string(TruthMode m) {
  switch (m) {
    case TruthMode::shift_scale: return "shift_scale";
    case TruthMode::rotation: return "rotation";
    case TruthMode::affine: return "affine";
  }
  return "?";
}

Json to_json(const FilterParams& p) {
  return Json{{"c_filter", p.c_filter},
              {"removal_cap_factor", p.removal_cap_factor},
              {"max_iterations", p.max_iterations}};
}

static FilterParams filter_from_json(const Json& j) {
  FilterParams p;
  check_keys(j, {"c_filter", "removal_cap_factor", "max_iterations"}, "filter");
  get_opt(j, "c_filter", p.c_filter);
  get_opt(j, "removal_cap_factor", p.removal_cap_factor);
  get_opt(j, "max_iterations", p.max_iterations);
  return p;
}

Json to_json(const WarmStartParams& p) {
  return Json{{"restarts", p.restarts},       {"iterations", p.iterations},
              {"initial_step", p.initial_step}, {"trim", p.trim},
              {"subsample", p.subsample},     {"filter", to_json(p.filter)}};
}

static WarmStartParams warm_from_json(const Json& j) {
  WarmStartParams p;
  check_keys(j, {"restarts", "iterations", "initial_step", "trim", "subsample", "filter"},
             "warm");
  get_opt(j, "restarts", p.restarts);
  get_opt(j, "iterations", p.iterations);
  get_opt(j, "initial_step", p.initial_step);
  get_opt(j, "trim", p.trim);
  get_opt(j, "subsample", p.subsample);
  if (j.contains("filter")) p.filter = filter_from_json(j.at("filter"));
  return p;
}

Json to_json(const ShiftScaleConfig& p) {
  return Json{{"eps_min", p.eps_min},
              {"eps_max", p.eps_max},
              {"expand_factor", p.expand_factor},
              {"iter_cap_factor", p.iter_cap_factor},
              {"deletion_cap_factor", p.deletion_cap_factor},
              {"n_min_factor", p.n_min_factor},
              {"two_d_factor", p.two_d_factor}};
}

static ShiftScaleConfig shift_from_json(const Json& j) {
  ShiftScaleConfig p;
  check_keys(j,
             {"eps_min", "eps_max", "expand_factor", "iter_cap_factor",
              "deletion_cap_factor", "n_min_factor", "two_d_factor"},
             "shift_scale");
  get_opt(j, "eps_min", p.eps_min);
  get_opt(j, "eps_max", p.eps_max);
  get_opt(j, "expand_factor", p.expand_factor);
  get_opt(j, "iter_cap_factor", p.iter_cap_factor);
  get_opt(j, "deletion_cap_factor", p.deletion_cap_factor);
  get_opt(j, "n_min_factor", p.n_min_factor);
  get_opt(j, "two_d_factor", p.two_d_factor);
  return p;
}

Json to_json(const RotationConfig& p) {
  return Json{{"c1", p.c1},
              {"c2", p.c2},
              {"beta_max", p.beta_max},
              {"threshold", p.threshold},
              {"iter_cap", p.iter_cap},
              {"mu_norm_floor", p.mu_norm_floor},
              {"eps_local_cap", p.eps_local_cap},
              {"filter", to_json(p.filter)}};
}

static RotationConfig rotation_from_json(const Json& j) {
  RotationConfig p;
  check_keys(j,
             {"c1", "c2", "beta_max", "threshold", "iter_cap", "mu_norm_floor",
              "eps_local_cap", "filter"},
             "rotation");
  get_opt(j, "c1", p.c1);
  get_opt(j, "c2", p.c2);
  get_opt(j, "beta_max", p.beta_max);
  get_opt(j, "threshold", p.threshold);
  get_opt(j, "iter_cap", p.iter_cap);
  get_opt(j, "mu_norm_floor", p.mu_norm_floor);
  get_opt(j, "eps_local_cap", p.eps_local_cap);
  if (j.contains("filter")) p.filter = filter_from_json(j.at("filter"));
  return p;
}

Json to_json(const AffineConfig& p) {
  return Json{{"eps_min", p.eps_min},
              {"eps_max", p.eps_max},
              {"c_stop", p.c_stop},
              {"round_cap_factor", p.round_cap_factor},
              {"round_cap_override", p.round_cap_override},
              {"cond_guard", p.cond_guard},
              {"warm_mode", p.warm_mode == WarmStartMode::oracle ? "oracle" : "moment"},
              {"oracle_delta", p.oracle_delta},
              {"shift_scale", to_json(p.shift)},
              {"rotation", to_json(p.rot)},
              {"warm", to_json(p.warm)},
              {"filter", to_json(p.filter)}};
}

static AffineConfig affine_from_json(const Json& j) {
  AffineConfig p;
  check_keys(j,
             {"eps_min", "eps_max", "c_stop", "round_cap_factor", "round_cap_override",
              "cond_guard", "warm_mode", "oracle_delta", "shift_scale", "rotation",
              "warm", "filter"},
             "affine");
  get_opt(j, "eps_min", p.eps_min);
  get_opt(j, "eps_max", p.eps_max);
  get_opt(j, "c_stop", p.c_stop);
  get_opt(j, "round_cap_factor", p.round_cap_factor);
  get_opt(j, "round_cap_override", p.round_cap_override);
  get_opt(j, "cond_guard", p.cond_guard);
  if (j.contains("warm_mode")) {
    const std::string m = j.at("warm_mode").get<std::string>();
    if (m == "oracle")
      p.warm_mode = WarmStartMode::oracle;
    else if (m == "moment")
      p.warm_mode = WarmStartMode::moment;
    else
      throw std::invalid_argument("config: warm_mode must be moment or oracle");
  }
  get_opt(j, "oracle_delta", p.oracle_delta);
  if (j.contains("shift_scale")) p.shift = shift_from_json(j.at("shift_scale"));
  if (j.contains("rotation")) p.rot = rotation_from_json(j.at("rotation"));
  if (j.contains("warm")) p.warm = warm_from_json(j.at("warm"));
  if (j.contains("filter")) p.filter = filter_from_json(j.at("filter"));
  return p;
}

Json to_json(const CorruptionSpec& p) {
  return Json{{"epsilon", p.epsilon},
              {"adversary", adversary_to_string(p.adversary)},
              {"seed", p.seed},
              {"offset", p.offset},
              {"jitter", p.jitter},
              {"facet", p.facet},
              {"band_i", p.band_i},
              {"band_j", p.band_j},
              {"band_k1", p.band_k1},
              {"band_k2", p.band_k2},
              {"band_multiplier", p.band_multiplier},
              {"radius", p.radius}};
}

static CorruptionSpec corruption_from_json(const Json& j) {
  CorruptionSpec p;
  check_keys(j,
             {"epsilon", "adversary", "seed", "offset", "jitter", "facet", "band_i",
              "band_j", "band_k1", "band_k2", "band_multiplier", "radius"},
             "corruption");
  get_opt(j, "epsilon", p.epsilon);
  if (j.contains("adversary"))
    p.adversary = adversary_from_string(j.at("adversary").get<std::string>());
  get_opt(j, "seed", p.seed);
  get_opt(j, "offset", p.offset);
  get_opt(j, "jitter", p.jitter);
  get_opt(j, "facet", p.facet);
  get_opt(j, "band_i", p.band_i);
  get_opt(j, "band_j", p.band_j);
  get_opt(j, "band_k1", p.band_k1);
  get_opt(j, "band_k2", p.band_k2);
  get_opt(j, "band_multiplier", p.band_multiplier);
  get_opt(j, "radius", p.radius);
  return p;
}

Json to_json(const TruthSpec& p) {
  Json j{{"mode", truth_mode_to_string(p.mode)},
         {"condition_number", p.condition_number},
         {"scale_lo", p.scale_lo},
         {"scale_hi", p.scale_hi},
         {"shift_range", p.shift_range}};
  if (p.explicit_body) j["explicit"] = *p.explicit_body;
  return j;
}

static TruthSpec truth_from_json(const Json& j) {
  TruthSpec p;
  check_keys(j, {"mode", "condition_number", "scale_lo", "scale_hi", "shift_range", "explicit"},
             "truth");
  if (j.contains("mode")) p.mode = truth_mode_from_string(j.at("mode").get<std::string>());
  get_opt(j, "condition_number", p.condition_number);
  get_opt(j, "scale_lo", p.scale_lo);
  get_opt(j, "scale_hi", p.scale_hi);
  get_opt(j, "shift_range", p.shift_range);
  if (j.contains("explicit")) p.explicit_body = j.at("explicit");
  return p;
}

Json to_json(const EstimatorConfig& p) {
  return Json{{"affine", to_json(p.affine)}, {"tv_mc_samples", p.tv_mc_samples}};
}

static EstimatorConfig estimator_from_json(const Json& j) {
  EstimatorConfig p;
  check_keys(j, {"affine", "tv_mc_samples"}, "estimator");
  if (j.contains("affine")) p.affine = affine_from_json(j.at("affine"));
  get_opt(j, "tv_mc_samples", p.tv_mc_samples);
  return p;
}

Json to_json(const ExperimentConfig& p) {
  return Json{{"mode", p.mode},
              {"d", p.d},
              {"n", p.n},
              {"truth", to_json(p.truth)},
              {"corruption", to_json(p.corruption)},
              {"estimator", to_json(p.estimator)},
              {"master_seed", p.master_seed}};
}

ExperimentConfig experiment_from_json(const Json& j) {
  ExperimentConfig p;
  check_keys(j, {"mode", "d", "n", "truth", "corruption", "estimator", "master_seed"},
             "experiment");
  get_opt(j, "mode", p.mode);
  if (p.mode != "shift-scale" && p.mode != "rotation" && p.mode != "affine")
    throw std::invalid_argument("config: mode must be shift-scale, rotation or affine");
  get_opt(j, "d", p.d);
  get_opt(j, "n", p.n);
  if (p.d < 1 || p.n < 1) throw std::invalid_argument("config: d and n must be positive");
  if (j.contains("truth")) p.truth = truth_from_json(j.at("truth"));
  if (j.contains("corruption")) p.corruption = corruption_from_json(j.at("corruption"));
  if (j.contains("estimator")) p.estimator = estimator_from_json(j.at("estimator"));
  get_opt(j, "master_seed", p.master_seed);
  return p;
}

Json body_to_json(const Parallelopiped& body) {
  Json normals = Json::array();
  for (Index i = 0; i < body.normals.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < body.normals.cols(); ++j) row.push_back(body.normals(i, j));
    normals.push_back(std::move(row));
  }
  Json lo = Json::array(), up = Json::array();
  for (Index i = 0; i < body.lower.size(); ++i) {
    lo.push_back(body.lower[i]);
    up.push_back(body.upper[i]);
  }
  return Json{{"normals", normals}, {"lower", lo}, {"upper", up}};
}

Parallelopiped body_from_json(const Json& j) {
  const auto& normals = j.at("normals");
  const auto d = static_cast<Index>(normals.size());
  Matrix n(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index c = 0; c < d; ++c)
      n(i, c) = normals.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
  Vector lo(d), up(d);
  for (Index i = 0; i < d; ++i) {
    lo[i] = j.at("lower").at(static_cast<std::size_t>(i)).get<double>();
    up[i] = j.at("upper").at(static_cast<std::size_t>(i)).get<double>();
  }
  // renormalize rows in case the JSON round trip nudged the last digit
  for (Index i = 0; i < d; ++i) n.row(i) /= n.row(i).norm();
  return Parallelopiped(std::move(n), std::move(lo), std::move(up));
}

Parallelopiped make_truth(const TruthSpec& spec, int d, std::uint64_t seed) {
  if (spec.explicit_body) return body_from_json(*spec.explicit_body);
  Rng rng(seed);
  switch (spec.mode) {
    case TruthMode::shift_scale: {
      Vector lo(d), up(d);
      for (int i = 0; i < d; ++i) {
        const double center = rng.uniform(-spec.shift_range, spec.shift_range);
        const double half = rng.uniform(spec.scale_lo, spec.scale_hi);
        lo[i] = center - half;
        up[i] = center + half;
      }
      return Parallelopiped::axis_aligned(AxisBox(std::move(lo), std::move(up)));
    }
    case TruthMode::rotation: {
      const Matrix q = random_orthogonal(d, rng);
      return Parallelopiped(q, Vector::Constant(d, -1.0), Vector::Constant(d, 1.0));
    }
    case TruthMode::affine: {
      const Matrix u = random_orthogonal(d, rng);
      const Matrix v = random_orthogonal(d, rng);
      Vector sing(d);
      const double overall = rng.uniform(spec.scale_lo, spec.scale_hi);
      for (int i = 0; i < d; ++i)
        sing[i] = overall * rng.uniform(1.0, std::max(1.0, spec.condition_number));
      Matrix a = u * sing.asDiagonal() * v.transpose();
      Vector b(d);
      for (int i = 0; i < d; ++i) b[i] = rng.uniform(-spec.shift_range, spec.shift_range);
      return Parallelopiped::from_affine(AffineMap(std::move(a), std::move(b)));
    }
  }
  throw std::logic_error("make_truth: unreachable");
}

}  // namespace cubefit
