#include "cubefit/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "cubefit/evaluate.hpp"
#include "cubefit/rng.hpp"
#include "cubefit/robust_stats.hpp"

namespace cubefit {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// fixed stream ids for the sub-seed derivation; part of the replay contract
enum SeedStream : std::uint64_t {
  kTruth = 10,
  kSample = 11,
  kCorrupt = 12,
  kEstimator = 13,
  kTvEval = 14,
  kWarm = 15,
};

Json trace_summary(const RotationTrace& trace) {
  Json rows = Json::array();
  for (const auto& row : trace.rows) {
    rows.push_back(Json{{"iterations", row.steps.size()},
                        {"best_t", row.best_t},
                        {"best_escape", row.best_escape},
                        {"escape0", row.escape0},
                        {"converged_empty", row.converged_empty},
                        {"failed", row.failed}});
  }
  return rows;
}

}  // namespace

Json run_experiment(const ExperimentConfig& cfg) {
  Json report;
  Json timings;
  const auto t_all = Clock::now();

  CorruptionSpec cs = cfg.corruption;
  if (cs.seed == 0) cs.seed = seed_split(cfg.master_seed, kCorrupt);

  ExperimentConfig resolved = cfg;
  resolved.corruption = cs;
  report["config"] = to_json(resolved);

  const Parallelopiped truth =
      make_truth(cfg.truth, cfg.d, seed_split(cfg.master_seed, kTruth));
  report["truth"] = body_to_json(truth);

  auto t0 = Clock::now();
  const SampleSet clean_std =
      sample_standard_cube(cfg.d, cfg.n, seed_split(cfg.master_seed, kSample));
  const SampleSet observed = apply_affine(truth.to_affine(), clean_std);
  const SampleSet corrupted = corrupt(observed, cs, truth);
  timings["generate"] = ms_since(t0);

  const SampleView view = corrupted.view();
  const AffineConfig& acfg = cfg.estimator.affine;
  const std::uint64_t est_seed = seed_split(cfg.master_seed, kEstimator);
  const std::uint64_t tv_seed = seed_split(cfg.master_seed, kTvEval);

  bool ok = true;
  Json metrics;
  Json diagnostics;

  t0 = Clock::now();
  if (cfg.mode == "shift-scale") {
    const double eps_est =
        std::min(std::max(cs.epsilon, acfg.shift.eps_min), acfg.shift.eps_max);
    const ShiftScaleResult r = estimate_shift_scale(view, eps_est, acfg.shift);
    timings["estimate"] = ms_since(t0);
    ok = r.state.ok;
    const Parallelopiped est = Parallelopiped::axis_aligned(r.box);
    report["recovered"] = body_to_json(est);
    metrics["tv_exact"] = tv_exact_axis_aligned(
        r.box, AxisBox(truth.lower, truth.upper));
    const TvEstimate tv = tv_monte_carlo(est, truth, cfg.estimator.tv_mc_samples, tv_seed);
    metrics["tv_estimate"] = tv.estimate;
    metrics["tv_stderr"] = tv.stderr_;
    metrics["column_error"] = column_error(est, truth);
    diagnostics["iterations"] = r.state.iterations;
    diagnostics["deletions"] = r.state.deletions.size();
    diagnostics["deletion_capped"] = r.state.deletion_capped;
    diagnostics["iteration_capped"] = r.state.iteration_capped;
    std::vector<Index> deleted;
    for (const auto& del : r.state.deletions) deleted.push_back(del.index);
    diagnostics["evaluation"]["deleted_outlier_fraction"] =
        outlier_fraction(corrupted, deleted);
  } else if (cfg.mode == "rotation") {
    const double eps_est = std::max(cs.epsilon, 1e-3);
    WarmStartReport warm;
    if (acfg.warm_mode == WarmStartMode::oracle)
      warm = warm_start(view, eps_est, WarmStartMode::oracle, acfg.warm,
                        seed_split(cfg.master_seed, kWarm), &truth, acfg.oracle_delta);
    else
      warm = warm_start(view, eps_est, WarmStartMode::moment, acfg.warm,
                        seed_split(cfg.master_seed, kWarm));
    const RotationResult r = estimate_rotation(view, eps_est, acfg.rot, &warm);
    timings["estimate"] = ms_since(t0);
    for (const auto& row : r.trace.rows) ok = ok && !row.failed;
    report["recovered"] = body_to_json(r.body);
    const TvEstimate tv =
        tv_monte_carlo(r.body, truth, cfg.estimator.tv_mc_samples, tv_seed);
    metrics["tv_estimate"] = tv.estimate;
    metrics["tv_stderr"] = tv.stderr_;
    metrics["column_error"] = column_error(r.body, truth);
    metrics["escape_fraction"] = escape_fraction(view, r.body.normals, acfg.rot.threshold);
    diagnostics["rows"] = trace_summary(r.trace);
    Json noise = Json::array();
    for (Index i = 0; i < r.body.normals.rows(); ++i) {
      const SlabNoiseCounts c =
          slab_noise(observed, corrupted, corrupted.active(),
                     r.body.normals.row(i).transpose(), acfg.rot.threshold);
      noise.push_back(Json{{"slab_size", c.slab_size},
                           {"outliers_in_slab", c.outliers_in_slab},
                           {"clean_in_slab", c.clean_in_slab},
                           {"clean_surviving", c.clean_surviving}});
    }
    diagnostics["evaluation"]["slab_noise"] = std::move(noise);
  } else if (cfg.mode == "affine") {
    const double eps_est = std::min(std::max(cs.epsilon, acfg.eps_min), acfg.eps_max);
    const AffineResult r = estimate_affine(view, eps_est, acfg, est_seed, &truth);
    timings["estimate"] = ms_since(t0);
    report["recovered"] = body_to_json(r.body);
    const TvEstimate tv =
        tv_monte_carlo(r.body, truth, cfg.estimator.tv_mc_samples, tv_seed);
    metrics["tv_estimate"] = tv.estimate;
    metrics["tv_stderr"] = tv.stderr_;
    metrics["column_error"] = column_error(r.body, truth);
    metrics["rounds"] = r.rounds.size();
    metrics["inside_fraction"] =
        r.rounds[static_cast<std::size_t>(r.best_round)].inside_fraction;
    diagnostics["best_round"] = r.best_round;
    diagnostics["stopped_early"] = r.stopped_early;
    diagnostics["mean_removed"] = r.mean_removed;
    diagnostics["cov_removed"] = r.cov_removed;
    const Parallelopiped truth_y = transform_body(truth, r.frame);
    Json rounds = Json::array();
    for (const auto& round : r.rounds) {
      const RoundDeltas deltas =
          round_deltas(round.normals, round.lower, round.upper, truth_y);
      rounds.push_back(Json{{"inside_fraction", round.inside_fraction},
                            {"delta_r", deltas.rotation},
                            {"delta_s", deltas.scale}});
    }
    diagnostics["evaluation"]["rounds"] = std::move(rounds);
  } else {
    throw std::invalid_argument("run_experiment: unknown mode " + cfg.mode);
  }

  report["metrics"] = std::move(metrics);
  report["diagnostics"] = std::move(diagnostics);
  report["ok"] = ok;
  timings["total"] = ms_since(t_all);
  report["timings_ms"] = std::move(timings);
  return report;
}

bool report_ok(const Json& report) { return report.value("ok", false); }

Json replay_view(const Json& report) {
  Json copy = report;
  copy.erase("timings_ms");
  return copy;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base,
                                const std::vector<double>& eps_values) {
  std::vector<SweepRow> rows;
  for (const double eps : eps_values) {
    ExperimentConfig cfg = base;
    cfg.corruption.epsilon = eps;
    const Json rep = run_experiment(cfg);
    SweepRow row;
    row.eps = eps;
    row.tv = rep["metrics"].contains("tv_exact")
                 ? rep["metrics"]["tv_exact"].get<double>()
                 : rep["metrics"]["tv_estimate"].get<double>();
    row.column_err = rep["metrics"]["column_error"].get<double>();
    row.rounds = rep["metrics"].contains("rounds")
                     ? static_cast<int>(rep["metrics"]["rounds"].get<std::size_t>())
                     : 0;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "eps,tv,column_error,rounds\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", r.eps, r.tv, r.column_err,
                  r.rounds);
    out += buf;
  }
  return out;
}

Json facts_report_to_json(const FactsReport& rep) {
  Json checks = Json::array();
  for (const auto& c : rep.checks) {
    Json j{{"name", c.name},   {"detail", c.detail}, {"value", c.value},
           {"se", c.se},       {"pass", c.pass}};
    if (c.bounded_below) j["bound_lo"] = c.bound_lo;
    if (c.bounded_above) j["bound_hi"] = c.bound_hi;
    checks.push_back(std::move(j));
  }
  Json fitted = Json::object();
  for (const auto& f : rep.fitted) fitted[f.name] = f.value;
  return Json{{"checks", checks}, {"fitted", fitted}, {"all_pass", rep.all_pass}};
}

Json lemma_suites_to_json(const LemmaSuiteResult& sets, const LemmaSuiteResult& indicators) {
  auto one = [](const LemmaSuiteResult& r) {
    return Json{{"requested", r.requested},
                {"applicable", r.applicable},
                {"violations", r.violations},
                {"pass", r.pass()}};
  };
  return Json{{"intersection_sum", one(sets)},
              {"pairwise_expectation", one(indicators)},
              {"all_pass", sets.pass() && indicators.pass()}};
}

std::string points_to_csv(const Matrix& pts) {
  std::string out;
  const int d = static_cast<int>(pts.cols());
  for (int c = 0; c < d; ++c) {
    out += "x" + std::to_string(c + 1);
    out += (c + 1 < d) ? ',' : '\n';
  }
  char buf[64];
  for (Index i = 0; i < pts.rows(); ++i) {
    for (int c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", pts(i, c));
      out += buf;
      out += (c + 1 < d) ? ',' : '\n';
    }
  }
  return out;
}

Matrix points_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("points_from_csv: empty file");
  int d = 1;
  for (char ch : line)
    if (ch == ',') ++d;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int c = 0;
    while (std::getline(row, cell, ',')) {
      values.push_back(std::stod(cell));
      ++c;
    }
    if (c != d) throw std::invalid_argument("points_from_csv: ragged row");
  }
  const auto n = static_cast<Index>(values.size() / static_cast<std::size_t>(d));
  Matrix pts(n, d);
  for (Index i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c)
      pts(i, c) = values[static_cast<std::size_t>(i) * static_cast<std::size_t>(d) +
                         static_cast<std::size_t>(c)];
  return pts;
}

std::string labels_to_csv(const SampleSet& s) {
  std::string out = "label,active\n";
  for (Index i = 0; i < s.n(); ++i) {
    switch (s.labels()[static_cast<std::size_t>(i)]) {
      case TruthLabel::inlier: out += "inlier"; break;
      case TruthLabel::outlier: out += "outlier"; break;
      case TruthLabel::deleted_by_adversary: out += "deleted_by_adversary"; break;
    }
    out += s.active()[static_cast<std::size_t>(i)] ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace cubefit
