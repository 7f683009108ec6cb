#pragma once

#include <string>
#include <vector>

#include "cubefit/config.hpp"
#include "cubefit/facts.hpp"
#include "cubefit/sample_set.hpp"
#include "cubefit/set_lemma.hpp"

namespace cubefit {

// Generates the instance, corrupts it, runs the configured estimator and
// evaluates against the generated truth. Every numeric field except the
// "timings_ms" object is a deterministic function of the config.
Json run_experiment(const ExperimentConfig& cfg);

// true when the run satisfied its estimator contracts (used for exit codes)
bool report_ok(const Json& report);

// strips volatile fields (timings) so replays compare bit-exactly
Json replay_view(const Json& report);

// sweep over epsilon values; returns CSV rows (eps, tv, column_error, rounds)
struct SweepRow {
  double eps = 0.0;
  double tv = 0.0;
  double column_err = 0.0;
  int rounds = 0;
};
std::vector<SweepRow> run_sweep(const ExperimentConfig& base,
                                const std::vector<double>& eps_values);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

Json facts_report_to_json(const FactsReport& rep);
Json lemma_suites_to_json(const LemmaSuiteResult& sets, const LemmaSuiteResult& indicators);

// points CSV: header x1,...,xd then one point per row, LF endings
std::string points_to_csv(const Matrix& pts);
Matrix points_from_csv(const std::string& text);
std::string labels_to_csv(const SampleSet& s);

}  // namespace cubefit
