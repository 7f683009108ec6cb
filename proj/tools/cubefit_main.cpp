// cubefit — robustly learn an affine transformation of the hypercube from
// corrupted samples. Subcommands: sample, corrupt, estimate, evaluate,
// lemma-check, facts-check, sweep. Reports are JSON, point clouds CSV; every
// run is a deterministic function of its config and master seed.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cubefit/config.hpp"
#include "cubefit/report.hpp"
#include "cubefit/rng.hpp"

namespace {

using cubefit::Json;

constexpr int kExitOk = 0;
constexpr int kExitContract = 1;
constexpr int kExitConfig = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << data;
}

cubefit::ExperimentConfig load_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  return cubefit::experiment_from_json(j);
}

void emit(const Json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust affine recovery of the hypercube"};
  app.require_subcommand(1);

  // --- sample ----------------------------------------------------------------
  auto* sample = app.add_subcommand("sample", "draw uniform points on [-1,1]^d");
  int s_d = 2;
  long long s_n = 1000;
  std::uint64_t s_seed = 1;
  std::string s_out;
  sample->add_option("--d", s_d, "dimension")->required();
  sample->add_option("--n", s_n, "number of points")->required();
  sample->add_option("--seed", s_seed, "rng seed");
  sample->add_option("--out", s_out, "output CSV path (stdout when empty)");

  // --- corrupt ---------------------------------------------------------------
  auto* corrupt_cmd = app.add_subcommand("corrupt", "apply an adversary to a point CSV");
  std::string c_config, c_in, c_out, c_labels;
  corrupt_cmd->add_option("--config", c_config, "experiment config JSON")->required();
  corrupt_cmd->add_option("--in", c_in, "input points CSV")->required();
  corrupt_cmd->add_option("--out", c_out, "corrupted points CSV")->required();
  corrupt_cmd->add_option("--labels-out", c_labels,
                          "hidden truth labels CSV (evaluation only)");

  // --- estimate ---------------------------------------------------------------
  auto* estimate = app.add_subcommand("estimate", "run an estimator on a generated instance");
  std::string e_config, e_out, e_mode;
  estimate->add_option("--config", e_config, "experiment config JSON")->required();
  estimate->add_option("--mode", e_mode, "shift-scale | rotation | affine (overrides config)");
  estimate->add_option("--out", e_out, "report JSON path (stdout when empty)");

  // --- evaluate ---------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "recompute metrics from a report");
  std::string v_report, v_out;
  evaluate->add_option("--report", v_report, "report JSON produced by estimate")->required();
  evaluate->add_option("--out", v_out, "output JSON path (stdout when empty)");

  // --- lemma-check ------------------------------------------------------------
  auto* lemma = app.add_subcommand("lemma-check", "randomized set-system suites");
  long long l_count = 10000;
  std::uint64_t l_seed = 7;
  std::string l_out;
  lemma->add_option("--instances", l_count, "applicable instances per suite");
  lemma->add_option("--seed", l_seed, "master seed");
  lemma->add_option("--out", l_out, "output JSON path");

  // --- facts-check ------------------------------------------------------------
  auto* facts = app.add_subcommand("facts-check", "Monte-Carlo cube-fact suite");
  long long f_budget = 1000000;
  int f_configs = 20;
  std::uint64_t f_seed = 7;
  std::string f_out;
  facts->add_option("--budget", f_budget, "samples per configuration");
  facts->add_option("--configs", f_configs, "configurations per fact");
  facts->add_option("--seed", f_seed, "master seed");
  facts->add_option("--out", f_out, "output JSON path");

  // --- sweep --------------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "run a grid of epsilon values");
  std::string w_config, w_eps, w_out, w_mode;
  sweep->add_option("--config", w_config, "experiment config JSON")->required();
  sweep->add_option("--eps", w_eps, "comma-separated epsilon list")->required();
  sweep->add_option("--mode", w_mode, "estimator mode (overrides config)");
  sweep->add_option("--out", w_out, "output CSV path (stdout when empty)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      const cubefit::Matrix pts = cubefit::standard_cube_points(
          s_d, static_cast<cubefit::Index>(s_n), s_seed);
      const std::string csv = cubefit::points_to_csv(pts);
      if (s_out.empty())
        std::cout << csv;
      else
        write_file(s_out, csv);
      return kExitOk;
    }

    if (*corrupt_cmd) {
      const auto cfg = load_config(c_config);
      const cubefit::Matrix pts = cubefit::points_from_csv(read_file(c_in));
      cubefit::CorruptionSpec cs = cfg.corruption;
      if (cs.seed == 0) cs.seed = cubefit::seed_split(cfg.master_seed, 12);
      const auto truth = cubefit::make_truth(cfg.truth, static_cast<int>(pts.cols()),
                                             cubefit::seed_split(cfg.master_seed, 10));
      const auto corrupted =
          cubefit::corrupt(cubefit::SampleSet::from_points(pts), cs, truth);
      write_file(c_out, cubefit::points_to_csv(corrupted.points()));
      if (!c_labels.empty()) write_file(c_labels, cubefit::labels_to_csv(corrupted));
      return kExitOk;
    }

    if (*estimate) {
      auto cfg = load_config(e_config);
      if (!e_mode.empty()) cfg.mode = e_mode;
      if (cfg.mode != "shift-scale" && cfg.mode != "rotation" && cfg.mode != "affine")
        throw std::invalid_argument("estimate: bad --mode");
      const Json report = cubefit::run_experiment(cfg);
      emit(report, e_out);
      return cubefit::report_ok(report) ? kExitOk : kExitContract;
    }

    if (*evaluate) {
      const Json report = Json::parse(read_file(v_report));
      const auto truth = cubefit::body_from_json(report.at("truth"));
      const auto recovered = cubefit::body_from_json(report.at("recovered"));
      const auto cfg = cubefit::experiment_from_json(report.at("config"));
      const auto tv = cubefit::tv_monte_carlo(recovered, truth, cfg.estimator.tv_mc_samples,
                                              cubefit::seed_split(cfg.master_seed, 14));
      Json out{{"tv_estimate", tv.estimate},
               {"tv_stderr", tv.stderr_},
               {"column_error", cubefit::column_error(recovered, truth)}};
      emit(out, v_out);
      return kExitOk;
    }

    if (*lemma) {
      const auto sets = cubefit::run_intersection_sum_suite(l_count, l_seed);
      const auto ind =
          cubefit::run_pairwise_expectation_suite(l_count, cubefit::seed_split(l_seed, 1));
      const Json out = cubefit::lemma_suites_to_json(sets, ind);
      emit(out, l_out);
      return out["all_pass"].get<bool>() ? kExitOk : kExitContract;
    }

    if (*facts) {
      const auto rep = cubefit::run_facts_suite(
          f_seed, static_cast<cubefit::Index>(f_budget), f_configs);
      const Json out = cubefit::facts_report_to_json(rep);
      emit(out, f_out);
      return rep.all_pass ? kExitOk : kExitContract;
    }

    if (*sweep) {
      auto cfg = load_config(w_config);
      if (!w_mode.empty()) cfg.mode = w_mode;
      std::vector<double> eps;
      std::stringstream ss(w_eps);
      std::string tok;
      while (std::getline(ss, tok, ',')) eps.push_back(std::stod(tok));
      if (eps.empty()) throw std::invalid_argument("sweep: empty --eps list");
      const auto rows = cubefit::run_sweep(cfg, eps);
      const std::string csv = cubefit::sweep_to_csv(rows);
      if (w_out.empty())
        std::cout << csv;
      else
        write_file(w_out, csv);
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitContract;
  }
  return kExitConfig;
}
