#pragma once

// Configuration-driven experiment runner: parses the flat key/value config
// grammar (fail-closed), builds problem + IS family + engine, fans
// trajectories across workers, and writes CSV/JSON summaries and SVG plots.

#include <optional>
#include <string>

#include "aisopt/diagnostics.hpp"

namespace aisopt {

struct ExperimentConfig {
  // [problem]
  std::string problem_kind;  // normal_quantile | exponential_quantile | constrained_quadratic
  double alpha_tail = 1e-4;
  double gradient_scale = 1.0;
  std::optional<double> theta_lower, theta_upper;
  std::optional<Matrix> theta_A;
  std::optional<Vector> theta_b;
  std::optional<Matrix> quad_H, quad_Sigma;

  // [is] (optional for baselines)
  std::string is_kind;  // exponential_tilting | mean_translation | mixture | none
  std::string is_base = "standard_normal";  // standard_normal | symmetric_exponential
  std::optional<double> mu_lower, mu_upper;
  std::optional<Vector> mixture_means;  // mixture of N(m_i, 1) components

  // [run]
  std::string engine;  // joint-nda | joint-nda-secondary | vanilla-nda | projected-sgd | pr-sa | rm-sa
  double gamma = 0.55;
  double alpha0_theta = 0.05;
  double alpha0_mu = 3e-6;
  Vector theta0, mu0;
  long horizon = 0;
  long trajectories = 1;
  std::uint64_t seed = 1;
  long thinning = 100;
  long burn_in = 0;
  std::vector<long> checkpoints;  // empty: geometric default
  std::string out_dir = "out";
  bool freeze_mu = false;

  std::string name;  // preset name or config path stem
};

// Parses and validates; unknown keys are rejected. Throws std::runtime_error
// with line/column on parse errors and the offending field name on
// validation errors.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

struct BuiltExperiment {
  Problem problem;
  std::optional<ISFamily> family;
  RunSpec spec;
};
BuiltExperiment build_experiment(const ExperimentConfig& cfg);

// Runs T trajectories (seeds = base seed + index) across workers
// (AISOPT_WORKERS, default hardware concurrency), writes
// trajectories.csv + summary.json + summary.csv into cfg.out_dir, and
// returns the summary. Output is identical for any worker count.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

// Renders theta-band, mu-track and variance figures as SVG from the summary
// CSV in `summary_dir` (presentation-only; derives entirely from CSV
// content). Returns the number of figures written.
int emit_plots(const std::string& summary_dir);

// Shipped presets.
std::vector<std::string> preset_names();
std::optional<std::string> preset_text(const std::string& name);

}  // namespace aisopt
