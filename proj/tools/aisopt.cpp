#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "aisopt/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"constrained stochastic optimization with adaptive importance sampling"};
  app.require_subcommand(1);

  // run
  std::string config_arg, out_override;
  long traj_override = 0, horizon_override = 0;
  long long seed_override = -1;
  auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file or preset name");
  run_cmd->add_option("config", config_arg, "config path or preset name")->required();
  run_cmd->add_option("--trajectories", traj_override, "override trajectory count");
  run_cmd->add_option("--horizon", horizon_override, "override horizon");
  run_cmd->add_option("--seed", seed_override, "override base seed");
  run_cmd->add_option("--out", out_override, "override output directory");

  // plot
  std::string summary_dir;
  auto* plot_cmd = app.add_subcommand("plot", "render SVG figures from a run's summary CSV");
  plot_cmd->add_option("summary-dir", summary_dir, "directory containing summary.csv")->required();

  // presets
  auto* presets_cmd = app.add_subcommand("presets", "inspect shipped presets");
  presets_cmd->require_subcommand(1);
  auto* list_cmd = presets_cmd->add_subcommand("list", "list preset names");
  std::string show_name;
  auto* show_cmd = presets_cmd->add_subcommand("show", "print a preset config");
  show_cmd->add_option("name", show_name, "preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      aisopt::ExperimentConfig cfg;
      if (auto text = aisopt::preset_text(config_arg))
        cfg = aisopt::parse_config_text(*text, config_arg);
      else
        cfg = aisopt::load_config(config_arg);
      if (traj_override > 0) cfg.trajectories = traj_override;
      if (horizon_override > 0) cfg.horizon = horizon_override;
      if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
      if (!out_override.empty()) cfg.out_dir = out_override;
      auto summary = aisopt::run_experiment(cfg);
      std::cout << "wrote " << cfg.out_dir << " (" << summary.trajectories
                << " trajectories, horizon " << cfg.horizon << ", "
                << summary.samples_per_trajectory << " samples each)\n";
      long final_n = summary.checkpoints.back();
      std::cout << "theta at n=" << final_n << ": mean "
                << summary.theta_band.at(final_n).mean << " band ["
                << summary.theta_band.at(final_n).lo << ", "
                << summary.theta_band.at(final_n).hi << "]\n";
      if (summary.scaled_variance.count(final_n))
        std::cout << "scaled-error variance trace at n=" << final_n << ": "
                  << summary.scaled_variance.at(final_n).trace() << "\n";
      return 0;
    }
    if (plot_cmd->parsed()) {
      int n = aisopt::emit_plots(summary_dir);
      std::cout << "wrote " << n << " figure(s) to " << summary_dir << "\n";
      return 0;
    }
    if (list_cmd->parsed()) {
      for (const auto& name : aisopt::preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (show_cmd->parsed()) {
      auto text = aisopt::preset_text(show_name);
      if (!text) {
        std::cerr << "unknown preset: " << show_name << "\n";
        return 1;
      }
      std::cout << *text;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
