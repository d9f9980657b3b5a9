// Command-line driver: config-driven experiment grids, 1-D path
// visualization, SVG plotting, and config validation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "damc/presets.hpp"
#include "damc/runner.hpp"
#include "damc/svg.hpp"

namespace {

damc::RunConfig load_config(const std::string& config_file, const std::string& preset,
                            long seed_override, const std::string& out_override) {
  damc::json j;
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw std::invalid_argument("cannot open config file: " + config_file);
    in >> j;
  } else if (!preset.empty()) {
    j = damc::json::parse(damc::preset_json(preset));
  } else {
    throw std::invalid_argument("either --config or --preset is required");
  }
  damc::RunConfig cfg = damc::parse_run_config(j);
  if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  if (!out_override.empty()) cfg.out_dir = out_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"annealed Monte Carlo sampling on diffusion and tempering density paths"};
  app.require_subcommand(1);

  std::string config_file, preset, out_dir;
  long seed = -1;
  bool quiet = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->add_option("--preset", preset, "built-in preset name");
    cmd->add_option("--seed", seed, "replace the seed list with a single seed");
    cmd->add_option("--out", out_dir, "output directory override");
  };

  CLI::App* run = app.add_subcommand("run", "execute the experiment grid");
  add_common(run);
  run->add_flag("--quiet", quiet, "suppress per-cell progress lines");

  CLI::App* viz = app.add_subcommand("path-viz", "per-level densities for a 1-D target");
  add_common(viz);
  int viz_K = 128;
  double xmin = -9.0, xmax = 9.0;
  int nx = 1201;
  viz->add_option("--K", viz_K, "number of annealing levels");
  viz->add_option("--xmin", xmin, "grid lower bound");
  viz->add_option("--xmax", xmax, "grid upper bound");
  viz->add_option("--nx", nx, "grid size");

  CLI::App* plot = app.add_subcommand("plot", "render a result CSV to SVG");
  std::string csv_file, svg_file, metric = "sw2";
  plot->add_option("--csv", csv_file, "input CSV")->required();
  plot->add_option("--out", svg_file, "output SVG")->required();
  plot->add_option("--metric", metric, "metric column for bar charts");

  CLI::App* validate = app.add_subcommand("validate", "check a config and list the grid");
  add_common(validate);
  bool dump_target = false;
  validate->add_flag("--dump-target", dump_target,
                     "also print the built mixture parameters as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const damc::RunConfig cfg = load_config(config_file, preset, seed, out_dir);
      const auto results = damc::run_experiment(cfg, !quiet);
      std::cout << "wrote " << results.size() << " rows to " << cfg.out_dir << "/metrics.csv"
                << std::endl;
    } else if (viz->parsed()) {
      const damc::RunConfig cfg = load_config(config_file, preset, seed, out_dir);
      damc::Vec grid(nx);
      for (int i = 0; i < nx; ++i) grid[i] = xmin + (xmax - xmin) * i / (nx - 1);
      damc::path_viz(cfg, viz_K, grid);
      std::cout << "wrote per-level density and mode-mass CSVs to " << cfg.out_dir
                << std::endl;
    } else if (plot->parsed()) {
      const damc::CsvTable t = damc::read_csv(csv_file);
      bool has_density = false, has_mass = false;
      for (const auto& h : t.header) {
        has_density |= h == "density";
        has_mass |= h == "mass";
      }
      if (has_density)
        damc::plot_path_density_csv(csv_file, svg_file);
      else if (has_mass)
        damc::plot_mode_mass_csv(csv_file, svg_file);
      else
        damc::plot_metrics_csv(csv_file, svg_file, metric);
      std::cout << "wrote " << svg_file << std::endl;
    } else if (validate->parsed()) {
      const damc::RunConfig cfg = load_config(config_file, preset, seed, out_dir);
      const auto cells = damc::expand_cells(cfg);
      std::cout << damc::resolved_config_json(cfg).dump(2) << "\n"
                << "grid: " << cells.size() << " cells" << std::endl;
      if (dump_target)
        for (const auto& t : cfg.targets)
          std::cout << t.label() << ": " << damc::mixture_to_json(t.build()).dump()
                    << std::endl;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
