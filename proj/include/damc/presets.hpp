#ifndef DAMC_PRESETS_HPP
#define DAMC_PRESETS_HPP

#include <map>
#include <stdexcept>
#include <string>

namespace damc {

// Built-in experiment presets. Desk presets finish in minutes on a laptop;
// the -full presets carry the full-scale sampler budgets and are
// long-running.
inline const std::map<std::string, std::string>& preset_table() {
  static const std::map<std::string, std::string> presets = {
      {"smoke", R"json({
  "target": {"kind": "two_modes", "a": 5.0, "dim": 2},
  "paths": ["diffusion"],
  "samplers": ["smc"],
  "transitions": ["stoch2"],
  "K": [8],
  "n_runs": 2,
  "sampler_config": {"n_particles": 256, "mcmc_steps_per_level": 5,
                     "mcmc_warmup_per_level": 2, "keep_last": 3},
  "metrics": {"n_projections": 64, "n_reference": 2048},
  "out": "results/smoke"
})json"},
      {"paths-desk", R"json({
  "target": {"kind": "two_modes", "a": 5.0, "dim": 16},
  "paths": ["diffusion", "tempering"],
  "samplers": ["ais", "smc", "re"],
  "transitions": ["none"],
  "K": [16, 32, 64],
  "n_runs": 8,
  "sampler_config": {"n_particles": 2048, "mcmc_steps_per_level": 40,
                     "mcmc_warmup_per_level": 32, "keep_last": 8,
                     "re_total_steps": 2048, "re_warmup_steps": 512},
  "metrics": {"n_reference": 8192},
  "out": "results/paths-desk"
})json"},
      {"transitions-desk", R"json({
  "target": {"kind": "two_modes", "a": 10.0, "dim": 16},
  "paths": ["diffusion"],
  "samplers": ["ais"],
  "transitions": ["none", "stoch1", "stoch2", "det-hessian", "det-hutchinson"],
  "K": [64],
  "n_runs": 8,
  "sampler_config": {"n_particles": 2048, "mcmc_steps_per_level": 10,
                     "mcmc_warmup_per_level": 5, "keep_last": 5},
  "metrics": {"n_reference": 8192},
  "out": "results/transitions-desk"
})json"},
      {"manymodes-desk", R"json({
  "target": {"kind": "many_modes", "n_modes": 16, "dim": 8, "mode_seed": 7},
  "paths": ["diffusion", "tempering"],
  "samplers": ["smc"],
  "transitions": ["none"],
  "K": [16, 32, 64],
  "n_runs": 8,
  "sampler_config": {"n_particles": 2048, "mcmc_steps_per_level": 10,
                     "mcmc_warmup_per_level": 5, "keep_last": 5},
  "metrics": {"n_reference": 8192},
  "out": "results/manymodes-desk"
})json"},
      {"modeswitch-viz", R"json({
  "target": {"kind": "custom", "standardized": false,
             "weights": [0.75, 0.25],
             "means": [[-4.0], [4.0]],
             "var_diags": [[0.25], [1.0]]},
  "paths": ["diffusion", "tempering"],
  "out": "results/modeswitch-viz"
})json"},
      {"paths-full", R"json({
  "target": {"kind": "two_modes", "a": 5.0, "dim": 64},
  "paths": ["diffusion", "tempering"],
  "samplers": ["ais", "smc", "re"],
  "transitions": ["none"],
  "K": [16, 32, 64, 128, 256],
  "n_runs": 8,
  "out": "results/paths-full"
})json"},
      {"transitions-full", R"json({
  "target": {"kind": "two_modes", "a": 10.0, "dim": 16},
  "paths": ["diffusion"],
  "samplers": ["ais", "smc", "re"],
  "transitions": ["none", "stoch1", "stoch2", "det-hessian", "det-hutchinson"],
  "K": [16, 32, 64, 128, 256],
  "n_runs": 8,
  "out": "results/transitions-full"
})json"},
  };
  return presets;
}

inline std::string preset_json(const std::string& name) {
  const auto& table = preset_table();
  auto it = table.find(name);
  if (it == table.end()) {
    std::string names;
    for (const auto& [n, _] : table) names += (names.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + name + "' (available: " + names + ")");
  }
  return it->second;
}

}  // namespace damc

#endif
