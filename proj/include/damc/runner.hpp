#ifndef DAMC_RUNNER_HPP
#define DAMC_RUNNER_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "damc/config.hpp"
#include "damc/density_path.hpp"
#include "damc/metrics.hpp"
#include "damc/replica_exchange.hpp"
#include "damc/reverse_sim.hpp"
#include "damc/samplers.hpp"

namespace damc {

// One grid cell of the experiment.
struct Cell {
  int target_idx = 0;
  std::string path_kind;   // diffusion | tempering | "-" (exact)
  std::string sampler;     // ais smc re reverse_sde reverse_ode exact
  std::string transition;  // none stoch1 stoch2 det-hessian det-hutchinson | "-"
  int K = 0;
  std::uint64_t seed = 0;
};

struct CellResult {
  Cell cell;
  MetricsReport metrics;
  double log_normalizer = std::numeric_limits<double>::quiet_NaN();
  RunDiagnostics diag;
  double wall_ms = 0.0;
  int n_points = 0;
  // Populated only when the config asks for ensemble dumps.
  std::vector<Vec> ensemble_points;
  Vec ensemble_weights;
};

namespace detail {

inline bool sampler_uses_path(const std::string& s) {
  return s == "ais" || s == "smc" || s == "re" || s == "reverse_sde" || s == "reverse_ode";
}

inline bool sampler_uses_transition(const std::string& s) {
  return s == "ais" || s == "smc" || s == "re";
}

}  // namespace detail

// Builds every referenced object once so bad parameters surface before any
// cell launches: targets, sampler knobs, metric knobs, and the time grid
// for each requested K.
inline void validate_config(const RunConfig& cfg) {
  if (cfg.targets.empty()) throw std::invalid_argument("config: no target given");
  for (const TargetConfig& t : cfg.targets) t.build();
  cfg.sampler.validate();
  if (cfg.metrics.n_projections < 1 || cfg.metrics.n_reference < 1)
    throw std::invalid_argument("config: metric counts must be positive");
  if (cfg.re_init != "auto" && cfg.re_init != "base" && cfg.re_init != "score_informed")
    throw std::invalid_argument("config: unknown re_init '" + cfg.re_init + "'");
  bool needs_grid = false;
  for (const std::string& p : cfg.paths) needs_grid |= p == "diffusion";
  for (const std::string& s : cfg.samplers)
    needs_grid |= s == "reverse_sde" || s == "reverse_ode";
  if (needs_grid)
    for (int K : cfg.K_values) cfg.path.grid(K);
}

// Expands the grid, rejecting invalid combinations with a message naming
// the violated constraint.
inline std::vector<Cell> expand_cells(const RunConfig& cfg) {
  validate_config(cfg);
  std::vector<Cell> cells;
  const std::vector<std::uint64_t> seeds = cfg.resolved_seeds();
  for (int ti = 0; ti < static_cast<int>(cfg.targets.size()); ++ti) {
    for (const std::string& sampler : cfg.samplers) {
      if (sampler == "exact") {
        for (std::uint64_t seed : seeds)
          cells.push_back({ti, "-", sampler, "-", 0, seed});
        continue;
      }
      if (!detail::sampler_uses_path(sampler))
        throw std::invalid_argument("unknown sampler: " + sampler);
      for (const std::string& path_kind : cfg.paths) {
        if (path_kind != "diffusion" && path_kind != "tempering")
          throw std::invalid_argument("unknown path kind: " + path_kind);
        if ((sampler == "reverse_sde" || sampler == "reverse_ode") &&
            path_kind == "tempering")
          continue;  // reverse simulation is only defined on the diffusion path
        const std::vector<std::string> trans =
            detail::sampler_uses_transition(sampler) ? cfg.transitions
                                                     : std::vector<std::string>{"-"};
        for (const std::string& tr : trans) {
          if (tr != "-" && tr != "none" && path_kind == "tempering")
            throw std::invalid_argument(
                "transition '" + tr +
                "' is not valid on the tempering path: noising/denoising kernels need the "
                "diffusion path");
          for (int K : cfg.K_values)
            for (std::uint64_t seed : seeds) cells.push_back({ti, path_kind, sampler, tr, K, seed});
        }
      }
    }
  }
  return cells;
}

namespace detail {

struct PathCache {
  std::map<std::string, DensityPath> cache;

  const DensityPath& get(const RunConfig& cfg, const GaussianMixture& target, int target_idx,
                         const std::string& kind, int K) {
    const std::string key = kind + "/" + std::to_string(target_idx) + "/" + std::to_string(K);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    DensityPath path = kind == "diffusion"
                           ? diffusion_path(target, cfg.path.schedule, cfg.path.grid(K))
                           : tempering_path(target, K, cfg.path.eps_tempering);
    return cache.emplace(key, std::move(path)).first->second;
  }
};

inline std::uint64_t cell_stream(const Cell& c) {
  std::uint64_t h = splitmix64(c.seed);
  h = mix_seed(h, static_cast<std::uint64_t>(c.target_idx));
  h = mix_seed(h, std::hash<std::string>{}(c.path_kind));
  h = mix_seed(h, std::hash<std::string>{}(c.sampler));
  h = mix_seed(h, std::hash<std::string>{}(c.transition));
  h = mix_seed(h, static_cast<std::uint64_t>(c.K));
  return h;
}

}  // namespace detail

// Executes one cell and evaluates metrics against fresh exact reference
// samples of the target.
inline CellResult run_cell(const RunConfig& cfg, const Cell& cell,
                           detail::PathCache& paths) {
  const auto t0 = std::chrono::steady_clock::now();
  const GaussianMixture target = cfg.targets[cell.target_idx].build();
  CellResult out;
  out.cell = cell;

  Rng rng(detail::cell_stream(cell));
  std::vector<Vec> points;
  Vec weights;

  if (cell.sampler == "exact") {
    points = target.sample_n(cfg.sampler.n_particles, rng);
  } else {
    const DensityPath& path =
        paths.get(cfg, target, cell.target_idx, cell.path_kind, cell.K);
    SamplerConfig scfg = cfg.sampler;
    if (cfg.re_init == "base")
      scfg.re_init = SamplerConfig::ReInit::Base;
    else if (cfg.re_init == "score_informed")
      scfg.re_init = SamplerConfig::ReInit::ScoreInformed;
    else
      scfg.re_init = cell.path_kind == "diffusion" ? SamplerConfig::ReInit::ScoreInformed
                                                   : SamplerConfig::ReInit::Base;
    const TransitionSpec spec =
        cell.transition == "-" ? TransitionSpec::none()
                               : parse_transition(cell.transition, cfg.transition);
    if (cell.sampler == "ais" || cell.sampler == "smc") {
      const ParticleEnsemble ens = cell.sampler == "ais" ? ais_run(path, spec, scfg, rng)
                                                         : smc_run(path, spec, scfg, rng);
      ens.flatten(points, weights);
      out.log_normalizer = ens.log_normalizer;
      out.diag = ens.diag;
      out.metrics.ess_fraction = ess_fraction(ens.log_weights);
    } else if (cell.sampler == "re") {
      const ReResult res = re_run(path, spec, scfg, rng);
      points = res.level0_samples;
      out.diag = res.diag;
    } else if (cell.sampler == "reverse_sde") {
      points = reverse_sde_simulate(path, scfg.n_particles, rng);
    } else if (cell.sampler == "reverse_ode") {
      points = reverse_ode_simulate(path, scfg.n_particles, rng);
    }
  }

  out.n_points = static_cast<int>(points.size());
  Rng metric_rng(mix_seed(cfg.metrics.metric_seed, cell.seed));
  const std::vector<Vec> reference = target.sample_n(cfg.metrics.n_reference, metric_rng);
  out.metrics.n_projections = cfg.metrics.n_projections;
  out.metrics.sw2 = sliced_wasserstein(points, weights, reference, {},
                                       cfg.metrics.n_projections, metric_rng);
  if (target.n_components() >= 2) {
    out.metrics.mode_weight_abs_err = mode_weight_error(points, weights, target);
    out.metrics.weight_hist_tv = weight_histogram_tv(points, weights, target);
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  if (cfg.save_ensembles) {
    out.ensemble_points = std::move(points);
    out.ensemble_weights = std::move(weights);
  }
  return out;
}

inline std::string csv_header() {
  return "target,dim,path,sampler,transition,K,seed,n_points,sw2,mode_weight_abs_err,"
         "weight_hist_tv,ess_fraction,log_normalizer,mala_accept,swap_accept,resamples,"
         "fp_nonconverged,ddpm_violations,flagged,wall_ms";
}

inline std::string csv_row(const RunConfig& cfg, const CellResult& r) {
  const TargetConfig& t = cfg.targets[r.cell.target_idx];
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s,%d,%s,%s,%s,%d,%llu,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f,%.6f,%ld,%ld,"
                "%ld,%ld,%.3f",
                t.label().c_str(), t.kind == "custom" ? (t.means.empty() ? 0 : static_cast<int>(t.means[0].size())) : t.dim,
                r.cell.path_kind.c_str(), r.cell.sampler.c_str(), r.cell.transition.c_str(),
                r.cell.K, static_cast<unsigned long long>(r.cell.seed), r.n_points,
                r.metrics.sw2, r.metrics.mode_weight_abs_err, r.metrics.weight_hist_tv,
                r.metrics.ess_fraction, r.log_normalizer, r.diag.mala_accept_mean(),
                r.diag.swap_accept_rate(), r.diag.resample_events, r.diag.fp_nonconverged,
                r.diag.ddpm_violations, r.diag.flagged_particles, r.wall_ms);
  return buf;
}

inline json diagnostics_json(const RunConfig& cfg, const CellResult& r) {
  json j{{"target", cfg.targets[r.cell.target_idx].label()},
         {"path", r.cell.path_kind},
         {"sampler", r.cell.sampler},
         {"transition", r.cell.transition},
         {"K", r.cell.K},
         {"seed", r.cell.seed},
         {"fp_calls", r.diag.fp_calls},
         {"fp_iterations", r.diag.fp_iterations},
         {"fp_nonconverged", r.diag.fp_nonconverged},
         {"ddpm_violations", r.diag.ddpm_violations},
         {"flagged_particles", r.diag.flagged_particles},
         {"resample_events", r.diag.resample_events},
         {"swap_attempts", r.diag.swap_attempts},
         {"swap_accepts", r.diag.swap_accepts},
         {"mala_accept_mean", r.diag.mala_accept_mean()}};
  if (!r.diag.per_level_ess.empty()) j["per_level_ess"] = r.diag.per_level_ess;
  if (!r.diag.per_level_swap_attempts.empty()) {
    Vec rates(r.diag.per_level_swap_attempts.size(), 0.0);
    for (std::size_t k = 0; k < rates.size(); ++k)
      if (r.diag.per_level_swap_attempts[k] > 0)
        rates[k] = static_cast<double>(r.diag.per_level_swap_accepts[k]) /
                   r.diag.per_level_swap_attempts[k];
    j["per_level_swap_accept"] = rates;
  }
  return j;
}

inline std::string summary_header() {
  return "target,path,sampler,transition,K,n_seeds,median_sw2,median_mode_weight_abs_err,"
         "median_weight_hist_tv";
}

// Aggregated medians per (target, path, sampler, transition, K).
inline std::vector<std::string> summarize(const RunConfig& cfg,
                                          const std::vector<CellResult>& results) {
  struct Agg {
    Vec sw2, mode_err, tv;
  };
  auto med = [](Vec v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  std::map<std::string, Agg> groups;
  for (const CellResult& r : results) {
    char key[256];
    std::snprintf(key, sizeof(key), "%s,%s,%s,%s,%d",
                  cfg.targets[r.cell.target_idx].label().c_str(), r.cell.path_kind.c_str(),
                  r.cell.sampler.c_str(), r.cell.transition.c_str(), r.cell.K);
    Agg& a = groups[key];
    a.sw2.push_back(r.metrics.sw2);
    a.mode_err.push_back(r.metrics.mode_weight_abs_err);
    a.tv.push_back(r.metrics.weight_hist_tv);
  }
  std::vector<std::string> rows;
  for (auto& [key, a] : groups) {
    char buf[384];
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g,%.17g,%.17g", key.c_str(), a.sw2.size(),
                  med(a.sw2), med(a.mode_err), med(a.tv));
    rows.push_back(buf);
  }
  return rows;
}

namespace detail {

inline std::string cell_slug(const RunConfig& cfg, const Cell& c) {
  return cfg.targets[c.target_idx].label() + "_" + c.path_kind + "_" + c.sampler + "_" +
         c.transition + "_K" + std::to_string(c.K) + "_s" + std::to_string(c.seed);
}

}  // namespace detail

// Runs the full grid, writing metrics CSV, JSONL diagnostics, the aggregated
// summary, and the resolved config next to the results.
inline std::vector<CellResult> run_experiment(const RunConfig& cfg, bool echo = false) {
  const std::vector<Cell> cells = expand_cells(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream csv(cfg.out_dir + "/metrics.csv");
  std::ofstream jsonl(cfg.out_dir + "/diagnostics.jsonl");
  std::ofstream cfg_out(cfg.out_dir + "/resolved_config.json");
  cfg_out << resolved_config_json(cfg).dump(2) << "\n";
  csv << csv_header() << "\n";

  detail::PathCache paths;
  std::vector<CellResult> results;
  results.reserve(cells.size());
  for (const Cell& cell : cells) {
    CellResult r = run_cell(cfg, cell, paths);
    if (cfg.save_ensembles) {
      std::ofstream ens(cfg.out_dir + "/ensemble_" + detail::cell_slug(cfg, cell) + ".csv");
      for (int j = 0; j < static_cast<int>(r.ensemble_points.size()); ++j) {
        for (double v : r.ensemble_points[j]) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.17g,", v);
          ens << buf;
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g\n",
                      r.ensemble_weights.empty() ? 1.0 / r.ensemble_points.size()
                                                 : r.ensemble_weights[j]);
        ens << buf;
      }
    }
    r.ensemble_points.clear();
    r.ensemble_weights.clear();
    csv << csv_row(cfg, r) << "\n";
    jsonl << diagnostics_json(cfg, r).dump() << "\n";
    if (echo)
      std::fprintf(stderr, "[%zu/%zu] %s %s/%s K=%d seed=%llu sw2=%.4g\n", results.size() + 1,
                   cells.size(), cell.sampler.c_str(), cell.path_kind.c_str(),
                   cell.transition.c_str(), cell.K,
                   static_cast<unsigned long long>(cell.seed), r.metrics.sw2);
    results.push_back(std::move(r));
  }
  std::ofstream summary(cfg.out_dir + "/summary.csv");
  summary << summary_header() << "\n";
  for (const std::string& row : summarize(cfg, results)) summary << row << "\n";
  return results;
}

// Per-level densities and strongest-mode mass profile for 1-D targets,
// written as two CSV files for the plot command.
inline void path_viz(const RunConfig& cfg, int K, const Vec& x_grid) {
  std::filesystem::create_directories(cfg.out_dir);
  const GaussianMixture target = cfg.targets.at(0).build();
  if (target.dim() != 1) throw std::invalid_argument("path-viz: target dimension must be 1");

  for (const std::string& kind : cfg.paths) {
    const DensityPath path = kind == "diffusion"
                                 ? diffusion_path(target, cfg.path.schedule, cfg.path.grid(K))
                                 : tempering_path(target, K, cfg.path.eps_tempering);
    std::ofstream dens(cfg.out_dir + "/path_density_" + kind + ".csv");
    dens << "level,meta,x,density\n";
    for (int k = 0; k <= K; ++k) {
      // Normalize each level on the grid so tempering levels are comparable.
      Vec vals(x_grid.size());
      for (std::size_t i = 0; i < x_grid.size(); ++i)
        vals[i] = std::exp(path.levels[k].oracle.log_density({x_grid[i]}));
      double total = 0.0;
      for (std::size_t i = 0; i + 1 < x_grid.size(); ++i)
        total += 0.5 * (vals[i] + vals[i + 1]) * (x_grid[i + 1] - x_grid[i]);
      const double meta = kind == "diffusion" ? path.levels[k].time : path.levels[k].beta;
      for (std::size_t i = 0; i < x_grid.size(); ++i) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g\n", k, meta, x_grid[i],
                      vals[i] / total);
        dens << buf;
      }
    }
    const Vec mass = path_mode_mass_profile_1d(path, x_grid);
    std::ofstream mcsv(cfg.out_dir + "/mode_mass_" + kind + ".csv");
    mcsv << "level,meta,mass\n";
    for (int k = 0; k <= K; ++k) {
      const double meta = kind == "diffusion" ? path.levels[k].time : path.levels[k].beta;
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g\n", k, meta, mass[k]);
      mcsv << buf;
    }
  }
}

}  // namespace damc

#endif
