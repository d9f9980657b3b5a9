#ifndef DAMC_CONFIG_HPP
#define DAMC_CONFIG_HPP

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "damc/samplers.hpp"
#include "damc/targets.hpp"

namespace damc {

using nlohmann::json;

// Target description as it appears in config files: one of the named
// families or an explicit mixture.
struct TargetConfig {
  std::string kind = "two_modes";  // two_modes | many_modes | custom
  double a = 5.0;
  int dim = 16;
  int n_modes = 16;
  std::uint64_t mode_seed = 7;
  bool standardized = true;
  // custom
  Vec weights;
  std::vector<Vec> means;
  std::vector<Vec> var_diags;

  GaussianMixture build() const {
    if (kind == "two_modes")
      return build_target({TwoModesSpec{a, dim}, standardized});
    if (kind == "many_modes")
      return build_target({ManyModesSpec{n_modes, dim, mode_seed}, standardized});
    if (kind == "custom") {
      GaussianMixture g(weights, means, var_diags);
      return standardized ? standardize(g) : g;
    }
    throw std::invalid_argument("unknown target kind: " + kind);
  }

  // Comma-free so the label can sit in a CSV column.
  std::string label() const {
    if (kind == "two_modes")
      return "two_modes_a" + format_num(a) + "_d" + std::to_string(dim);
    if (kind == "many_modes")
      return "many_modes_L" + std::to_string(n_modes) + "_d" + std::to_string(dim);
    return "custom_d" + std::to_string(means.empty() ? 0 : means[0].size());
  }

  static std::string format_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
  }
};

struct PathConfig {
  NoiseSchedule schedule = NoiseSchedule::vp();
  double sigma_min = 1e-2;
  std::optional<double> sigma_max;  // default sigma(T)
  double eps_tempering = 1e-5;

  TimeGrid grid(int K) const {
    const double hi = sigma_max.value_or(noise_level(schedule, schedule.horizon));
    return make_time_grid(schedule, K, sigma_min, hi);
  }
};

struct MetricsConfig {
  int n_projections = 128;
  int n_reference = 8192;
  std::uint64_t metric_seed = 1234;
};

// Deterministic-transition knobs (the ablation axis): fixed-point budget M,
// series truncation I, tolerance, and Hutchinson probe count N_H.
struct TransitionConfig {
  int fixed_point_iters = 4;
  int series_order = 3;
  double fixed_point_tol = 1e-8;
  int hutchinson_probes = 32;
};

// The experiment grid: (target x path x sampler x transition x K x seed).
struct RunConfig {
  std::vector<TargetConfig> targets;
  std::vector<std::string> paths = {"diffusion"};  // diffusion | tempering
  std::vector<std::string> samplers = {"smc"};     // ais smc re reverse_sde reverse_ode exact
  std::vector<std::string> transitions = {"none"};
  std::vector<int> K_values = {16, 32, 64, 128, 256};
  int n_runs = 8;
  std::vector<std::uint64_t> seeds;  // defaults to 0..n_runs-1
  PathConfig path;
  SamplerConfig sampler;
  TransitionConfig transition;
  std::string re_init = "auto";  // auto | base | score_informed
  MetricsConfig metrics;
  std::string out_dir = "results";
  bool save_ensembles = false;

  std::vector<std::uint64_t> resolved_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> s(n_runs);
    for (int i = 0; i < n_runs; ++i) s[i] = i;
    return s;
  }
};

inline TransitionSpec parse_transition(const std::string& name, const TransitionConfig& t) {
  if (name == "none") return TransitionSpec::none();
  if (name == "stoch1") return TransitionSpec::stoch1();
  if (name == "stoch2") return TransitionSpec::stoch2();
  if (name == "det-hessian")
    return TransitionSpec::det_im(t.fixed_point_iters, t.series_order, t.fixed_point_tol);
  if (name == "det-hutchinson")
    return TransitionSpec::det_im(t.fixed_point_iters, t.series_order, t.fixed_point_tol,
                                  TraceMode::hutchinson(t.hutchinson_probes));
  throw std::invalid_argument("unknown transition: " + name);
}

namespace detail {

inline void from_json_target(const json& j, TargetConfig& t) {
  t.kind = j.value("kind", t.kind);
  t.a = j.value("a", t.a);
  t.dim = j.value("dim", t.dim);
  t.n_modes = j.value("n_modes", t.n_modes);
  t.mode_seed = j.value("mode_seed", t.mode_seed);
  t.standardized = j.value("standardized", t.standardized);
  if (j.contains("weights")) t.weights = j.at("weights").get<Vec>();
  if (j.contains("means")) t.means = j.at("means").get<std::vector<Vec>>();
  if (j.contains("var_diags")) t.var_diags = j.at("var_diags").get<std::vector<Vec>>();
}

inline json to_json_target(const TargetConfig& t) {
  json j{{"kind", t.kind}, {"standardized", t.standardized}};
  if (t.kind == "two_modes") {
    j["a"] = t.a;
    j["dim"] = t.dim;
  } else if (t.kind == "many_modes") {
    j["n_modes"] = t.n_modes;
    j["dim"] = t.dim;
    j["mode_seed"] = t.mode_seed;
  } else {
    j["weights"] = t.weights;
    j["means"] = t.means;
    j["var_diags"] = t.var_diags;
  }
  return j;
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  if (j.contains("targets")) {
    for (const json& tj : j.at("targets")) {
      TargetConfig t;
      detail::from_json_target(tj, t);
      cfg.targets.push_back(t);
    }
  } else if (j.contains("target")) {
    TargetConfig t;
    detail::from_json_target(j.at("target"), t);
    cfg.targets.push_back(t);
  }
  if (cfg.targets.empty()) throw std::invalid_argument("config: no target given");

  cfg.paths = j.value("paths", cfg.paths);
  cfg.samplers = j.value("samplers", cfg.samplers);
  cfg.transitions = j.value("transitions", cfg.transitions);
  cfg.K_values = j.value("K", cfg.K_values);
  cfg.n_runs = j.value("n_runs", cfg.n_runs);
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.out_dir = j.value("out", cfg.out_dir);
  cfg.re_init = j.value("re_init", cfg.re_init);
  cfg.save_ensembles = j.value("save_ensembles", cfg.save_ensembles);

  if (j.contains("path")) {
    const json& p = j.at("path");
    if (p.contains("schedule")) {
      const json& s = p.at("schedule");
      const std::string kind = s.value("kind", "vp");
      if (kind == "vp")
        cfg.path.schedule =
            NoiseSchedule::vp(s.value("beta_min", 0.1), s.value("beta_max", 20.0),
                              s.value("horizon", 1.0), s.value("volatility", 1.0));
      else if (kind == "ve")
        cfg.path.schedule =
            NoiseSchedule::ve(s.value("sigma_min", 1e-2), s.value("sigma_max", 10.0));
      else
        throw std::invalid_argument("unknown schedule kind: " + kind);
    }
    cfg.path.sigma_min = p.value("sigma_min", cfg.path.sigma_min);
    if (p.contains("sigma_max") && !p.at("sigma_max").is_null())
      cfg.path.sigma_max = p.at("sigma_max").get<double>();
    cfg.path.eps_tempering = p.value("eps_tempering", cfg.path.eps_tempering);
  }

  if (j.contains("sampler_config")) {
    const json& s = j.at("sampler_config");
    SamplerConfig& sc = cfg.sampler;
    sc.n_particles = s.value("n_particles", sc.n_particles);
    sc.mcmc_steps_per_level = s.value("mcmc_steps_per_level", sc.mcmc_steps_per_level);
    sc.mcmc_warmup_per_level = s.value("mcmc_warmup_per_level", sc.mcmc_warmup_per_level);
    sc.ess_threshold = s.value("ess_threshold", sc.ess_threshold);
    sc.re_total_steps = s.value("re_total_steps", sc.re_total_steps);
    sc.re_warmup_steps = s.value("re_warmup_steps", sc.re_warmup_steps);
    sc.re_chains = s.value("re_chains", sc.re_chains);
    sc.swap_period = s.value("swap_period", sc.swap_period);
    sc.mala_step0 = s.value("mala_step0", sc.mala_step0);
    sc.mala_target_accept = s.value("mala_target_accept", sc.mala_target_accept);
    sc.keep_last = s.value("keep_last", sc.keep_last);
  }

  if (j.contains("transition_config")) {
    const json& t = j.at("transition_config");
    cfg.transition.fixed_point_iters =
        t.value("fixed_point_iters", cfg.transition.fixed_point_iters);
    cfg.transition.series_order = t.value("series_order", cfg.transition.series_order);
    cfg.transition.fixed_point_tol =
        t.value("fixed_point_tol", cfg.transition.fixed_point_tol);
    cfg.transition.hutchinson_probes =
        t.value("hutchinson_probes", cfg.transition.hutchinson_probes);
  }

  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    cfg.metrics.n_projections = m.value("n_projections", cfg.metrics.n_projections);
    cfg.metrics.n_reference = m.value("n_reference", cfg.metrics.n_reference);
    cfg.metrics.metric_seed = m.value("metric_seed", cfg.metrics.metric_seed);
  }
  return cfg;
}

inline json resolved_config_json(const RunConfig& cfg) {
  json targets = json::array();
  for (const TargetConfig& t : cfg.targets) targets.push_back(detail::to_json_target(t));
  json sched;
  if (cfg.path.schedule.kind == NoiseSchedule::Kind::VP)
    sched = json{{"kind", "vp"},
                 {"beta_min", cfg.path.schedule.beta_min},
                 {"beta_max", cfg.path.schedule.beta_max},
                 {"horizon", cfg.path.schedule.horizon},
                 {"volatility", cfg.path.schedule.volatility}};
  else
    sched = json{{"kind", "ve"},
                 {"sigma_min", cfg.path.schedule.sigma_min_sched},
                 {"sigma_max", cfg.path.schedule.sigma_max_sched}};
  json path{{"schedule", sched},
            {"sigma_min", cfg.path.sigma_min},
            {"eps_tempering", cfg.path.eps_tempering}};
  if (cfg.path.sigma_max) path["sigma_max"] = *cfg.path.sigma_max;

  return json{
      {"targets", targets},
      {"paths", cfg.paths},
      {"samplers", cfg.samplers},
      {"transitions", cfg.transitions},
      {"K", cfg.K_values},
      {"seeds", cfg.resolved_seeds()},
      {"re_init", cfg.re_init},
      {"path", path},
      {"sampler_config",
       json{{"n_particles", cfg.sampler.n_particles},
            {"mcmc_steps_per_level", cfg.sampler.mcmc_steps_per_level},
            {"mcmc_warmup_per_level", cfg.sampler.mcmc_warmup_per_level},
            {"ess_threshold", cfg.sampler.ess_threshold},
            {"re_total_steps", cfg.sampler.re_total_steps},
            {"re_warmup_steps", cfg.sampler.re_warmup_steps},
            {"re_chains", cfg.sampler.re_chains},
            {"swap_period", cfg.sampler.swap_period},
            {"mala_step0", cfg.sampler.mala_step0},
            {"mala_target_accept", cfg.sampler.mala_target_accept},
            {"keep_last", cfg.sampler.keep_last}}},
      {"transition_config",
       json{{"fixed_point_iters", cfg.transition.fixed_point_iters},
            {"series_order", cfg.transition.series_order},
            {"fixed_point_tol", cfg.transition.fixed_point_tol},
            {"hutchinson_probes", cfg.transition.hutchinson_probes}}},
      {"metrics",
       json{{"n_projections", cfg.metrics.n_projections},
            {"n_reference", cfg.metrics.n_reference},
            {"metric_seed", cfg.metrics.metric_seed}}},
      {"save_ensembles", cfg.save_ensembles},
      {"out", cfg.out_dir}};
}

inline json mixture_to_json(const GaussianMixture& g) {
  return json{{"dim", g.dim()},
              {"weights", g.weights()},
              {"means", g.means()},
              {"var_diags", g.var_diags()}};
}

}  // namespace damc

#endif
