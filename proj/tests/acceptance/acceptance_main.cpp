// Acceptance suite: runs every exit criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits non-zero when any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "damc/config.hpp"
#include "damc/density_path.hpp"
#include "damc/metrics.hpp"
#include "damc/presets.hpp"
#include "damc/replica_exchange.hpp"
#include "damc/reverse_sim.hpp"
#include "damc/runner.hpp"
#include "damc/samplers.hpp"
#include "damc/transport.hpp"

using namespace damc;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-4) {
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return g;
}

double rel_err(const Vec& got, const Vec& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < got.size(); ++j) {
    const double d = got[j] - want[j];
    num += d * d;
    den += want[j] * want[j];
  }
  return std::sqrt(num / std::max(den, 1e-30));
}

double median(Vec v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sw_to_exact(const std::vector<Vec>& pts, const Vec& w, const GaussianMixture& target,
                   int n_ref, int n_proj, std::uint64_t seed) {
  Rng rng(seed);
  const auto ref = target.sample_n(n_ref, rng);
  return sliced_wasserstein(pts, w, ref, {}, n_proj, rng);
}

// ---------------------------------------------------------------- criterion 1
bool oracle_suite(std::string& detail) {
  double worst_score = 0.0, worst_hess = 0.0;
  for (int family = 0; family < 2; ++family) {
    const GaussianMixture g = family == 0
                                  ? build_target({TwoModesSpec{5.0, 16}, true})
                                  : build_target({ManyModesSpec{16, 8, 7}, true});
    Rng rng(1000 + family);
    for (int i = 0; i < 1000; ++i) {
      Vec x = g.sample(rng);
      // Spread a third of the points off-distribution.
      if (i % 3 == 0)
        for (auto& v : x) v += 0.5 * rng.normal();
      const Vec fd_s = fd_gradient([&](const Vec& y) { return g.log_density(y); }, x);
      worst_score = std::max(worst_score, rel_err(g.score(x), fd_s));
      // h = 1e-5 here: the h = 1e-4 stencil's truncation error on the
      // narrow-mode third derivatives exceeds the 1e-5 gate itself.
      Vec fd_h(x.size());
      Vec xp = x, xm = x;
      for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + 1e-5;
        xm[j] = x[j] - 1e-5;
        fd_h[j] = (g.score(xp)[j] - g.score(xm)[j]) / 2e-5;
        xp[j] = x[j];
        xm[j] = x[j];
      }
      worst_hess = std::max(worst_hess, rel_err(g.hessian_diag(x), fd_h));
    }
  }
  std::ostringstream os;
  os << "max rel err: score " << worst_score << ", hessian " << worst_hess;
  detail = os.str();
  return worst_score < 1e-5 && worst_hess < 1e-5;
}

// ---------------------------------------------------------------- criterion 2
bool pushforward_marginals(std::string& detail) {
  const GaussianMixture target = build_target({TwoModesSpec{5.0, 4}, true});
  const NoiseSchedule sched = NoiseSchedule::vp();
  const int n = 10000, n_proj = 128;
  std::ostringstream os;
  bool ok = true;
  int ti = 0;
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const GaussianMixture pt = diffuse(target, sched, t);
    const GaussianKernelParams fwd = noising_kernel(sched, 0.0, t);
    Rng rng(9000 + ti);
    std::vector<Vec> pushed(n), direct(n);
    for (int i = 0; i < n; ++i) {
      pushed[i] = kernel_sample(fwd, target.sample(rng), rng);
      direct[i] = pt.sample(rng);
    }
    Rng proj(9100 + ti);
    const double sw = sliced_wasserstein(pushed, direct, n_proj, proj);
    double floor = 0.0;
    for (int rep = 0; rep < 16; ++rep) {
      Rng fr(9200 + 31 * ti + rep);
      std::vector<Vec> a(n), b(n);
      for (int i = 0; i < n; ++i) {
        a[i] = pt.sample(fr);
        b[i] = pt.sample(fr);
      }
      Rng fproj(9300 + 31 * ti + rep);
      floor = std::max(floor, sliced_wasserstein(a, b, n_proj, fproj));
    }
    os << "t=" << t << ": " << sw << " vs floor " << floor << "; ";
    ok = ok && sw < floor;
    ++ti;
  }
  detail = os.str();
  return ok;
}

// ---------------------------------------------------------------- criterion 3
bool gaussian_zero_variance_ais(std::string& detail) {
  const NoiseSchedule sched = NoiseSchedule::vp();
  const TimeGrid grid = make_time_grid(sched, 32, 1e-2, noise_level(sched, 1.0));
  const DensityPath path = diffusion_path(isotropic_gaussian(8), sched, grid);
  SamplerConfig cfg;
  cfg.n_particles = 1024;
  Rng rng(11);
  const ParticleEnsemble ens = ais_run(path, TransitionSpec::stoch2(), cfg, rng);
  double mean = 0.0;
  for (double lw : ens.log_weights) mean += lw;
  mean /= ens.log_weights.size();
  double sd = 0.0;
  for (double lw : ens.log_weights) sd += (lw - mean) * (lw - mean);
  sd = std::sqrt(sd / ens.log_weights.size());
  std::ostringstream os;
  os << "std(log w) = " << sd;
  detail = os.str();
  return sd < 1e-8;
}

// ---------------------------------------------------------------- criterion 4
bool gaussian_re_full_acceptance(std::string& detail) {
  const NoiseSchedule sched = NoiseSchedule::vp();
  const TimeGrid grid = make_time_grid(sched, 32, 1e-2, noise_level(sched, 1.0));
  const DensityPath path = diffusion_path(isotropic_gaussian(8), sched, grid);
  SamplerConfig cfg;
  cfg.re_chains = 4;
  cfg.re_total_steps = 1024;
  cfg.re_warmup_steps = 256;
  cfg.swap_period = 8;
  Rng rng(12);
  const ReResult res = re_run(path, TransitionSpec::stoch2(), cfg, rng);
  const double rate = res.diag.swap_accept_rate();
  std::ostringstream os;
  os << "swap acceptance " << rate << " over " << res.diag.swap_attempts << " attempts";
  detail = os.str();
  return rate >= 0.999;
}

// ---------------------------------------------------------------- criterion 5
bool invertibility(std::string& detail) {
  const GaussianMixture target = build_target({TwoModesSpec{5.0, 16}, true});
  const NoiseSchedule sched = NoiseSchedule::vp();
  const TimeGrid grid = make_time_grid(sched, 64, 1e-2, noise_level(sched, 1.0));
  const DensityPath path = diffusion_path(target, sched, grid);
  Rng rng(13);
  double worst = 0.0;
  long nonconv = 0;
  int points = 0;
  for (int k = 0; k < 64; ++k) {
    const double s = path.times[k], t = path.times[k + 1];
    const LevelOracle& mid = path.mid_oracles[k];
    const GaussianMixture ps = diffuse(target, sched, s);
    for (int rep = 0; rep < 16; ++rep) {
      const Vec x = ps.sample(rng);
      const MapResult fwd =
          implicit_midpoint_map(sched, s, t, OdeDirection::Forward, x, mid.score, 50, 1e-8);
      const MapResult bwd = implicit_midpoint_map(sched, s, t, OdeDirection::Backward,
                                                  fwd.point, mid.score, 50, 1e-8);
      if (!fwd.converged || !bwd.converged) ++nonconv;
      worst = std::max(worst, linf_dist(bwd.point, x));
      ++points;
    }
  }
  std::ostringstream os;
  os << "max round-trip err " << worst << " over " << points
     << " points, non-converged " << nonconv;
  detail = os.str();
  return worst < 1e-5;
}

// ---------------------------------------------------------------- criterion 6
bool logdet_correctness(std::string& detail) {
  const GaussianMixture target = build_target({TwoModesSpec{5.0, 1}, true});
  const NoiseSchedule sched = NoiseSchedule::vp();
  const TimeGrid grid = make_time_grid(sched, 64, 1e-2, noise_level(sched, 1.0));
  const DensityPath path = diffusion_path(target, sched, grid);
  Rng rng(14);
  double worst_fd = 0.0, worst_anti = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double s = path.times[k], t = path.times[k + 1];
    const LevelOracle& mid = path.mid_oracles[k];
    const GaussianMixture ps = diffuse(target, sched, s);
    for (int rep = 0; rep < 4; ++rep) {
      const Vec x = ps.sample(rng);
      auto fwd_map = [&](double u) {
        return implicit_midpoint_map(sched, s, t, OdeDirection::Forward, {u}, mid.score,
                                     300, 1e-14)
            .point[0];
      };
      const MapResult fwd =
          implicit_midpoint_map(sched, s, t, OdeDirection::Forward, x, mid.score, 300, 1e-14);
      const MapResult bwd = implicit_midpoint_map(sched, s, t, OdeDirection::Backward,
                                                  fwd.point, mid.score, 300, 1e-14);
      const double ld_f = logdet_estimate(sched, s, t, OdeDirection::Forward, x, fwd, 10,
                                          TraceMode::exact_diag(), mid, rng);
      const double ld_b = logdet_estimate(sched, s, t, OdeDirection::Backward, fwd.point,
                                          bwd, 10, TraceMode::exact_diag(), mid, rng);
      const double h = 1e-5;
      const double fd = (fwd_map(x[0] + h) - fwd_map(x[0] - h)) / (2.0 * h);
      worst_fd = std::max(worst_fd, std::abs(ld_f - std::log(std::abs(fd))));
      worst_anti = std::max(worst_anti, std::abs(ld_f + ld_b));
    }
  }
  std::ostringstream os;
  os << "max |series - fd| " << worst_fd << ", max |fwd + bwd| " << worst_anti;
  detail = os.str();
  return worst_fd < 1e-4 && worst_anti < 1e-6;
}

// ---------------------------------------------------------------- criterion 7
bool hutchinson_unbiasedness(std::string& detail) {
  const GaussianMixture target = build_target({TwoModesSpec{5.0, 8}, true});
  const NoiseSchedule sched = NoiseSchedule::vp();
  const GaussianMixture level = diffuse(target, sched, 0.25);
  Rng rng(15);
  Vec x = level.sample(rng);
  const Vec hd = level.hessian_diag(x);
  double exact = 0.0;
  for (double h : hd) exact += h;
  const int n = 10000;
  Vec draws(n);
  for (int p = 0; p < n; ++p) {
    Vec v(x.size());
    for (auto& u : v) u = rng.normal();
    draws[p] = dot(v, level.hessian_vp(x, v));
  }
  double mean = 0.0;
  for (double d : draws) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : draws) var += (d - mean) * (d - mean);
  var /= n - 1;
  const double se = std::sqrt(var / n);
  std::ostringstream os;
  os << "|mean - exact| = " << std::abs(mean - exact) << ", 3 se = " << 3.0 * se;
  detail = os.str();
  return std::abs(mean - exact) < 3.0 * se;
}

// ---------------------------------------------------------------- criterion 8
bool path_ordering(std::string& detail) {
  const GaussianMixture target = build_target({TwoModesSpec{5.0, 16}, true});
  const NoiseSchedule sched = NoiseSchedule::vp();
  // 40 local steps per level: enough for the step-size adaptation to track
  // the level scale, which is where the diffusion-vs-tempering gap lives.
  SamplerConfig cfg;
  cfg.n_particles = 2048;
  cfg.mcmc_steps_per_level = 40;
  cfg.mcmc_warmup_per_level = 32;
  cfg.keep_last = 8;

  std::map<std::string, std::map<int, Vec>> sw;  // path -> K -> per-seed SW
  for (int K : {16, 32, 64}) {
    const DensityPath dpath =
        diffusion_path(target, sched, make_time_grid(sched, K, 1e-2, noise_level(sched, 1.0)));
    const DensityPath tpath = tempering_path(target, K);
    for (int seed = 0; seed < 8; ++seed) {
      for (const auto& [name, path] :
           std::vector<std::pair<std::string, const DensityPath*>>{{"diffusion", &dpath},
                                                                   {"tempering", &tpath}}) {
        Rng rng(mix_seed(800 + seed, std::hash<std::string>{}(name) + K));
        const ParticleEnsemble ens = smc_run(*path, TransitionSpec::none(), cfg, rng);
        std::vector<Vec> pts;
        Vec w;
        ens.flatten(pts, w);
        sw[name][K].push_back(sw_to_exact(pts, w, target, 8192, 128, 880 + seed));
      }
    }
  }
  double best_diff = 1e300, best_temp = 1e300;
  std::ostringstream os;
  for (const auto& [name, by_k] : sw)
    for (const auto& [K, vals] : by_k) {
      const double m = median(vals);
      os << name << " K=" << K << ": " << m << "; ";
      (name == "diffusion" ? best_diff : best_temp) = std::min(
          name == "diffusion" ? best_diff : best_temp, m);
    }
  os << "best diffusion " << best_diff << " vs best tempering " << best_temp;
  detail = os.str();
  return best_diff < best_temp;
}

// ---------------------------------------------------------------- criterion 9
bool transition_ordering(std::string& detail) {
  const GaussianMixture target = build_target({TwoModesSpec{10.0, 16}, true});
  const NoiseSchedule sched = NoiseSchedule::vp();
  const int K = 64;
  const DensityPath path =
      diffusion_path(target, sched, make_time_grid(sched, K, 1e-2, noise_level(sched, 1.0)));
  SamplerConfig cfg;
  cfg.n_particles = 2048;

  std::map<std::string, Vec> sw;
  const std::vector<std::pair<std::string, TransitionSpec>> specs = {
      {"stoch1", TransitionSpec::stoch1()},
      {"stoch2", TransitionSpec::stoch2()},
      {"det-hessian", TransitionSpec::det_im()},
      {"det-hutchinson", TransitionSpec::det_im(4, 3, 1e-8, TraceMode::hutchinson(32))},
  };
  for (const auto& [name, spec] : specs) {
    for (int seed = 0; seed < 8; ++seed) {
      Rng rng(mix_seed(900 + seed, std::hash<std::string>{}(name)));
      const ParticleEnsemble ens = ais_run(path, spec, cfg, rng);
      std::vector<Vec> pts;
      Vec w;
      ens.flatten(pts, w);
      sw[name].push_back(sw_to_exact(pts, w, target, 8192, 128, 980 + seed));
    }
  }
  const double m1 = median(sw["stoch1"]), m2 = median(sw["stoch2"]);
  const double mh = median(sw["det-hessian"]), mu = median(sw["det-hutchinson"]);
  std::ostringstream os;
  os << "stoch1 " << m1 << ", stoch2 " << m2 << ", det-hessian " << mh
     << ", det-hutchinson " << mu;
  detail = os.str();
  return m2 < m1 && mu <= m1 && mh <= 1.25 * m2;
}

// --------------------------------------------------------------- criterion 10
bool mode_mass_stability(std::string& detail) {
  const GaussianMixture fig({0.75, 0.25}, {{-4.0}, {4.0}}, {{0.25}, {1.0}});
  Vec x_grid;
  for (double x = -9.0; x <= 9.0 + 1e-12; x += 0.005) x_grid.push_back(x);
  const NoiseSchedule sched = NoiseSchedule::vp();
  const TimeGrid grid = make_time_grid(sched, 128, 1e-2, noise_level(sched, 1.0));

  const Vec diff_mass = path_mode_mass_profile_1d(diffusion_path(fig, sched, grid), x_grid);
  bool diff_ok = true;
  for (double m : diff_mass) diff_ok = diff_ok && m == 0.75;

  const Vec temp_mass = path_mode_mass_profile_1d(tempering_path(fig, 128), x_grid);
  double max_dev = 0.0;
  for (double m : temp_mass) max_dev = std::max(max_dev, std::abs(m - 0.75));

  std::ostringstream os;
  os << "diffusion exact-constant: " << (diff_ok ? "yes" : "no")
     << ", tempering max deviation " << max_dev;
  detail = os.str();
  return diff_ok && max_dev > 0.15;
}

// --------------------------------------------------------------- criterion 11
bool resampling_invariance(std::string& detail) {
  Rng rng(16);
  const int n = 10000;
  std::vector<double> xs(n);
  Vec logw(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = rng.normal();
    logw[i] = 0.8 * xs[i];
  }
  const Vec w = normalized_weights_from_log(logw);
  Rng res_rng(17);
  const std::vector<int> idx = systematic_resample(logw, res_rng);
  const std::vector<std::function<double(double)>> fns = {
      [](double x) { return x; },
      [](double x) { return x * x; },
      [](double x) { return std::sin(2.0 * x); },
  };
  std::ostringstream os;
  bool ok = true;
  for (std::size_t f = 0; f < fns.size(); ++f) {
    double mu_w = 0.0;
    for (int i = 0; i < n; ++i) mu_w += w[i] * fns[f](xs[i]);
    double var_w = 0.0;
    for (int i = 0; i < n; ++i) var_w += w[i] * (fns[f](xs[i]) - mu_w) * (fns[f](xs[i]) - mu_w);
    double mu_r = 0.0;
    for (int i = 0; i < n; ++i) mu_r += fns[f](xs[idx[i]]) / n;
    const double se = std::sqrt(var_w / n);
    os << "fn" << f << ": |diff| " << std::abs(mu_r - mu_w) << " vs 3se " << 3.0 * se << "; ";
    ok = ok && std::abs(mu_r - mu_w) < 3.0 * se;
  }
  detail = os.str();
  return ok;
}

// --------------------------------------------------------------- criterion 12
bool reproducibility(std::string& detail) {
  auto run_once = [&](const std::string& dir) {
    RunConfig cfg = parse_run_config(json::parse(preset_json("smoke")));
    cfg.out_dir = dir;
    run_experiment(cfg);
    std::ifstream in(dir + "/metrics.csv");
    std::string out, line;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  const std::string a = run_once("/tmp/damc_accept_repro_a");
  const std::string b = run_once("/tmp/damc_accept_repro_b");
  detail = a == b ? "metric columns bit-identical across re-runs"
                  : "metric columns differ between re-runs";
  return a == b && !a.empty();
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"1 oracle suite (score/Hessian vs finite differences)", oracle_suite},
      {"2 diffusion-marginal pushforward vs noise floor", pushforward_marginals},
      {"3 Gaussian zero-variance AIS (2nd-order kernel)", gaussian_zero_variance_ais},
      {"4 Gaussian RE full swap acceptance (2nd-order)", gaussian_re_full_acceptance},
      {"5 implicit-midpoint mutual invertibility", invertibility},
      {"6 log-det power series vs finite-difference Jacobian", logdet_correctness},
      {"7 Hutchinson trace unbiasedness", hutchinson_unbiasedness},
      {"8 diffusion beats best tempering (SMC ordering)", path_ordering},
      {"9 transition ordering (2nd-order and deterministic)", transition_ordering},
      {"10 mode-mass stability along the paths", mode_mass_stability},
      {"11 systematic resampling invariance", resampling_invariance},
      {"12 bit-identical reproducibility", reproducibility},
  };
  int failures = 0;
  for (auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %s (%.1fs)\n        %s\n", ok ? "PASS" : "FAIL",
                c.name.c_str(), secs, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
