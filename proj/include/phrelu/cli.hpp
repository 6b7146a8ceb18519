#pragma once

// Batch pipeline behind the phrelu executable: simulate -> fit -> predict ->
// evaluate. Every command validates its whole configuration before touching
// the file system.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "phrelu/data.hpp"
#include "phrelu/dataset.hpp"
#include "phrelu/decomposition.hpp"
#include "phrelu/errors.hpp"
#include "phrelu/evaluation.hpp"
#include "phrelu/inference.hpp"
#include "phrelu/model.hpp"
#include "phrelu/parallel.hpp"
#include "phrelu/random.hpp"
#include "phrelu/snapshot.hpp"

namespace phrelu {

struct SmcConfig {
  std::size_t particles = 1000;
  std::size_t steps = 100;
  std::string schedule = "linear";  // linear | geometric
  double rate = 2.0;
  std::string resampler = "multinomial";  // multinomial | systematic
  bool adaptive = false;
  double ess_threshold = 0.5;
  std::size_t checkpoint_every = 0;  // 0 = no checkpoints
};

struct McmcConfig {
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
};

struct DecompConfig {
  std::size_t K = 4;
  std::size_t axis = 0;
  std::vector<double> cuts;  // normalized coordinates; empty = even over the data range
  std::optional<std::size_t> cell_planes;  // planes per domain cell; default n_planes
};

struct DataConfig {
  std::string preset;  // sim1 .. sim4, or empty
  std::size_t p = 2;
  std::size_t m = 2;
  std::size_t n = 5000;
  double noise_sd = 0.1;
  double split = 0.75;
  std::string train;   // CSV paths
  std::string test;
  std::string input;   // rows to predict
  std::string response;
  std::vector<std::string> features;
};

struct RunConfig {
  std::string method = "whole";  // whole | mcmc | decmp1 | decmp2 | ols
  Hyperparams hyper;
  SmcConfig smc;
  McmcConfig mcmc;
  DecompConfig decomp;
  DataConfig data;
  std::uint64_t seed = 1;
  std::size_t workers = 0;  // 0 = PHRELU_WORKERS or 1
  std::string output = "out";
  std::string fit;  // fit manifest for predict / evaluate
  std::string predictions;  // precomputed predictions CSV for evaluate
  std::string resume;       // ensemble snapshot to continue from
  double level = 0.95;
  bool clamp = true;

  [[nodiscard]] std::size_t resolved_workers() const { return workers == 0 ? default_workers() : workers; }
};

/// Built-in simulation settings. sim4 repeats sim1's data-generating process.
inline void apply_preset(RunConfig& c, const std::string& name) {
  if (name == "sim1" || name == "sim4") {
    c.data.p = 2, c.data.m = 2, c.data.n = 5000, c.data.noise_sd = 0.1;
    c.hyper.n_planes = 2;
  } else if (name == "sim2") {
    c.data.p = 5, c.data.m = 5, c.data.n = 5000, c.data.noise_sd = 0.1;
    c.hyper.n_planes = 5;
  } else if (name == "sim3") {
    c.data.p = 2, c.data.m = 40, c.data.n = 5000, c.data.noise_sd = 0.1;
    c.hyper.n_planes = 40;
    c.decomp.K = 4;
    c.decomp.cell_planes = 10;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected sim1, sim2, sim3 or sim4)");
  }
  c.data.preset = name;
  c.data.split = 0.75;
  c.smc.particles = 1000;
  c.smc.steps = 100;
}

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown config key " + where + "." + k);
  }
}

}  // namespace detail

/// Reads a JSON config. A "preset" key under "data" is applied first so the
/// remaining keys can override it.
inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig c;
  detail::check_keys(j, {"method", "hyperparams", "smc", "mcmc", "decomposition", "data", "seed", "workers", "output",
                         "fit", "predictions", "resume", "level", "clamp"},
                     "config");
  if (j.contains("data") && j["data"].contains("preset")) {
    apply_preset(c, j["data"]["preset"].get<std::string>());
  }
  detail::read_opt(j, "method", c.method, "config");
  detail::read_opt(j, "seed", c.seed, "config");
  detail::read_opt(j, "workers", c.workers, "config");
  detail::read_opt(j, "output", c.output, "config");
  detail::read_opt(j, "fit", c.fit, "config");
  detail::read_opt(j, "predictions", c.predictions, "config");
  detail::read_opt(j, "resume", c.resume, "config");
  detail::read_opt(j, "level", c.level, "config");
  detail::read_opt(j, "clamp", c.clamp, "config");
  if (j.contains("hyperparams")) {
    const auto& h = j["hyperparams"];
    detail::check_keys(h, {"a0", "b0", "mu0", "sigma0_sq", "n_planes", "domain_radius", "offset_grid"}, "hyperparams");
    detail::read_opt(h, "a0", c.hyper.a0, "hyperparams");
    detail::read_opt(h, "b0", c.hyper.b0, "hyperparams");
    detail::read_opt(h, "mu0", c.hyper.mu0, "hyperparams");
    detail::read_opt(h, "sigma0_sq", c.hyper.sigma0_sq, "hyperparams");
    detail::read_opt(h, "n_planes", c.hyper.n_planes, "hyperparams");
    detail::read_opt(h, "domain_radius", c.hyper.domain_radius, "hyperparams");
    detail::read_opt(h, "offset_grid", c.hyper.offset_grid, "hyperparams");
  }
  if (j.contains("smc")) {
    const auto& s = j["smc"];
    detail::check_keys(s, {"particles", "steps", "schedule", "rate", "resampler", "adaptive", "ess_threshold",
                           "checkpoint_every"},
                       "smc");
    detail::read_opt(s, "particles", c.smc.particles, "smc");
    detail::read_opt(s, "steps", c.smc.steps, "smc");
    detail::read_opt(s, "schedule", c.smc.schedule, "smc");
    detail::read_opt(s, "rate", c.smc.rate, "smc");
    detail::read_opt(s, "resampler", c.smc.resampler, "smc");
    detail::read_opt(s, "adaptive", c.smc.adaptive, "smc");
    detail::read_opt(s, "ess_threshold", c.smc.ess_threshold, "smc");
    detail::read_opt(s, "checkpoint_every", c.smc.checkpoint_every, "smc");
  }
  if (j.contains("mcmc")) {
    const auto& m = j["mcmc"];
    detail::check_keys(m, {"iterations", "burn_in"}, "mcmc");
    detail::read_opt(m, "iterations", c.mcmc.iterations, "mcmc");
    detail::read_opt(m, "burn_in", c.mcmc.burn_in, "mcmc");
  }
  if (j.contains("decomposition")) {
    const auto& d = j["decomposition"];
    detail::check_keys(d, {"K", "axis", "cuts", "cell_planes"}, "decomposition");
    detail::read_opt(d, "K", c.decomp.K, "decomposition");
    detail::read_opt(d, "axis", c.decomp.axis, "decomposition");
    detail::read_opt(d, "cuts", c.decomp.cuts, "decomposition");
    if (d.contains("cell_planes") && !d["cell_planes"].is_null()) {
      std::size_t v = 0;
      detail::read_opt(d, "cell_planes", v, "decomposition");
      c.decomp.cell_planes = v;
    }
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    detail::check_keys(d, {"preset", "p", "m", "n", "noise_sd", "split", "train", "test", "input", "response",
                           "features"},
                       "data");
    detail::read_opt(d, "p", c.data.p, "data");
    detail::read_opt(d, "m", c.data.m, "data");
    detail::read_opt(d, "n", c.data.n, "data");
    detail::read_opt(d, "noise_sd", c.data.noise_sd, "data");
    detail::read_opt(d, "split", c.data.split, "data");
    detail::read_opt(d, "train", c.data.train, "data");
    detail::read_opt(d, "test", c.data.test, "data");
    detail::read_opt(d, "input", c.data.input, "data");
    detail::read_opt(d, "response", c.data.response, "data");
    detail::read_opt(d, "features", c.data.features, "data");
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  try {
    return parse_config(nlohmann::json::parse(in, nullptr, true, true));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline ScheduleShape schedule_shape(const SmcConfig& s) {
  if (s.schedule == "linear") return LinearSchedule{};
  if (s.schedule == "geometric") return GeometricSchedule{s.rate};
  throw ConfigError("smc.schedule must be 'linear' or 'geometric'");
}

inline SmcOptions smc_options(const RunConfig& c) {
  SmcOptions o;
  o.particles = c.smc.particles;
  if (c.smc.resampler == "multinomial") {
    o.resampler = Resampler::Multinomial;
  } else if (c.smc.resampler == "systematic") {
    o.resampler = Resampler::Systematic;
  } else {
    throw ConfigError("smc.resampler must be 'multinomial' or 'systematic'");
  }
  o.adaptive = c.smc.adaptive;
  o.ess_threshold = c.smc.ess_threshold;
  o.workers = c.resolved_workers();
  return o;
}

/// Hyperparameters of one domain cell.
inline Hyperparams cell_hyper(const RunConfig& c) {
  Hyperparams h = c.hyper;
  if (c.decomp.cell_planes) h.n_planes = *c.decomp.cell_planes;
  return h;
}

inline void validate_generator(const RunConfig& c) {
  if (c.data.p == 0) throw ConfigError("data.p must be >= 1");
  if (c.data.n < 2) throw ConfigError("data.n must be >= 2");
  if (!(c.data.noise_sd >= 0.0)) throw ConfigError("data.noise_sd must be >= 0");
  if (!(c.data.split > 0.0 && c.data.split < 1.0)) throw ConfigError("data.split must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(c.data.split * static_cast<double>(c.data.n));
  if (n_train == 0 || n_train == c.data.n) throw ConfigError("data.split leaves the train or test set empty");
}

inline void validate_fit(const RunConfig& c) {
  try {
    c.hyper.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("hyperparams: ") + e.what());
  }
  if (c.method != "whole" && c.method != "mcmc" && c.method != "decmp1" && c.method != "decmp2" &&
      c.method != "ols") {
    throw ConfigError("method must be one of whole, mcmc, decmp1, decmp2, ols (got '" + c.method + "')");
  }
  if (c.data.train.empty()) throw ConfigError("data.train is required for fit");
  if (c.smc.steps == 0) throw ConfigError("smc.steps must be >= 1");
  (void)schedule_shape(c.smc);
  smc_options(c).validate();
  if (c.method == "mcmc") {
    if (c.mcmc.iterations == 0) throw ConfigError("mcmc.iterations must be >= 1");
    if (c.mcmc.burn_in >= c.mcmc.iterations) throw ConfigError("mcmc.burn_in must be below mcmc.iterations");
  }
  if (c.method == "decmp1" || c.method == "decmp2") {
    if (c.decomp.K == 0) throw ConfigError("decomposition.K must be >= 1");
  }
  if (c.method == "decmp1" && c.hyper.n_planes % c.decomp.K != 0) {
    throw ConfigError("decmp1 needs n_planes divisible by K (n_planes = " + std::to_string(c.hyper.n_planes) +
                      ", K = " + std::to_string(c.decomp.K) + ")");
  }
  if (c.method == "decmp2" && !c.decomp.cuts.empty() && c.decomp.cuts.size() + 1 != c.decomp.K) {
    throw ConfigError("decomposition.cuts must hold K - 1 values");
  }
  if (!c.resume.empty() && c.method != "whole") throw ConfigError("resume is only supported for method 'whole'");
}

// ---------------------------------------------------------------------------
// simulate

inline nlohmann::json truth_json(const GroundTruth& t, const RunConfig& c) {
  nlohmann::json planes = nlohmann::json::array();
  for (const auto& h : t.planes) planes.push_back({h.offset, detail::vector_json(h.normal)});
  return {{"format", "phrelu-truth"},
          {"preset", c.data.preset},
          {"p", c.data.p},
          {"m", c.data.m},
          {"n", c.data.n},
          {"noise_sd", t.noise_sd},
          {"seed", c.seed},
          {"split", c.data.split},
          {"weights", detail::vector_json(t.weights)},
          {"planes", std::move(planes)}};
}

struct SimulateOutput {
  Simulation sim;
  Dataset train;
  Dataset test;
};

/// Data generation and split, no I/O. The generator and the split draw from
/// separate streams of the master seed.
inline SimulateOutput simulate(const RunConfig& c) {
  validate_generator(c);
  auto gen = derive_stream(c.seed, {stream_tag::simulate});
  auto sim = gen_simulation(c.data.p, c.data.m, c.data.n, c.data.noise_sd, gen);
  auto split = derive_stream(c.seed, {stream_tag::split});
  auto [train, test] = train_test_split(sim.data, c.data.split, split);
  return {std::move(sim), std::move(train), std::move(test)};
}

inline int cmd_simulate(const RunConfig& c, std::ostream& log) {
  auto out = simulate(c);
  const std::filesystem::path dir(c.output);
  std::filesystem::create_directories(dir);
  save_csv(out.train, dir / "train.csv");
  save_csv(out.test, dir / "test.csv");
  std::ofstream t(dir / "truth.json", std::ios::binary);
  if (!t) throw IoError("cannot write " + (dir / "truth.json").string());
  t << truth_json(out.sim.truth, c).dump(2) << '\n';
  log << "wrote " << out.train.size() << " train and " << out.test.size() << " test rows to " << dir.string()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

inline CsvOptions csv_options(const RunConfig& c, const std::string& response) {
  CsvOptions o;
  o.response = response.empty() ? (c.data.response.empty() ? "y" : c.data.response) : response;
  o.features = c.data.features;
  return o;
}

/// Cut points for decmp2: configured ones, or K even cells over the training
/// range of the axis (normalized coordinates).
inline DomainPartition make_partition(const RunConfig& c, const Dataset& normalized) {
  if (c.decomp.axis >= normalized.dim()) throw ConfigError("decomposition.axis exceeds data dimension");
  if (!c.decomp.cuts.empty()) return DomainPartition(c.decomp.axis, c.decomp.cuts, c.hyper.domain_radius);
  const auto col = normalized.X.col(static_cast<Eigen::Index>(c.decomp.axis));
  const double lo = col.minCoeff();
  const double hi = col.maxCoeff();
  if (c.decomp.K == 1 || !(hi > lo)) return DomainPartition(c.decomp.axis, {}, c.hyper.domain_radius);
  return DomainPartition::even(c.decomp.axis, c.decomp.K, lo, hi, c.hyper.domain_radius);
}

struct FitOutcome {
  FitManifest manifest;
  std::vector<ParticleEnsemble> ensembles;
  Report report;
  std::vector<std::string> warnings;
};

/// Runs the configured sampler on normalized training data. Writes nothing
/// except optional checkpoints under `checkpoint_dir`.
inline FitOutcome run_fit(const RunConfig& c, const Dataset& normalized,
                          const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt) {
  FitOutcome f;
  f.manifest.method = c.method;
  f.manifest.hyper = c.hyper;
  f.manifest.response_name = normalized.response_name;
  f.manifest.feature_names = normalized.feature_names;
  Report& rep = f.report;
  rep.set("method", c.method);
  rep.set("n_train", normalized.size());
  rep.set("dim", normalized.dim());
  rep.set("seed", std::to_string(c.seed));
  const auto schedule = make_schedule(c.smc.steps, schedule_shape(c.smc));
  auto options = smc_options(c);

  if (c.method == "whole") {
    if (checkpoint_dir && c.smc.checkpoint_every > 0) {
      const auto every = c.smc.checkpoint_every;
      const auto path = *checkpoint_dir / "checkpoint.jsonl";
      options.on_iteration = [every, path](const ParticleEnsemble& e) {
        if (e.iteration % every == 0) write_ensemble(e, path);
      };
    }
    std::optional<ParticleEnsemble> resume;
    if (!c.resume.empty()) resume = read_ensemble(std::filesystem::path(c.resume));
    auto res = annealed_smc(normalized, c.hyper, schedule, options, c.seed, std::move(resume));
    rep.set("seconds", res.diagnostics.seconds);
    rep.set("particles", res.ensemble.size());
    rep.set("steps", c.smc.steps);
    rep.set("final_ess", res.ensemble.ess());
    rep.set("mean_acceptance", res.diagnostics.mean_acceptance());
    rep.set("log_normalizer", res.ensemble.log_normalizer);
    rep.set("rmse_train", rmse(res.ensemble.predict_mean(normalized.X), normalized.y));
    f.ensembles.push_back(std::move(res.ensemble));
  } else if (c.method == "mcmc") {
    auto rng = derive_stream(c.seed, {stream_tag::move});
    const auto start = std::chrono::steady_clock::now();
    auto chain = mcmc_run(normalized, c.hyper, c.mcmc.iterations, rng);
    rep.set("seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    rep.set("iterations", c.mcmc.iterations);
    rep.set("burn_in", c.mcmc.burn_in);
    rep.set("mean_acceptance", chain.acceptance_rate);
    ParticleEnsemble full;
    for (auto& s : chain.samples) full.particles.push_back(Particle{std::move(s), 0.0});
    full.iteration = c.mcmc.iterations;
    ParticleEnsemble kept;
    kept.iteration = full.iteration;
    kept.particles.assign(full.particles.begin() + static_cast<std::ptrdiff_t>(c.mcmc.burn_in), full.particles.end());
    rep.set("rmse_train", rmse(kept.predict_mean(normalized.X), normalized.y));
    f.ensembles.push_back(std::move(kept));
    f.ensembles.push_back(std::move(full));  // chain, written separately
  } else if (c.method == "decmp1" || c.method == "decmp2") {
    DecompFit fit;
    if (c.method == "decmp1") {
      fit = fit_intensity_decomp(normalized, c.hyper, c.decomp.K, schedule, options, c.seed);
    } else {
      const auto part = make_partition(c, normalized);
      fit = fit_domain_decomp(normalized, cell_hyper(c), part, schedule, options, c.seed);
      f.manifest.partition = part;
      f.manifest.hyper = cell_hyper(c);
    }
    double total = 0.0, longest = 0.0;
    for (std::size_t i = 0; i < fit.K(); ++i) {
      rep.set("seconds_sub" + std::to_string(i), fit.seconds[i]);
      rep.set("rows_sub" + std::to_string(i), fit.cell_sizes[i]);
      rep.set("ess_sub" + std::to_string(i), fit.submodels[i].ess());
      total += fit.seconds[i];
      longest = std::max(longest, fit.seconds[i]);
    }
    rep.set("K", fit.K());
    rep.set("seconds", total);
    rep.set("seconds_max_sub", longest);
    rep.set("rmse_train", rmse(predict_decomp(fit, normalized.X, c.clamp), normalized.y));
    f.warnings = fit.warnings;
    f.ensembles = std::move(fit.submodels);
  } else if (c.method == "ols") {
    const auto start = std::chrono::steady_clock::now();
    const Vector coef = ols_fit(normalized.X, normalized.y);
    rep.set("seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    f.manifest.ols_coefficients.assign(coef.data(), coef.data() + coef.size());
    rep.set("rmse_train", rmse(ols_predict(coef, normalized.X), normalized.y));
  }
  return f;
}

inline int cmd_fit(const RunConfig& c, std::ostream& log) {
  validate_fit(c);
  Dataset train = load_csv(c.data.train, csv_options(c, ""));
  auto norm = normalize_to_ball(train, c.hyper.domain_radius);
  for (const auto& w : norm.warnings) log << "warning: " << w << "\n";

  const std::filesystem::path dir(c.output);
  std::filesystem::create_directories(dir);
  auto f = run_fit(c, norm.data, dir);
  for (const auto& w : f.warnings) log << "warning: " << w << "\n";

  write_transform(norm.transform, dir / "transform.txt");
  f.manifest.transform_file = "transform.txt";
  if (c.method == "mcmc") {
    write_ensemble(f.ensembles[0], dir / "ensemble.jsonl");
    write_ensemble(f.ensembles[1], dir / "chain.jsonl");
    f.manifest.ensemble_files = {"ensemble.jsonl"};
  } else if (f.ensembles.size() == 1 && c.method == "whole") {
    write_ensemble(f.ensembles[0], dir / "ensemble.jsonl");
    f.manifest.ensemble_files = {"ensemble.jsonl"};
  } else {
    for (std::size_t i = 0; i < f.ensembles.size(); ++i) {
      const std::string name = "ensemble_" + std::to_string(i) + ".jsonl";
      write_ensemble(f.ensembles[i], dir / name);
      f.manifest.ensemble_files.push_back(name);
    }
  }
  write_manifest(f.manifest, dir / "fit.json");
  f.report.write(dir / "fit_report.txt");
  log << f.report.str();
  return 0;
}

// ---------------------------------------------------------------------------
// predict / evaluate

/// A fit reloaded from disk, ready to predict in original coordinates.
struct LoadedFit {
  FitManifest manifest;
  std::optional<BallTransform> transform;
  std::vector<ParticleEnsemble> ensembles;

  [[nodiscard]] DecompFit as_decomp() const {
    DecompFit d;
    d.scheme = manifest.method == "decmp1" ? DecompScheme::Intensity : DecompScheme::Domain;
    d.submodels = ensembles;
    d.partition = manifest.partition;
    d.validate();
    return d;
  }

  /// Predictive summaries for raw (un-normalized) rows.
  [[nodiscard]] std::vector<PredictiveSummary> predict(const Matrix& X_raw, double level, bool clamp) const {
    check_level(level);
    const Matrix X = transform ? transform->apply(X_raw) : X_raw;
    const auto& m = manifest.method;
    if (m == "whole" || m == "mcmc") return posterior_predictive(ensembles.at(0), X, level);
    if (m == "decmp1" || m == "decmp2") return decomp_predictive(as_decomp(), X, level, clamp);
    if (m == "ols") {
      const Vector coef = Eigen::Map<const Vector>(manifest.ols_coefficients.data(),
                                                   static_cast<Eigen::Index>(manifest.ols_coefficients.size()));
      const Vector mean = ols_predict(coef, X);
      std::vector<PredictiveSummary> out(static_cast<std::size_t>(X.rows()));
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = {mean[static_cast<Eigen::Index>(i)], std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN(), level};
      }
      return out;
    }
    throw SchemaError("unknown fit method '" + m + "'");
  }
};

inline LoadedFit load_fit(const std::filesystem::path& manifest_path) {
  LoadedFit f;
  f.manifest = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  if (f.manifest.transform_file) f.transform = read_transform(dir / *f.manifest.transform_file);
  for (const auto& e : f.manifest.ensemble_files) f.ensembles.push_back(read_ensemble(dir / e));
  if (f.manifest.method != "ols" && f.ensembles.empty()) throw SchemaError("fit manifest lists no ensembles");
  return f;
}

inline void validate_predict(const RunConfig& c, const std::string& input) {
  check_level(c.level);
  if (c.fit.empty()) throw ConfigError("a fit manifest is required (--fit)");
  if (input.empty()) throw ConfigError("an input CSV is required");
  if (!std::filesystem::exists(c.fit)) throw IoError("fit file not found: " + c.fit);
  if (!std::filesystem::exists(input)) throw IoError("input file not found: " + input);
}

inline int cmd_predict(const RunConfig& c, std::ostream& log) {
  const std::string input = c.data.input.empty() ? c.data.test : c.data.input;
  validate_predict(c, input);
  const auto fit = load_fit(c.fit);
  CsvOptions o;
  o.features = fit.manifest.feature_names;
  o.response = fit.manifest.response_name;
  o.has_response = false;
  Dataset data = load_csv(input, o);
  const auto summaries = fit.predict(data.X, c.level, c.clamp);
  const std::filesystem::path dir(c.output);
  std::filesystem::create_directories(dir);
  write_predictions_csv(dir / "predictions.csv", summaries);
  log << "wrote " << summaries.size() << " predictions to " << (dir / "predictions.csv").string() << "\n";
  return 0;
}

/// Reads a mean,lower,upper CSV (empty interval fields allowed).
inline std::vector<PredictiveSummary> read_predictions_csv(const std::filesystem::path& path, double level) {
  std::ifstream in(path);
  if (!in) throw IoError("predictions file not found: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty file");
  std::vector<PredictiveSummary> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() < 3) throw ParseError(row, "expected mean,lower,upper");
    auto get = [&](std::size_t k) {
      const auto s = detail::trim(fields[k]);
      if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
      const auto v = parse_double(s);
      if (!v) throw ParseError(row, "malformed number '" + s + "'");
      return *v;
    };
    out.push_back({get(0), get(1), get(2), level});
  }
  return out;
}

struct Metrics {
  double rmse = 0.0;
  std::optional<double> coverage;
  std::optional<double> mean_ci_length;
  std::size_t n = 0;
};

inline Metrics compute_metrics(const std::vector<PredictiveSummary>& s, const Vector& y) {
  Metrics m;
  m.n = s.size();
  m.rmse = rmse(summary_means(s), y);
  bool intervals = !s.empty();
  for (const auto& p : s) intervals = intervals && std::isfinite(p.lower) && std::isfinite(p.upper);
  if (intervals) {
    m.coverage = coverage(s, y);
    m.mean_ci_length = mean_ci_length(s);
  }
  return m;
}

inline int cmd_evaluate(const RunConfig& c, std::ostream& log) {
  check_level(c.level);
  if (c.data.test.empty()) throw ConfigError("data.test is required for evaluate");
  if (c.fit.empty() && c.predictions.empty()) throw ConfigError("evaluate needs --fit or --predictions");
  if (!c.fit.empty() && !std::filesystem::exists(c.fit)) throw IoError("fit file not found: " + c.fit);
  if (!std::filesystem::exists(c.data.test)) throw IoError("test file not found: " + c.data.test);

  std::vector<PredictiveSummary> summaries;
  Dataset test;
  if (!c.predictions.empty()) {
    test = load_csv(c.data.test, csv_options(c, ""));
    summaries = read_predictions_csv(c.predictions, c.level);
    if (summaries.size() != test.size()) throw ShapeError("predictions and test data differ in length");
  } else {
    const auto fit = load_fit(c.fit);
    CsvOptions o;
    o.features = fit.manifest.feature_names;
    o.response = fit.manifest.response_name;
    test = load_csv(c.data.test, o);
    summaries = fit.predict(test.X, c.level, c.clamp);
  }
  const auto m = compute_metrics(summaries, test.y);
  Report rep;
  rep.set("n_test", m.n);
  rep.set("level", c.level);
  rep.set("rmse", m.rmse);
  if (m.coverage) rep.set("coverage", *m.coverage);
  if (m.mean_ci_length) rep.set("mean_ci_length", *m.mean_ci_length);

  const std::filesystem::path dir(c.output);
  std::filesystem::create_directories(dir);
  rep.write(dir / "metrics.txt");
  write_predictions_csv(dir / "test_predictions.csv", summaries, &test.y);
  log << rep.str();
  return 0;
}

}  // namespace phrelu
