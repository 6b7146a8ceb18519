// phrelu: simulate, fit, predict and evaluate from the command line.
//
//   phrelu simulate --preset sim1 --seed 3 --out runs/sim1
//   phrelu fit --train runs/sim1/train.csv --out runs/sim1/fit
//   phrelu evaluate --fit runs/sim1/fit/fit.json --test runs/sim1/test.csv
//
// Values come from --config (JSON) first; flags given on the command line win.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "phrelu/cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> preset, method, out, train, test, input, fit, predictions, resume, response, schedule,
      resampler;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers, particles, steps, planes, K, axis, iterations, burn_in, p, m, n,
      checkpoint_every, cell_planes;
  std::optional<double> noise_sd, split, level, a0, b0, mu0, sigma0_sq, radius;
  std::optional<bool> adaptive, clamp;
};

template <typename T, typename U>
void set_if(const std::optional<T>& v, U& target) {
  if (v) target = *v;
}

phrelu::RunConfig resolve(const Flags& f) {
  phrelu::RunConfig c = f.config.empty() ? phrelu::RunConfig{} : phrelu::load_config(f.config);
  if (f.preset) phrelu::apply_preset(c, *f.preset);
  set_if(f.method, c.method);
  set_if(f.out, c.output);
  set_if(f.train, c.data.train);
  set_if(f.test, c.data.test);
  set_if(f.input, c.data.input);
  set_if(f.fit, c.fit);
  set_if(f.predictions, c.predictions);
  set_if(f.resume, c.resume);
  set_if(f.response, c.data.response);
  set_if(f.schedule, c.smc.schedule);
  set_if(f.resampler, c.smc.resampler);
  set_if(f.seed, c.seed);
  set_if(f.workers, c.workers);
  set_if(f.particles, c.smc.particles);
  set_if(f.steps, c.smc.steps);
  set_if(f.planes, c.hyper.n_planes);
  set_if(f.K, c.decomp.K);
  set_if(f.axis, c.decomp.axis);
  set_if(f.iterations, c.mcmc.iterations);
  set_if(f.burn_in, c.mcmc.burn_in);
  set_if(f.p, c.data.p);
  set_if(f.m, c.data.m);
  set_if(f.n, c.data.n);
  set_if(f.checkpoint_every, c.smc.checkpoint_every);
  if (f.cell_planes) c.decomp.cell_planes = *f.cell_planes;
  set_if(f.noise_sd, c.data.noise_sd);
  set_if(f.split, c.data.split);
  set_if(f.level, c.level);
  set_if(f.a0, c.hyper.a0);
  set_if(f.b0, c.hyper.b0);
  set_if(f.mu0, c.hyper.mu0);
  set_if(f.sigma0_sq, c.hyper.sigma0_sq);
  set_if(f.radius, c.hyper.domain_radius);
  set_if(f.adaptive, c.smc.adaptive);
  set_if(f.clamp, c.clamp);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian ReLU regression with hyperplane-process priors"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;

  app.add_option("-c,--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "master seed");
  app.add_option("--workers", f.workers, "worker threads (default: $PHRELU_WORKERS or 1)");
  app.add_option("-o,--out", f.out, "output directory");
  app.add_option("--preset", f.preset, "sim1, sim2, sim3 or sim4");

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset and split it");
  sim->add_option("--p", f.p, "input dimension");
  sim->add_option("--m", f.m, "true number of hyperplanes");
  sim->add_option("--n", f.n, "number of rows");
  sim->add_option("--noise-sd", f.noise_sd, "noise standard deviation");
  sim->add_option("--split", f.split, "train fraction");

  auto* fit = app.add_subcommand("fit", "fit a model to training data");
  fit->add_option("--method", f.method, "whole, mcmc, decmp1, decmp2 or ols");
  fit->add_option("--train", f.train, "training CSV");
  fit->add_option("--response", f.response, "response column");
  fit->add_option("-L,--particles", f.particles, "SMC particles");
  fit->add_option("-R,--steps", f.steps, "annealing steps");
  fit->add_option("--schedule", f.schedule, "linear or geometric");
  fit->add_option("--resampler", f.resampler, "multinomial or systematic");
  fit->add_option("--adaptive", f.adaptive, "resample only when ESS drops");
  fit->add_option("-P,--planes", f.planes, "number of hyperplanes");
  fit->add_option("-K,--cells", f.K, "number of sub-models for decmp1/decmp2");
  fit->add_option("--axis", f.axis, "split axis for decmp2");
  fit->add_option("--cell-planes", f.cell_planes, "planes per decmp2 cell");
  fit->add_option("--iterations", f.iterations, "MCMC iterations");
  fit->add_option("--burn-in", f.burn_in, "MCMC samples dropped from the ensemble");
  fit->add_option("--checkpoint-every", f.checkpoint_every, "write checkpoint.jsonl every k steps");
  fit->add_option("--resume", f.resume, "continue from an ensemble snapshot");
  fit->add_option("--a0", f.a0);
  fit->add_option("--b0", f.b0);
  fit->add_option("--mu0", f.mu0);
  fit->add_option("--sigma0-sq", f.sigma0_sq);
  fit->add_option("--radius", f.radius, "domain radius l");

  auto* pred = app.add_subcommand("predict", "posterior-predictive summaries for new rows");
  pred->add_option("--fit", f.fit, "fit manifest (fit.json)");
  pred->add_option("--input", f.input, "CSV of rows to predict");
  pred->add_option("--level", f.level, "credible level");
  pred->add_option("--clamp", f.clamp, "clamp decmp2 points into the domain");

  auto* eval = app.add_subcommand("evaluate", "metrics on held-out data");
  eval->add_option("--fit", f.fit, "fit manifest (fit.json)");
  eval->add_option("--predictions", f.predictions, "precomputed mean,lower,upper CSV");
  eval->add_option("--test", f.test, "test CSV");
  eval->add_option("--response", f.response, "response column");
  eval->add_option("--level", f.level, "credible level");
  eval->add_option("--clamp", f.clamp, "clamp decmp2 points into the domain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const auto config = resolve(f);
    if (sim->parsed()) return phrelu::cmd_simulate(config, std::cout);
    if (fit->parsed()) return phrelu::cmd_fit(config, std::cout);
    if (pred->parsed()) return phrelu::cmd_predict(config, std::cout);
    if (eval->parsed()) return phrelu::cmd_evaluate(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
