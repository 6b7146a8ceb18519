#pragma once

// Samplers for the hyperplane ReLU model.
//
// Every kernel targets the tempered posterior pi_phi(theta) ∝ p(y | theta)^phi
// p(theta). Raising the Gaussian likelihood to phi is the same as inflating the
// noise variance to sigma^2 / phi, so the sigma^2 and w updates stay
// conjugate at every temperature.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "phrelu/dataset.hpp"
#include "phrelu/errors.hpp"
#include "phrelu/geometry.hpp"
#include "phrelu/model.hpp"
#include "phrelu/parallel.hpp"
#include "phrelu/random.hpp"
#include "phrelu/types.hpp"

namespace phrelu {

namespace detail {

inline void check_phi(double phi) {
  if (!(phi > 0.0 && phi <= 1.0)) throw InvalidParameter("tempering power must lie in (0, 1]");
}

inline void check_data(const ModelParams& theta, const Dataset& data) {
  if (data.empty()) throw EmptyDataset("sampler needs at least one observation");
  if (data.dim() != theta.dim()) throw ShapeError("data dimension does not match model");
}

}  // namespace detail

/// Scratch buffers for one kernel sweep, reusable across particles.
struct Workspace {
  std::vector<double> columns;  // plane k's feature column at [k * N, (k + 1) * N)
  std::vector<double> resid;
  std::vector<double> candidate;
};

/// Fills `out` with relu(<x_i, n> - mu) for every row of X.
inline void feature_column(const Matrix& X, const Hyperplane& h, std::span<double> out) {
  Eigen::Map<Vector> col(out.data(), X.rows());
  col.noalias() = X * h.normal;
  col = (col.array() - h.offset).cwiseMax(0.0).matrix();
}

/// Shape/scale of an inverse-gamma distribution.
struct InverseGammaParams {
  double shape;
  double scale;
};

/// Mean/variance of a normal distribution.
struct NormalParams {
  double mean;
  double variance;
};

/// sigma^2 | P, w, y at power phi: IG(a0 + phi N / 2, b0 + phi / 2 * sum r_i^2)
/// with the full residual r_i = y_i - sum_{j>=0} z_ij w_j.
inline InverseGammaParams sigma_sq_conditional(double ssr, std::size_t n, const Hyperparams& hyper, double phi) {
  return {hyper.a0 + 0.5 * phi * static_cast<double>(n), hyper.b0 + 0.5 * phi * ssr};
}

/// w_j | rest at power phi, given sum_i z_ij^2 and sum_i r_{i,-j} z_ij where
/// r_{i,-j} leaves out only term j.
inline NormalParams weight_conditional(double szz, double srz_partial, double sigma_sq, const Hyperparams& hyper,
                                       double phi) {
  const double noise = sigma_sq / phi;
  const double denom = noise + hyper.sigma0_sq * szz;
  return {(hyper.mu0 * noise + hyper.sigma0_sq * srz_partial) / denom, noise * hyper.sigma0_sq / denom};
}

template <std::uniform_random_bit_generator Rng>
double gibbs_sigma_sq(const ModelParams& theta, const Dataset& data, const Hyperparams& hyper, double phi, Rng& rng) {
  detail::check_phi(phi);
  detail::check_data(theta, data);
  const double ssr = (data.y - predict(theta, data.X)).squaredNorm();
  const auto post = sigma_sq_conditional(ssr, data.size(), hyper, phi);
  return sample_inverse_gamma(post.shape, post.scale, rng);
}

/// Conditional of weight j (0 = intercept) given everything else.
inline NormalParams weight_conditional(const ModelParams& theta, std::size_t j, const Dataset& data,
                                       const Hyperparams& hyper, double phi) {
  detail::check_phi(phi);
  detail::check_data(theta, data);
  if (j > theta.planes.size()) throw InvalidParameter("weight index out of range");
  const Matrix Z = feature_map(data.X, theta.planes);
  const auto jj = static_cast<Eigen::Index>(j);
  const Vector partial = data.y - Z * theta.weights + Z.col(jj) * theta.weights[jj];
  return weight_conditional(Z.col(jj).squaredNorm(), partial.dot(Z.col(jj)), theta.sigma_sq, hyper, phi);
}

template <std::uniform_random_bit_generator Rng>
double gibbs_weight(const ModelParams& theta, std::size_t j, const Dataset& data, const Hyperparams& hyper, double phi,
                    Rng& rng) {
  const auto post = weight_conditional(theta, j, data, hyper, phi);
  return sample_normal(post.mean, post.variance, rng);
}

/// Outcome of one kernel sweep.
struct MoveStats {
  bool attempted = false;  // false when there is no plane to move
  bool accepted = false;
  double log_ratio = 0.0;  // phi * (l(theta*) - l(theta)) for the plane move
  std::size_t plane_index = 0;
  double log_likelihood = 0.0;  // untempered, at the state after the sweep
};

/// One kernel sweep in place: sigma^2, then w_0..w_|P| in index order, then
/// an independence proposal for one uniformly chosen plane accepted with
/// probability min(1, exp(phi * (l(theta*) - l(theta)))). The proposal is
/// written to `proposal_out` when given.
template <std::uniform_random_bit_generator Rng>
MoveStats mh_sweep(ModelParams& theta, const Dataset& data, const Hyperparams& hyper, double phi, Rng& rng,
                   Workspace& ws, Hyperplane* proposal_out = nullptr) {
  const std::size_t n = data.size();
  const std::size_t m = theta.planes.size();
  const auto ni = static_cast<Eigen::Index>(n);

  ws.columns.resize(m * n);
  ws.resid.resize(n);
  Eigen::Map<Vector> r(ws.resid.data(), ni);
  r = data.y.array() - theta.weights[0];
  for (std::size_t k = 0; k < m; ++k) {
    std::span<double> col(ws.columns.data() + k * n, n);
    feature_column(data.X, theta.planes[k], col);
    r -= theta.weights[static_cast<Eigen::Index>(k + 1)] * Eigen::Map<const Vector>(col.data(), ni);
  }

  // sigma^2
  {
    const auto post = sigma_sq_conditional(r.squaredNorm(), n, hyper, phi);
    theta.sigma_sq = sample_inverse_gamma(post.shape, post.scale, rng);
  }

  // w_0 .. w_|P|
  {
    const double w_old = theta.weights[0];
    const auto post = weight_conditional(static_cast<double>(n), r.sum() + w_old * static_cast<double>(n),
                                         theta.sigma_sq, hyper, phi);
    const double w_new = sample_normal(post.mean, post.variance, rng);
    r.array() -= (w_new - w_old);
    theta.weights[0] = w_new;
  }
  for (std::size_t k = 0; k < m; ++k) {
    Eigen::Map<const Vector> z(ws.columns.data() + k * n, ni);
    const auto jj = static_cast<Eigen::Index>(k + 1);
    const double w_old = theta.weights[jj];
    const double szz = z.squaredNorm();
    const auto post = weight_conditional(szz, r.dot(z) + w_old * szz, theta.sigma_sq, hyper, phi);
    const double w_new = sample_normal(post.mean, post.variance, rng);
    r -= (w_new - w_old) * z;
    theta.weights[jj] = w_new;
  }

  MoveStats stats;
  double ssr = r.squaredNorm();
  if (m > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    const std::size_t k = pick(rng);
    Hyperplane proposal = sample_hyperplane(theta.dim(), hyper.domain_radius, rng, hyper.offset_grid);
    ws.candidate.resize(n);
    feature_column(data.X, proposal, ws.candidate);
    Eigen::Map<Vector> z(ws.columns.data() + k * n, ni);
    Eigen::Map<const Vector> zc(ws.candidate.data(), ni);
    const double w = theta.weights[static_cast<Eigen::Index>(k + 1)];
    const double ssr_new = (r + w * (z - zc)).squaredNorm();
    const double log_ratio = phi * (gaussian_log_likelihood(ssr_new, n, theta.sigma_sq) -
                                    gaussian_log_likelihood(ssr, n, theta.sigma_sq));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const bool accept = std::log(u(rng)) < log_ratio;
    stats.attempted = true;
    stats.accepted = accept;
    stats.log_ratio = log_ratio;
    stats.plane_index = k;
    if (proposal_out != nullptr) *proposal_out = proposal;
    if (accept) {
      r += w * (z - zc);
      z = zc;
      ssr = ssr_new;
      theta.planes.replace(k, std::move(proposal));
    }
  }
  stats.log_likelihood = gaussian_log_likelihood(ssr, n, theta.sigma_sq);
  return stats;
}

struct MhResult {
  ModelParams theta;
  bool accepted = false;
  double log_ratio = 0.0;
  std::size_t plane_index = 0;
  std::optional<Hyperplane> proposal;
  double log_likelihood = 0.0;
};

/// One full kernel application at power phi. With no planes only the Gibbs
/// updates run and `accepted` is false.
template <std::uniform_random_bit_generator Rng>
MhResult mh_step(const ModelParams& theta, const Dataset& data, const Hyperparams& hyper, double phi, Rng& rng) {
  detail::check_phi(phi);
  detail::check_data(theta, data);
  hyper.validate();
  MhResult out{theta};
  Workspace ws;
  Hyperplane proposal;
  const auto stats = mh_sweep(out.theta, data, hyper, phi, rng, ws, &proposal);
  out.accepted = stats.accepted;
  out.log_ratio = stats.log_ratio;
  out.plane_index = stats.plane_index;
  out.log_likelihood = stats.log_likelihood;
  if (stats.attempted) out.proposal = std::move(proposal);
  return out;
}

// ---------------------------------------------------------------------------
// Weights and resampling

/// Normalized weights from log weights (log-sum-exp). Throws
/// DegenerateEnsemble if no weight is positive and finite.
inline std::vector<double> normalize_log_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw DegenerateEnsemble("no weights");
  double mx = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      throw DegenerateEnsemble("log weight is NaN or +inf");
    }
    mx = std::max(mx, lw);
  }
  if (!std::isfinite(mx)) throw DegenerateEnsemble("all weights are zero");
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t t = 0; t < w.size(); ++t) total += (w[t] = std::exp(log_weights[t] - mx));
  for (double& v : w) v /= total;
  return w;
}

/// log(sum_t exp(v_t)).
inline double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

/// Effective sample size (sum w)^2 / sum w^2, in [1, L].
inline double ess(std::span<const double> log_weights) {
  const auto w = normalize_log_weights(log_weights);
  double s2 = 0.0;
  for (double v : w) s2 += v * v;
  return 1.0 / s2;
}

enum class Resampler { Multinomial, Systematic };

/// L i.i.d. ancestor indices drawn with probability proportional to `weights`.
template <std::uniform_random_bit_generator Rng>
std::vector<std::size_t> multinomial_indices(std::span<const double> weights, std::size_t count, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<std::size_t> out(count);
  for (auto& i : out) i = pick(rng);
  return out;
}

/// Systematic (single-uniform, stratified-offset) ancestor indices.
template <std::uniform_random_bit_generator Rng>
std::vector<std::size_t> systematic_indices(std::span<const double> weights, std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double start = u(rng);
  std::vector<std::size_t> out(count);
  double cumulative = weights.empty() ? 0.0 : weights[0];
  std::size_t t = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = (start + static_cast<double>(k)) / static_cast<double>(count);
    while (pos >= cumulative && t + 1 < weights.size()) cumulative += weights[++t];
    out[k] = t;
  }
  return out;
}

/// One weighted sample theta_t with its log weight. `log_likelihood` caches
/// l(theta_t) so weighting does not re-evaluate it.
struct Particle {
  ModelParams params;
  double log_weight = 0.0;
  double log_likelihood = std::numeric_limits<double>::quiet_NaN();
};

/// Weighted particle approximation of the posterior after `iteration` annealing
/// steps. `log_normalizer` is the running estimate of log p(y).
struct ParticleEnsemble {
  std::vector<Particle> particles;
  std::size_t iteration = 0;
  double log_normalizer = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return particles.size(); }

  [[nodiscard]] std::vector<double> log_weights() const {
    std::vector<double> lw(particles.size());
    for (std::size_t t = 0; t < lw.size(); ++t) lw[t] = particles[t].log_weight;
    return lw;
  }

  [[nodiscard]] std::vector<double> normalized_weights() const { return normalize_log_weights(log_weights()); }

  [[nodiscard]] double ess() const { return phrelu::ess(log_weights()); }

  [[nodiscard]] std::size_t dim() const {
    if (particles.empty()) throw DegenerateEnsemble("empty ensemble");
    return particles.front().params.dim();
  }

  /// Posterior-mean prediction sum_t w_t f_theta_t(x).
  [[nodiscard]] double predict_mean(std::span<const double> x) const {
    const auto w = normalized_weights();
    double out = 0.0;
    for (std::size_t t = 0; t < particles.size(); ++t) out += w[t] * predict_point(particles[t].params, x);
    return out;
  }

  [[nodiscard]] Vector predict_mean(const Matrix& X) const {
    const auto w = normalized_weights();
    Vector out = Vector::Zero(X.rows());
    for (std::size_t t = 0; t < particles.size(); ++t) out += w[t] * predict(particles[t].params, X);
    return out;
  }
};

namespace detail {

inline ParticleEnsemble resample_with(const ParticleEnsemble& ens, const std::vector<std::size_t>& ancestors) {
  ParticleEnsemble out;
  out.iteration = ens.iteration;
  out.log_normalizer = ens.log_normalizer;
  out.particles.reserve(ancestors.size());
  for (auto a : ancestors) {
    out.particles.push_back(ens.particles[a]);
    out.particles.back().log_weight = 0.0;
  }
  return out;
}

}  // namespace detail

/// L draws from the weighted empirical distribution; log weights reset to 0.
template <std::uniform_random_bit_generator Rng>
ParticleEnsemble resample_multinomial(const ParticleEnsemble& ens, Rng& rng) {
  const auto w = ens.normalized_weights();
  return detail::resample_with(ens, multinomial_indices(std::span<const double>(w), ens.size(), rng));
}

template <std::uniform_random_bit_generator Rng>
ParticleEnsemble resample_systematic(const ParticleEnsemble& ens, Rng& rng) {
  const auto w = ens.normalized_weights();
  return detail::resample_with(ens, systematic_indices(std::span<const double>(w), ens.size(), rng));
}

// ---------------------------------------------------------------------------
// Annealing schedule

/// Powers phi_0 = 0 < phi_1 < ... < phi_R = 1.
class AnnealingSchedule {
 public:
  explicit AnnealingSchedule(std::vector<double> powers) : powers_(std::move(powers)) {
    if (powers_.size() < 2) throw InvalidParameter("schedule needs at least two powers");
    if (powers_.front() != 0.0 || powers_.back() != 1.0) throw InvalidParameter("schedule must run from 0 to 1");
    for (std::size_t r = 1; r < powers_.size(); ++r) {
      if (!(powers_[r] > powers_[r - 1])) throw InvalidParameter("schedule must be strictly increasing");
    }
  }

  [[nodiscard]] std::size_t steps() const noexcept { return powers_.size() - 1; }
  [[nodiscard]] double operator[](std::size_t r) const { return powers_[r]; }
  [[nodiscard]] const std::vector<double>& powers() const noexcept { return powers_; }

 private:
  std::vector<double> powers_;
};

struct LinearSchedule {};

/// Increments grow by a constant factor `rate` per step.
struct GeometricSchedule {
  double rate = 2.0;
};

using ScheduleShape = std::variant<LinearSchedule, GeometricSchedule>;

inline AnnealingSchedule make_schedule(std::size_t steps, const ScheduleShape& shape = LinearSchedule{}) {
  if (steps == 0) throw InvalidParameter("schedule needs R >= 1");
  std::vector<double> phi(steps + 1);
  const double R = static_cast<double>(steps);
  const auto* geo = std::get_if<GeometricSchedule>(&shape);
  if (geo != nullptr && !(geo->rate > 0.0)) throw InvalidParameter("geometric rate must be positive");
  for (std::size_t r = 0; r <= steps; ++r) {
    const double rr = static_cast<double>(r);
    if (geo == nullptr || geo->rate == 1.0) {
      phi[r] = rr / R;
    } else if (geo->rate > 1.0) {
      // (rate^r - 1) / (rate^R - 1), written to avoid overflow.
      const double lr = std::log(geo->rate);
      phi[r] = (std::exp((rr - R) * lr) - std::exp(-R * lr)) / (1.0 - std::exp(-R * lr));
    } else {
      phi[r] = (1.0 - std::pow(geo->rate, rr)) / (1.0 - std::pow(geo->rate, R));
    }
  }
  phi.front() = 0.0;
  phi.back() = 1.0;
  return AnnealingSchedule(std::move(phi));
}

// ---------------------------------------------------------------------------
// Annealed SMC

enum class StepOrder {
  /// Weight each particle on its current state, resample, then move with K_r.
  WeightThenMove,
  /// Move with K_r first and weight the moved particle.
  MoveThenWeight,
};

struct SmcOptions {
  std::size_t particles = 1000;
  Resampler resampler = Resampler::Multinomial;
  /// Resample only when ESS < ess_threshold * L (otherwise every step r < R).
  bool adaptive = false;
  double ess_threshold = 0.5;
  std::size_t workers = 1;
  StepOrder order = StepOrder::WeightThenMove;
  /// Called after each completed iteration with the current ensemble.
  std::function<void(const ParticleEnsemble&)> on_iteration;

  void validate() const {
    if (particles < 2) throw ConfigError("annealed SMC needs at least 2 particles");
    if (!(ess_threshold > 0.0 && ess_threshold <= 1.0)) throw ConfigError("ess_threshold must lie in (0, 1]");
    if (workers == 0) throw ConfigError("workers must be >= 1");
  }
};

struct SmcDiagnostics {
  std::vector<double> ess;              // after weighting at each r
  std::vector<double> acceptance_rate;  // plane-move acceptance at each r
  std::vector<bool> resampled;
  double seconds = 0.0;

  [[nodiscard]] double mean_acceptance() const {
    if (acceptance_rate.empty()) return 0.0;
    return std::accumulate(acceptance_rate.begin(), acceptance_rate.end(), 0.0) /
           static_cast<double>(acceptance_rate.size());
  }
};

struct SmcResult {
  ParticleEnsemble ensemble;
  SmcDiagnostics diagnostics;
};

namespace detail {

template <typename Fn>
void for_each_particle(ParticleEnsemble& ens, std::size_t workers, Fn&& fn) {
  std::vector<Workspace> ws(std::max<std::size_t>(1, std::min(workers, ens.size())));
  parallel_for(ens.size(), workers, [&](std::size_t t, std::size_t worker) { fn(ens.particles[t], t, ws[worker]); });
}

}  // namespace detail

/// Prior ensemble with unit weights; particle t draws from stream (seed, prior, t).
inline ParticleEnsemble initial_ensemble(const Dataset& data, const Hyperparams& hyper, std::size_t particles,
                                         std::uint64_t seed, std::size_t workers = 1) {
  hyper.validate();
  std::vector<std::optional<Particle>> slots(particles);
  parallel_for(particles, workers, [&](std::size_t t, std::size_t) {
    auto rng = derive_stream(seed, {stream_tag::prior, t});
    Particle p{sample_prior(hyper, data.dim(), rng), 0.0};
    p.log_likelihood = log_likelihood(p.params, data);
    slots[t] = std::move(p);
  });
  ParticleEnsemble ens;
  ens.particles.reserve(particles);
  for (auto& s : slots) ens.particles.push_back(std::move(*s));
  return ens;
}

/// Annealed SMC over the schedule. Particle t at iteration r uses its own
/// stream (seed, move, r, t) and resampling at r uses (seed, resample, r), so
/// the output is independent of `options.workers`. Passing `resume` continues
/// from a snapshot taken after iteration `resume->iteration`; cached particle
/// log-likelihoods are reused and only missing ones are recomputed.
inline SmcResult annealed_smc(const Dataset& data, const Hyperparams& hyper, const AnnealingSchedule& schedule,
                              const SmcOptions& options, std::uint64_t seed,
                              std::optional<ParticleEnsemble> resume = std::nullopt) {
  options.validate();
  hyper.validate();
  if (data.empty()) throw EmptyDataset("annealed SMC needs at least one observation");
  const auto start = std::chrono::steady_clock::now();

  SmcResult result;
  ParticleEnsemble& ens = result.ensemble;
  if (resume) {
    ens = std::move(*resume);
    if (ens.iteration > schedule.steps()) throw ConfigError("snapshot iteration exceeds schedule length");
    if (ens.size() < 2) throw ConfigError("snapshot has fewer than 2 particles");
    if (ens.dim() != data.dim()) throw ShapeError("snapshot dimension does not match data");
    detail::for_each_particle(ens, options.workers, [&](Particle& p, std::size_t, Workspace&) {
      if (std::isnan(p.log_likelihood)) p.log_likelihood = log_likelihood(p.params, data);
    });
  } else {
    ens = initial_ensemble(data, hyper, options.particles, seed, options.workers);
  }

  const std::size_t R = schedule.steps();
  const std::size_t L = ens.size();
  std::vector<double> increments(L);

  auto weigh = [&](double dphi) {
    const auto prev = ens.normalized_weights();
    for (std::size_t t = 0; t < L; ++t) {
      increments[t] = std::log(prev[t]) + dphi * ens.particles[t].log_likelihood;
    }
    ens.log_normalizer += log_sum_exp(increments);
    for (std::size_t t = 0; t < L; ++t) ens.particles[t].log_weight += dphi * ens.particles[t].log_likelihood;
    result.diagnostics.ess.push_back(ens.ess());
  };

  auto move = [&](std::size_t r, double phi) {
    std::vector<char> accepted(L, 0);
    detail::for_each_particle(ens, options.workers, [&](Particle& p, std::size_t t, Workspace& ws) {
      auto rng = derive_stream(seed, {stream_tag::move, r, t});
      const auto stats = mh_sweep(p.params, data, hyper, phi, rng, ws);
      p.log_likelihood = stats.log_likelihood;
      accepted[t] = stats.accepted ? 1 : 0;
    });
    result.diagnostics.acceptance_rate.push_back(
        static_cast<double>(std::count(accepted.begin(), accepted.end(), 1)) / static_cast<double>(L));
  };

  auto maybe_resample = [&](std::size_t r) {
    bool due = r < R;
    if (due && options.adaptive) due = ens.ess() < options.ess_threshold * static_cast<double>(L);
    result.diagnostics.resampled.push_back(due);
    if (!due) return;
    auto rng = derive_stream(seed, {stream_tag::resample, r});
    ens = options.resampler == Resampler::Multinomial ? resample_multinomial(ens, rng) : resample_systematic(ens, rng);
  };

  for (std::size_t r = ens.iteration + 1; r <= R; ++r) {
    const double dphi = schedule[r] - schedule[r - 1];
    if (options.order == StepOrder::WeightThenMove) {
      weigh(dphi);
      maybe_resample(r);
      move(r, schedule[r]);
    } else {
      move(r, schedule[r]);
      weigh(dphi);
      maybe_resample(r);
    }
    ens.iteration = r;
    if (options.on_iteration) options.on_iteration(ens);
  }

  result.diagnostics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Convenience overload with a linear schedule of R steps.
inline SmcResult annealed_smc(const Dataset& data, const Hyperparams& hyper, std::size_t steps,
                              const SmcOptions& options, std::uint64_t seed) {
  return annealed_smc(data, hyper, make_schedule(steps), options, seed);
}

// ---------------------------------------------------------------------------
// Plain MCMC

struct McmcResult {
  std::vector<ModelParams> samples;
  double acceptance_rate = 0.0;
};

/// Random-walk MH chain at phi = 1 started from a prior draw. Deterministic
/// given the stream.
template <std::uniform_random_bit_generator Rng>
McmcResult mcmc_run(const Dataset& data, const Hyperparams& hyper, std::size_t iterations, Rng& rng,
                    std::optional<ModelParams> init = std::nullopt) {
  if (iterations == 0) throw InvalidParameter("mcmc_run needs at least one iteration");
  hyper.validate();
  if (data.empty()) throw EmptyDataset("mcmc_run needs at least one observation");
  ModelParams theta = init ? std::move(*init) : sample_prior(hyper, data.dim(), rng);
  detail::check_data(theta, data);
  McmcResult out;
  out.samples.reserve(iterations);
  Workspace ws;
  std::size_t accepted = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    if (mh_sweep(theta, data, hyper, 1.0, rng, ws).accepted) ++accepted;
    out.samples.push_back(theta);
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(iterations);
  return out;
}

}  // namespace phrelu
