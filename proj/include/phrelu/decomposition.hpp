#pragma once

// Two ways of splitting one large fit into K independent smaller ones.
//
// Intensity split: K fits on the full data, each with |P|/K planes; the
// prediction is the average of the K posterior-mean predictions (the
// superposition of K independent processes of intensity lambda/K).
//
// Domain split: the data are cut into K slabs along one axis and each slab
// gets its own fit; a point is predicted by the fit owning its slab.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phrelu/dataset.hpp"
#include "phrelu/errors.hpp"
#include "phrelu/evaluation.hpp"
#include "phrelu/geometry.hpp"
#include "phrelu/inference.hpp"
#include "phrelu/model.hpp"
#include "phrelu/random.hpp"

namespace phrelu {

enum class DecompScheme { Intensity, Domain };

struct DecompFit {
  DecompScheme scheme = DecompScheme::Intensity;
  std::vector<ParticleEnsemble> submodels;
  std::optional<DomainPartition> partition;
  std::vector<double> seconds;           // wall-clock of each sub-fit
  std::vector<std::size_t> cell_sizes;   // training rows per sub-fit
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t K() const noexcept { return submodels.size(); }

  void validate() const {
    if (submodels.empty()) throw ConfigError("decomposition has no sub-models");
    const std::size_t p = submodels.front().dim();
    for (const auto& s : submodels) {
      if (s.dim() != p) throw IncompatibleDomain("sub-models differ in dimension");
    }
    if (scheme == DecompScheme::Domain) {
      if (!partition) throw ConfigError("domain decomposition without a partition");
      if (partition->cells() != submodels.size()) throw ConfigError("partition cell count differs from K");
      if (partition->axis() >= p) throw ShapeError("partition axis exceeds dimension");
    }
  }
};

/// Seed used for sub-fit i of a decomposition run with master `seed`.
inline std::uint64_t subfit_seed(std::uint64_t seed, std::size_t i) {
  return derive_seed(seed, {stream_tag::subfit, i});
}

/// K annealed-SMC fits on the full data with n_planes / K planes each.
inline DecompFit fit_intensity_decomp(const Dataset& data, const Hyperparams& hyper, std::size_t K,
                                      const AnnealingSchedule& schedule, const SmcOptions& options,
                                      std::uint64_t seed) {
  if (K == 0) throw ConfigError("K must be >= 1");
  if (hyper.n_planes % K != 0) {
    throw ConfigError("intensity decomposition needs n_planes divisible by K (n_planes = " +
                      std::to_string(hyper.n_planes) + ", K = " + std::to_string(K) + ")");
  }
  Hyperparams sub = hyper;
  sub.n_planes = hyper.n_planes / K;
  DecompFit fit;
  fit.scheme = DecompScheme::Intensity;
  for (std::size_t i = 0; i < K; ++i) {
    auto res = annealed_smc(data, sub, schedule, options, subfit_seed(seed, i));
    fit.seconds.push_back(res.diagnostics.seconds);
    fit.cell_sizes.push_back(data.size());
    fit.submodels.push_back(std::move(res.ensemble));
  }
  return fit;
}

inline void check_scheme(const DecompFit& fit, DecompScheme expected) {
  if (fit.scheme != expected) throw ConfigError("decomposition scheme mismatch");
}

/// Average of the K sub-model posterior-mean predictions.
inline double predict_intensity_decomp(const DecompFit& fit, std::span<const double> x) {
  check_scheme(fit, DecompScheme::Intensity);
  if (fit.submodels.empty()) throw ConfigError("decomposition has no sub-models");
  double s = 0.0;
  for (const auto& ens : fit.submodels) s += ens.predict_mean(x);
  return s / static_cast<double>(fit.K());
}

/// Rows of `data` owned by each cell of the partition.
inline std::vector<std::vector<std::size_t>> route_rows(const Dataset& data, const DomainPartition& partition) {
  if (partition.axis() >= data.dim()) throw ShapeError("partition axis exceeds data dimension");
  std::vector<std::vector<std::size_t>> cells(partition.cells());
  const auto axis = static_cast<Eigen::Index>(partition.axis());
  for (std::size_t i = 0; i < data.size(); ++i) {
    cells[partition.locate(data.X(static_cast<Eigen::Index>(i), axis))].push_back(i);
  }
  return cells;
}

/// Prior draws with equal weights, for cells that received no data.
inline ParticleEnsemble prior_ensemble(const Hyperparams& hyper, std::size_t p, std::size_t particles,
                                       std::uint64_t seed) {
  ParticleEnsemble ens;
  for (std::size_t t = 0; t < particles; ++t) {
    auto rng = derive_stream(seed, {stream_tag::prior, t});
    ens.particles.push_back(Particle{sample_prior(hyper, p, rng), 0.0});
  }
  return ens;
}

/// One annealed-SMC fit per cell, each with hyper.n_planes planes.
inline DecompFit fit_domain_decomp(const Dataset& data, const Hyperparams& hyper, const DomainPartition& partition,
                                   const AnnealingSchedule& schedule, const SmcOptions& options, std::uint64_t seed) {
  options.validate();
  const auto cells = route_rows(data, partition);
  DecompFit fit;
  fit.scheme = DecompScheme::Domain;
  fit.partition = partition;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    fit.cell_sizes.push_back(cells[i].size());
    if (cells[i].empty()) {
      fit.warnings.push_back("cell " + std::to_string(i) + " has no training rows; using a prior-only sub-model");
      fit.submodels.push_back(prior_ensemble(hyper, data.dim(), options.particles, subfit_seed(seed, i)));
      fit.seconds.push_back(0.0);
      continue;
    }
    auto res = annealed_smc(data.subset(cells[i]), hyper, schedule, options, subfit_seed(seed, i));
    fit.seconds.push_back(res.diagnostics.seconds);
    fit.submodels.push_back(std::move(res.ensemble));
  }
  return fit;
}

/// Cell index for x, optionally clamping the axis coordinate into [-l, l].
inline std::size_t owning_cell(const DecompFit& fit, std::span<const double> x, bool clamp) {
  check_scheme(fit, DecompScheme::Domain);
  if (!fit.partition) throw ConfigError("domain decomposition without a partition");
  const auto& part = *fit.partition;
  if (part.axis() >= x.size()) throw ShapeError("point dimension below partition axis");
  double v = x[part.axis()];
  if (clamp) v = std::clamp(v, -part.radius(), part.radius());
  return part.locate(v);
}

/// Posterior-mean prediction of the sub-model owning x.
inline double predict_domain_decomp(const DecompFit& fit, std::span<const double> x, bool clamp = false) {
  return fit.submodels.at(owning_cell(fit, x, clamp)).predict_mean(x);
}

inline double predict_decomp(const DecompFit& fit, std::span<const double> x, bool clamp = false) {
  return fit.scheme == DecompScheme::Intensity ? predict_intensity_decomp(fit, x)
                                               : predict_domain_decomp(fit, x, clamp);
}

inline Vector predict_decomp(const DecompFit& fit, const Matrix& X, bool clamp = false) {
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out[i] = predict_decomp(fit, std::span<const double>(X.row(i).data(), static_cast<std::size_t>(X.cols())), clamp);
  }
  return out;
}

/// Predictive summaries. Domain fits use the owning sub-model's predictive
/// mixture; intensity fits report the averaged mean with no interval (NaN
/// endpoints), since an average of independent sub-models has no single
/// predictive distribution.
inline std::vector<PredictiveSummary> decomp_predictive(const DecompFit& fit, const Matrix& X, double level,
                                                        bool clamp = false) {
  check_level(level);
  std::vector<PredictiveSummary> out(static_cast<std::size_t>(X.rows()));
  if (fit.scheme == DecompScheme::Intensity) {
    const Vector m = predict_decomp(fit, X);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = {m[static_cast<Eigen::Index>(i)], std::numeric_limits<double>::quiet_NaN(),
                std::numeric_limits<double>::quiet_NaN(), level};
    }
    return out;
  }
  std::vector<std::vector<std::size_t>> rows(fit.K());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    rows[owning_cell(fit, std::span<const double>(X.row(i).data(), static_cast<std::size_t>(X.cols())), clamp)]
        .push_back(static_cast<std::size_t>(i));
  }
  for (std::size_t c = 0; c < fit.K(); ++c) {
    if (rows[c].empty()) continue;
    Matrix Xc(static_cast<Eigen::Index>(rows[c].size()), X.cols());
    for (std::size_t r = 0; r < rows[c].size(); ++r) {
      Xc.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[c][r]));
    }
    const auto s = posterior_predictive(fit.submodels[c], Xc, level);
    for (std::size_t r = 0; r < rows[c].size(); ++r) out[rows[c][r]] = s[r];
  }
  return out;
}

}  // namespace phrelu
