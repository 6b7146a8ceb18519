#pragma once

// Hierarchical model: planes from the hyperplane process, sigma^2 ~ IG(a0, b0),
// w_j ~ N(mu0, sigma0^2) for j = 0..|P|, and y_i ~ N(<w, z_i>, sigma^2) with
// z_i0 = 1 carrying the intercept.

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "phrelu/dataset.hpp"
#include "phrelu/errors.hpp"
#include "phrelu/geometry.hpp"
#include "phrelu/random.hpp"
#include "phrelu/types.hpp"

namespace phrelu {

struct Hyperparams {
  double a0 = 2.0;
  double b0 = 1.0;
  double mu0 = 0.0;
  double sigma0_sq = 10.0;
  std::size_t n_planes = 2;
  double domain_radius = 1.0;
  /// When > 0, plane offsets live on this many grid midpoints of (0, l) in both
  /// the prior and the proposal. Used for exact enumeration checks.
  std::size_t offset_grid = 0;

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(a0)) throw InvalidParameter("a0 must be positive");
    if (!positive(b0)) throw InvalidParameter("b0 must be positive");
    if (!std::isfinite(mu0)) throw InvalidParameter("mu0 must be finite");
    if (!positive(sigma0_sq)) throw InvalidParameter("sigma0_sq must be positive");
    if (!positive(domain_radius)) throw InvalidDomain("domain_radius must be positive");
  }
};

/// theta = (P, w, sigma^2); weights[0] is the intercept w0.
struct ModelParams {
  HyperplaneSet planes;
  Vector weights;
  double sigma_sq = 1.0;

  void validate() const {
    if (static_cast<std::size_t>(weights.size()) != planes.size() + 1) {
      throw ShapeError("weights must have |P| + 1 entries");
    }
    if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) throw InvalidParameter("sigma_sq must be positive");
  }

  [[nodiscard]] std::size_t dim() const noexcept { return planes.dim(); }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.planes == b.planes && a.weights.size() == b.weights.size() && a.weights == b.weights &&
           a.sigma_sq == b.sigma_sq;
  }
};

template <std::uniform_random_bit_generator Rng>
ModelParams sample_prior(const Hyperparams& hyper, std::size_t p, Rng& rng) {
  hyper.validate();
  ModelParams theta{sample_php(p, hyper.domain_radius, FixedCount{hyper.n_planes}, rng, hyper.offset_grid),
                    Vector(static_cast<Eigen::Index>(hyper.n_planes + 1)), 1.0};
  theta.sigma_sq = sample_inverse_gamma(hyper.a0, hyper.b0, rng);
  for (Eigen::Index j = 0; j < theta.weights.size(); ++j) {
    theta.weights[j] = sample_normal(hyper.mu0, hyper.sigma0_sq, rng);
  }
  return theta;
}

/// Noiseless response w0 + sum_j w_j relu(<x, n_j> - mu_j).
inline double predict_point(const ModelParams& theta, std::span<const double> x) {
  if (x.size() != theta.dim()) throw ShapeError("predict: point dimension does not match model");
  double out = theta.weights[0];
  for (std::size_t j = 0; j < theta.planes.size(); ++j) {
    out += theta.weights[static_cast<Eigen::Index>(j + 1)] * relu(theta.planes[j].preactivation(x));
  }
  return out;
}

inline double predict_point(const ModelParams& theta, const Vector& x) {
  return predict_point(theta, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

inline Vector predict(const ModelParams& theta, const Matrix& X) {
  if (static_cast<std::size_t>(X.cols()) != theta.dim()) throw ShapeError("predict: X dimension does not match model");
  Vector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out[i] = predict_point(theta, std::span<const double>(X.row(i).data(), static_cast<std::size_t>(X.cols())));
  }
  return out;
}

/// Gaussian log density of N observations given their residual sum of squares.
inline double gaussian_log_likelihood(double ssr, std::size_t n, double sigma_sq) {
  if (!(sigma_sq > 0.0)) throw InvalidParameter("sigma_sq must be positive");
  return -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi * sigma_sq) - 0.5 * ssr / sigma_sq;
}

inline double log_likelihood(const ModelParams& theta, const Matrix& X, const Vector& y) {
  if (!(theta.sigma_sq > 0.0)) throw InvalidParameter("sigma_sq must be positive");
  if (X.rows() == 0) throw EmptyDataset("log_likelihood needs at least one observation");
  if (X.rows() != y.size()) throw ShapeError("X and y row counts differ");
  const Vector r = y - predict(theta, X);
  return gaussian_log_likelihood(r.squaredNorm(), static_cast<std::size_t>(y.size()), theta.sigma_sq);
}

inline double log_likelihood(const ModelParams& theta, const Dataset& data) {
  return log_likelihood(theta, data.X, data.y);
}

}  // namespace phrelu
