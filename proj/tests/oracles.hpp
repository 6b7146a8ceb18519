#pragma once

// Reference computations for the statistical tests. Nothing here calls the
// samplers; each oracle is computed from the model definition directly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "phrelu/geometry.hpp"
#include "phrelu/model.hpp"

namespace oracle {

using phrelu::Matrix;
using phrelu::Vector;

// ---------------------------------------------------------------------------
// Goodness of fit

/// Upper tail of chi-square with `df` degrees of freedom.
inline double chi_square_sf(double stat, double df) { return boost::math::gamma_q(0.5 * df, 0.5 * stat); }

/// Pearson test of observed counts against expected probabilities. Cells with
/// expected count below 5 are pooled with their neighbour.
inline double chi_square_pvalue(const std::vector<double>& observed, const std::vector<double>& probs,
                                std::size_t fitted_params = 0) {
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  std::vector<double> o, e;
  double ob = 0.0, eb = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    ob += observed[k];
    eb += n * probs[k];
    if (eb >= 5.0) {
      o.push_back(ob);
      e.push_back(eb);
      ob = eb = 0.0;
    }
  }
  if (eb > 0.0 || ob > 0.0) {
    if (e.empty()) {
      o.push_back(ob);
      e.push_back(eb);
    } else {
      o.back() += ob;
      e.back() += eb;
    }
  }
  double stat = 0.0;
  for (std::size_t k = 0; k < o.size(); ++k) stat += (o[k] - e[k]) * (o[k] - e[k]) / e[k];
  const double df = static_cast<double>(o.size()) - 1.0 - static_cast<double>(fitted_params);
  return chi_square_sf(stat, std::max(df, 1.0));
}

inline double poisson_pmf(std::size_t k, double mean) {
  return std::exp(static_cast<double>(k) * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0));
}

/// Chi-square p-value of integer samples against Poisson(mean). The last
/// cell collects the upper tail.
inline double poisson_gof_pvalue(const std::vector<std::size_t>& counts, double mean) {
  const std::size_t top = *std::max_element(counts.begin(), counts.end()) + 1;
  std::vector<double> obs(top + 1, 0.0), probs(top + 1, 0.0);
  for (auto c : counts) obs[c] += 1.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < top; ++k) acc += (probs[k] = poisson_pmf(k, mean));
  probs[top] = std::max(0.0, 1.0 - acc);
  return chi_square_pvalue(obs, probs);
}

/// Two-sided one-sample Kolmogorov-Smirnov p-value against `cdf`, using the
/// asymptotic Kolmogorov distribution with the Stephens correction.
inline double ks_pvalue(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    q += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

inline double pearson_r(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / (n - 1.0) / n)};
}

/// Mean and batch-means standard error of a correlated chain.
inline MeanSe batch_mean_se(std::span<const double> xs, std::size_t batches = 50) {
  const std::size_t b = xs.size() / batches;
  std::vector<double> means;
  for (std::size_t i = 0; i < batches; ++i) {
    means.push_back(std::accumulate(xs.begin() + i * b, xs.begin() + (i + 1) * b, 0.0) / static_cast<double>(b));
  }
  const auto ms = mean_se(means);
  return {std::accumulate(xs.begin(), xs.begin() + batches * b, 0.0) / static_cast<double>(batches * b), ms.se};
}

// ---------------------------------------------------------------------------
// Exact posterior of the linear model with a fixed design
//
//   y | w, s2 ~ N(Z w, s2 I),  w_j ~ N(mu0, v0) iid,  s2 ~ IG(a0, b0)
//
// w and s2 are a priori independent, so the posterior is not normal-inverse-
// gamma; it is computed by integrating s2 on a fine log grid. Given s2,
// w | s2, y is normal and y | s2 ~ N(Z mu0, s2 I + v0 Z Z^T).

struct LinearPosterior {
  double log_evidence = 0.0;  // log p(y)
  Vector w_mean;
  Vector w_var;
  double s2_mean = 0.0;
};

inline LinearPosterior linear_posterior(const Eigen::MatrixXd& Z, const Vector& y, const phrelu::Hyperparams& h,
                                        double phi = 1.0) {
  const auto N = static_cast<double>(y.size());
  const Eigen::Index k = Z.cols();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Z.transpose() * Z);
  const Vector lam = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Vector u = y - Z * Vector::Constant(k, h.mu0);
  const Vector b = V.transpose() * (Z.transpose() * u);
  const Vector zy = Z.transpose() * y;
  const double uu = u.squaredNorm();

  // Tempering the likelihood by phi is the same as noise variance s2 / phi
  // plus the constant (1 - phi) / 2 * (N log(2 pi s2) ... ), which we carry.
  const double t_lo = -16.0, t_hi = 8.0, dt = 0.002;
  std::vector<double> logp, ts;
  for (double t = t_lo; t <= t_hi; t += dt) {
    const double s2 = std::exp(t);
    const double s2e = s2 / phi;
    double quad = uu, logdet = N * std::log(s2e);
    for (Eigen::Index i = 0; i < k; ++i) {
      quad -= b[i] * b[i] / (s2e / h.sigma0_sq + lam[i]);
      logdet += std::log1p(h.sigma0_sq * lam[i] / s2e);
    }
    quad /= s2e;
    // log N(y; Z mu0, s2e I + v0 Z Z^T) plus the tempering correction
    // p(y|.)^phi = N(y; ., s2/phi) * (2 pi s2)^{N (1 - phi) / 2} * phi^{-N/2}.
    double ll = -0.5 * (N * std::log(2.0 * M_PI) + logdet + quad);
    ll += 0.5 * N * (1.0 - phi) * std::log(2.0 * M_PI * s2) - 0.5 * N * std::log(phi);
    const double log_prior = h.a0 * std::log(h.b0) - std::lgamma(h.a0) - (h.a0 + 1.0) * t - h.b0 / s2;
    logp.push_back(ll + log_prior + t);  // + t: Jacobian of s2 = e^t
    ts.push_back(t);
  }
  const double mx = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  for (double v : logp) z += std::exp(v - mx);

  LinearPosterior out;
  out.log_evidence = mx + std::log(z * dt);
  out.w_mean = Vector::Zero(k);
  Vector second = Vector::Zero(k);
  for (std::size_t g = 0; g < ts.size(); ++g) {
    const double p = std::exp(logp[g] - mx) / z;
    if (p < 1e-300) continue;
    const double s2e = std::exp(ts[g]) / phi;
    Vector d(k);
    for (Eigen::Index i = 0; i < k; ++i) d[i] = 1.0 / (lam[i] / s2e + 1.0 / h.sigma0_sq);
    const Eigen::MatrixXd cov = V * d.asDiagonal() * V.transpose();
    const Vector mean = cov * (zy / s2e + Vector::Constant(k, h.mu0 / h.sigma0_sq));
    out.w_mean += p * mean;
    second += p * (cov.diagonal() + mean.cwiseProduct(mean));
    out.s2_mean += p * std::exp(ts[g]);
  }
  out.w_var = second - out.w_mean.cwiseProduct(out.w_mean);
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive posterior over a single plane in one dimension
//
// With p = 1 a plane is a sign n in {-1, +1} and an offset on the grid
// (k + 1/2) l / G. The prior is uniform over the 2G states; each state's
// weight is its linear-model evidence with w and s2 integrated out.

inline std::vector<double> grid_offset_posterior(const Vector& x, const Vector& y, const phrelu::Hyperparams& h,
                                                 double phi = 1.0) {
  const std::size_t G = h.offset_grid;
  std::vector<double> log_states;
  std::vector<std::size_t> bin;
  for (double sign : {-1.0, 1.0}) {
    for (std::size_t k = 0; k < G; ++k) {
      const double mu = phrelu::grid_offset(k, G, h.domain_radius);
      Eigen::MatrixXd Z(x.size(), 2);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Z(i, 0) = 1.0;
        Z(i, 1) = std::max(0.0, sign * x[i] - mu);
      }
      log_states.push_back(linear_posterior(Z, y, h, phi).log_evidence);
      bin.push_back(k);
    }
  }
  const double mx = *std::max_element(log_states.begin(), log_states.end());
  std::vector<double> post(G, 0.0);
  double z = 0.0;
  for (std::size_t s = 0; s < log_states.size(); ++s) {
    const double v = std::exp(log_states[s] - mx);
    post[bin[s]] += v;
    z += v;
  }
  for (double& v : post) v /= z;
  return post;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

/// Grid index of an offset produced with `offset_grid` = G.
inline std::size_t offset_bin(double offset, std::size_t G, double l) {
  const auto k = static_cast<long>(std::floor(offset / l * static_cast<double>(G)));
  return static_cast<std::size_t>(std::clamp(k, 0L, static_cast<long>(G) - 1));
}

}  // namespace oracle
