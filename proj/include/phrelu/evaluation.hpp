#pragma once

// Posterior-predictive summaries and the regression metrics used to compare
// fits: RMSE, interval coverage and mean interval length. Also houses the
// ordinary-least-squares baseline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phrelu/data.hpp"
#include "phrelu/errors.hpp"
#include "phrelu/inference.hpp"
#include "phrelu/types.hpp"

namespace phrelu {

struct PredictiveSummary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;

  [[nodiscard]] double width() const noexcept { return upper - lower; }
  [[nodiscard]] bool covers(double y) const noexcept { return lower <= y && y <= upper; }
};

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Weighted mixture of normals sum_t w_t N(mean_t, sd_t^2).
class GaussianMixture {
 public:
  void add(double weight, double mean, double sd) {
    if (weight <= 0.0) return;
    weights_.push_back(weight);
    means_.push_back(mean);
    sds_.push_back(sd);
  }

  [[nodiscard]] bool empty() const noexcept { return weights_.empty(); }

  [[nodiscard]] double mean() const {
    double total = 0.0, m = 0.0;
    for (std::size_t t = 0; t < weights_.size(); ++t) {
      total += weights_[t];
      m += weights_[t] * means_[t];
    }
    return m / total;
  }

  [[nodiscard]] double cdf(double q) const {
    double total = 0.0, c = 0.0;
    for (std::size_t t = 0; t < weights_.size(); ++t) {
      total += weights_[t];
      c += weights_[t] * standard_normal_cdf((q - means_[t]) / sds_[t]);
    }
    return c / total;
  }

  /// Bisection on the CDF until the bracket is below 1e-10 (relative to
  /// max(1, |q|)).
  [[nodiscard]] double quantile(double prob) const {
    if (empty()) throw DegenerateEnsemble("empty mixture");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t t = 0; t < weights_.size(); ++t) {
      lo = std::min(lo, means_[t] - 12.0 * sds_[t]);
      hi = std::max(hi, means_[t] + 12.0 * sds_[t]);
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (hi - lo <= 1e-10 * std::max(1.0, std::abs(mid))) break;
      (cdf(mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  [[nodiscard]] PredictiveSummary summary(double level) const {
    return {mean(), quantile(0.5 * (1.0 - level)), quantile(0.5 * (1.0 + level)), level};
  }

 private:
  std::vector<double> weights_, means_, sds_;
};

inline void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("credible level must lie in (0, 1)");
}

/// Per-row mixture of the particles' predictive normals N(f_theta(x), sigma^2).
inline std::vector<GaussianMixture> predictive_mixtures(const ParticleEnsemble& ens, const Matrix& X) {
  if (ens.size() == 0) throw DegenerateEnsemble("empty ensemble");
  const auto w = ens.normalized_weights();
  std::vector<GaussianMixture> out(static_cast<std::size_t>(X.rows()));
  for (std::size_t t = 0; t < ens.size(); ++t) {
    if (w[t] <= 0.0) continue;
    const auto& theta = ens.particles[t].params;
    const Vector m = predict(theta, X);
    const double sd = std::sqrt(theta.sigma_sq);
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)].add(w[t], m[i], sd);
  }
  return out;
}

/// Mean and equal-tailed interval of the predictive distribution of y at each
/// row (observation noise included).
inline std::vector<PredictiveSummary> posterior_predictive(const ParticleEnsemble& ens, const Matrix& X,
                                                           double level = 0.95) {
  check_level(level);
  const auto mixtures = predictive_mixtures(ens, X);
  std::vector<PredictiveSummary> out;
  out.reserve(mixtures.size());
  for (const auto& m : mixtures) out.push_back(m.summary(level));
  return out;
}

inline double rmse(std::span<const double> predictions, std::span<const double> y) {
  if (predictions.size() != y.size()) throw ShapeError("rmse: length mismatch");
  if (y.empty()) throw EmptyDataset("rmse of empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (predictions[i] - y[i]) * (predictions[i] - y[i]);
  return std::sqrt(s / static_cast<double>(y.size()));
}

inline double rmse(const Vector& predictions, const Vector& y) {
  return rmse(std::span<const double>(predictions.data(), static_cast<std::size_t>(predictions.size())),
              std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

inline double coverage(std::span<const PredictiveSummary> summaries, std::span<const double> y) {
  if (summaries.size() != y.size()) throw ShapeError("coverage: length mismatch");
  if (y.empty()) throw EmptyDataset("coverage of empty input");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += summaries[i].covers(y[i]) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

inline double coverage(const std::vector<PredictiveSummary>& summaries, const Vector& y) {
  return coverage(std::span<const PredictiveSummary>(summaries),
                  std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

inline double mean_ci_length(std::span<const PredictiveSummary> summaries) {
  if (summaries.empty()) throw EmptyDataset("mean_ci_length of empty input");
  double s = 0.0;
  for (const auto& p : summaries) s += p.width();
  return s / static_cast<double>(summaries.size());
}

inline Vector summary_means(const std::vector<PredictiveSummary>& summaries) {
  Vector out(static_cast<Eigen::Index>(summaries.size()));
  for (std::size_t i = 0; i < summaries.size(); ++i) out[static_cast<Eigen::Index>(i)] = summaries[i].mean;
  return out;
}

// ---------------------------------------------------------------------------
// Ordinary least squares baseline

/// Coefficients (intercept first) minimizing ||y - b0 - X b||^2.
inline Vector ols_fit(const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw ShapeError("ols: X and y row counts differ");
  if (X.rows() == 0) throw EmptyDataset("ols on empty data");
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  return A.colPivHouseholderQr().solve(y);
}

inline Vector ols_predict(const Vector& coef, const Matrix& X) {
  if (coef.size() != X.cols() + 1) throw ShapeError("ols: coefficient count does not match X");
  return (X * coef.tail(X.cols())).array() + coef[0];
}

// ---------------------------------------------------------------------------
// Reports

/// Flat "key = value" report, one metric per line.
class Report {
 public:
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, const std::string& value) {
    for (auto& kv : entries_) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    entries_.emplace_back(key, value);
  }

  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  [[nodiscard]] std::string str() const {
    std::string s;
    for (const auto& [k, v] : entries_) s += k + " = " + v + "\n";
    return s;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << str();
    if (!out) throw IoError("failed writing " + path.string());
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// One row per test point: mean,lower,upper,y. Intervals may be absent (NaN
/// written as empty fields).
inline void write_predictions_csv(const std::filesystem::path& path, const std::vector<PredictiveSummary>& summaries,
                                  const Vector* y = nullptr) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
  out << "mean,lower,upper" << (y ? ",y" : "") << "\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    out << num(summaries[i].mean) << "," << num(summaries[i].lower) << "," << num(summaries[i].upper);
    if (y) out << "," << num((*y)[static_cast<Eigen::Index>(i)]);
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace phrelu
