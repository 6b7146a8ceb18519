#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "phrelu/errors.hpp"
#include "phrelu/types.hpp"

namespace phrelu {

/// Affine map x' = (x - center) / scale taking the data into the ball of
/// radius `radius`. `scale` is per column and already includes the global
/// shrink to the ball.
struct BallTransform {
  Vector center;
  Vector scale;
  double radius = 1.0;

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(center.size()); }

  [[nodiscard]] Matrix apply(const Matrix& X) const {
    check(X);
    return ((X.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array()).matrix();
  }

  [[nodiscard]] Matrix invert(const Matrix& Xn) const {
    check(Xn);
    return ((Xn.array().rowwise() * scale.transpose().array()).matrix().rowwise() + center.transpose());
  }

  [[nodiscard]] Vector apply_point(const Vector& x) const {
    return ((x - center).array() / scale.array()).matrix();
  }

  friend bool operator==(const BallTransform& a, const BallTransform& b) {
    return a.radius == b.radius && a.center.size() == b.center.size() && a.center == b.center &&
           a.scale == b.scale;
  }

 private:
  void check(const Matrix& X) const {
    if (X.cols() != center.size()) throw ShapeError("transform dimension does not match data");
  }
};

/// N observations: X is N x p, y has length N. `transform` is set when X has
/// been mapped into a ball.
struct Dataset {
  Matrix X;
  Vector y;
  std::optional<BallTransform> transform;
  std::vector<std::string> feature_names;
  std::string response_name = "y";

  Dataset() = default;
  Dataset(Matrix x, Vector response) : X(std::move(x)), y(std::move(response)) { validate(); }

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(X.rows()); }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(X.cols()); }
  [[nodiscard]] bool empty() const noexcept { return X.rows() == 0; }

  void validate() const {
    if (X.rows() != y.size()) {
      throw ShapeError("dataset has " + std::to_string(X.rows()) + " rows but " + std::to_string(y.size()) +
                       " responses");
    }
  }

  /// Rows selected by index, transform and names carried over.
  [[nodiscard]] Dataset subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
      out.y[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
    }
    out.transform = transform;
    out.feature_names = feature_names;
    out.response_name = response_name;
    return out;
  }
};

}  // namespace phrelu
