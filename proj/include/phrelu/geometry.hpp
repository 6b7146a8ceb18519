#pragma once

// Hyperplanes, Poisson hyperplane processes on a ball, and the ReLU feature
// map they induce.
//
// A hyperplane is the set {x : <x, n> - mu = 0} with unit normal n and
// offset mu > 0. Its parameter point mu * n lies in the ball of radius l, which
// is how restriction to a sub-region of parameter space is expressed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "phrelu/errors.hpp"
#include "phrelu/random.hpp"
#include "phrelu/types.hpp"

namespace phrelu {

inline constexpr double kUnitNormTolerance = 1e-10;

struct Hyperplane {
  Vector normal;
  double offset = 0.0;

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(normal.size()); }

  /// Foot of the perpendicular from the origin, mu * n.
  [[nodiscard]] Vector parameter_point() const { return offset * normal; }

  /// Signed activation <x, n> - mu before the ReLU.
  [[nodiscard]] double preactivation(std::span<const double> x) const {
    double s = -offset;
    for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * normal[static_cast<Eigen::Index>(k)];
    return s;
  }

  friend bool operator==(const Hyperplane& a, const Hyperplane& b) {
    return a.offset == b.offset && a.normal.size() == b.normal.size() && a.normal == b.normal;
  }
};

/// Throws InvalidParameter unless the plane has a unit normal and positive offset.
inline void validate(const Hyperplane& h) {
  if (h.normal.size() == 0) throw InvalidDimension("hyperplane normal is empty");
  const double norm = h.normal.norm();
  if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
    throw InvalidParameter("hyperplane normal is not unit length (norm " + std::to_string(norm) + ")");
  }
  if (!(h.offset > 0.0) || !std::isfinite(h.offset)) {
    throw InvalidParameter("hyperplane offset must be positive and finite");
  }
}

/// A realization of the process: an ordered list of planes in dimension p, all
/// with offset at most the domain radius. Plane j is neuron j.
class HyperplaneSet {
 public:
  HyperplaneSet(std::size_t dim, double radius, std::vector<Hyperplane> planes = {})
      : dim_(dim), radius_(radius), planes_(std::move(planes)) {
    if (dim_ == 0) throw InvalidDimension("hyperplane set dimension must be >= 1");
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw InvalidDomain("domain radius must be positive");
    for (const auto& h : planes_) check(h);
  }

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] double radius() const noexcept { return radius_; }
  [[nodiscard]] std::size_t size() const noexcept { return planes_.size(); }
  [[nodiscard]] bool empty() const noexcept { return planes_.empty(); }
  [[nodiscard]] const std::vector<Hyperplane>& planes() const noexcept { return planes_; }
  [[nodiscard]] const Hyperplane& operator[](std::size_t j) const { return planes_[j]; }
  [[nodiscard]] auto begin() const noexcept { return planes_.begin(); }
  [[nodiscard]] auto end() const noexcept { return planes_.end(); }

  void push_back(Hyperplane h) {
    check(h);
    planes_.push_back(std::move(h));
  }

  void replace(std::size_t j, Hyperplane h) {
    if (j >= planes_.size()) throw InvalidParameter("plane index out of range");
    check(h);
    planes_[j] = std::move(h);
  }

  friend bool operator==(const HyperplaneSet& a, const HyperplaneSet& b) {
    return a.dim_ == b.dim_ && a.radius_ == b.radius_ && a.planes_ == b.planes_;
  }

 private:
  void check(const Hyperplane& h) const {
    validate(h);
    if (h.dim() != dim_) throw ShapeError("plane dimension does not match set dimension");
    if (h.offset > radius_) throw InvalidDomain("plane offset exceeds domain radius");
  }

  std::size_t dim_;
  double radius_;
  std::vector<Hyperplane> planes_;
};

/// Uniform direction on the sphere S^{p-1}: a standard normal vector, normalized.
template <std::uniform_random_bit_generator Rng>
Vector sample_unit_normal(std::size_t p, Rng& rng) {
  if (p == 0) throw InvalidDimension("dimension must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(p));
  double norm = 0.0;
  do {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = normal(rng);
    norm = v.norm();
  } while (!(norm > 0.0));
  return v / norm;
}

/// Offset of grid cell k when offsets are restricted to `grid` evenly spaced
/// midpoints of (0, l).
inline double grid_offset(std::size_t k, std::size_t grid, double l) {
  return (static_cast<double>(k) + 0.5) * l / static_cast<double>(grid);
}

/// Draws a plane with uniform normal and offset ~ Uniform(0, l). With
/// `offset_grid > 0` the offset is instead uniform over the grid midpoints.
template <std::uniform_random_bit_generator Rng>
Hyperplane sample_hyperplane(std::size_t p, double l, Rng& rng, std::size_t offset_grid = 0) {
  if (!(l > 0.0) || !std::isfinite(l)) throw InvalidDomain("domain radius must be positive");
  Hyperplane h;
  h.normal = sample_unit_normal(p, rng);
  if (offset_grid > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, offset_grid - 1);
    h.offset = grid_offset(pick(rng), offset_grid, l);
  } else {
    std::uniform_real_distribution<double> u(0.0, l);
    do {
      h.offset = u(rng);
    } while (!(h.offset > 0.0));
  }
  return h;
}

struct FixedCount {
  std::size_t count = 0;
};

struct PoissonIntensity {
  double total = 0.0;
};

using PhpMode = std::variant<FixedCount, PoissonIntensity>;

/// Realization of the process on the ball of radius l. In Poisson mode the
/// number of planes is Poisson(total) and the planes are i.i.d. given the count.
template <std::uniform_random_bit_generator Rng>
HyperplaneSet sample_php(std::size_t p, double l, const PhpMode& mode, Rng& rng, std::size_t offset_grid = 0) {
  std::size_t count = 0;
  if (const auto* fixed = std::get_if<FixedCount>(&mode)) {
    count = fixed->count;
  } else {
    const double total = std::get<PoissonIntensity>(mode).total;
    if (!(total > 0.0) || !std::isfinite(total)) throw InvalidParameter("Poisson intensity must be positive");
    std::poisson_distribution<std::size_t> pois(total);
    count = pois(rng);
  }
  HyperplaneSet set(p, l);
  for (std::size_t j = 0; j < count; ++j) set.push_back(sample_hyperplane(p, l, rng, offset_grid));
  return set;
}

inline constexpr double relu(double c) noexcept { return c > 0.0 ? c : 0.0; }

/// N x (|P|+1) design: column 0 is the constant 1, column j is
/// relu(<x_i, n_j> - mu_j).
inline Matrix feature_map(const Matrix& X, const HyperplaneSet& planes) {
  if (static_cast<std::size_t>(X.cols()) != planes.dim()) {
    throw ShapeError("feature map: X has " + std::to_string(X.cols()) + " columns, planes have dimension " +
                     std::to_string(planes.dim()));
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(planes.size());
  Matrix Z(n, m + 1);
  Z.col(0).setOnes();
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& h = planes[static_cast<std::size_t>(j)];
    Z.col(j + 1) = ((X * h.normal).array() - h.offset).cwiseMax(0.0).matrix();
  }
  return Z;
}

/// Axis-aligned slab {v : lower <= v_axis < upper} (upper included when
/// `upper_closed`).
struct Slab {
  std::size_t axis = 0;
  double lower = 0.0;
  double upper = 0.0;
  bool upper_closed = false;

  [[nodiscard]] bool contains(double v) const noexcept {
    return v >= lower && (v < upper || (upper_closed && v == upper));
  }
};

/// Cuts the ball of radius l into K slabs along one axis. A point on a cut
/// belongs to the cell on its greater side; both outer boundaries are closed.
class DomainPartition {
 public:
  DomainPartition(std::size_t axis, std::vector<double> cut_points, double radius)
      : axis_(axis), cuts_(std::move(cut_points)), radius_(radius) {
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw InvalidDomain("partition radius must be positive");
    for (std::size_t i = 0; i < cuts_.size(); ++i) {
      if (!(cuts_[i] > -radius_ && cuts_[i] < radius_)) throw InvalidDomain("cut point outside (-radius, radius)");
      if (i > 0 && !(cuts_[i] > cuts_[i - 1])) throw InvalidDomain("cut points must be strictly increasing");
    }
  }

  /// K evenly spaced cells over [lo, hi] (which must lie within the ball).
  static DomainPartition even(std::size_t axis, std::size_t cells, double lo, double hi, double radius) {
    if (cells == 0) throw InvalidParameter("partition needs at least one cell");
    if (!(hi > lo)) throw InvalidDomain("even partition needs hi > lo");
    std::vector<double> cuts;
    for (std::size_t i = 1; i < cells; ++i) {
      cuts.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells));
    }
    return DomainPartition(axis, std::move(cuts), radius);
  }

  [[nodiscard]] std::size_t axis() const noexcept { return axis_; }
  [[nodiscard]] const std::vector<double>& cut_points() const noexcept { return cuts_; }
  [[nodiscard]] double radius() const noexcept { return radius_; }
  [[nodiscard]] std::size_t cells() const noexcept { return cuts_.size() + 1; }

  [[nodiscard]] Slab cell(std::size_t i) const {
    if (i >= cells()) throw InvalidParameter("cell index out of range");
    Slab s;
    s.axis = axis_;
    s.lower = i == 0 ? -radius_ : cuts_[i - 1];
    s.upper = i + 1 == cells() ? radius_ : cuts_[i];
    s.upper_closed = i + 1 == cells();
    return s;
  }

  /// Cell owning coordinate value v; throws OutOfDomain outside [-l, l].
  [[nodiscard]] std::size_t locate(double v) const {
    if (!(v >= -radius_ && v <= radius_)) {
      throw OutOfDomain("coordinate " + std::to_string(v) + " outside [-" + std::to_string(radius_) + ", " +
                        std::to_string(radius_) + "]");
    }
    return static_cast<std::size_t>(std::upper_bound(cuts_.begin(), cuts_.end(), v) - cuts_.begin());
  }

  friend bool operator==(const DomainPartition&, const DomainPartition&) = default;

 private:
  std::size_t axis_;
  std::vector<double> cuts_;
  double radius_;
};

/// Union of independent realizations; plane order follows input order.
inline HyperplaneSet superpose(std::span<const HyperplaneSet> sets) {
  if (sets.empty()) throw InvalidParameter("superpose needs at least one set");
  HyperplaneSet out(sets.front().dim(), sets.front().radius());
  for (const auto& s : sets) {
    if (s.dim() != out.dim() || s.radius() != out.radius()) {
      throw IncompatibleDomain("superpose: sets differ in dimension or radius");
    }
    for (const auto& h : s) out.push_back(h);
  }
  return out;
}

/// Planes whose parameter point mu * n falls in the slab.
inline HyperplaneSet restrict(const HyperplaneSet& set, const Slab& slab) {
  if (slab.axis >= set.dim()) throw ShapeError("slab axis exceeds plane dimension");
  HyperplaneSet out(set.dim(), set.radius());
  for (const auto& h : set) {
    if (slab.contains(h.offset * h.normal[static_cast<Eigen::Index>(slab.axis)])) out.push_back(h);
  }
  return out;
}

}  // namespace phrelu
