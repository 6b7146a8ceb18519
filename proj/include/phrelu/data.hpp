#pragma once

// Synthetic generators, CSV ingestion, train/test splitting and ball
// normalization.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "phrelu/dataset.hpp"
#include "phrelu/errors.hpp"
#include "phrelu/geometry.hpp"
#include "phrelu/model.hpp"
#include "phrelu/random.hpp"
#include "phrelu/types.hpp"

namespace phrelu {

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Noise-free structure behind a simulated dataset.
struct GroundTruth {
  HyperplaneSet planes;
  Vector weights;
  double noise_sd = 0.0;

  [[nodiscard]] ModelParams as_params() const {
    return ModelParams{planes, weights, noise_sd > 0.0 ? noise_sd * noise_sd : 1.0};
  }
};

struct Simulation {
  Dataset data;
  GroundTruth truth;
  Vector noiseless;  // f(x_i) without noise
  Vector noise;      // y_i - f(x_i)
};

/// Draws a plane that cuts the cube [-1, 1]^p: uniform normal, offset
/// Uniform(0, sqrt(p)), redrawn until the offset is below max_{x in cube} <x, n>
/// = ||n||_1.
template <std::uniform_random_bit_generator Rng>
Hyperplane sample_cube_plane(std::size_t p, Rng& rng) {
  const double reach = std::sqrt(static_cast<double>(p));
  for (;;) {
    Hyperplane h = sample_hyperplane(p, reach, rng);
    if (h.offset < h.normal.lpNorm<1>()) return h;
  }
}

/// y = w0 + sum_j w_j relu(<x, n_j> - mu_j) + eps with x uniform on [-1, 1]^p,
/// w_j ~ N(0, 1) for j >= 1, w0 ~ N(0, noise_sd^2), eps ~ N(0, noise_sd^2).
template <std::uniform_random_bit_generator Rng>
Simulation gen_simulation(std::size_t p, std::size_t m, std::size_t n, double noise_sd, Rng& rng) {
  if (p == 0) throw InvalidDimension("simulation dimension must be >= 1");
  if (n == 0) throw InvalidParameter("simulation needs n >= 1");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw InvalidParameter("noise_sd must be >= 0");

  HyperplaneSet planes(p, std::sqrt(static_cast<double>(p)));
  for (std::size_t j = 0; j < m; ++j) planes.push_back(sample_cube_plane(p, rng));

  std::normal_distribution<double> std_normal(0.0, 1.0);
  Vector w(static_cast<Eigen::Index>(m + 1));
  w[0] = noise_sd * std_normal(rng);
  for (std::size_t j = 1; j <= m; ++j) w[static_cast<Eigen::Index>(j)] = std_normal(rng);

  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) X(i, k) = unif(rng);
  }

  Simulation sim{Dataset{}, GroundTruth{std::move(planes), std::move(w), noise_sd}, Vector(), Vector()};
  sim.noiseless = predict(ModelParams{sim.truth.planes, sim.truth.weights, 1.0}, X);
  sim.noise.resize(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) sim.noise[i] = noise_sd * std_normal(rng);
  sim.data = Dataset(std::move(X), sim.noiseless + sim.noise);
  for (std::size_t k = 0; k < p; ++k) sim.data.feature_names.push_back("x" + std::to_string(k + 1));
  return sim;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return std::string(s);
}

}  // namespace detail

struct CsvOptions {
  /// Response column: header name, or zero-based index when there is no
  /// header. Empty means the last column.
  std::string response;
  /// Feature columns; empty means every column except the response.
  std::vector<std::string> features;
  /// Whether the first line is a header; detected from the first line when unset.
  std::optional<bool> header;
  /// False for prediction inputs: y is left at zero and `response` is only
  /// used to keep that column out of the default feature list, if present.
  bool has_response = true;
};

/// Reads a comma-separated numeric table. Rows with missing or non-numeric
/// selected values are rejected with the offending data-row index.
inline Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    lines.push_back(std::move(line));
  }
  if (lines.empty()) throw EmptyDataset(path.string() + " is empty");

  const auto first = detail::split_fields(lines.front());
  const std::size_t ncols = first.size();
  bool has_header = false;
  if (options.header) {
    has_header = *options.header;
  } else {
    has_header = std::any_of(first.begin(), first.end(), [](auto f) { return !parse_double(f).has_value(); });
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < ncols; ++c) names.push_back(has_header ? detail::trim(first[c]) : std::to_string(c));

  auto resolve = [&](const std::string& col) -> std::size_t {
    const auto it = std::find(names.begin(), names.end(), col);
    if (it == names.end()) throw UnknownColumn("unknown column '" + col + "' in " + path.string());
    return static_cast<std::size_t>(it - names.begin());
  };
  const std::size_t none = ncols;
  std::size_t response = none;
  if (options.has_response) {
    response = options.response.empty() ? ncols - 1 : resolve(options.response);
  } else if (!options.response.empty()) {
    const auto it = std::find(names.begin(), names.end(), options.response);
    if (it != names.end()) response = static_cast<std::size_t>(it - names.begin());
  }
  std::vector<std::size_t> features;
  if (options.features.empty()) {
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c != response) features.push_back(c);
    }
  } else {
    for (const auto& f : options.features) features.push_back(resolve(f));
  }
  if (features.empty()) throw UnknownColumn("no feature columns selected");

  const std::size_t begin = has_header ? 1 : 0;
  const std::size_t nrows = lines.size() - begin;
  if (nrows == 0) throw EmptyDataset(path.string() + " has a header but no data rows");

  Matrix X(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(features.size()));
  Vector y(static_cast<Eigen::Index>(nrows));
  for (std::size_t i = 0; i < nrows; ++i) {
    const auto fields = detail::split_fields(lines[begin + i]);
    if (fields.size() != ncols) {
      throw ParseError(i, "expected " + std::to_string(ncols) + " fields, found " + std::to_string(fields.size()));
    }
    auto get = [&](std::size_t c) {
      const auto v = parse_double(fields[c]);
      if (!v) throw ParseError(i, "column '" + names[c] + "': malformed or missing value '" + std::string(fields[c]) + "'");
      return *v;
    };
    for (std::size_t k = 0; k < features.size(); ++k) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = get(features[k]);
    }
    y[static_cast<Eigen::Index>(i)] = options.has_response ? get(response) : 0.0;
  }

  Dataset out(std::move(X), std::move(y));
  for (auto f : features) out.feature_names.push_back(names[f]);
  if (options.has_response) out.response_name = names[response];
  return out;
}

// Transform sidecar: '#' comments and "key = value" lines with keys dim,
// radius, center and scale (the last two comma-separated).

inline void write_transform(const BallTransform& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  auto join = [](const Vector& v) {
    std::string s;
    for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
    return s;
  };
  out << "# ball transform: x' = (x - center) / scale\n";
  out << "dim = " << t.dim() << "\n";
  out << "radius = " << format_double(t.radius) << "\n";
  out << "center = " << join(t.center) << "\n";
  out << "scale = " << join(t.scale) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

inline BallTransform read_transform(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::optional<std::size_t> dim;
  std::optional<double> radius;
  std::vector<double> center, scale;
  auto parse_list = [&](std::string_view v) {
    std::vector<double> out;
    for (auto f : detail::split_fields(v)) {
      const auto d = parse_double(f);
      if (!d) throw SchemaError("malformed number in " + path.string());
      out.push_back(*d);
    }
    return out;
  };
  for (std::string line; std::getline(in, line);) {
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw SchemaError("expected key = value in " + path.string());
    const auto key = detail::trim(std::string_view(t).substr(0, eq));
    const auto value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key == "dim") {
      const auto d = parse_double(value);
      if (!d || *d < 1) throw SchemaError("bad dim in " + path.string());
      dim = static_cast<std::size_t>(*d);
    } else if (key == "radius") {
      radius = parse_double(value);
      if (!radius) throw SchemaError("bad radius in " + path.string());
    } else if (key == "center") {
      center = parse_list(value);
    } else if (key == "scale") {
      scale = parse_list(value);
    }
  }
  if (!dim || !radius || center.size() != *dim || scale.size() != *dim) {
    throw SchemaError("incomplete transform record in " + path.string());
  }
  BallTransform t;
  t.radius = *radius;
  t.center = Eigen::Map<const Vector>(center.data(), static_cast<Eigen::Index>(center.size()));
  t.scale = Eigen::Map<const Vector>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  return t;
}

/// Writes the dataset as CSV with a header; when it carries a transform the
/// record goes to "<path>.transform".
inline void save_csv(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t k = 0; k < data.dim(); ++k) {
    out << (k < data.feature_names.size() ? data.feature_names[k] : "x" + std::to_string(k + 1)) << ",";
  }
  out << data.response_name << "\n";
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index k = 0; k < data.X.cols(); ++k) out << format_double(data.X(i, k)) << ",";
    out << format_double(data.y[i]) << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
  if (data.transform) write_transform(*data.transform, path.string() + ".transform");
}

// ---------------------------------------------------------------------------
// Splitting and normalization

/// Seeded shuffle, first floor(f N) rows to train and the rest to test. Each
/// part keeps the original row order.
template <std::uniform_random_bit_generator Rng>
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidParameter("train fraction must lie in (0, 1)");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

struct Normalized {
  Dataset data;
  BallTransform transform;
  std::vector<std::string> warnings;
};

/// Centers each column at its midrange, scales it to [-1, 1], then shrinks all
/// columns together so every row has norm <= radius. Constant columns keep
/// scale 1 and produce a warning.
inline Normalized normalize_to_ball(const Dataset& data, double radius = 1.0) {
  if (data.empty()) throw EmptyDataset("cannot normalize an empty dataset");
  if (!(radius > 0.0)) throw InvalidDomain("radius must be positive");
  Normalized out;
  const Eigen::Index p = data.X.cols();
  BallTransform& t = out.transform;
  t.radius = radius;
  t.center.resize(p);
  t.scale.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double lo = data.X.col(k).minCoeff();
    const double hi = data.X.col(k).maxCoeff();
    t.center[k] = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    if (half > 0.0) {
      t.scale[k] = half;
    } else {
      t.scale[k] = 1.0;
      const std::string name =
          static_cast<std::size_t>(k) < data.feature_names.size() ? data.feature_names[k] : std::to_string(k);
      out.warnings.push_back("column '" + name + "' is constant; left unscaled");
    }
  }
  const double max_norm = t.apply(data.X).rowwise().norm().maxCoeff();
  if (max_norm > 0.0) t.scale *= max_norm / radius;
  // Rounding can leave a row a few ulps outside the ball.
  for (int guard = 0; guard < 8; ++guard) {
    const double m = t.apply(data.X).rowwise().norm().maxCoeff();
    if (m <= radius) break;
    t.scale *= (m / radius) * (1.0 + 4.0 * std::numeric_limits<double>::epsilon());
  }
  out.data = data;
  out.data.X = t.apply(data.X);
  out.data.transform = t;
  return out;
}

}  // namespace phrelu
