#pragma once

// Ensemble snapshots as JSON Lines.
//
//   line 1   {"format":"phrelu-ensemble","version":1,"dim":p,"radius":l,
//             "particles":L,"iteration":r,"log_normalizer":z}
//   line 2.. {"log_weight":lw,"sigma_sq":s2,"weights":[w0,...],
//             "planes":[[mu,[n1,...,np]],...],"log_likelihood":ll}
//
// "log_likelihood" is optional (null or absent when unknown); keeping it makes
// a resumed run bit-identical to an uninterrupted one.
// Doubles are written in shortest round-trip form, so write -> read is exact.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "phrelu/decomposition.hpp"
#include "phrelu/errors.hpp"
#include "phrelu/geometry.hpp"
#include "phrelu/inference.hpp"
#include "phrelu/model.hpp"

namespace phrelu {

inline constexpr const char* kEnsembleFormat = "phrelu-ensemble";
inline constexpr int kEnsembleVersion = 1;

namespace detail {

inline nlohmann::json vector_json(const Vector& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Vector json_vector(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw SchemaError(what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SchemaError(what + " must hold numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

template <typename T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

inline nlohmann::json particle_json(const Particle& p) {
  nlohmann::json planes = nlohmann::json::array();
  for (const auto& h : p.params.planes) planes.push_back({h.offset, detail::vector_json(h.normal)});
  nlohmann::json out = {{"log_weight", p.log_weight},
                        {"sigma_sq", p.params.sigma_sq},
                        {"weights", detail::vector_json(p.params.weights)},
                        {"planes", std::move(planes)}};
  out["log_likelihood"] = std::isfinite(p.log_likelihood) ? nlohmann::json(p.log_likelihood) : nlohmann::json(nullptr);
  return out;
}

inline void write_ensemble(const ParticleEnsemble& ens, std::ostream& out) {
  if (ens.size() == 0) throw DegenerateEnsemble("cannot write an empty ensemble");
  const auto& first = ens.particles.front().params.planes;
  const nlohmann::json header = {{"format", kEnsembleFormat},   {"version", kEnsembleVersion},
                                 {"dim", first.dim()},          {"radius", first.radius()},
                                 {"particles", ens.size()},     {"iteration", ens.iteration},
                                 {"log_normalizer", ens.log_normalizer}};
  out << header.dump() << '\n';
  for (const auto& p : ens.particles) out << particle_json(p).dump() << '\n';
}

inline void write_ensemble(const ParticleEnsemble& ens, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_ensemble(ens, out);
  if (!out) throw IoError("failed writing " + path.string());
}

inline ParticleEnsemble read_ensemble(std::istream& in, const std::string& name = "snapshot") {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(name + ": empty file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(name + ": header is not JSON (" + e.what() + ")");
  }
  if (detail::field<std::string>(header, "format", name) != kEnsembleFormat) {
    throw SchemaError(name + ": not an ensemble snapshot");
  }
  if (detail::field<int>(header, "version", name) != kEnsembleVersion) {
    throw SchemaError(name + ": unsupported snapshot version");
  }
  const auto dim = detail::field<std::size_t>(header, "dim", name);
  const auto radius = detail::field<double>(header, "radius", name);
  const auto count = detail::field<std::size_t>(header, "particles", name);

  ParticleEnsemble ens;
  ens.iteration = detail::field<std::size_t>(header, "iteration", name);
  ens.log_normalizer = detail::field<double>(header, "log_normalizer", name);
  ens.particles.reserve(count);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::string where = name + " line " + std::to_string(row);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(where + ": not JSON (" + e.what() + ")");
    }
    HyperplaneSet planes(dim, radius);
    const auto& jp = j.contains("planes") ? j.at("planes") : throw SchemaError(where + ": missing field 'planes'");
    if (!jp.is_array()) throw SchemaError(where + ": planes must be an array");
    try {
      for (const auto& h : jp) {
        if (!h.is_array() || h.size() != 2 || !h[0].is_number()) throw SchemaError(where + ": malformed plane");
        planes.push_back(Hyperplane{detail::json_vector(h[1], where + " normal"), h[0].get<double>()});
      }
      ModelParams theta{std::move(planes), detail::json_vector(j.value("weights", nlohmann::json()), where + " weights"),
                        detail::field<double>(j, "sigma_sq", where)};
      theta.validate();
      Particle particle{std::move(theta), detail::field<double>(j, "log_weight", where)};
      if (j.contains("log_likelihood") && j["log_likelihood"].is_number()) {
        particle.log_likelihood = j["log_likelihood"].get<double>();
      }
      ens.particles.push_back(std::move(particle));
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  if (ens.particles.size() != count) {
    throw SchemaError(name + ": header announces " + std::to_string(count) + " particles but file has " +
                      std::to_string(ens.particles.size()));
  }
  if (count == 0) throw SchemaError(name + ": no particles");
  return ens;
}

inline ParticleEnsemble read_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + ": file not found or unreadable");
  return read_ensemble(in, path.string());
}

// ---------------------------------------------------------------------------
// Fit manifest: which sampler produced the fit and where its pieces live.
// Paths inside the manifest are relative to the manifest's directory.

struct FitManifest {
  std::string method;  // whole, mcmc, decmp1, decmp2, ols
  std::optional<std::string> transform_file;
  std::vector<std::string> ensemble_files;
  std::optional<DomainPartition> partition;
  Hyperparams hyper;
  std::vector<double> ols_coefficients;
  std::string response_name = "y";
  std::vector<std::string> feature_names;
};

inline nlohmann::json hyper_json(const Hyperparams& h) {
  return {{"a0", h.a0},
          {"b0", h.b0},
          {"mu0", h.mu0},
          {"sigma0_sq", h.sigma0_sq},
          {"n_planes", h.n_planes},
          {"domain_radius", h.domain_radius},
          {"offset_grid", h.offset_grid}};
}

inline Hyperparams json_hyper(const nlohmann::json& j, const std::string& where) {
  Hyperparams h;
  h.a0 = detail::field<double>(j, "a0", where);
  h.b0 = detail::field<double>(j, "b0", where);
  h.mu0 = detail::field<double>(j, "mu0", where);
  h.sigma0_sq = detail::field<double>(j, "sigma0_sq", where);
  h.n_planes = detail::field<std::size_t>(j, "n_planes", where);
  h.domain_radius = detail::field<double>(j, "domain_radius", where);
  h.offset_grid = j.value("offset_grid", std::size_t{0});
  return h;
}

inline void write_manifest(const FitManifest& m, const std::filesystem::path& path) {
  nlohmann::json j = {{"format", "phrelu-fit"},
                      {"version", 1},
                      {"method", m.method},
                      {"ensembles", m.ensemble_files},
                      {"hyperparams", hyper_json(m.hyper)},
                      {"response", m.response_name},
                      {"features", m.feature_names}};
  j["transform"] = m.transform_file ? nlohmann::json(*m.transform_file) : nlohmann::json(nullptr);
  if (m.partition) {
    j["partition"] = {{"axis", m.partition->axis()},
                      {"cuts", m.partition->cut_points()},
                      {"radius", m.partition->radius()}};
  } else {
    j["partition"] = nullptr;
  }
  if (!m.ols_coefficients.empty()) j["ols_coefficients"] = m.ols_coefficients;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

inline FitManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open fit file " + path.string() + ": file not found or unreadable");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": not JSON (" + e.what() + ")");
  }
  const std::string where = path.string();
  if (detail::field<std::string>(j, "format", where) != "phrelu-fit") throw SchemaError(where + ": not a fit manifest");
  FitManifest m;
  m.method = detail::field<std::string>(j, "method", where);
  m.ensemble_files = detail::field<std::vector<std::string>>(j, "ensembles", where);
  m.hyper = json_hyper(j.at("hyperparams"), where + " hyperparams");
  m.response_name = j.value("response", std::string("y"));
  m.feature_names = j.value("features", std::vector<std::string>{});
  if (j.contains("transform") && !j["transform"].is_null()) m.transform_file = j["transform"].get<std::string>();
  if (j.contains("partition") && !j["partition"].is_null()) {
    const auto& p = j["partition"];
    try {
      m.partition = DomainPartition(detail::field<std::size_t>(p, "axis", where + " partition"),
                                    detail::field<std::vector<double>>(p, "cuts", where + " partition"),
                                    detail::field<double>(p, "radius", where + " partition"));
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      throw SchemaError(where + " partition: " + e.what());
    }
  }
  if (j.contains("ols_coefficients")) m.ols_coefficients = j["ols_coefficients"].get<std::vector<double>>();
  return m;
}

}  // namespace phrelu
