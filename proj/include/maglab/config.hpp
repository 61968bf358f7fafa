#pragma once

#include "maglab/field_model.hpp"
#include "maglab/grid.hpp"
#include "maglab/propagator.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace maglab {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kEngineVersion = "maglab 1.0.0";

/// Builtin field: type in {constant2d, perturbed2d, constant4d, free} with
/// named parameters (b, eps, omega, b1, b2, d).
struct ModelDescriptor {
  std::string type = "constant2d";
  std::map<std::string, double> params;

  friend bool operator==(const ModelDescriptor&, const ModelDescriptor&) = default;
};

/// Initial or test state. width <= 0 selects the experiment's default
/// family width.
struct PacketSpec {
  std::vector<double> center;
  std::vector<double> momentum;
  double width = 0;

  friend bool operator==(const PacketSpec&, const PacketSpec&) = default;
};

struct OutputSpec {
  std::string csv;
  std::string json;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string experiment;
  ModelDescriptor model;
  GridSpec grid;
  std::vector<double> h_list;
  int n = 1;
  int k = 3;
  std::vector<int> alpha;
  std::vector<double> t_grid;
  double M_horizon = 1;
  std::vector<double> beta_list;
  PacketSpec packet;
  PropagatorConfig propagator;
  /// Named thresholds and numerical tolerances; every verdict names the key
  /// it was tested against.
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 0;
  OutputSpec output;

  /// Tolerance lookup with a default.
  double tol(const std::string& key, double fallback) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"elliptic", "spectrum", "agmon",
                                              "flow",     "duhamel",  "symbolic"};
  return names;
}

/// Parses and validates a config document. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON text (sorted keys, two-space indent).
std::string config_to_json(const ExperimentConfig& cfg);

/// Builds the field model; perturbed2d takes its period from the grid box.
FieldModel build_model(const ModelDescriptor& desc, const GridSpec& grid);

} // namespace maglab
