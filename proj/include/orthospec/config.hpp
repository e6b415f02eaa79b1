#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "orthospec/preprocessing.hpp"
#include "orthospec/quadrature.hpp"
#include "orthospec/sensing.hpp"
#include "orthospec/spectrum.hpp"

namespace orthospec {

// A small TOML subset: top-level keys, [section] headers, and values that are
// strings, booleans, integers, floats or (possibly multi-line) arrays of those.
struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;

struct ConfigValue {
  std::variant<bool, std::int64_t, double, std::string, ConfigArray> data;
  int line = 0;
};

struct ConfigDocument {
  std::string source;  // file name, for diagnostics
  // section ("" for top level) -> key -> value
  std::map<std::string, std::map<std::string, ConfigValue>> sections;
  std::map<std::string, int> section_lines;  // line of each [header]
};

/// Errors carry "source:line: message".
ConfigDocument parse_config_text(const std::string& text, const std::string& source = "<config>");
ConfigDocument parse_config_file(const std::string& path);

/// "trim:c2=2", "subset:c1=1.5", "star_reg:kappa=0.01",
/// "custom:knots=0/0,1/0.5,4/1". Parameters are separated by ';'.
ProcessingSpec parse_func(const std::string& text);
std::string format_func(const ProcessingSpec& spec);

struct PredictConfig {
  std::vector<std::string> funcs{"star", "trim:c2=2", "subset:c1=1.5", "mm", "star_reg"};
  std::vector<double> delta_grid{2.1, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0};
  std::size_t mu_points = 50;  // psi curves over (0, 1]
  double threshold_delta_max = 50.0;
  bool thresholds = true;

  friend bool operator==(const PredictConfig&, const PredictConfig&) = default;
};

struct SweepConfig {
  std::vector<std::string> ensembles{"partial_dft"};
  std::vector<std::string> funcs{"trim:c2=2", "subset:c1=1.5", "mm", "star_reg"};
  std::vector<double> delta_grid{2.1, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0};
  std::size_t n = 2048;
  std::size_t trials = 10;
  std::size_t haar_n_cap = 2000;
  std::size_t max_iter = 10000;
  double tol = 1e-9;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct PcaepConfig {
  std::string ensemble = "partial_dft";
  std::string func = "star_reg";
  std::size_t n = 16384;
  double delta = 3.0;
  std::optional<double> mu;  // mu_hat when absent
  double alpha0 = 0.2;
  double sigma0 = 1.0;
  std::size_t t_max = 20;
  std::size_t seeds = 1;

  friend bool operator==(const PcaepConfig&, const PcaepConfig&) = default;
};

struct SpectrumConfig {
  std::string ensemble = "haar";
  std::string func = "mm";
  std::size_t n = 288;
  double delta = 5.0;
  std::string branch = "max";
  std::size_t cap = kDenseCap;
  bool with_e = true;

  friend bool operator==(const SpectrumConfig&, const SpectrumConfig&) = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int threads = 0;  // 0: OpenMP default
  QuadratureSpec quadrature;
  PredictConfig predict;
  SweepConfig sweep;
  PcaepConfig pcaep;
  SpectrumConfig spectrum;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Fills defaults for missing keys; unknown sections/keys, wrong types and
/// invalid values are config errors with line numbers.
ExperimentConfig config_from_document(const ConfigDocument& doc);
ExperimentConfig load_config(const std::string& path);

/// Every field, written so that config_from_document(parse(...)) reproduces
/// the config exactly (doubles use the shortest round-trip form).
std::string to_config_text(const ExperimentConfig& cfg);

}  // namespace orthospec
