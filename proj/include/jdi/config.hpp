#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jdi/model.hpp"
#include "jdi/verifier.hpp"

namespace jdi {

struct MonteCarloConfig {
  std::size_t paths = 100000;
  double step_dt = 1e-3;
  std::uint64_t seed = 20240521;
  std::size_t workers = 0;
  std::size_t window = 200;  // pooled increments per path for KM estimation
  std::size_t draws = 1000000;
  double lemma_dt = 0.01;
  double probe_x = 0.0;
};

struct KmConfig {
  int bins = 8;
  int max_order = 3;
};

struct ExperimentEntry {
  IdentityId id;
  std::string model;  // key into RunConfig::models
  Scenario scenario;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv"};
  bool wants(std::string_view format) const;
};

struct RunConfig {
  std::string main_model;                     // the channel section's model
  std::map<std::string, ModelConfig> models;  // main model plus the optional models section
  Grid grid{-12.0, 12.0, 1024};
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 1e-3;
  std::vector<double> record;
  int series_order = 4;
  MonteCarloConfig monte_carlo;
  KmConfig km;
  std::map<IdentityId, double> tolerances;
  std::vector<ExperimentEntry> experiments;
  OutputConfig output;

  const ModelConfig& model_config(const std::string& name) const;
};

/// Parses and schema-checks a YAML run configuration. Unknown keys throw ConfigError naming the key path.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Builds the verification suite; every named model is validated first.
std::vector<SuiteEntry> suite_entries(const RunConfig& config);

}  // namespace jdi
