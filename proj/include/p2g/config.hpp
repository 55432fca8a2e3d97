#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "p2g/cem.hpp"
#include "p2g/data.hpp"
#include "p2g/dqn.hpp"
#include "p2g/env.hpp"
#include "p2g/oracle.hpp"
#include "p2g/ppo.hpp"
#include "p2g/shaping.hpp"

namespace p2g {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataSource {
  enum class Kind { Cs1, Cs2, Csv };
  Kind kind = Kind::Cs1;
  std::uint64_t seed = 0;            // generator seed
  std::filesystem::path csv_path;    // resolved against the config file's directory
  GeneratorConfig generator;
};

struct OracleSettings {
  DpGrid grid;
  std::size_t max_horizon = 336;  // longer instances need --force
};

/// Everything one experiment needs. Read from JSON; every key except the
/// required ones falls back to the defaults of the corresponding module.
struct ExperimentConfig {
  std::string name = "experiment";
  DataSource data;
  PlantParams plant;
  EnvConfig env;
  ShapingConfig shaping;
  DqnConfig dqn;
  PpoConfig ppo;
  CemConfig cem;
  OracleSettings oracle;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;  // relative to the working directory

  /// Throws ConfigError if any module rejects its section.
  void validate() const;
};

/// Parses JSON text. Unknown keys, wrong types and missing required keys
/// (`data`, `seeds`, `output_dir`) raise ConfigError naming the key path.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved config; parse_config(to_json_text(c)) reproduces c.
std::string to_json_text(const ExperimentConfig& config);

/// Generates or loads the configured episode. Throws DataError.
EpisodeInstance load_instance(const ExperimentConfig& config);

/// Git blob hash of the instance in its canonical CSV form.
std::string instance_hash(const EpisodeInstance& instance);

}  // namespace p2g
