#ifndef GRADBALANCE_CONFIG_HPP_
#define GRADBALANCE_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gradbalance/combiners.hpp"
#include "gradbalance/metrics.hpp"
#include "gradbalance/problems.hpp"
#include "gradbalance/training.hpp"

namespace gradbalance::harness {

// Minimal TOML-style reader: [section], key = value, where value is a
// number, "string", true/false, or a flat [array]. Enough for experiment
// files; unknown keys are rejected at the typed layer.
struct ConfigValue {
  enum class Type { kNumber, kString, kBool, kNumberList, kStringList };
  Type type = Type::kNumber;
  double number = 0.0;
  std::string str;
  bool boolean = false;
  std::vector<double> numbers;
  std::vector<std::string> strings;
};

using ConfigMap = std::map<std::string, ConfigValue>;  // "section.key"

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

struct ExperimentConfig {
  problems::DatasetSpec dataset;
  problems::ModelConfig model;
  problems::TrainConfig train;
  combiners::CombinerConfig combiner;

  double corrupt_flip_p = 0.0;
  double corrupt_gauss_sigma = 0.0;
  std::string subsample_mode = "none";  // none|groups|within_groups
  double subsample_amount = 1.0;

  std::vector<std::uint64_t> seeds{0};
  std::string out_dir = "out";
  int jobs = 1;

  std::optional<metrics::BaselineTable> fixed_baseline;

  // canonical serialization (sorted section.key = value lines)
  std::string canonical() const;
  std::string hash() const;  // FNV-1a 64 over canonical(), hex
};

ExperimentConfig experiment_from_map(const ConfigMap& map);
ExperimentConfig load_experiment(const std::string& path);

// Build the fully corrupted/subsampled dataset for one seed.
problems::SyntheticDataset materialize_dataset(const ExperimentConfig& cfg,
                                               std::uint64_t seed);

}  // namespace gradbalance::harness

#endif  // GRADBALANCE_CONFIG_HPP_
