#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "occ/data.hpp"
#include "occ/error.hpp"
#include "occ/gridsearch.hpp"
#include "occ/trainer.hpp"

namespace occ::cli {

/// Bad or unknown configuration key. The message names the key.
class ConfigError : public occ::Error {
 public:
  using Error::Error;
};

struct DataSpec {
  std::string path;  // empty when synthetic
  bool synthetic = false;
  std::uint64_t synthSeed = 42;
  std::size_t synthTargets = 500;
  std::size_t synthOutliers = 500;
  std::size_t synthDim = 2;
  double synthRingRadius = 5.0;
  std::optional<std::size_t> labelColumn;  // empty = last column
  std::optional<ClassId> targetClass;      // empty = class of the first row
  double trainFraction = 0.5;
  std::uint64_t splitSeed = 42;
  std::string splitFile;  // optional list of train-partition row indices
};

struct ExperimentConfig {
  DataSpec data;
  TrainConfig train;
  HyperGrid grid;
  SelectionMode selection = SelectionMode::TrainingLoss;
  double validationFraction = 0.2;
  std::string outDir = "occ_out";
};

/// Parses `[section]` + `key = value` text. '#' and ';' start comments.
/// With `validate` false the result may still be incomplete, e.g. so that
/// command-line overrides can be applied first.
ExperimentConfig parseKeyValueConfig(std::string_view text, bool validate = true);
ExperimentConfig parseJsonConfig(const nlohmann::json& doc, bool validate = true);
/// Dispatches on extension: .json -> JSON, anything else -> key-value.
ExperimentConfig loadExperimentConfig(const std::filesystem::path& path, bool validate = true);

/// Cross-field checks; throws ConfigError naming the offending key.
void validateConfig(const ExperimentConfig& cfg);

/// Applies one `section.key = value` assignment.
void applyConfigValue(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Fully resolved configuration, every field explicit.
nlohmann::ordered_json toJson(const ExperimentConfig& cfg);
/// Same content as `section.key = value` lines, for CSV and model headers.
std::vector<std::string> toCommentLines(const ExperimentConfig& cfg);

/// %.17g
std::string formatNumber(double v);

/// Pretty JSON with two-space indent whose floating-point values use
/// formatNumber, so every emitted number carries 17 significant digits.
std::string dumpJson(const nlohmann::ordered_json& doc);

}  // namespace occ::cli
