#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlt/corpus/formats.hpp"
#include "xlt/model/model.hpp"
#include "xlt/selection/selection.hpp"
#include "xlt/strategy/strategy.hpp"

namespace xlt::cli {

enum class DataFormat { Tsv, Conll, Jsonl };

/// One data file: {"path", "format": "tsv"|"conll"|"jsonl", "language",
/// "column" (CoNLL tag column, default 1), "schema" (TSV columns)}.
struct DataSource {
  std::filesystem::path path;
  DataFormat format = DataFormat::Tsv;
  LanguageTag language{"eng"};
  std::size_t column = 1;
  TsvSchema schema;
};

/// Backend specs: "mock:identity", "mock:reverse", "mock:dict:<file>",
/// "http:<url>". Only the "mock"/"http" prefix matters for the model.
struct BackendChoice {
  std::string mt = "mock:identity";
  std::string align = "mock:identity";
  std::string model = "mock:desk";
};

/// A run configuration. Relative paths resolve against the config file's
/// directory; "${VAR}" anywhere in a string is replaced by the environment
/// variable VAR.
struct RunConfig {
  std::string name = "run";
  TaskKind task = TaskKind::TC;
  StrategySpec strategy;

  DataSource source_train;
  std::optional<DataSource> source_validation;
  std::map<LanguageTag, DataSource> target_test;
  std::map<LanguageTag, DataSource> target_validation;

  BackendChoice backends;
  Hyperparameters hyper;
  double checkpoint_fraction = 0.1;
  /// Validation variants to select with; the report uses `select_by`.
  std::vector<ValidationVariant> selection{ValidationVariant::ValSrc};
  ValidationVariant select_by = ValidationVariant::ValSrc;
  std::optional<std::filesystem::path> typology_csv;
  /// Overrides the translator's advertised languages for mock backends.
  std::optional<LanguageSet> supported;
  std::vector<std::int64_t> run_seeds{1, 2, 3};
  std::size_t feature_dimension = std::size_t{1} << 15;
  std::filesystem::path runs_dir = "runs";
  std::size_t max_batch = 32;

  /// The document the config was read from, after interpolation.
  nlohmann::json raw;
  std::filesystem::path base_dir;
};

/// Replaces every "${VAR}" by the variable's value. Throws ConfigInvalid
/// for unset variables.
std::string interpolate_env(const std::string& text);

/// Errors: ConfigInvalid for unknown keys, wrong types or inconsistent
/// settings.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Reads a data source as the given split of the run's task.
Dataset load_source(const DataSource& source, TaskKind task, Split split);

}  // namespace xlt::cli
