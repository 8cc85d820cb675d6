#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xlt/align/transfer.hpp"
#include "xlt/model/ensemble.hpp"
#include "xlt/model/model.hpp"
#include "xlt/strategy/strategy.hpp"

namespace xlt {

enum class ValidationVariant { ValSrc, ValMTTrg, ValTrg };

std::string_view to_string(ValidationVariant variant);
ValidationVariant parse_validation_variant(std::string_view text);
const std::vector<ValidationVariant>& all_validation_variants();

struct ValidationResources {
  LanguageTag source{"eng"};
  Dataset source_validation;
  /// Oracle target-language validation data, per evaluation language.
  std::map<LanguageTag, Dataset> target_validation;
  const TranslatorBackend* translator = nullptr;
  /// NER only.
  const AlignerBackend* aligner = nullptr;
  DecodingConfig decoding;
  TransferOptions transfer;
  /// Evaluation language -> language used for MT calls.
  std::map<LanguageTag, LanguageTag> mt_language;

  LanguageTag mt_for(const LanguageTag& target) const;
};

/// The validation set a single model is scored on, already in the language
/// that model reads.
///
///   ValSrc    source validation unchanged (any family)
///   ValMTTrg  TTrain/ZeroShot: source validation translated src -> target
///             TTest/RTT: source validation roundtripped src -> target -> src
///   ValTrg    TTrain/ZeroShot: oracle target validation unchanged
///             TTest/RTT: oracle target validation translated target -> src
///
/// NER data is label-projected wherever it is translated; the projection
/// report is written to `report` when given.
/// Errors: MissingOracleValidation; translation/projection errors propagate.
Dataset build_validation(ValidationVariant variant, Family family,
                         const ValidationResources& resources, const LanguageTag& target,
                         ProjectionReport* report = nullptr);

/// Validation data in the evaluation language, before any test transform
/// (ValSrc: source validation; ValMTTrg: src -> target; ValTrg: oracle).
/// Used for ensembles, whose members apply their own transforms.
Dataset raw_validation(ValidationVariant variant, const ValidationResources& resources,
                       const LanguageTag& target);

using MetricSeries = std::vector<std::pair<double, double>>;

/// Fraction with the highest score; ties go to the earliest fraction.
/// Errors: EmptySeries; ContractViolation for non-finite scores.
double select_checkpoint(const MetricSeries& series);

/// Task metric of every checkpoint on `validation` (no test transform).
MetricSeries score_series(const TaskModel& model, const CheckpointSeries& series,
                          const Dataset& validation, std::size_t parallelism = 1);

struct SelectionRecord {
  ValidationVariant variant = ValidationVariant::ValSrc;
  LanguageTag target;
  double chosen_fraction = 0.0;
  double score = 0.0;
  MetricSeries series;
};

nlohmann::json to_json(const SelectionRecord& record);

SelectionRecord select_from_series(ValidationVariant variant, const LanguageTag& target,
                                   MetricSeries series);

}  // namespace xlt
