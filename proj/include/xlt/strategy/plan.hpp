#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlt/align/projection.hpp"
#include "xlt/corpus/dataset.hpp"

namespace xlt {

/// One dataset inside a training phase. Weights are always 1.
struct PlanComponent {
  /// "clean", "translated:grn", "roundtrip:grn>eng", ...
  std::string name;
  Dataset data;
  double weight = 1.0;
  /// Present for NER components that went through label projection.
  std::optional<ProjectionReport> projection;
};

using Phase = std::vector<PlanComponent>;

std::size_t phase_size(const Phase& phase);

/// What happens to a raw test instance before a model sees it.
struct TestTransform {
  enum class Kind { None, TranslateTo };
  Kind kind = Kind::None;
  std::optional<LanguageTag> language;

  static TestTransform none() { return {}; }
  static TestTransform translate_to(LanguageTag language) { return {Kind::TranslateTo, std::move(language)}; }

  std::string str() const;
  bool operator==(const TestTransform&) const = default;
};

/// The training recipe and test-time transform of one model.
struct ModelPlan {
  std::string name;
  std::vector<Phase> phases;
  TestTransform transform;
  /// Fixed member seed (seed ensembles); the run seed applies otherwise.
  std::optional<std::int64_t> seed;
};

struct TrainingPlan {
  std::vector<ModelPlan> models;

  std::size_t model_count() const { return models.size(); }
  /// Phases of the first (for single-model plans, the only) model.
  const std::vector<Phase>& phases() const { return models.at(0).phases; }
};

enum class Combine { Single, AverageDistributions };

struct InferencePipeline {
  /// One entry per model, aligned with TrainingPlan::models.
  std::vector<TestTransform> transforms;
  Combine combine = Combine::Single;
  LanguageTag source{"eng"};
  /// Evaluation language -> language used for MT calls (unsupported
  /// targets replaced by their closest supported language).
  std::map<LanguageTag, LanguageTag> mt_language;

  /// The language to translate from/to for an evaluation language.
  LanguageTag mt_for(const LanguageTag& eval_language) const;
};

}  // namespace xlt
