#pragma once

#include <optional>
#include <vector>

#include "xlt/align/aligner.hpp"
#include "xlt/model/model.hpp"
#include "xlt/translate/translate.hpp"

namespace xlt {

struct EnsembleMember {
  const TaskModel* model = nullptr;
  Checkpoint checkpoint;
  TestTransform transform;
};

/// Backends and settings for test-time transforms.
struct InferenceContext {
  const TranslatorBackend* translator = nullptr;
  /// NER only: links raw tokens to translated tokens for back-projection.
  const AlignerBackend* aligner = nullptr;
  DecodingConfig decoding;
  TranslateOptions translate;
  /// Language the raw test text is sent to MT as; the closest supported
  /// language when the evaluation language is unsupported. Defaults to
  /// the instances' own language.
  std::optional<LanguageTag> mt_source;
};

/// Predictions of one model on raw test data after its transform.
///
/// translate_to(L) translates the instances into L first (skipped when they
/// are already in L). For NER, the model tags the translation and every raw
/// token receives the mean distribution of the translated tokens it is
/// aligned to, or a one-hot "O" when it has no link.
std::vector<Prediction> transformed_predictions(const TaskModel& model,
                                                const Checkpoint& checkpoint,
                                                const TestTransform& transform,
                                                const Dataset& raw,
                                                const InferenceContext& context);

/// Arithmetic mean of the members' distributions, instance by instance.
/// Errors: Empty, LabelOrderMismatch; translation errors propagate.
std::vector<Prediction> ensemble_predict_dataset(const std::vector<EnsembleMember>& members,
                                                 const Dataset& raw,
                                                 const InferenceContext& context);

Distribution ensemble_predict(const std::vector<EnsembleMember>& members,
                              const SequenceInstance& raw_instance,
                              const InferenceContext& context);

std::vector<Distribution> ensemble_predict(const std::vector<EnsembleMember>& members,
                                           const TokenInstance& raw_instance,
                                           const InferenceContext& context);

}  // namespace xlt
