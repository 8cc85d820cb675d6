#include "xlt/model/ensemble.hpp"

#include <algorithm>

#include "xlt/error.hpp"

namespace xlt {

namespace {

const TranslatorBackend& require_translator(const InferenceContext& context) {
  if (!context.translator) fail(ErrorCode::ContractViolation, "test transform needs a translator");
  return *context.translator;
}

std::optional<LanguageTag> data_language(const Dataset& raw) {
  if (!raw.sequences.empty()) return raw.sequences.front().language;
  if (!raw.tokens.empty()) return raw.tokens.front().language;
  return std::nullopt;
}

std::vector<Prediction> back_project(const TaskModel& model, const Checkpoint& checkpoint,
                                     const Dataset& raw,
                                     const std::vector<std::vector<std::string>>& translated,
                                     const LanguageTag& target, const InferenceContext& context) {
  if (!context.aligner) fail(ErrorCode::ContractViolation, "NER test transform needs an aligner");
  const auto& labels = checkpoint.state->labels();
  const auto o = std::find(labels.begin(), labels.end(), "O");
  if (o == labels.end()) fail(ErrorCode::LabelOrderMismatch, "NER model without an O tag");
  const std::size_t o_index = static_cast<std::size_t>(o - labels.begin());

  std::vector<Prediction> out;
  out.reserve(raw.tokens.size());
  for (std::size_t i = 0; i < raw.tokens.size(); ++i) {
    const auto& inst = raw.tokens[i];
    Prediction p(inst.tokens.size(), Distribution::one_hot(labels.size(), o_index));
    if (!translated[i].empty() && !inst.tokens.empty()) {
      TokenInstance t{inst.id, translated[i], std::vector<std::string>(translated[i].size(), "O"),
                      target, {Origin::Translated, std::nullopt}};
      const auto token_dists = model.predict_token_proba(checkpoint, t);
      const auto links = context.aligner->align(inst.tokens, translated[i]);
      for (std::size_t j = 0; j < inst.tokens.size(); ++j) {
        const auto targets = links.targets_of(j);
        if (targets.empty()) continue;
        std::vector<Distribution> linked;
        for (auto k : targets) linked.push_back(token_dists.at(k));
        p[j] = average(linked);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<Prediction> transformed_predictions(const TaskModel& model,
                                                const Checkpoint& checkpoint,
                                                const TestTransform& transform,
                                                const Dataset& raw,
                                                const InferenceContext& context) {
  if (transform.kind == TestTransform::Kind::None || raw.empty()) {
    return model.predict_dataset(checkpoint, raw);
  }
  const LanguageTag& target = *transform.language;
  const LanguageTag src = context.mt_source ? *context.mt_source : *data_language(raw);
  if (src.same_language(target)) return model.predict_dataset(checkpoint, raw);

  const auto& translator = require_translator(context);
  if (raw.task == TaskKind::NER) {
    std::vector<std::vector<std::string>> sentences;
    sentences.reserve(raw.tokens.size());
    for (const auto& inst : raw.tokens) sentences.push_back(inst.tokens);
    const auto translated = translate_token_sequences(translator, sentences, src, target,
                                                      context.decoding, context.translate);
    return back_project(model, checkpoint, raw, translated, target, context);
  }
  Dataset relabeled = raw;
  for (auto& inst : relabeled.sequences) inst.language = src;
  const Dataset translated =
      translate_dataset(translator, relabeled, src, target, context.decoding, context.translate);
  return model.predict_dataset(checkpoint, translated);
}

std::vector<Prediction> ensemble_predict_dataset(const std::vector<EnsembleMember>& members,
                                                 const Dataset& raw,
                                                 const InferenceContext& context) {
  if (members.empty()) fail(ErrorCode::Empty, "ensemble without members");
  const auto& labels = members.front().checkpoint.state->labels();
  for (const auto& m : members) {
    if (!m.model || !m.checkpoint.state) fail(ErrorCode::ContractViolation, "incomplete ensemble member");
    if (m.checkpoint.state->labels() != labels) {
      fail(ErrorCode::LabelOrderMismatch, "ensemble members disagree on label order");
    }
  }
  std::vector<std::vector<Prediction>> per_member;
  per_member.reserve(members.size());
  for (const auto& m : members) {
    per_member.push_back(transformed_predictions(*m.model, m.checkpoint, m.transform, raw, context));
  }
  std::vector<Prediction> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t positions = per_member.front()[i].size();
    for (std::size_t t = 0; t < positions; ++t) {
      std::vector<Distribution> column;
      column.reserve(members.size());
      for (const auto& preds : per_member) {
        if (preds[i].size() != positions) {
          fail(ErrorCode::LengthMismatch, "members predicted different token counts", i);
        }
        column.push_back(preds[i][t]);
      }
      out[i].push_back(average(column));
    }
  }
  return out;
}

Distribution ensemble_predict(const std::vector<EnsembleMember>& members,
                              const SequenceInstance& raw_instance,
                              const InferenceContext& context) {
  if (members.empty()) fail(ErrorCode::Empty, "ensemble without members");
  Dataset raw;
  raw.task = members.front().checkpoint.state->task();
  if (!is_sequence_task(raw.task)) fail(ErrorCode::TaskMismatch, "NER ensemble given a sequence instance");
  raw.split = Split::Test;
  raw.sequences.push_back(raw_instance);
  return ensemble_predict_dataset(members, raw, context).front().front();
}

std::vector<Distribution> ensemble_predict(const std::vector<EnsembleMember>& members,
                                           const TokenInstance& raw_instance,
                                           const InferenceContext& context) {
  if (members.empty()) fail(ErrorCode::Empty, "ensemble without members");
  Dataset raw;
  raw.task = TaskKind::NER;
  if (members.front().checkpoint.state->task() != TaskKind::NER) {
    fail(ErrorCode::TaskMismatch, "sequence ensemble given a token instance");
  }
  raw.split = Split::Test;
  raw.tokens.push_back(raw_instance);
  return ensemble_predict_dataset(members, raw, context).front();
}

}  // namespace xlt
