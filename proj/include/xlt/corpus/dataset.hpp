#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xlt/corpus/language_tag.hpp"

namespace xlt {

enum class TaskKind { NLI, TC, NER };
enum class Split { Train, Validation, Test };
enum class Origin { Clean, Translated, Roundtrip };

std::string_view to_string(TaskKind task);
std::string_view to_string(Split split);
std::string_view to_string(Origin origin);
TaskKind parse_task_kind(std::string_view text);
Split parse_split(std::string_view text);
Origin parse_origin(std::string_view text);

inline bool is_sequence_task(TaskKind task) { return task != TaskKind::NER; }

struct Provenance {
  Origin origin = Origin::Clean;
  std::optional<LanguageTag> pivot;

  bool operator==(const Provenance&) const = default;
};

struct SequenceInstance {
  std::string id;
  std::string text_a;
  std::optional<std::string> text_b;
  std::string label;
  LanguageTag language;
  Provenance provenance;

  bool operator==(const SequenceInstance&) const = default;
};

struct TokenInstance {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
  LanguageTag language;
  Provenance provenance;

  bool operator==(const TokenInstance&) const = default;
};

/// A single split of task data. Exactly one of `sequences` / `tokens` is
/// populated, chosen by `task`. For NER, `label_set` holds entity types.
struct Dataset {
  TaskKind task = TaskKind::TC;
  Split split = Split::Train;
  std::vector<std::string> label_set;
  std::vector<SequenceInstance> sequences;
  std::vector<TokenInstance> tokens;

  std::size_t size() const {
    return is_sequence_task(task) ? sequences.size() : tokens.size();
  }
  bool empty() const { return size() == 0; }

  /// Same task, labels and split with no instances.
  Dataset empty_like() const;

  /// Throws ContractViolation (or LabelOutsideSet) when an invariant fails.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

/// Tag vocabulary of an NER dataset: "O" then B-X, I-X per entity type.
std::vector<std::string> ner_tag_vocabulary(const std::vector<std::string>& entity_types);

/// Appends `label` to `label_set` when not yet present.
void remember_label(std::vector<std::string>& label_set, const std::string& label);

}  // namespace xlt
