#include "xlt/corpus/dataset.hpp"

#include <algorithm>
#include <unordered_set>

#include "xlt/corpus/bio.hpp"
#include "xlt/error.hpp"

namespace xlt {

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::NLI: return "NLI";
    case TaskKind::TC: return "TC";
    case TaskKind::NER: return "NER";
  }
  return "?";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::Clean: return "clean";
    case Origin::Translated: return "translated";
    case Origin::Roundtrip: return "roundtrip";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "NLI" || text == "nli") return TaskKind::NLI;
  if (text == "TC" || text == "tc") return TaskKind::TC;
  if (text == "NER" || text == "ner") return TaskKind::NER;
  fail(ErrorCode::ContractViolation, "unknown task '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "validation" || text == "dev") return Split::Validation;
  if (text == "test") return Split::Test;
  fail(ErrorCode::ContractViolation, "unknown split '" + std::string(text) + "'");
}

Origin parse_origin(std::string_view text) {
  if (text == "clean") return Origin::Clean;
  if (text == "translated") return Origin::Translated;
  if (text == "roundtrip") return Origin::Roundtrip;
  fail(ErrorCode::ContractViolation,
       "unknown provenance '" + std::string(text) + "'");
}

Dataset Dataset::empty_like() const {
  Dataset out;
  out.task = task;
  out.split = split;
  out.label_set = label_set;
  return out;
}

void Dataset::validate() const {
  std::unordered_set<std::string> labels(label_set.begin(), label_set.end());
  if (labels.size() != label_set.size()) {
    fail(ErrorCode::ContractViolation, "label set contains duplicates");
  }
  std::unordered_set<std::string> ids;
  if (is_sequence_task(task)) {
    if (!tokens.empty()) fail(ErrorCode::ContractViolation, "token instances in a sequence dataset");
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      const auto& inst = sequences[i];
      if (!ids.insert(inst.id).second) {
        fail(ErrorCode::ContractViolation, "duplicate instance id '" + inst.id + "'", i);
      }
      if ((task == TaskKind::NLI) != inst.text_b.has_value()) {
        fail(ErrorCode::ContractViolation, "text_b must be present iff the task is NLI", i);
      }
      if (!labels.contains(inst.label)) {
        fail(ErrorCode::LabelOutsideSet, "label '" + inst.label + "' outside the label set", i);
      }
    }
  } else {
    if (!sequences.empty()) fail(ErrorCode::ContractViolation, "sequence instances in an NER dataset");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto& inst = tokens[i];
      if (!ids.insert(inst.id).second) {
        fail(ErrorCode::ContractViolation, "duplicate instance id '" + inst.id + "'", i);
      }
      if (inst.tokens.empty() || inst.tokens.size() != inst.tags.size()) {
        fail(ErrorCode::ContractViolation, "tokens and tags must be equally long and non-empty", i);
      }
      if (!bio::is_valid(inst.tags)) fail(ErrorCode::InvalidBIO, "instance '" + inst.id + "'", i);
      for (const auto& raw : inst.tags) {
        auto tag = *bio::parse_tag(raw);
        if (tag.prefix != bio::Prefix::Outside && !labels.contains(tag.type)) {
          fail(ErrorCode::LabelOutsideSet, "entity type '" + tag.type + "' outside the label set", i);
        }
      }
    }
  }
}

std::vector<std::string> ner_tag_vocabulary(const std::vector<std::string>& entity_types) {
  std::vector<std::string> out{"O"};
  for (const auto& type : entity_types) {
    out.push_back("B-" + type);
    out.push_back("I-" + type);
  }
  return out;
}

void remember_label(std::vector<std::string>& label_set, const std::string& label) {
  if (std::find(label_set.begin(), label_set.end(), label) == label_set.end()) {
    label_set.push_back(label);
  }
}

}  // namespace xlt
