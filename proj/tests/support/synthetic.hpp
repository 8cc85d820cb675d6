#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "xlt/corpus/dataset.hpp"
#include "xlt/translate/backend.hpp"

namespace xlt::testing {

/// A toy task in a source language and a made-up target language whose
/// words share no character trigrams with the source words. The target
/// data are exact dictionary translations of fresh source sentences.
struct SyntheticTask {
  LanguageTag source{"eng"};
  LanguageTag target{"grn"};
  Dataset source_train;
  Dataset source_validation;
  Dataset source_test;
  Dataset target_validation;
  Dataset target_test;
  /// source -> target and back, word for word.
  DictionaryTranslator::Lexicon lexicon;

  DictionaryTranslator translator() const;
  /// {"eng-grn": {...}, "grn-eng": {...}}
  nlohmann::json lexicon_json() const;
};

struct SyntheticSizes {
  std::size_t train = 500;
  std::size_t validation = 100;
  std::size_t test = 100;
};

/// TC: "neg"/"pos" from class words. NLI: "entailment" when the hypothesis
/// words all occur in the premise, "neutral" otherwise. NER: PER and LOC
/// spans among filler words.
SyntheticTask make_synthetic_task(TaskKind task, SyntheticSizes sizes = {},
                                  std::uint64_t seed = 1);

/// Writes the task as files a run config can point to: train/validation
/// and test.<tgt>/validation.<tgt> (TSV, or CoNLL for NER) plus
/// lexicon.json. Returns the "data" section of a config using them.
nlohmann::json write_task_files(const SyntheticTask& task, const std::string& dir);

/// `n` distinct TC instances in `language` with labels from {"neg", "pos"}.
Dataset make_tc_dataset(std::size_t n, std::uint64_t seed, LanguageTag language = LanguageTag("eng"));

/// `n` distinct NER sentences (at most `max_tokens` tokens, 0-2 entities).
Dataset make_ner_dataset(std::size_t n, std::uint64_t seed, LanguageTag language = LanguageTag("eng"),
                         std::size_t max_tokens = 9);

}  // namespace xlt::testing
