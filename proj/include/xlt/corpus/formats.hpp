#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xlt/corpus/dataset.hpp"

namespace xlt {

/// Metadata that the text formats do not carry themselves.
struct ParseOptions {
  LanguageTag language{"eng"};
  Split split = Split::Train;
};

// CoNLL-2003 style column files ------------------------------------------

/// Blank lines separate sentences, column 0 holds the token and `column`
/// the tag. "-DOCSTART-" blocks are skipped and IOB1 tags are rewritten to
/// BIO. Entity types are collected in file order.
Dataset parse_conll(std::string_view text, std::size_t column,
                    const ParseOptions& options = {});

/// Two columns, "token tag", one sentence per block.
std::string write_conll(const Dataset& dataset);

// Tab-separated sequence data --------------------------------------------

/// Column names when `header` is set, zero-based indices ("0", "1", ...)
/// otherwise. A missing `id` column numbers rows from 0.
struct TsvSchema {
  bool header = true;
  std::optional<std::string> id;
  std::string text_a = "text_a";
  std::optional<std::string> text_b;
  std::string label = "label";
  /// When set, labels outside it raise LabelOutsideSet and this becomes
  /// the dataset's label order.
  std::optional<std::vector<std::string>> closed_labels;
};

Dataset parse_sequence_tsv(std::string_view text, const TsvSchema& schema,
                           TaskKind task, const ParseOptions& options = {});

/// Header "id\ttext_a[\ttext_b]\tlabel"; parse back with default_schema(task).
std::string write_sequence_tsv(const Dataset& dataset);
TsvSchema default_schema(TaskKind task);

// JSON lines --------------------------------------------------------------

struct JsonlReadOptions {
  Split split = Split::Train;
  /// Required to type an empty file; checked against every line otherwise.
  std::optional<TaskKind> task;
  /// Label order to adopt; first-seen order when absent.
  std::optional<std::vector<std::string>> label_set;
};

std::string write_jsonl(const Dataset& dataset);
Dataset read_jsonl(std::string_view text, const JsonlReadOptions& options = {});

}  // namespace xlt
