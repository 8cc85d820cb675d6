#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xlt/corpus/dataset.hpp"
#include "xlt/translate/backend.hpp"

namespace xlt {

struct TranslateOptions {
  /// Requests per backend call.
  std::size_t max_batch = 32;
  /// Chunks in flight at once; forced to 1 for backends that refuse
  /// concurrent requests.
  std::size_t parallelism = 1;
};

/// Translates `texts` from src to tgt in chunks of `max_batch`. The result
/// is positional. Backend errors are re-raised with the global index.
std::vector<std::string> translate_texts(const TranslatorBackend& backend,
                                         const std::vector<std::string>& texts,
                                         const LanguageTag& src, const LanguageTag& tgt,
                                         const DecodingConfig& decoding,
                                         const TranslateOptions& options = {});

/// Sequence-task translation: text_a and text_b are separate requests,
/// labels and ids are kept, language becomes `tgt` and provenance
/// `translated`. NER data goes through label projection instead
/// (see align/transfer.hpp) and is rejected here with TaskMismatch.
Dataset translate_dataset(const TranslatorBackend& backend, const Dataset& dataset,
                          const LanguageTag& src, const LanguageTag& tgt,
                          const DecodingConfig& decoding,
                          const TranslateOptions& options = {});

/// src -> pivot -> final. Provenance becomes `roundtrip` with the pivot
/// recorded; errors carry the hop (1 or 2).
Dataset roundtrip_dataset(const TranslatorBackend& backend, const Dataset& dataset,
                          const LanguageTag& src, const LanguageTag& pivot,
                          const LanguageTag& final_language,
                          const DecodingConfig& decoding,
                          const TranslateOptions& options = {});

/// NER helper: each sentence is sent as its whitespace-joined tokens and
/// the translation is re-tokenized on whitespace.
std::vector<std::vector<std::string>> translate_token_sequences(
    const TranslatorBackend& backend, const std::vector<std::vector<std::string>>& sentences,
    const LanguageTag& src, const LanguageTag& tgt, const DecodingConfig& decoding,
    const TranslateOptions& options = {});

}  // namespace xlt
