#pragma once

#include "xlt/align/projection.hpp"
#include "xlt/translate/translate.hpp"

namespace xlt {

struct TransferOptions {
  TranslateOptions translate;
  std::size_t align_parallelism = 1;
};

/// Translates NER sentences src -> tgt and projects their tags.
ProjectedDataset translate_and_project(const TranslatorBackend& translator,
                                       const AlignerBackend& aligner, const Dataset& ner,
                                       const LanguageTag& src, const LanguageTag& tgt,
                                       const DecodingConfig& decoding,
                                       const TransferOptions& options = {});

/// src -> pivot -> final with a projection after each hop. The report
/// counts against the original instances: discards of both hops add up.
ProjectedDataset roundtrip_and_project(const TranslatorBackend& translator,
                                       const AlignerBackend& aligner, const Dataset& ner,
                                       const LanguageTag& src, const LanguageTag& pivot,
                                       const LanguageTag& final_language,
                                       const DecodingConfig& decoding,
                                       const TransferOptions& options = {});

/// Sequence data goes through translate_dataset, NER through
/// translate_and_project (the report is empty for sequence data).
ProjectedDataset transfer(const TranslatorBackend& translator, const AlignerBackend* aligner,
                          const Dataset& data, const LanguageTag& src, const LanguageTag& tgt,
                          const DecodingConfig& decoding, const TransferOptions& options = {});

ProjectedDataset transfer_roundtrip(const TranslatorBackend& translator,
                                    const AlignerBackend* aligner, const Dataset& data,
                                    const LanguageTag& src, const LanguageTag& pivot,
                                    const LanguageTag& final_language,
                                    const DecodingConfig& decoding,
                                    const TransferOptions& options = {});

}  // namespace xlt
