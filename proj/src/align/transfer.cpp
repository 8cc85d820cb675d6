#include "xlt/align/transfer.hpp"

#include "xlt/error.hpp"

namespace xlt {

namespace {

std::vector<std::vector<std::string>> sentences_of(const Dataset& ner) {
  std::vector<std::vector<std::string>> out;
  out.reserve(ner.size());
  for (const auto& inst : ner.tokens) out.push_back(inst.tokens);
  return out;
}

const AlignerBackend& require(const AlignerBackend* aligner) {
  if (!aligner) fail(ErrorCode::ContractViolation, "NER transfer needs an aligner backend");
  return *aligner;
}

}  // namespace

ProjectedDataset translate_and_project(const TranslatorBackend& translator,
                                       const AlignerBackend& aligner, const Dataset& ner,
                                       const LanguageTag& src, const LanguageTag& tgt,
                                       const DecodingConfig& decoding,
                                       const TransferOptions& options) {
  if (ner.task != TaskKind::NER) fail(ErrorCode::TaskMismatch, "label projection needs NER data");
  auto translated = translate_token_sequences(translator, sentences_of(ner), src, tgt, decoding,
                                              options.translate);
  return project_dataset(ner, translated, aligner, {tgt, {Origin::Translated, std::nullopt}},
                         options.align_parallelism);
}

ProjectedDataset roundtrip_and_project(const TranslatorBackend& translator,
                                       const AlignerBackend& aligner, const Dataset& ner,
                                       const LanguageTag& src, const LanguageTag& pivot,
                                       const LanguageTag& final_language,
                                       const DecodingConfig& decoding,
                                       const TransferOptions& options) {
  if (pivot == src) fail(ErrorCode::ContractViolation, "pivot equals the source language");
  ProjectedDataset there;
  try {
    there = translate_and_project(translator, aligner, ner, src, pivot, decoding, options);
  } catch (const Error& e) {
    throw e.with_hop(1);
  }
  ProjectedDataset back;
  try {
    back = translate_and_project(translator, aligner, there.dataset, pivot, final_language,
                                 decoding, options);
  } catch (const Error& e) {
    throw e.with_hop(2);
  }
  for (auto& inst : back.dataset.tokens) inst.provenance = {Origin::Roundtrip, pivot};

  ProjectionReport combined;
  combined.total = there.report.total;
  combined.retained = back.report.retained;
  combined.discarded_no_link = there.report.discarded_no_link + back.report.discarded_no_link;
  combined.discarded_span_conflict =
      there.report.discarded_span_conflict + back.report.discarded_span_conflict;
  combined.absorbed_tokens = there.report.absorbed_tokens + back.report.absorbed_tokens;
  back.report = combined;
  return back;
}

ProjectedDataset transfer(const TranslatorBackend& translator, const AlignerBackend* aligner,
                          const Dataset& data, const LanguageTag& src, const LanguageTag& tgt,
                          const DecodingConfig& decoding, const TransferOptions& options) {
  if (data.task == TaskKind::NER) {
    return translate_and_project(translator, require(aligner), data, src, tgt, decoding, options);
  }
  return {translate_dataset(translator, data, src, tgt, decoding, options.translate), {}};
}

ProjectedDataset transfer_roundtrip(const TranslatorBackend& translator,
                                    const AlignerBackend* aligner, const Dataset& data,
                                    const LanguageTag& src, const LanguageTag& pivot,
                                    const LanguageTag& final_language,
                                    const DecodingConfig& decoding,
                                    const TransferOptions& options) {
  if (data.task == TaskKind::NER) {
    return roundtrip_and_project(translator, require(aligner), data, src, pivot, final_language,
                                 decoding, options);
  }
  return {roundtrip_dataset(translator, data, src, pivot, final_language, decoding, options.translate),
          {}};
}

}  // namespace xlt
