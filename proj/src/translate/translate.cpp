#include "xlt/translate/translate.hpp"

#include <algorithm>
#include <future>

#include "xlt/error.hpp"
#include "xlt/util/text.hpp"

namespace xlt {

namespace {

std::vector<std::string> run_chunk(const TranslatorBackend& backend,
                                   const std::vector<TranslationRequest>& requests,
                                   std::size_t begin, std::size_t end,
                                   const DecodingConfig& decoding) {
  std::span<const TranslationRequest> chunk(requests.data() + begin, end - begin);
  std::vector<std::string> out;
  try {
    out = backend.translate_batch(chunk, decoding);
  } catch (const Error& e) {
    if (e.index()) throw Error(e.code(), e.detail(), begin + *e.index());
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BackendFailure, e.what(), begin);
  }
  if (out.size() != chunk.size()) {
    throw Error(ErrorCode::BackendFailure,
                "backend returned " + std::to_string(out.size()) + " translations for " +
                    std::to_string(chunk.size()) + " requests",
                begin);
  }
  return out;
}

void check_pair(const TranslatorBackend& backend, const LanguageTag& src, const LanguageTag& tgt) {
  const auto supported = backend.supported_languages();
  if (!supports(supported, src)) fail(ErrorCode::UnsupportedLanguage, src.str() + " (" + backend.identity() + ")");
  if (!supports(supported, tgt)) fail(ErrorCode::UnsupportedLanguage, tgt.str() + " (" + backend.identity() + ")");
  if (src == tgt) fail(ErrorCode::ContractViolation, "source and target are both " + src.str());
}

}  // namespace

std::vector<std::string> translate_texts(const TranslatorBackend& backend,
                                         const std::vector<std::string>& texts,
                                         const LanguageTag& src, const LanguageTag& tgt,
                                         const DecodingConfig& decoding,
                                         const TranslateOptions& options) {
  decoding.validate();
  check_pair(backend, src, tgt);
  if (texts.empty()) return {};

  std::vector<TranslationRequest> requests;
  requests.reserve(texts.size());
  for (const auto& t : texts) requests.push_back({t, src, tgt});

  const std::size_t batch = std::max<std::size_t>(1, options.max_batch);
  const std::size_t parallel =
      backend.accepts_concurrent_requests() ? std::max<std::size_t>(1, options.parallelism) : 1;

  std::vector<std::string> out(texts.size());
  std::vector<std::size_t> starts;
  for (std::size_t b = 0; b < texts.size(); b += batch) starts.push_back(b);

  auto store = [&](std::size_t begin, std::vector<std::string> chunk) {
    std::move(chunk.begin(), chunk.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
  };

  if (parallel == 1) {
    for (std::size_t begin : starts) {
      const std::size_t end = std::min(begin + batch, texts.size());
      store(begin, run_chunk(backend, requests, begin, end, decoding));
    }
    return out;
  }

  for (std::size_t wave = 0; wave < starts.size(); wave += parallel) {
    std::vector<std::pair<std::size_t, std::future<std::vector<std::string>>>> inflight;
    for (std::size_t k = wave; k < std::min(wave + parallel, starts.size()); ++k) {
      const std::size_t begin = starts[k];
      const std::size_t end = std::min(begin + batch, texts.size());
      inflight.emplace_back(begin, std::async(std::launch::async, [&, begin, end] {
                              return run_chunk(backend, requests, begin, end, decoding);
                            }));
    }
    // Drain every future before rethrowing so no task outlives `requests`.
    std::exception_ptr first_error;
    for (auto& [begin, future] : inflight) {
      try {
        store(begin, future.get());
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }
  return out;
}

Dataset translate_dataset(const TranslatorBackend& backend, const Dataset& dataset,
                          const LanguageTag& src, const LanguageTag& tgt,
                          const DecodingConfig& decoding, const TranslateOptions& options) {
  if (!is_sequence_task(dataset.task)) {
    fail(ErrorCode::TaskMismatch, "NER data is translated through label projection");
  }
  for (std::size_t i = 0; i < dataset.sequences.size(); ++i) {
    if (!dataset.sequences[i].language.same_language(src)) {
      fail(ErrorCode::ContractViolation,
           "instance '" + dataset.sequences[i].id + "' is " + dataset.sequences[i].language.str() +
               ", expected " + src.str(),
           i);
    }
  }
  check_pair(backend, src, tgt);

  // text_a of every instance, then every text_b, as independent requests.
  std::vector<std::string> texts;
  texts.reserve(dataset.size() * 2);
  for (const auto& inst : dataset.sequences) texts.push_back(inst.text_a);
  const bool pairs = dataset.task == TaskKind::NLI;
  if (pairs) {
    for (const auto& inst : dataset.sequences) texts.push_back(inst.text_b.value_or(""));
  }
  std::vector<std::string> translated;
  try {
    translated = translate_texts(backend, texts, src, tgt, decoding, options);
  } catch (const Error& e) {
    // Map the flat request index back onto the instance.
    if (e.index() && !dataset.empty()) throw Error(e.code(), e.detail(), *e.index() % dataset.size());
    throw;
  }

  Dataset out = dataset.empty_like();
  out.sequences.reserve(dataset.size());
  const std::size_t n = dataset.size();
  for (std::size_t i = 0; i < n; ++i) {
    SequenceInstance inst = dataset.sequences[i];
    inst.text_a = std::move(translated[i]);
    if (pairs) inst.text_b = std::move(translated[n + i]);
    inst.language = tgt;
    inst.provenance = {Origin::Translated, std::nullopt};
    out.sequences.push_back(std::move(inst));
  }
  return out;
}

Dataset roundtrip_dataset(const TranslatorBackend& backend, const Dataset& dataset,
                          const LanguageTag& src, const LanguageTag& pivot,
                          const LanguageTag& final_language, const DecodingConfig& decoding,
                          const TranslateOptions& options) {
  if (pivot == src) fail(ErrorCode::ContractViolation, "pivot equals the source language");
  Dataset there;
  try {
    there = translate_dataset(backend, dataset, src, pivot, decoding, options);
  } catch (const Error& e) {
    throw e.with_hop(1);
  }
  Dataset back;
  try {
    back = translate_dataset(backend, there, pivot, final_language, decoding, options);
  } catch (const Error& e) {
    throw e.with_hop(2);
  }
  for (auto& inst : back.sequences) inst.provenance = {Origin::Roundtrip, pivot};
  return back;
}

std::vector<std::vector<std::string>> translate_token_sequences(
    const TranslatorBackend& backend, const std::vector<std::vector<std::string>>& sentences,
    const LanguageTag& src, const LanguageTag& tgt, const DecodingConfig& decoding,
    const TranslateOptions& options) {
  std::vector<std::string> texts;
  texts.reserve(sentences.size());
  for (const auto& tokens : sentences) texts.push_back(text::join(tokens, " "));
  auto translated = translate_texts(backend, texts, src, tgt, decoding, options);
  std::vector<std::vector<std::string>> out;
  out.reserve(translated.size());
  for (const auto& t : translated) out.push_back(text::split_whitespace(t));
  return out;
}

}  // namespace xlt
