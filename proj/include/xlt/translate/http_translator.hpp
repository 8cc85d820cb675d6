#pragma once

#include <string>

#include "xlt/translate/backend.hpp"
#include "xlt/util/http_json.hpp"

namespace xlt {

/// Client for a remote translation service speaking
///
///   GET  /v1/languages -> {"languages": ["eng_Latn", ...], "concurrent": bool}
///   POST /v1/translate  {"src", "tgt", "decoding", "texts": [...]}
///                       -> {"translations": [...]}
///
/// The handshake runs once, at construction. Runs of consecutive requests
/// with the same language pair share one POST.
class HttpTranslator final : public TranslatorBackend {
 public:
  explicit HttpTranslator(std::string base_url, RetryPolicy policy = {});

  LanguageSet supported_languages() const override { return languages_; }
  std::vector<std::string> translate_batch(std::span<const TranslationRequest> requests,
                                           const DecodingConfig& decoding) const override;
  bool accepts_concurrent_requests() const override { return concurrent_; }
  std::string identity() const override { return "http:" + client_.base_url(); }

 private:
  JsonHttpClient client_;
  LanguageSet languages_;
  bool concurrent_ = false;
};

}  // namespace xlt
