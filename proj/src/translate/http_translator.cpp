#include "xlt/translate/http_translator.hpp"

#include "xlt/error.hpp"

namespace xlt {

HttpTranslator::HttpTranslator(std::string base_url, RetryPolicy policy)
    : client_(std::move(base_url), policy) {
  const auto reply = client_.get("/v1/languages");
  try {
    for (const auto& lang : reply.at("languages")) {
      languages_.insert(LanguageTag::parse(lang.get<std::string>()));
    }
    concurrent_ = reply.value("concurrent", false);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BackendFailure, "malformed /v1/languages reply: " + std::string(e.what()));
  } catch (const Error& e) {
    fail(ErrorCode::BackendFailure, "malformed /v1/languages reply: " + e.detail());
  }
}

std::vector<std::string> HttpTranslator::translate_batch(
    std::span<const TranslationRequest> requests, const DecodingConfig& decoding) const {
  decoding.validate();
  std::vector<std::string> out;
  out.reserve(requests.size());
  std::size_t begin = 0;
  while (begin < requests.size()) {
    const auto& head = requests[begin];
    auto src = resolve_language(languages_, head.src);
    auto tgt = resolve_language(languages_, head.tgt);
    if (!src) fail(ErrorCode::UnsupportedLanguage, head.src.str(), begin);
    if (!tgt) fail(ErrorCode::UnsupportedLanguage, head.tgt.str(), begin);

    std::size_t end = begin;
    nlohmann::json texts = nlohmann::json::array();
    while (end < requests.size() && requests[end].src == head.src && requests[end].tgt == head.tgt) {
      texts.push_back(requests[end].text);
      ++end;
    }
    nlohmann::json body{{"src", src->str()},
                        {"tgt", tgt->str()},
                        {"decoding", to_json(decoding)},
                        {"texts", std::move(texts)}};
    nlohmann::json reply;
    try {
      reply = client_.post("/v1/translate", body);
    } catch (const Error& e) {
      if (e.index()) throw Error(e.code(), e.detail(), begin + *e.index());
      throw;
    }
    const auto& translations = reply.contains("translations") ? reply["translations"] : nlohmann::json();
    if (!translations.is_array() || translations.size() != end - begin) {
      fail(ErrorCode::BackendFailure, "reply lacks one translation per text", begin);
    }
    for (const auto& t : translations) {
      if (!t.is_string()) fail(ErrorCode::BackendFailure, "non-string translation", begin);
      out.push_back(t.get<std::string>());
    }
    begin = end;
  }
  return out;
}

}  // namespace xlt
