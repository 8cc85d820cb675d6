#include "xlt/translate/backend.hpp"

#include <numeric>

#include "xlt/error.hpp"
#include "xlt/util/text.hpp"

namespace xlt {

std::optional<LanguageTag> resolve_language(const LanguageSet& supported,
                                            const LanguageTag& tag) {
  if (supported.contains(tag)) return tag;
  if (tag.script()) return std::nullopt;
  for (const auto& candidate : supported) {
    if (candidate.same_language(tag)) return candidate;
  }
  return std::nullopt;
}

bool supports(const LanguageSet& supported, const LanguageTag& tag) {
  return resolve_language(supported, tag).has_value();
}

namespace {

void check_languages(const LanguageSet& supported, std::span<const TranslationRequest> requests) {
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    if (!supports(supported, r.src)) {
      fail(ErrorCode::UnsupportedLanguage, "source language " + r.src.str(), i);
    }
    if (!supports(supported, r.tgt)) {
      fail(ErrorCode::UnsupportedLanguage, "target language " + r.tgt.str(), i);
    }
  }
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace

// Identity -----------------------------------------------------------------

IdentityTranslator::IdentityTranslator(LanguageSet languages) : languages_(std::move(languages)) {}

std::vector<std::string> IdentityTranslator::translate_batch(
    std::span<const TranslationRequest> requests, const DecodingConfig& decoding) const {
  decoding.validate();
  check_languages(languages_, requests);
  std::vector<std::string> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(r.text);
  return out;
}

std::vector<std::size_t> IdentityTranslator::permutation(std::size_t n) { return iota(n); }

// Reversal -----------------------------------------------------------------

ReversalTranslator::ReversalTranslator(LanguageSet languages) : languages_(std::move(languages)) {}

std::vector<std::string> ReversalTranslator::translate_batch(
    std::span<const TranslationRequest> requests, const DecodingConfig& decoding) const {
  decoding.validate();
  check_languages(languages_, requests);
  std::vector<std::string> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    auto tokens = text::split_whitespace(r.text);
    std::reverse(tokens.begin(), tokens.end());
    out.push_back(text::join(tokens, " "));
  }
  return out;
}

std::vector<std::size_t> ReversalTranslator::permutation(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = n - 1 - i;
  return out;
}

// Dictionary ---------------------------------------------------------------

DictionaryTranslator::DictionaryTranslator(std::map<LanguagePair, Lexicon> lexicons,
                                           std::string identity)
    : lexicons_(std::move(lexicons)), identity_(std::move(identity)) {}

DictionaryTranslator DictionaryTranslator::from_json(const nlohmann::json& j, std::string identity) {
  if (!j.is_object()) fail(ErrorCode::ConfigInvalid, "lexicon file must be a JSON object");
  std::map<LanguagePair, Lexicon> lexicons;
  for (const auto& [key, entries] : j.items()) {
    const auto dash = key.find('-');
    if (dash == std::string::npos) {
      fail(ErrorCode::ConfigInvalid, "lexicon key '" + key + "' is not 'src-tgt'");
    }
    LanguagePair pair{LanguageTag::parse(key.substr(0, dash)), LanguageTag::parse(key.substr(dash + 1))};
    Lexicon lexicon;
    for (const auto& [word, translation] : entries.items()) {
      lexicon.emplace(word, translation.get<std::string>());
    }
    lexicons.emplace(std::move(pair), std::move(lexicon));
  }
  return DictionaryTranslator(std::move(lexicons), std::move(identity));
}

LanguageSet DictionaryTranslator::supported_languages() const {
  LanguageSet out;
  for (const auto& [pair, lexicon] : lexicons_) {
    out.insert(pair.first);
    out.insert(pair.second);
  }
  return out;
}

std::vector<std::string> DictionaryTranslator::translate_batch(
    std::span<const TranslationRequest> requests, const DecodingConfig& decoding) const {
  decoding.validate();
  check_languages(supported_languages(), requests);
  std::vector<std::string> out;
  out.reserve(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    auto it = lexicons_.find({r.src, r.tgt});
    if (it == lexicons_.end()) {
      // Script-less requests may address a pair declared with scripts.
      for (auto candidate = lexicons_.begin(); candidate != lexicons_.end(); ++candidate) {
        if (candidate->first.first.same_language(r.src) &&
            candidate->first.second.same_language(r.tgt)) {
          it = candidate;
          break;
        }
      }
    }
    if (it == lexicons_.end()) {
      fail(ErrorCode::UndeclaredPair, r.src.str() + "->" + r.tgt.str(), i);
    }
    auto tokens = text::split_whitespace(r.text);
    for (auto& token : tokens) {
      auto hit = it->second.find(token);
      if (hit != it->second.end()) token = hit->second;
    }
    out.push_back(text::join(tokens, " "));
  }
  return out;
}

std::vector<std::size_t> DictionaryTranslator::permutation(std::size_t n) { return iota(n); }

}  // namespace xlt
