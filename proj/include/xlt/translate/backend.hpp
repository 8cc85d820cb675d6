#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xlt/corpus/language_tag.hpp"
#include "xlt/translate/decoding.hpp"

namespace xlt {

struct TranslationRequest {
  std::string text;
  LanguageTag src;
  LanguageTag tgt;
};

/// Maps source token i to target position `result[i]` for a sentence of n
/// tokens. Mock translators export theirs so an oracle aligner can use it.
using TokenPermutation = std::vector<std::size_t> (*)(std::size_t n);

class TranslatorBackend {
 public:
  virtual ~TranslatorBackend() = default;

  virtual LanguageSet supported_languages() const = 0;

  /// output[i] answers requests[i]. Failures throw BackendFailure with the
  /// offending request index, or UnsupportedLanguage.
  virtual std::vector<std::string> translate_batch(
      std::span<const TranslationRequest> requests,
      const DecodingConfig& decoding) const = 0;

  virtual bool accepts_concurrent_requests() const { return true; }

  /// Stable description recorded in run manifests.
  virtual std::string identity() const = 0;
};

/// True when `tag` is in `supported`; a script-less tag matches any script
/// of the same language.
bool supports(const LanguageSet& supported, const LanguageTag& tag);

/// The member of `supported` that `tag` refers to, if any.
std::optional<LanguageTag> resolve_language(const LanguageSet& supported,
                                            const LanguageTag& tag);

// Mock backends --------------------------------------------------------------

/// Returns every text unchanged.
class IdentityTranslator final : public TranslatorBackend {
 public:
  explicit IdentityTranslator(LanguageSet languages);

  LanguageSet supported_languages() const override { return languages_; }
  std::vector<std::string> translate_batch(std::span<const TranslationRequest> requests,
                                           const DecodingConfig& decoding) const override;
  std::string identity() const override { return "mock:identity"; }

  static std::vector<std::size_t> permutation(std::size_t n);

 private:
  LanguageSet languages_;
};

/// Reverses whitespace token order. Applying it twice is the identity.
class ReversalTranslator final : public TranslatorBackend {
 public:
  explicit ReversalTranslator(LanguageSet languages);

  LanguageSet supported_languages() const override { return languages_; }
  std::vector<std::string> translate_batch(std::span<const TranslationRequest> requests,
                                           const DecodingConfig& decoding) const override;
  std::string identity() const override { return "mock:reverse"; }

  static std::vector<std::size_t> permutation(std::size_t n);

 private:
  LanguageSet languages_;
};

/// Word-for-word lexicon lookup per declared (src, tgt) pair. Unknown words
/// pass through; output is the whitespace-joined token list.
class DictionaryTranslator final : public TranslatorBackend {
 public:
  using Lexicon = std::map<std::string, std::string>;
  using LanguagePair = std::pair<LanguageTag, LanguageTag>;

  explicit DictionaryTranslator(std::map<LanguagePair, Lexicon> lexicons,
                                std::string identity = "mock:dict");

  /// {"eng-grn": {"cat": "jagua", ...}, ...}
  static DictionaryTranslator from_json(const nlohmann::json& j, std::string identity = "mock:dict");

  LanguageSet supported_languages() const override;
  std::vector<std::string> translate_batch(std::span<const TranslationRequest> requests,
                                           const DecodingConfig& decoding) const override;
  std::string identity() const override { return identity_; }

  static std::vector<std::size_t> permutation(std::size_t n);

  const std::map<LanguagePair, Lexicon>& lexicons() const { return lexicons_; }

 private:
  std::map<LanguagePair, Lexicon> lexicons_;
  std::string identity_;
};

}  // namespace xlt
