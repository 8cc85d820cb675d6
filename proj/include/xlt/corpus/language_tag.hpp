#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace xlt {

/// ISO-639-3 language code with an optional ISO-15924 script, rendered as
/// "code_Script" (e.g. "eng_Latn") or just "code".
class LanguageTag {
 public:
  LanguageTag() = default;
  LanguageTag(std::string_view code, std::optional<std::string_view> script = {});

  /// Accepts "eng", "eng_Latn", "ENG" or "eng_latn"; case is normalized.
  static LanguageTag parse(std::string_view rendered);

  const std::string& code() const { return code_; }
  const std::optional<std::string>& script() const { return script_; }

  std::string str() const;

  /// Same language, ignoring the script.
  bool same_language(const LanguageTag& other) const { return code_ == other.code_; }

  auto operator<=>(const LanguageTag&) const = default;
  bool operator==(const LanguageTag&) const = default;

 private:
  std::string code_;
  std::optional<std::string> script_;
};

using LanguageSet = std::set<LanguageTag>;

std::ostream& operator<<(std::ostream& os, const LanguageTag& tag);

}  // namespace xlt

template <>
struct std::hash<xlt::LanguageTag> {
  std::size_t operator()(const xlt::LanguageTag& tag) const noexcept {
    return std::hash<std::string>{}(tag.str());
  }
};
