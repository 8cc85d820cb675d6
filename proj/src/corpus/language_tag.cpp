#include "xlt/corpus/language_tag.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>

#include "xlt/error.hpp"

namespace xlt {

namespace {

bool all_alpha(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c < 0x80 && std::isalpha(c);
  });
}

}  // namespace

LanguageTag::LanguageTag(std::string_view code,
                         std::optional<std::string_view> script) {
  if (code.size() < 2 || code.size() > 3 || !all_alpha(code)) {
    fail(ErrorCode::ContractViolation,
         "language code must be 2-3 ASCII letters: '" + std::string(code) + "'");
  }
  code_.reserve(code.size());
  for (unsigned char c : code) code_.push_back(static_cast<char>(std::tolower(c)));
  if (script) {
    if (script->size() != 4 || !all_alpha(*script)) {
      fail(ErrorCode::ContractViolation,
           "script must be 4 ASCII letters: '" + std::string(*script) + "'");
    }
    std::string s;
    for (unsigned char c : *script) s.push_back(static_cast<char>(std::tolower(c)));
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    script_ = std::move(s);
  }
}

LanguageTag LanguageTag::parse(std::string_view rendered) {
  const auto underscore = rendered.find('_');
  if (underscore == std::string_view::npos) return LanguageTag(rendered);
  return LanguageTag(rendered.substr(0, underscore),
                     rendered.substr(underscore + 1));
}

std::string LanguageTag::str() const {
  return script_ ? code_ + "_" + *script_ : code_;
}

std::ostream& operator<<(std::ostream& os, const LanguageTag& tag) {
  return os << tag.str();
}

}  // namespace xlt
