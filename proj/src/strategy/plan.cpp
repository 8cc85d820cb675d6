#include "xlt/strategy/plan.hpp"

namespace xlt {

std::size_t phase_size(const Phase& phase) {
  std::size_t n = 0;
  for (const auto& c : phase) n += c.data.size();
  return n;
}

std::string TestTransform::str() const {
  if (kind == Kind::None) return "none";
  return "translate_to(" + language->str() + ")";
}

LanguageTag InferencePipeline::mt_for(const LanguageTag& eval_language) const {
  auto it = mt_language.find(eval_language);
  return it == mt_language.end() ? eval_language : it->second;
}

}  // namespace xlt
