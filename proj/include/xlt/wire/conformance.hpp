#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xlt/corpus/language_tag.hpp"

namespace xlt::wire {

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Golden wire-protocol checks against a running translation service:
/// handshake shape, positional answers, empty batches, determinism of
/// greedy and beam decoding, seeded nucleus sampling, decoding validation,
/// unsupported languages and malformed bodies. Uses the first two
/// advertised languages unless a pair is given.
std::vector<ConformanceCheck> translator_conformance(
    const std::string& base_url,
    std::optional<std::pair<LanguageTag, LanguageTag>> pair = std::nullopt);

/// Link ranges, determinism and rejection of empty token lists.
std::vector<ConformanceCheck> aligner_conformance(const std::string& base_url);

/// "PASS name" / "FAIL name: detail", one line each.
std::string render(const std::vector<ConformanceCheck>& checks);
bool all_passed(const std::vector<ConformanceCheck>& checks);

}  // namespace xlt::wire
