#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xlt::text {

/// Splits on '\n'. A trailing '\r' is dropped from every line; a final
/// empty segment after the last newline is not reported.
std::vector<std::string_view> lines(std::string_view text);

std::vector<std::string> split_whitespace(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delimiter);
std::string join(std::span<const std::string> parts, std::string_view glue);

bool is_blank(std::string_view line);

}  // namespace xlt::text
