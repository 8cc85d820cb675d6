#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xlt::bio {

enum class Prefix { Outside, Begin, Inside };

struct Tag {
  Prefix prefix = Prefix::Outside;
  std::string type;  // empty for O

  static Tag outside() { return {}; }
  static Tag begin(std::string type) { return {Prefix::Begin, std::move(type)}; }
  static Tag inside(std::string type) { return {Prefix::Inside, std::move(type)}; }

  std::string str() const;
  bool operator==(const Tag&) const = default;
};

/// Parses "O", "B-X" or "I-X"; nullopt for anything else.
std::optional<Tag> parse_tag(std::string_view text);

/// A maximal B-X I-X ... run; `end` is exclusive.
struct Span {
  std::string type;
  std::size_t begin = 0;
  std::size_t end = 0;

  auto operator<=>(const Span&) const = default;
};

/// True when every tag parses and no I-X follows anything but B-X/I-X.
bool is_valid(std::span<const std::string> tags);

/// Rewrites IOB1-style tags into BIO: an I-X that does not continue an X
/// entity becomes B-X. Throws InvalidTag on unparseable tags.
std::vector<std::string> repair(std::span<const std::string> tags);

/// Entity spans of a BIO-valid tag sequence. Throws InvalidBIO otherwise.
std::vector<Span> spans(std::span<const std::string> tags);

}  // namespace xlt::bio
