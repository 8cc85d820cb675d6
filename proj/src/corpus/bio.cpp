#include "xlt/corpus/bio.hpp"

#include "xlt/error.hpp"

namespace xlt::bio {

std::string Tag::str() const {
  switch (prefix) {
    case Prefix::Outside: return "O";
    case Prefix::Begin: return "B-" + type;
    case Prefix::Inside: return "I-" + type;
  }
  return "O";
}

std::optional<Tag> parse_tag(std::string_view text) {
  if (text == "O") return Tag::outside();
  if (text.size() < 3 || text[1] != '-') return std::nullopt;
  std::string type(text.substr(2));
  if (type.find_first_of(" \t\n") != std::string::npos) return std::nullopt;
  if (text[0] == 'B') return Tag::begin(std::move(type));
  if (text[0] == 'I') return Tag::inside(std::move(type));
  return std::nullopt;
}

bool is_valid(std::span<const std::string> tags) {
  std::optional<Tag> prev;
  for (const auto& raw : tags) {
    auto tag = parse_tag(raw);
    if (!tag) return false;
    if (tag->prefix == Prefix::Inside) {
      if (!prev || prev->prefix == Prefix::Outside || prev->type != tag->type) {
        return false;
      }
    }
    prev = std::move(tag);
  }
  return true;
}

std::vector<std::string> repair(std::span<const std::string> tags) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  std::optional<Tag> prev;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto tag = parse_tag(tags[i]);
    if (!tag) fail(ErrorCode::InvalidTag, "invalid tag '" + tags[i] + "'", i);
    if (tag->prefix == Prefix::Inside &&
        (!prev || prev->prefix == Prefix::Outside || prev->type != tag->type)) {
      tag->prefix = Prefix::Begin;
    }
    out.push_back(tag->str());
    prev = std::move(tag);
  }
  return out;
}

std::vector<Span> spans(std::span<const std::string> tags) {
  if (!is_valid(tags)) fail(ErrorCode::InvalidBIO, "tag sequence violates BIO");
  std::vector<Span> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto tag = *parse_tag(tags[i]);
    if (tag.prefix == Prefix::Begin) {
      out.push_back({tag.type, i, i + 1});
    } else if (tag.prefix == Prefix::Inside) {
      out.back().end = i + 1;
    }
  }
  return out;
}

}  // namespace xlt::bio
