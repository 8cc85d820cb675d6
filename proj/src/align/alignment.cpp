#include "xlt/align/alignment.hpp"

#include <charconv>

#include "xlt/error.hpp"
#include "xlt/util/text.hpp"

namespace xlt {

AlignmentLinks::AlignmentLinks(std::size_t src_len, std::size_t tgt_len, std::set<Link> links)
    : src_len_(src_len), tgt_len_(tgt_len), links_(std::move(links)) {
  if (src_len_ == 0 || tgt_len_ == 0) {
    fail(ErrorCode::ContractViolation, "alignment over an empty sentence");
  }
  for (const auto& [i, j] : links_) {
    if (i >= src_len_ || j >= tgt_len_) {
      fail(ErrorCode::IndexOutOfRange,
           std::to_string(i) + "-" + std::to_string(j) + " outside " + std::to_string(src_len_) +
               "x" + std::to_string(tgt_len_));
    }
  }
}

AlignmentLinks AlignmentLinks::from_mapping(std::span<const std::size_t> mapping,
                                            std::size_t tgt_len) {
  std::set<Link> links;
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    if (mapping[i] < tgt_len) links.emplace(i, mapping[i]);
  }
  return AlignmentLinks(mapping.size(), tgt_len, std::move(links));
}

std::vector<std::size_t> AlignmentLinks::targets_of(std::size_t src_index) const {
  std::vector<std::size_t> out;
  for (auto it = links_.lower_bound({src_index, 0}); it != links_.end() && it->first == src_index; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::string AlignmentLinks::to_pharaoh() const {
  std::string out;
  for (const auto& [i, j] : links_) {
    if (!out.empty()) out += ' ';
    out += std::to_string(i);
    out += '-';
    out += std::to_string(j);
  }
  return out;
}

namespace {

bool parse_index(std::string_view text, std::size_t& value) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

AlignmentLinks parse_pharaoh(std::string_view text, std::size_t src_len, std::size_t tgt_len) {
  std::set<AlignmentLinks::Link> links;
  for (const auto& pair : text::split_whitespace(text)) {
    const auto dash = pair.find('-');
    std::size_t i = 0;
    std::size_t j = 0;
    if (dash == std::string::npos ||
        !parse_index(std::string_view(pair).substr(0, dash), i) ||
        !parse_index(std::string_view(pair).substr(dash + 1), j)) {
      fail(ErrorCode::MalformedPair, "'" + pair + "'");
    }
    links.emplace(i, j);
  }
  return AlignmentLinks(src_len, tgt_len, std::move(links));
}

}  // namespace xlt
