#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xlt {

/// Source-to-target token links over sentences of fixed, positive lengths.
/// Many-to-many; duplicates collapse.
class AlignmentLinks {
 public:
  using Link = std::pair<std::size_t, std::size_t>;

  /// Throws IndexOutOfRange for a link outside either sentence and
  /// ContractViolation for a zero length.
  AlignmentLinks(std::size_t src_len, std::size_t tgt_len, std::set<Link> links = {});

  /// Links i -> mapping[i], dropping those that fall outside `tgt_len`.
  static AlignmentLinks from_mapping(std::span<const std::size_t> mapping, std::size_t tgt_len);

  std::size_t src_len() const { return src_len_; }
  std::size_t tgt_len() const { return tgt_len_; }
  const std::set<Link>& links() const { return links_; }
  std::size_t size() const { return links_.size(); }

  /// Target indices linked from source token i, ascending.
  std::vector<std::size_t> targets_of(std::size_t src_index) const;

  /// "0-0 1-2 ..." in ascending link order.
  std::string to_pharaoh() const;

  bool operator==(const AlignmentLinks&) const = default;

 private:
  std::size_t src_len_;
  std::size_t tgt_len_;
  std::set<Link> links_;
};

/// Parses whitespace-separated zero-based "i-j" pairs. Errors: MalformedPair,
/// IndexOutOfRange.
AlignmentLinks parse_pharaoh(std::string_view text, std::size_t src_len, std::size_t tgt_len);

}  // namespace xlt
