#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xlt/align/aligner.hpp"
#include "xlt/corpus/dataset.hpp"

namespace xlt {

enum class DiscardReason { NoLink, SpanConflict };

std::string_view to_string(DiscardReason reason);

struct Projection {
  /// Target tags, absent when the instance is discarded.
  std::optional<std::vector<std::string>> tags;
  std::optional<DiscardReason> discarded;
  /// Target tokens pulled into an entity by range closure although they
  /// are linked only from O-tagged source tokens.
  std::size_t absorbed = 0;

  explicit operator bool() const { return tags.has_value(); }
};

/// Span-wise BIO projection.
///
/// Every source entity collects the target indices linked from any of its
/// tokens. A labeled source token without links discards the instance
/// (NoLink). Otherwise the entity becomes B-X I-X ... over [min, max] of
/// its targets; overlapping ranges discard the instance (SpanConflict).
/// Unlinked O tokens are harmless and every other target token is O.
Projection project_labels(std::span<const std::string> src_tokens,
                          std::span<const std::string> src_tags,
                          std::span<const std::string> tgt_tokens,
                          const AlignmentLinks& links);

struct ProjectionReport {
  std::size_t total = 0;
  std::size_t retained = 0;
  std::size_t discarded_no_link = 0;
  std::size_t discarded_span_conflict = 0;
  std::size_t absorbed_tokens = 0;

  void add(const Projection& projection);
  ProjectionReport& operator+=(const ProjectionReport& other);

  /// 100 * retained / total; 100 for an empty run.
  double projection_rate() const;
  std::size_t discarded() const { return discarded_no_link + discarded_span_conflict; }

  bool operator==(const ProjectionReport&) const = default;
};

nlohmann::json to_json(const ProjectionReport& report);

struct ProjectedDataset {
  Dataset dataset;
  ProjectionReport report;
};

/// Metadata stamped onto retained instances.
struct ProjectionTarget {
  LanguageTag language;
  Provenance provenance{Origin::Translated, std::nullopt};
};

/// Projects every instance of an NER dataset onto its translation
/// (`translations[i]` answers instance i). Retained instances keep their
/// ids, carry the translated tokens and projected tags.
ProjectedDataset project_dataset(const Dataset& ner,
                                 const std::vector<std::vector<std::string>>& translations,
                                 const AlignerBackend& aligner, const ProjectionTarget& target,
                                 std::size_t parallelism = 1);

/// Same with precomputed links (e.g. a Pharaoh file, one line per instance).
ProjectedDataset project_dataset(const Dataset& ner,
                                 const std::vector<std::vector<std::string>>& translations,
                                 const std::vector<AlignmentLinks>& links,
                                 const ProjectionTarget& target);

/// One row per language plus an "Avg Proj. Rate" row, rates to one decimal.
std::string render_projection_table(
    const std::vector<std::pair<std::string, ProjectionReport>>& rows);

}  // namespace xlt
