#include "xlt/align/projection.hpp"

#include <algorithm>
#include <cstdio>
#include <future>

#include "xlt/corpus/bio.hpp"
#include "xlt/error.hpp"

namespace xlt {

std::string_view to_string(DiscardReason reason) {
  switch (reason) {
    case DiscardReason::NoLink: return "no_link";
    case DiscardReason::SpanConflict: return "span_conflict";
  }
  return "?";
}

Projection project_labels(std::span<const std::string> src_tokens,
                          std::span<const std::string> src_tags,
                          std::span<const std::string> tgt_tokens,
                          const AlignmentLinks& links) {
  if (src_tokens.size() != src_tags.size()) {
    fail(ErrorCode::ContractViolation, "source tokens and tags differ in length");
  }
  if (links.src_len() != src_tokens.size() || links.tgt_len() != tgt_tokens.size()) {
    fail(ErrorCode::ContractViolation, "alignment lengths do not match the sentences");
  }
  const auto entities = bio::spans(src_tags);
  const std::size_t m = tgt_tokens.size();
  const auto& all = links.links();

  struct Range {
    std::size_t lo;
    std::size_t hi;  // inclusive
    const bio::Span* entity;
  };
  std::vector<Range> ranges;
  ranges.reserve(entities.size());
  for (const auto& entity : entities) {
    Range range{m, 0, &entity};
    for (std::size_t i = entity.begin; i < entity.end; ++i) {
      auto it = all.lower_bound({i, 0});
      if (it == all.end() || it->first != i) return {std::nullopt, DiscardReason::NoLink, 0};
      for (; it != all.end() && it->first == i; ++it) {
        range.lo = std::min(range.lo, it->second);
        range.hi = std::max(range.hi, it->second);
      }
    }
    ranges.push_back(range);
  }

  std::sort(ranges.begin(), ranges.end(),
            [](const Range& a, const Range& b) { return a.lo < b.lo; });
  for (std::size_t k = 1; k < ranges.size(); ++k) {
    if (ranges[k].lo <= ranges[k - 1].hi) return {std::nullopt, DiscardReason::SpanConflict, 0};
  }

  Projection out;
  out.tags = std::vector<std::string>(m, "O");
  auto& tags = *out.tags;
  if (ranges.empty()) return out;
  // Bit 1: linked from a labeled token, bit 2: linked from an O token.
  std::vector<unsigned char> linked(m, 0);
  for (const auto& [i, j] : all) linked[j] |= src_tags[i] == "O" ? 2 : 1;
  for (const auto& range : ranges) {
    tags[range.lo] = "B-" + range.entity->type;
    for (std::size_t j = range.lo + 1; j <= range.hi; ++j) tags[j] = "I-" + range.entity->type;
    // Ranges do not overlap, so a labeled link inside one belongs to it.
    for (std::size_t j = range.lo; j <= range.hi; ++j) {
      if (linked[j] == 2) ++out.absorbed;
    }
  }
  return out;
}

void ProjectionReport::add(const Projection& projection) {
  ++total;
  if (projection) {
    ++retained;
    absorbed_tokens += projection.absorbed;
  } else if (projection.discarded == DiscardReason::SpanConflict) {
    ++discarded_span_conflict;
  } else {
    ++discarded_no_link;
  }
}

ProjectionReport& ProjectionReport::operator+=(const ProjectionReport& other) {
  total += other.total;
  retained += other.retained;
  discarded_no_link += other.discarded_no_link;
  discarded_span_conflict += other.discarded_span_conflict;
  absorbed_tokens += other.absorbed_tokens;
  return *this;
}

double ProjectionReport::projection_rate() const {
  if (total == 0) return 100.0;
  return 100.0 * static_cast<double>(retained) / static_cast<double>(total);
}

nlohmann::json to_json(const ProjectionReport& report) {
  return {{"total", report.total},
          {"retained", report.retained},
          {"discarded_no_link", report.discarded_no_link},
          {"discarded_span_conflict", report.discarded_span_conflict},
          {"absorbed_tokens", report.absorbed_tokens},
          {"projection_rate", report.projection_rate()}};
}

namespace {

void check_parallel(const Dataset& ner, std::size_t translations) {
  if (ner.task != TaskKind::NER) fail(ErrorCode::TaskMismatch, "label projection needs NER data");
  if (translations != ner.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(ner.size()) + " instances but " +
                                        std::to_string(translations) + " translations");
  }
}

// Empty translations cannot hold a TokenInstance and are discarded as NoLink.
Projection project_one(const TokenInstance& inst, const std::vector<std::string>& translated,
                       const AlignmentLinks* links) {
  if (translated.empty() || !links) return {std::nullopt, DiscardReason::NoLink, 0};
  return project_labels(inst.tokens, inst.tags, translated, *links);
}

ProjectedDataset assemble(const Dataset& ner,
                          const std::vector<std::vector<std::string>>& translations,
                          std::vector<Projection> projections, const ProjectionTarget& target) {
  ProjectedDataset out{ner.empty_like(), {}};
  for (std::size_t i = 0; i < projections.size(); ++i) {
    out.report.add(projections[i]);
    if (!projections[i]) continue;
    TokenInstance inst;
    inst.id = ner.tokens[i].id;
    inst.tokens = translations[i];
    inst.tags = std::move(*projections[i].tags);
    inst.language = target.language;
    inst.provenance = target.provenance;
    out.dataset.tokens.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

ProjectedDataset project_dataset(const Dataset& ner,
                                 const std::vector<std::vector<std::string>>& translations,
                                 const AlignerBackend& aligner, const ProjectionTarget& target,
                                 std::size_t parallelism) {
  check_parallel(ner, translations.size());
  const std::size_t n = ner.size();
  std::vector<Projection> projections(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& inst = ner.tokens[i];
      if (translations[i].empty()) {
        projections[i] = project_one(inst, translations[i], nullptr);
        continue;
      }
      const auto links = aligner.align(inst.tokens, translations[i]);
      projections[i] = project_one(inst, translations[i], &links);
    }
  };

  const std::size_t workers =
      aligner.accepts_concurrent_requests() ? std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(n, 1)) : 1;
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::future<void>> futures;
    const std::size_t stride = (n + workers - 1) / workers;
    for (std::size_t begin = 0; begin < n; begin += stride) {
      futures.push_back(std::async(std::launch::async, work, begin, std::min(n, begin + stride)));
    }
    std::exception_ptr first_error;
    for (auto& f : futures) {
      try {
        f.get();
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }
  return assemble(ner, translations, std::move(projections), target);
}

ProjectedDataset project_dataset(const Dataset& ner,
                                 const std::vector<std::vector<std::string>>& translations,
                                 const std::vector<AlignmentLinks>& links,
                                 const ProjectionTarget& target) {
  check_parallel(ner, translations.size());
  if (links.size() != ner.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(ner.size()) + " instances but " +
                                        std::to_string(links.size()) + " alignments");
  }
  std::vector<Projection> projections(ner.size());
  for (std::size_t i = 0; i < ner.size(); ++i) {
    projections[i] = project_one(ner.tokens[i], translations[i], &links[i]);
  }
  return assemble(ner, translations, std::move(projections), target);
}

std::string render_projection_table(
    const std::vector<std::pair<std::string, ProjectionReport>>& rows) {
  std::string out = "language\tproj_rate\n";
  double sum = 0.0;
  char buf[64];
  for (const auto& [language, report] : rows) {
    std::snprintf(buf, sizeof buf, "%.1f", report.projection_rate());
    out += language + "\t" + buf + "\n";
    sum += report.projection_rate();
  }
  std::snprintf(buf, sizeof buf, "%.1f", rows.empty() ? 0.0 : sum / static_cast<double>(rows.size()));
  out += std::string("Avg Proj. Rate\t") + buf + "\n";
  return out;
}

}  // namespace xlt
