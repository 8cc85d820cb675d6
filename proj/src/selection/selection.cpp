#include "xlt/selection/selection.hpp"

#include <cmath>
#include <future>

#include "xlt/error.hpp"

namespace xlt {

std::string_view to_string(ValidationVariant variant) {
  switch (variant) {
    case ValidationVariant::ValSrc: return "ValSrc";
    case ValidationVariant::ValMTTrg: return "ValMTTrg";
    case ValidationVariant::ValTrg: return "ValTrg";
  }
  return "ValSrc";
}

ValidationVariant parse_validation_variant(std::string_view text) {
  for (auto v : all_validation_variants()) {
    if (to_string(v) == text) return v;
  }
  fail(ErrorCode::ConfigInvalid, "unknown validation variant '" + std::string(text) + "'");
}

const std::vector<ValidationVariant>& all_validation_variants() {
  static const std::vector<ValidationVariant> all{ValidationVariant::ValSrc, ValidationVariant::ValMTTrg,
                                                  ValidationVariant::ValTrg};
  return all;
}

LanguageTag ValidationResources::mt_for(const LanguageTag& target) const {
  auto it = mt_language.find(target);
  return it == mt_language.end() ? target : it->second;
}

namespace {

const TranslatorBackend& translator_of(const ValidationResources& r) {
  if (!r.translator) fail(ErrorCode::ContractViolation, "validation variant needs a translator");
  return *r.translator;
}

const Dataset& oracle(const ValidationResources& r, const LanguageTag& target) {
  for (const auto& [lang, data] : r.target_validation) {
    if (lang.same_language(target)) return data;
  }
  fail(ErrorCode::MissingOracleValidation, "no oracle validation data for " + target.str());
}

Dataset relabeled(Dataset d, const LanguageTag& language) {
  for (auto& inst : d.sequences) inst.language = language;
  for (auto& inst : d.tokens) inst.language = language;
  return d;
}

Dataset keep_report(ProjectedDataset p, ProjectionReport* report) {
  if (report) *report = p.report;
  return std::move(p.dataset);
}

}  // namespace

Dataset build_validation(ValidationVariant variant, Family family,
                         const ValidationResources& r, const LanguageTag& target,
                         ProjectionReport* report) {
  if (report) *report = {};
  const bool test_side = family == Family::TTest || family == Family::RTT;
  const LanguageTag mt = r.mt_for(target);
  switch (variant) {
    case ValidationVariant::ValSrc:
      return r.source_validation;
    case ValidationVariant::ValMTTrg:
      if (test_side) {
        return keep_report(transfer_roundtrip(translator_of(r), r.aligner, r.source_validation,
                                              r.source, mt, r.source, r.decoding, r.transfer),
                           report);
      }
      return keep_report(transfer(translator_of(r), r.aligner, r.source_validation, r.source, mt,
                                  r.decoding, r.transfer),
                         report);
    case ValidationVariant::ValTrg: {
      const Dataset& gold = oracle(r, target);
      if (!test_side) return gold;
      return keep_report(transfer(translator_of(r), r.aligner, relabeled(gold, mt), mt, r.source,
                                  r.decoding, r.transfer),
                         report);
    }
  }
  return r.source_validation;
}

Dataset raw_validation(ValidationVariant variant, const ValidationResources& r,
                       const LanguageTag& target) {
  switch (variant) {
    case ValidationVariant::ValSrc:
      return r.source_validation;
    case ValidationVariant::ValMTTrg:
      return transfer(translator_of(r), r.aligner, r.source_validation, r.source, r.mt_for(target),
                      r.decoding, r.transfer)
          .dataset;
    case ValidationVariant::ValTrg:
      return oracle(r, target);
  }
  return r.source_validation;
}

double select_checkpoint(const MetricSeries& series) {
  if (series.empty()) fail(ErrorCode::EmptySeries, "no checkpoints to select from");
  std::size_t best = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series[i].second)) {
      fail(ErrorCode::ContractViolation, "non-finite validation score", i);
    }
    const auto& [f, s] = series[i];
    const auto& [bf, bs] = series[best];
    if (s > bs || (s == bs && f < bf)) best = i;
  }
  return series[best].first;
}

MetricSeries score_series(const TaskModel& model, const CheckpointSeries& series,
                          const Dataset& validation, std::size_t parallelism) {
  MetricSeries out(series.checkpoints.size());
  const std::size_t width = std::max<std::size_t>(1, parallelism);
  for (std::size_t begin = 0; begin < out.size(); begin += width) {
    const std::size_t end = std::min(out.size(), begin + width);
    std::vector<std::future<double>> wave;
    for (std::size_t i = begin; i < end; ++i) {
      wave.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async,
                                [&, i] { return evaluate_checkpoint(model, series.checkpoints[i], validation); }));
    }
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = {series.checkpoints[i].epoch_fraction, wave[i - begin].get()};
    }
  }
  return out;
}

nlohmann::json to_json(const SelectionRecord& record) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& [f, s] : record.series) series.push_back({f, s});
  return {{"variant", to_string(record.variant)},
          {"target", record.target.str()},
          {"chosen_fraction", record.chosen_fraction},
          {"score", record.score},
          {"series", series}};
}

SelectionRecord select_from_series(ValidationVariant variant, const LanguageTag& target,
                                   MetricSeries series) {
  SelectionRecord r;
  r.variant = variant;
  r.target = target;
  r.chosen_fraction = select_checkpoint(series);
  for (const auto& [f, s] : series) {
    if (f == r.chosen_fraction) {
      r.score = s;
      break;
    }
  }
  r.series = std::move(series);
  return r;
}

}  // namespace xlt
