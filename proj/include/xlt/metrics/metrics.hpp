#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xlt/corpus/dataset.hpp"

namespace xlt::metrics {

/// Fraction of positions where prediction equals gold.
/// Errors: LengthMismatch, Empty.
double accuracy(std::span<const std::string> preds, std::span<const std::string> gold);

/// Unweighted mean of per-class F1 over the classes of `label_set` that occur
/// in the predictions or the gold labels.
/// Errors: LengthMismatch, Empty, LabelOutsideSet.
double macro_f1(std::span<const std::string> preds, std::span<const std::string> gold,
                std::span<const std::string> label_set);

/// Micro F1 over exact (type, begin, end) entity spans, pooled over all
/// sentences. No spans on either side counts as perfect agreement (1.0).
/// Errors: LengthMismatch, InvalidBIO.
double span_f1(const std::vector<std::vector<std::string>>& pred_tags,
               const std::vector<std::vector<std::string>>& gold_tags);
double span_f1(std::span<const std::string> pred_tags, std::span<const std::string> gold_tags);

/// "accuracy" for NLI, "macro_f1" for TC, "span_f1" for NER.
std::string metric_name(TaskKind task);

struct SeedAggregate {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

/// Arithmetic mean and sample (n-1) standard deviation; std is 0 for n == 1.
/// Errors: Empty.
SeedAggregate aggregate_seeds(std::span<const double> values);

/// "62.6±0.2"
std::string format_score(const SeedAggregate& a, int decimals = 1);
/// "$62.6_{\pm0.2}$"
std::string format_latex_cell(const SeedAggregate& a, int decimals = 1);

/// Mean over languages of 100 * count / total. Errors: ZeroTotal, Empty.
double resource_availability(std::span<const double> per_language_counts, double corpus_total);

struct AvailabilityRow {
  std::string dataset;
  double value = 0.0;
};
/// Two columns, "Dataset" and "Avg. Res. Availability", two decimals.
std::string render_availability_table(const std::vector<AvailabilityRow>& rows);

/// Scores of one strategy: per-language values, one per seed, on the 0-100
/// scale. The "Avg" column averages languages within each seed first.
struct ScoreReport {
  std::string strategy;
  std::string metric;
  std::vector<std::string> languages;
  std::map<std::string, std::vector<double>> per_language;

  void add(const std::string& language, double value);
  std::size_t n_seeds() const;
  SeedAggregate language(const std::string& language) const;
  SeedAggregate average() const;
};

/// Header "strategy,<lang>...,Avg"; cells "mean±std".
std::string render_report_csv(const std::vector<ScoreReport>& reports, int decimals = 1);
std::string render_report_json(const std::vector<ScoreReport>& reports);

}  // namespace xlt::metrics
