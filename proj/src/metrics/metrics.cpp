#include "xlt/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "xlt/corpus/bio.hpp"
#include "xlt/error.hpp"

namespace xlt::metrics {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    fail(ErrorCode::LengthMismatch,
         std::to_string(a) + " predictions vs " + std::to_string(b) + " gold labels");
  }
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // avoid rendering tiny negative values as "-0.0"
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace

double accuracy(std::span<const std::string> preds, std::span<const std::string> gold) {
  check_lengths(preds.size(), gold.size());
  if (gold.empty()) fail(ErrorCode::Empty, "accuracy of zero instances");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += preds[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double macro_f1(std::span<const std::string> preds, std::span<const std::string> gold,
                std::span<const std::string> label_set) {
  check_lengths(preds.size(), gold.size());
  if (gold.empty()) fail(ErrorCode::Empty, "macro-F1 of zero instances");
  const std::set<std::string> known(label_set.begin(), label_set.end());
  std::map<std::string, std::size_t> tp, fp, fn;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (const auto* l : {&preds[i], &gold[i]}) {
      if (!known.contains(*l)) fail(ErrorCode::LabelOutsideSet, "label '" + *l + "'", i);
    }
    if (preds[i] == gold[i]) {
      ++tp[gold[i]];
    } else {
      ++fp[preds[i]];
      ++fn[gold[i]];
    }
  }
  double sum = 0.0;
  std::size_t classes = 0;
  for (const auto& label : label_set) {
    const std::size_t t = tp[label], p = fp[label], n = fn[label];
    if (t + p + n == 0) continue;
    sum += 2.0 * t / static_cast<double>(2 * t + p + n);
    ++classes;
  }
  return sum / static_cast<double>(classes);
}

double span_f1(const std::vector<std::vector<std::string>>& pred_tags,
               const std::vector<std::vector<std::string>>& gold_tags) {
  check_lengths(pred_tags.size(), gold_tags.size());
  std::size_t matched = 0, predicted = 0, gold_total = 0;
  for (std::size_t i = 0; i < gold_tags.size(); ++i) {
    check_lengths(pred_tags[i].size(), gold_tags[i].size());
    const auto p = bio::spans(pred_tags[i]);
    const auto g = bio::spans(gold_tags[i]);
    predicted += p.size();
    gold_total += g.size();
    const std::set<bio::Span> gold_set(g.begin(), g.end());
    for (const auto& s : p) matched += gold_set.contains(s);
  }
  if (predicted == 0 && gold_total == 0) return 1.0;
  return 2.0 * matched / static_cast<double>(predicted + gold_total);
}

double span_f1(std::span<const std::string> pred_tags, std::span<const std::string> gold_tags) {
  return span_f1(std::vector<std::vector<std::string>>{{pred_tags.begin(), pred_tags.end()}},
                 std::vector<std::vector<std::string>>{{gold_tags.begin(), gold_tags.end()}});
}

std::string metric_name(TaskKind task) {
  switch (task) {
    case TaskKind::NLI: return "accuracy";
    case TaskKind::TC: return "macro_f1";
    case TaskKind::NER: return "span_f1";
  }
  return "accuracy";
}

SeedAggregate aggregate_seeds(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::Empty, "no seed values to aggregate");
  SeedAggregate out;
  out.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(out.n - 1));
  }
  return out;
}

std::string format_score(const SeedAggregate& a, int decimals) {
  return fixed(a.mean, decimals) + "±" + fixed(a.std, decimals);
}

std::string format_latex_cell(const SeedAggregate& a, int decimals) {
  return "$" + fixed(a.mean, decimals) + "_{\\pm" + fixed(a.std, decimals) + "}$";
}

double resource_availability(std::span<const double> per_language_counts, double corpus_total) {
  if (!(corpus_total > 0.0)) fail(ErrorCode::ZeroTotal, "parallel corpus total must be positive");
  if (per_language_counts.empty()) fail(ErrorCode::Empty, "no languages");
  double sum = 0.0;
  for (double c : per_language_counts) {
    if (c < 0.0) fail(ErrorCode::ContractViolation, "negative parallel count");
    sum += 100.0 * c / corpus_total;
  }
  return sum / static_cast<double>(per_language_counts.size());
}

std::string render_availability_table(const std::vector<AvailabilityRow>& rows) {
  std::string out = "Dataset\tAvg. Res. Availability\n";
  for (const auto& r : rows) out += r.dataset + "\t" + fixed(r.value, 2) + "\n";
  return out;
}

void ScoreReport::add(const std::string& language, double value) {
  if (!per_language.contains(language)) languages.push_back(language);
  per_language[language].push_back(value);
}

std::size_t ScoreReport::n_seeds() const {
  std::size_t n = 0;
  bool first = true;
  for (const auto& [lang, values] : per_language) {
    if (first) {
      n = values.size();
      first = false;
    } else if (values.size() != n) {
      fail(ErrorCode::ContractViolation, "language " + lang + " has a different seed count");
    }
  }
  return n;
}

SeedAggregate ScoreReport::language(const std::string& lang) const {
  auto it = per_language.find(lang);
  if (it == per_language.end()) fail(ErrorCode::ContractViolation, "no scores for " + lang);
  return aggregate_seeds(it->second);
}

SeedAggregate ScoreReport::average() const {
  const std::size_t n = n_seeds();
  if (n == 0 || languages.empty()) fail(ErrorCode::Empty, "empty score report");
  std::vector<double> per_seed(n, 0.0);
  for (const auto& lang : languages) {
    const auto& values = per_language.at(lang);
    for (std::size_t s = 0; s < n; ++s) per_seed[s] += values[s];
  }
  for (auto& v : per_seed) v /= static_cast<double>(languages.size());
  return aggregate_seeds(per_seed);
}

std::string render_report_csv(const std::vector<ScoreReport>& reports, int decimals) {
  std::vector<std::string> columns;
  for (const auto& r : reports) {
    for (const auto& l : r.languages) {
      if (std::find(columns.begin(), columns.end(), l) == columns.end()) columns.push_back(l);
    }
  }
  std::string out = "strategy";
  for (const auto& c : columns) out += "," + c;
  out += ",Avg\n";
  for (const auto& r : reports) {
    out += r.strategy;
    for (const auto& c : columns) {
      out += ",";
      if (r.per_language.contains(c)) out += format_score(r.language(c), decimals);
    }
    out += "," + format_score(r.average(), decimals) + "\n";
  }
  return out;
}

std::string render_report_json(const std::vector<ScoreReport>& reports) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json row;
    row["strategy"] = r.strategy;
    row["metric"] = r.metric;
    row["n_seeds"] = r.n_seeds();
    nlohmann::ordered_json langs = nlohmann::ordered_json::object();
    for (const auto& l : r.languages) {
      const auto a = r.language(l);
      langs[l] = {{"mean", a.mean}, {"std", a.std}, {"values", r.per_language.at(l)}};
    }
    row["languages"] = langs;
    const auto avg = r.average();
    row["Avg"] = {{"mean", avg.mean}, {"std", avg.std}};
    out.push_back(row);
  }
  return out.dump(2) + "\n";
}

}  // namespace xlt::metrics
