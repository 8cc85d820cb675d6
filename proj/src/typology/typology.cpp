#include "xlt/typology/typology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xlt/error.hpp"
#include "xlt/util/text.hpp"

namespace xlt {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimensionMismatch,
         std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) fail(ErrorCode::ZeroVector, "cosine of an all-zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

TypologyStore::TypologyStore(std::string feature_set, std::size_t dimension)
    : feature_set_(std::move(feature_set)), dimension_(dimension) {}

namespace {

bool is_missing(std::string_view cell) {
  return cell.empty() || cell == "--" || cell == "nan" || cell == "NaN" || cell == "NA";
}

}  // namespace

TypologyStore TypologyStore::from_csv(std::string_view text, std::string feature_set) {
  const auto lines = text::lines(text);
  std::size_t n = 0;
  while (n < lines.size() && text::is_blank(lines[n])) ++n;
  if (n == lines.size()) fail(ErrorCode::EmptyInput, "typology CSV is empty");
  const auto header = text::split(lines[n], ',');
  if (header.size() < 2 || header.front() != "language") {
    fail(ErrorCode::MalformedLine, "typology CSV header must start with 'language'", n + 1);
  }
  TypologyStore store(std::move(feature_set), header.size() - 1);
  for (++n; n < lines.size(); ++n) {
    if (text::is_blank(lines[n])) continue;
    const auto cells = text::split(lines[n], ',');
    if (cells.size() != header.size()) {
      fail(ErrorCode::MalformedLine,
           "line " + std::to_string(n + 1) + " has " + std::to_string(cells.size()) + " cells", n + 1);
    }
    std::vector<double> values(store.dimension_, 0.0);
    std::size_t missing = 0;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      std::string_view cell = cells[k];
      while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
      while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
      if (is_missing(cell)) {
        ++missing;
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        fail(ErrorCode::MalformedLine,
             "line " + std::to_string(n + 1) + ": '" + std::string(cell) + "' is not a number", n + 1);
      }
      values[k - 1] = v;
    }
    LanguageTag language = LanguageTag::parse(cells.front());
    if (missing) store.missing_[language.code()] = missing;
    store.insert(language, std::move(values));
  }
  return store;
}

TypologyStore TypologyStore::load_csv(const std::string& path, std::string feature_set) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigInvalid, "cannot read typology CSV '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str(), std::move(feature_set));
}

void TypologyStore::insert(const LanguageTag& language, std::vector<double> values) {
  if (values.size() != dimension_) {
    fail(ErrorCode::DimensionMismatch, language.str() + " has " + std::to_string(values.size()) +
                                           " features, store has " + std::to_string(dimension_));
  }
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
    fail(ErrorCode::ContractViolation, language.str() + " has a non-finite feature");
  }
  vectors_[language.code()] = std::move(values);
}

bool TypologyStore::contains(const LanguageTag& language) const {
  return vectors_.contains(language.code());
}

const std::vector<double>* TypologyStore::find(const LanguageTag& language) const {
  auto it = vectors_.find(language.code());
  return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<LanguageTag> TypologyStore::languages() const {
  std::vector<LanguageTag> out;
  for (const auto& [code, values] : vectors_) out.emplace_back(code);
  return out;
}

ClosestLanguage closest_supported(const LanguageTag& target, const LanguageSet& supported,
                                  const TypologyStore& store) {
  const auto* target_vector = store.find(target);
  if (!target_vector) fail(ErrorCode::TargetMissingVector, target.str());

  std::vector<CandidateScore> ranking;
  for (const auto& candidate : supported) {
    if (candidate.same_language(target)) continue;
    const auto* v = store.find(candidate);
    if (!v) continue;
    ranking.push_back({candidate, cosine_similarity(*target_vector, *v)});
  }
  if (ranking.empty()) {
    fail(ErrorCode::NoCandidate, "no supported language has a typology vector");
  }
  std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.language.code() < b.language.code();
  });
  return {ranking.front().language, ranking.front().score, std::move(ranking)};
}

std::vector<ReferencePair> reference_closest_pairs() {
  auto set = [](std::initializer_list<const char*> codes) {
    LanguageSet out;
    for (const char* c : codes) out.emplace(c);
    return out;
  };
  const LanguageSet amnli = set({"aym", "grn", "quy"});
  const LanguageSet nusax = set({"ace", "ban", "bjn", "bug", "min", "jav", "sun"});
  const LanguageSet masakha = set({"bam", "ewe", "fon", "hau", "ibo", "kin", "lug", "luo", "mos",
                                   "nya", "sna", "swa", "tsn", "twi", "wol", "xho", "yor", "zul"});
  return {
      {"AmNLI", LanguageTag("cni"), LanguageTag("aym"), amnli},
      {"AmNLI", LanguageTag("bzd"), LanguageTag("quy"), amnli},
      {"AmNLI", LanguageTag("nah"), LanguageTag("grn"), amnli},
      {"AmNLI", LanguageTag("oto"), LanguageTag("grn"), amnli},
      {"AmNLI", LanguageTag("tar"), LanguageTag("aym"), amnli},
      {"AmNLI", LanguageTag("shp"), LanguageTag("quy"), amnli},
      {"AmNLI", LanguageTag("hch"), LanguageTag("grn"), amnli},
      {"NusaX", LanguageTag("mad"), LanguageTag("sun"), nusax},
      {"NusaX", LanguageTag("nij"), LanguageTag("sun"), nusax},
      {"NusaX", LanguageTag("bbc"), LanguageTag("bug"), nusax},
      {"Masakha", LanguageTag("bbj"), LanguageTag("swa"), masakha},
      {"Masakha", LanguageTag("pcm"), LanguageTag("hau"), masakha},
  };
}

std::vector<PairCheck> check_reference_pairs(const TypologyStore& store,
                                             const std::vector<ReferencePair>& pairs) {
  std::vector<PairCheck> out;
  for (const auto& pair : pairs) {
    auto closest = closest_supported(pair.target, pair.candidates, store);
    PairCheck check{pair, closest.language, closest.score, 0.0, false};
    for (const auto& c : closest.ranking) {
      if (c.language.same_language(pair.expected)) check.expected_score = c.score;
    }
    check.reproduced = closest.language.same_language(pair.expected);
    out.push_back(std::move(check));
  }
  return out;
}

std::string render_discrepancy_report(const std::vector<PairCheck>& checks,
                                      const std::string& feature_set) {
  std::size_t reproduced = 0;
  std::string body;
  char line[256];
  for (const auto& c : checks) {
    if (c.reproduced) {
      ++reproduced;
      continue;
    }
    std::snprintf(line, sizeof line, "%s\t%s\texpected %s (%.6f)\twinner %s (%.6f)\n",
                  c.pair.benchmark.c_str(), c.pair.target.str().c_str(),
                  c.pair.expected.str().c_str(), c.expected_score, c.winner.str().c_str(),
                  c.winner_score);
    body += line;
  }
  std::snprintf(line, sizeof line, "# feature set: %s\n# reproduced %zu/%zu pairs\n",
                feature_set.c_str(), reproduced, checks.size());
  return line + body;
}

}  // namespace xlt
