#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlt/corpus/language_tag.hpp"

namespace xlt {

/// Cosine of the angle between two vectors of equal dimension.
/// Errors: DimensionMismatch, ZeroVector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Typological feature vectors keyed by language code (scripts ignored).
/// Immutable after load.
class TypologyStore {
 public:
  TypologyStore(std::string feature_set, std::size_t dimension);

  /// CSV with header "language,f1,...,fN". Empty, "--", "nan" or "NA"
  /// cells are imputed as 0.0 and counted in the missingness mask.
  static TypologyStore from_csv(std::string_view text, std::string feature_set = "syntax_knn+phonology_knn+inventory_knn");
  static TypologyStore load_csv(const std::string& path, std::string feature_set = "syntax_knn+phonology_knn+inventory_knn");

  void insert(const LanguageTag& language, std::vector<double> values);

  const std::string& feature_set() const { return feature_set_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

  bool contains(const LanguageTag& language) const;
  const std::vector<double>* find(const LanguageTag& language) const;
  std::vector<LanguageTag> languages() const;

  /// Imputed cells per language; languages without gaps are absent.
  const std::map<std::string, std::size_t>& missing_counts() const { return missing_; }

 private:
  std::string feature_set_;
  std::size_t dimension_;
  std::map<std::string, std::vector<double>> vectors_;
  std::map<std::string, std::size_t> missing_;
};

struct CandidateScore {
  LanguageTag language;
  double score;
};

struct ClosestLanguage {
  /// The member of `supported` to translate to and from.
  LanguageTag language;
  double score;
  /// Every scored candidate, in descending score order.
  std::vector<CandidateScore> ranking;
};

/// The supported language whose vector has the highest cosine similarity
/// with the target's; exact ties go to the lexicographically smaller code.
/// Supported languages without a vector are skipped.
/// Errors: TargetMissingVector, NoCandidate.
ClosestLanguage closest_supported(const LanguageTag& target, const LanguageSet& supported,
                                  const TypologyStore& store);

/// A closest-language pair from the unsupported-language study together
/// with the MT-supported languages of its benchmark.
struct ReferencePair {
  std::string benchmark;
  LanguageTag target;
  LanguageTag expected;
  LanguageSet candidates;
};

/// The twelve published pairs (AmericasNLI, NusaX, MasakhaNER 2.0).
std::vector<ReferencePair> reference_closest_pairs();

struct PairCheck {
  ReferencePair pair;
  LanguageTag winner;
  double winner_score = 0.0;
  double expected_score = 0.0;
  bool reproduced = false;
};

std::vector<PairCheck> check_reference_pairs(const TypologyStore& store,
                                             const std::vector<ReferencePair>& pairs);

/// One line per deviating pair: target, expected (score), winner (score).
std::string render_discrepancy_report(const std::vector<PairCheck>& checks,
                                      const std::string& feature_set);

}  // namespace xlt
