#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xlt/align/transfer.hpp"
#include "xlt/strategy/plan.hpp"
#include "xlt/typology/typology.hpp"

namespace xlt {

enum class Family { ZeroShot, TTrain, TTest, RTT };

enum class Variant {
  ZS,
  T,
  T_SRC,
  M_T,
  M_T_SRC,
  SRC_HR,
  T_SRC_HR,
  M_T_SRC_HR,
  TTEST,
  RT,
  RT_SRC,
  M_RT_SRC,
  RT_ENS_SRC,
  RT_ENS_HR,
};

enum class Schedule { Joint, Sequential };

std::string_view to_string(Family family);
std::string_view to_string(Variant variant);
std::string_view to_string(Schedule schedule);
Family parse_family(std::string_view text);
Variant parse_variant(std::string_view text);
Schedule parse_schedule(std::string_view text);

/// The family a variant belongs to.
Family family_of(Variant variant);
/// Every variant, ZS first.
const std::vector<Variant>& all_variants();
/// True when training data depends on a single target language, so one
/// plan is compiled per target.
bool is_per_target(Variant variant);
bool is_ensemble(Variant variant);

struct StrategySpec {
  Family family = Family::ZeroShot;
  Variant variant = Variant::ZS;
  Schedule schedule = Schedule::Joint;
  std::vector<LanguageTag> targets;
  std::vector<LanguageTag> hr_languages{LanguageTag("tur"), LanguageTag("rus"), LanguageTag("zho")};
  LanguageTag source{"eng"};
  /// Run seeds; member seeds for RT_ENS_SRC.
  std::vector<std::int64_t> seeds{1, 2, 3};
  DecodingConfig decoding;
  /// RT_ENS_SRC members also train on clean source data.
  bool ensemble_with_clean = false;
  /// Replace MT-unsupported targets by their closest supported language.
  bool proxy_unsupported = true;
  /// Evaluation language -> language used for MT calls.
  std::map<LanguageTag, LanguageTag> mt_language;

  /// Throws UnsupportedVariant or ConfigInvalid.
  void validate() const;

  LanguageTag mt_for(const LanguageTag& target) const;
};

/// {"family","variant","schedule","source","targets","hr_languages","seeds",
///  "decoding","ensemble_with_clean","proxy_unsupported"}; absent fields take
/// their defaults (RT_ENS_SRC seeds default to 1..|hr|+1).
StrategySpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StrategySpec& spec);

struct Resources {
  Dataset source_train;
  const TranslatorBackend* translator = nullptr;
  /// NER only.
  const AlignerBackend* aligner = nullptr;
  LanguageSet supported;
  const TypologyStore* typology = nullptr;
  TransferOptions transfer;
  /// Components built at once.
  std::size_t parallelism = 1;
};

/// Resources whose supported set is the translator's.
Resources make_resources(Dataset source_train, const TranslatorBackend& translator,
                         const AlignerBackend* aligner = nullptr,
                         const TypologyStore* typology = nullptr);

struct ProxySubstitution {
  LanguageTag evaluation;
  LanguageTag mt;
  double score = 0.0;
};

nlohmann::json to_json(const ProxySubstitution& s);

/// Maps every unsupported target to its closest supported language for all
/// MT calls; evaluation stays on the true target. Targets already mapped are
/// kept. Errors propagate from closest_supported.
StrategySpec apply_proxy_substitution(const StrategySpec& spec, const TypologyStore& typology,
                                      const LanguageSet& supported,
                                      std::vector<ProxySubstitution>* substitutions = nullptr);

struct CompiledStrategy {
  TrainingPlan plan;
  InferencePipeline pipeline;
  /// Languages whose test sets this plan's models are evaluated on.
  std::vector<LanguageTag> eval_targets;
  /// variant, targets, proxies and projection reports.
  nlohmann::json metadata;
};

/// Errors: UnsupportedVariant, UnsupportedLanguage, ProjectionCollapse,
/// ContractViolation (per-target variant with several targets).
CompiledStrategy compile_strategy(const StrategySpec& spec, const Resources& resources);

/// One compiled strategy per target for per-target variants, a single one
/// covering every target otherwise.
std::vector<CompiledStrategy> compile_for_targets(const StrategySpec& spec,
                                                  const Resources& resources);

}  // namespace xlt
