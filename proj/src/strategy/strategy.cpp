#include "xlt/strategy/strategy.hpp"

#include <algorithm>
#include <functional>
#include <future>

#include "xlt/error.hpp"

namespace xlt {

using nlohmann::json;

namespace {

struct VariantInfo {
  Variant variant;
  std::string_view name;
  Family family;
  bool per_target;
};

constexpr VariantInfo kVariants[] = {
    {Variant::ZS, "ZS", Family::ZeroShot, false},
    {Variant::T, "T", Family::TTrain, true},
    {Variant::T_SRC, "T_SRC", Family::TTrain, true},
    {Variant::M_T, "M_T", Family::TTrain, false},
    {Variant::M_T_SRC, "M_T_SRC", Family::TTrain, false},
    {Variant::SRC_HR, "SRC_HR", Family::TTrain, false},
    {Variant::T_SRC_HR, "T_SRC_HR", Family::TTrain, true},
    {Variant::M_T_SRC_HR, "M_T_SRC_HR", Family::TTrain, false},
    {Variant::TTEST, "TTEST", Family::TTest, false},
    {Variant::RT, "RT", Family::RTT, true},
    {Variant::RT_SRC, "RT_SRC", Family::RTT, true},
    {Variant::M_RT_SRC, "M_RT_SRC", Family::RTT, false},
    {Variant::RT_ENS_SRC, "RT_ENS_SRC", Family::RTT, true},
    {Variant::RT_ENS_HR, "RT_ENS_HR", Family::RTT, true},
};

const VariantInfo& info(Variant v) {
  for (const auto& i : kVariants) {
    if (i.variant == v) return i;
  }
  fail(ErrorCode::UnsupportedVariant, "unknown variant");
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::ZeroShot: return "ZeroShot";
    case Family::TTrain: return "TTrain";
    case Family::TTest: return "TTest";
    case Family::RTT: return "RTT";
  }
  return "ZeroShot";
}

std::string_view to_string(Variant variant) { return info(variant).name; }

std::string_view to_string(Schedule schedule) {
  return schedule == Schedule::Joint ? "joint" : "sequential";
}

Family parse_family(std::string_view text) {
  for (Family f : {Family::ZeroShot, Family::TTrain, Family::TTest, Family::RTT}) {
    if (to_string(f) == text) return f;
  }
  fail(ErrorCode::UnsupportedVariant, "unknown family '" + std::string(text) + "'");
}

Variant parse_variant(std::string_view text) {
  for (const auto& i : kVariants) {
    if (i.name == text) return i.variant;
  }
  fail(ErrorCode::UnsupportedVariant, "unknown variant '" + std::string(text) + "'");
}

Schedule parse_schedule(std::string_view text) {
  if (text == "joint") return Schedule::Joint;
  if (text == "sequential") return Schedule::Sequential;
  fail(ErrorCode::ConfigInvalid, "unknown schedule '" + std::string(text) + "'");
}

Family family_of(Variant variant) { return info(variant).family; }

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> all = [] {
    std::vector<Variant> v;
    for (const auto& i : kVariants) v.push_back(i.variant);
    return v;
  }();
  return all;
}

bool is_per_target(Variant variant) { return info(variant).per_target; }

bool is_ensemble(Variant variant) {
  return variant == Variant::RT_ENS_SRC || variant == Variant::RT_ENS_HR;
}

void StrategySpec::validate() const {
  if (family_of(variant) != family) {
    fail(ErrorCode::UnsupportedVariant, std::string(to_string(variant)) + " does not belong to family " +
                                            std::string(to_string(family)));
  }
  if (schedule == Schedule::Sequential && variant != Variant::T_SRC && variant != Variant::M_T_SRC) {
    fail(ErrorCode::UnsupportedVariant,
         "sequential training is only defined for T_SRC and M_T_SRC, not " + std::string(to_string(variant)));
  }
  if (targets.empty()) fail(ErrorCode::ConfigInvalid, "no target languages");
  for (const auto& t : targets) {
    if (t.same_language(source)) fail(ErrorCode::ConfigInvalid, "target equals the source language");
  }
  const bool uses_hr = variant == Variant::SRC_HR || variant == Variant::T_SRC_HR ||
                       variant == Variant::M_T_SRC_HR || is_ensemble(variant);
  if (uses_hr && hr_languages.empty()) {
    fail(ErrorCode::UnsupportedVariant, std::string(to_string(variant)) + " needs high-resource languages");
  }
  if (variant == Variant::RT_ENS_SRC && seeds.size() != hr_languages.size() + 1) {
    fail(ErrorCode::UnsupportedVariant, "RT_ENS_SRC needs |hr_languages|+1 = " +
                                            std::to_string(hr_languages.size() + 1) + " seeds, got " +
                                            std::to_string(seeds.size()));
  }
  if (seeds.empty()) fail(ErrorCode::ConfigInvalid, "no seeds");
  decoding.validate();
}

LanguageTag StrategySpec::mt_for(const LanguageTag& target) const {
  auto it = mt_language.find(target);
  return it == mt_language.end() ? target : it->second;
}

namespace {

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

std::vector<LanguageTag> tags_of(const json& j) {
  std::vector<LanguageTag> out;
  for (const auto& s : j) out.push_back(LanguageTag::parse(s.get<std::string>()));
  return out;
}

json tags_json(const std::vector<LanguageTag>& tags) {
  json out = json::array();
  for (const auto& t : tags) out.push_back(t.str());
  return out;
}

}  // namespace

StrategySpec spec_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigInvalid, "strategy config must be a JSON object");
  StrategySpec s;
  try {
    s.variant = parse_variant(j.at("variant").get<std::string>());
    s.family = j.contains("family") ? parse_family(j.at("family").get<std::string>()) : family_of(s.variant);
    s.schedule = parse_schedule(field<std::string>(j, "schedule", "joint"));
    if (j.contains("source")) s.source = LanguageTag::parse(j.at("source").get<std::string>());
    if (j.contains("targets")) s.targets = tags_of(j.at("targets"));
    if (j.contains("hr_languages")) s.hr_languages = tags_of(j.at("hr_languages"));
    if (j.contains("seeds")) {
      s.seeds = j.at("seeds").get<std::vector<std::int64_t>>();
    } else if (s.variant == Variant::RT_ENS_SRC) {
      s.seeds.clear();
      for (std::size_t i = 0; i <= s.hr_languages.size(); ++i) s.seeds.push_back(static_cast<std::int64_t>(i + 1));
    }
    if (j.contains("decoding")) {
      try {
        s.decoding = decoding_from_json(j.at("decoding"));
      } catch (const Error& e) {
        fail(ErrorCode::ConfigInvalid, "decoding: " + e.detail());
      }
    }
    s.ensemble_with_clean = field<bool>(j, "ensemble_with_clean", false);
    s.proxy_unsupported = field<bool>(j, "proxy_unsupported", true);
    if (j.contains("mt_language")) {
      for (const auto& [eval, used] : j.at("mt_language").items()) {
        s.mt_language.emplace(LanguageTag::parse(eval), LanguageTag::parse(used.get<std::string>()));
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string("strategy config: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const StrategySpec& s) {
  json mt = json::object();
  for (const auto& [eval, used] : s.mt_language) mt[eval.str()] = used.str();
  return {{"family", to_string(s.family)},
          {"variant", to_string(s.variant)},
          {"schedule", to_string(s.schedule)},
          {"source", s.source.str()},
          {"targets", tags_json(s.targets)},
          {"hr_languages", tags_json(s.hr_languages)},
          {"seeds", s.seeds},
          {"decoding", to_json(s.decoding)},
          {"ensemble_with_clean", s.ensemble_with_clean},
          {"proxy_unsupported", s.proxy_unsupported},
          {"mt_language", mt}};
}

Resources make_resources(Dataset source_train, const TranslatorBackend& translator,
                         const AlignerBackend* aligner, const TypologyStore* typology) {
  Resources r;
  r.source_train = std::move(source_train);
  r.translator = &translator;
  r.aligner = aligner;
  r.supported = translator.supported_languages();
  r.typology = typology;
  return r;
}

json to_json(const ProxySubstitution& s) {
  return {{"evaluation", s.evaluation.str()}, {"mt", s.mt.str()}, {"score", s.score}};
}

StrategySpec apply_proxy_substitution(const StrategySpec& spec, const TypologyStore& typology,
                                      const LanguageSet& supported,
                                      std::vector<ProxySubstitution>* substitutions) {
  StrategySpec out = spec;
  for (const auto& t : spec.targets) {
    if (supports(supported, t) || out.mt_language.contains(t)) continue;
    const auto closest = closest_supported(t, supported, typology);
    out.mt_language[t] = closest.language;
    if (substitutions) substitutions->push_back({t, closest.language, closest.score});
  }
  return out;
}

namespace {

class Compiler {
 public:
  Compiler(const StrategySpec& spec, const Resources& res) : spec_(spec), res_(res) {}

  CompiledStrategy run(const std::vector<LanguageTag>& targets) {
    const Dataset& clean = res_.source_train;
    if (clean.empty()) fail(ErrorCode::EmptyInput, "empty source training data");
    if (clean.task == TaskKind::NER && spec_.variant != Variant::ZS &&
        spec_.variant != Variant::TTEST && !res_.aligner) {
      fail(ErrorCode::ContractViolation, "NER strategies need an aligner backend");
    }

    CompiledStrategy out;
    out.eval_targets = targets;
    out.pipeline.source = spec_.source;
    for (const auto& t : targets) {
      if (!(spec_.mt_for(t) == t)) out.pipeline.mt_language[t] = spec_.mt_for(t);
    }

    const LanguageTag& src = spec_.source;
    const LanguageTag t = targets.front();
    auto clean_job = [&] { jobs_.push_back([&clean] { return PlanComponent{"clean", clean, 1.0, {}}; }); };

    ModelPlan single{std::string(to_string(spec_.variant)), {}, TestTransform::none(), {}};
    switch (spec_.variant) {
      case Variant::ZS:
        clean_job();
        single.phases = {take(1)};
        break;
      case Variant::T:
        translated(t);
        single.phases = {take(1)};
        break;
      case Variant::T_SRC:
        clean_job();
        translated(t);
        single.phases = phases_for_src_plus(2);
        break;
      case Variant::M_T:
        for (const auto& x : targets) translated(x);
        single.phases = {take(targets.size())};
        break;
      case Variant::M_T_SRC:
        clean_job();
        for (const auto& x : targets) translated(x);
        single.phases = phases_for_src_plus(targets.size() + 1);
        break;
      case Variant::SRC_HR:
        clean_job();
        for (const auto& h : spec_.hr_languages) translated(h, false);
        single.phases = {take(spec_.hr_languages.size() + 1)};
        break;
      case Variant::T_SRC_HR:
        clean_job();
        translated(t);
        for (const auto& h : spec_.hr_languages) translated(h, false);
        single.phases = {take(spec_.hr_languages.size() + 2)};
        break;
      case Variant::M_T_SRC_HR:
        clean_job();
        for (const auto& x : targets) translated(x);
        for (const auto& h : spec_.hr_languages) translated(h, false);
        single.phases = {take(targets.size() + spec_.hr_languages.size() + 1)};
        break;
      case Variant::TTEST:
        clean_job();
        single.phases = {take(1)};
        single.transform = TestTransform::translate_to(src);
        break;
      case Variant::RT:
        roundtrip(t, src);
        single.phases = {take(1)};
        single.transform = TestTransform::translate_to(src);
        break;
      case Variant::RT_SRC:
        clean_job();
        roundtrip(t, src);
        single.phases = {take(2)};
        single.transform = TestTransform::translate_to(src);
        break;
      case Variant::M_RT_SRC:
        clean_job();
        for (const auto& x : targets) roundtrip(x, src);
        single.phases = {take(targets.size() + 1)};
        single.transform = TestTransform::translate_to(src);
        break;
      case Variant::RT_ENS_SRC: {
        if (spec_.ensemble_with_clean) clean_job();
        roundtrip(t, src);
        const auto phase = take(spec_.ensemble_with_clean ? 2 : 1);
        for (std::size_t i = 0; i < spec_.seeds.size(); ++i) {
          out.plan.models.push_back({"RT_ENS_SRC.m" + std::to_string(i), {phase},
                                     TestTransform::translate_to(src), spec_.seeds[i]});
        }
        out.pipeline.combine = Combine::AverageDistributions;
        break;
      }
      case Variant::RT_ENS_HR: {
        clean_job();
        roundtrip(t, src);
        for (const auto& h : spec_.hr_languages) roundtrip(t, h);
        const auto components = take(spec_.hr_languages.size() + 2);
        out.plan.models.push_back({"RT_ENS_HR." + src.str(), {{components[0], components[1]}},
                                   TestTransform::translate_to(src), {}});
        for (std::size_t i = 0; i < spec_.hr_languages.size(); ++i) {
          const auto& h = spec_.hr_languages[i];
          out.plan.models.push_back({"RT_ENS_HR." + h.str(), {{components[0], components[i + 2]}},
                                     TestTransform::translate_to(h), {}});
        }
        out.pipeline.combine = Combine::AverageDistributions;
        break;
      }
    }
    if (out.plan.models.empty()) out.plan.models.push_back(std::move(single));
    for (const auto& m : out.plan.models) out.pipeline.transforms.push_back(m.transform);

    json reports = json::array();
    for (const auto& c : built_) {
      if (c.projection) reports.push_back({{"component", c.name}, {"report", to_json(*c.projection)}});
    }
    json eval = json::array();
    for (const auto& e : targets) eval.push_back(e.str());
    out.metadata = {{"variant", to_string(spec_.variant)},
                    {"family", to_string(spec_.family)},
                    {"schedule", to_string(spec_.schedule)},
                    {"eval_targets", eval},
                    {"projection_reports", reports}};
    return out;
  }

 private:
  using Job = std::function<PlanComponent()>;

  void translated(const LanguageTag& target, bool is_target = true) {
    const LanguageTag mt = is_target ? spec_.mt_for(target) : target;
    jobs_.push_back([this, mt] {
      auto r = transfer(*res_.translator, res_.aligner, res_.source_train, spec_.source, mt,
                        spec_.decoding, res_.transfer);
      return finish("translated:" + mt.str(), std::move(r));
    });
  }

  void roundtrip(const LanguageTag& target, const LanguageTag& final_language) {
    const LanguageTag pivot = spec_.mt_for(target);
    jobs_.push_back([this, pivot, final_language] {
      auto r = transfer_roundtrip(*res_.translator, res_.aligner, res_.source_train, spec_.source,
                                  pivot, final_language, spec_.decoding, res_.transfer);
      return finish("roundtrip:" + spec_.source.str() + ">" + pivot.str() + ">" + final_language.str(),
                    std::move(r));
    });
  }

  PlanComponent finish(std::string name, ProjectedDataset r) const {
    PlanComponent c{std::move(name), std::move(r.dataset), 1.0, {}};
    if (c.data.task == TaskKind::NER) {
      if (r.report.total > 0 && r.report.retained == 0) {
        fail(ErrorCode::ProjectionCollapse, "label projection discarded every instance of " + c.name);
      }
      c.projection = r.report;
    }
    return c;
  }

  // Runs the queued jobs (bounded parallelism) and returns their components
  // in queue order.
  std::vector<PlanComponent> take(std::size_t expected) {
    if (jobs_.size() != expected) fail(ErrorCode::ContractViolation, "component count mismatch");
    const std::size_t width = std::max<std::size_t>(1, res_.parallelism);
    std::vector<PlanComponent> out;
    for (std::size_t begin = 0; begin < jobs_.size(); begin += width) {
      const std::size_t end = std::min(jobs_.size(), begin + width);
      if (end - begin == 1) {
        out.push_back(jobs_[begin]());
        continue;
      }
      std::vector<std::future<PlanComponent>> wave;
      for (std::size_t i = begin; i < end; ++i) wave.push_back(std::async(std::launch::async, jobs_[i]));
      for (auto& f : wave) out.push_back(f.get());
    }
    jobs_.clear();
    built_.insert(built_.end(), out.begin(), out.end());
    return out;
  }

  // Clean first, then the rest: one phase (joint) or [[clean], [rest]].
  std::vector<Phase> phases_for_src_plus(std::size_t expected) {
    auto components = take(expected);
    if (spec_.schedule == Schedule::Joint) return {components};
    Phase rest(components.begin() + 1, components.end());
    return {Phase{components.front()}, rest};
  }

  const StrategySpec& spec_;
  const Resources& res_;
  std::vector<Job> jobs_;
  std::vector<PlanComponent> built_;
};

void check_supported(const StrategySpec& spec, const Resources& res) {
  if (spec.variant == Variant::ZS) return;
  if (!res.translator) fail(ErrorCode::ContractViolation, "strategy needs a translator backend");
  auto need = [&](const LanguageTag& l) {
    if (!supports(res.supported, l)) {
      fail(ErrorCode::UnsupportedLanguage, l.str() + " is not supported by " + res.translator->identity());
    }
  };
  need(spec.source);
  for (const auto& t : spec.targets) need(spec.mt_for(t));
  const bool uses_hr = spec.variant == Variant::SRC_HR || spec.variant == Variant::T_SRC_HR ||
                       spec.variant == Variant::M_T_SRC_HR || spec.variant == Variant::RT_ENS_HR;
  if (uses_hr) {
    for (const auto& h : spec.hr_languages) need(h);
  }
}

StrategySpec prepared(const StrategySpec& spec, const Resources& res,
                      std::vector<ProxySubstitution>& substitutions) {
  spec.validate();
  StrategySpec s = spec;
  const bool all_supported = std::all_of(s.targets.begin(), s.targets.end(), [&](const auto& t) {
    return supports(res.supported, s.mt_for(t));
  });
  if (s.variant != Variant::ZS && !all_supported && s.proxy_unsupported && res.typology) {
    s = apply_proxy_substitution(s, *res.typology, res.supported, &substitutions);
  }
  check_supported(s, res);
  return s;
}

json substitutions_json(const std::vector<ProxySubstitution>& subs) {
  json out = json::array();
  for (const auto& s : subs) out.push_back(to_json(s));
  return out;
}

}  // namespace

CompiledStrategy compile_strategy(const StrategySpec& spec, const Resources& resources) {
  std::vector<ProxySubstitution> subs;
  const StrategySpec s = prepared(spec, resources, subs);
  if (is_per_target(s.variant) && s.targets.size() != 1) {
    fail(ErrorCode::ContractViolation, std::string(to_string(s.variant)) +
                                           " is compiled per target; use compile_for_targets");
  }
  auto out = Compiler(s, resources).run(s.targets);
  out.metadata["proxies"] = substitutions_json(subs);
  return out;
}

std::vector<CompiledStrategy> compile_for_targets(const StrategySpec& spec,
                                                  const Resources& resources) {
  std::vector<ProxySubstitution> subs;
  const StrategySpec s = prepared(spec, resources, subs);
  std::vector<CompiledStrategy> out;
  if (is_per_target(s.variant)) {
    for (const auto& t : s.targets) out.push_back(Compiler(s, resources).run({t}));
  } else {
    out.push_back(Compiler(s, resources).run(s.targets));
  }
  for (auto& c : out) c.metadata["proxies"] = substitutions_json(subs);
  return out;
}

}  // namespace xlt
