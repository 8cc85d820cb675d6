#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "xlt/error.hpp"
#include "xlt/strategy/plan_io.hpp"
#include "xlt/strategy/strategy.hpp"

using namespace xlt;

namespace {

const LanguageTag eng("eng"), grn("grn"), quy("quy"), aym("aym"), nah("nah");

LanguageSet all_languages() {
  return {eng, grn, quy, aym, LanguageTag("tur"), LanguageTag("rus"), LanguageTag("zho")};
}

StrategySpec spec_for(Variant v, std::vector<LanguageTag> targets, Schedule schedule = Schedule::Joint) {
  StrategySpec s;
  s.variant = v;
  s.family = family_of(v);
  s.schedule = schedule;
  s.targets = std::move(targets);
  if (v == Variant::RT_ENS_SRC) s.seeds = {1, 2, 3, 4};
  return s;
}

std::vector<LanguageTag> targets_for(Variant v) {
  if (is_per_target(v)) return {grn};
  return {grn, quy, aym};
}

std::vector<std::vector<std::size_t>> sizes_of(const TrainingPlan& plan) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& m : plan.models) {
    std::vector<std::size_t> phases;
    for (const auto& p : m.phases) phases.push_back(phase_size(p));
    out.push_back(phases);
  }
  return out;
}

// Instances equal up to language and provenance.
bool same_but_metadata(const SequenceInstance& a, const SequenceInstance& b) {
  return a.id == b.id && a.text_a == b.text_a && a.text_b == b.text_b && a.label == b.label;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("xlt-strategy-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("strategy") {
  TEST_CASE("names round trip and families") {
    for (auto v : all_variants()) CHECK(parse_variant(to_string(v)) == v);
    CHECK(all_variants().size() == 14);
    CHECK(family_of(Variant::M_T_SRC_HR) == Family::TTrain);
    CHECK(family_of(Variant::TTEST) == Family::TTest);
    CHECK(family_of(Variant::RT_ENS_HR) == Family::RTT);
    CHECK(is_ensemble(Variant::RT_ENS_SRC));
    CHECK_FALSE(is_ensemble(Variant::RT_SRC));
    CHECK_THROWS_AS(parse_variant("BOGUS"), Error);
  }

  TEST_CASE("spec validation") {
    auto s = spec_for(Variant::T, {grn});
    s.validate();
    auto wrong = s;
    wrong.family = Family::RTT;
    CHECK_THROWS_AS(wrong.validate(), Error);
    auto seq = spec_for(Variant::M_T, {grn}, Schedule::Sequential);
    CHECK_THROWS_AS(seq.validate(), Error);
    spec_for(Variant::M_T_SRC, {grn}, Schedule::Sequential).validate();
    auto no_hr = spec_for(Variant::RT_ENS_HR, {grn});
    no_hr.hr_languages.clear();
    CHECK_THROWS_AS(no_hr.validate(), Error);
    auto seeds = spec_for(Variant::RT_ENS_SRC, {grn});
    seeds.seeds = {1, 2};
    CHECK_THROWS_AS(seeds.validate(), Error);
    CHECK_THROWS_AS(spec_for(Variant::T, {}).validate(), Error);
  }

  TEST_CASE("spec JSON defaults and round trip") {
    const auto s = spec_from_json({{"family", "RTT"}, {"variant", "RT_ENS_SRC"}, {"targets", {"grn"}}});
    CHECK(s.seeds == std::vector<std::int64_t>{1, 2, 3, 4});
    CHECK(s.hr_languages.size() == 3);
    CHECK(s.source == eng);
    CHECK(s.decoding == DecodingConfig::beam(5));
    const auto back = spec_from_json(to_json(s));
    CHECK(back.variant == s.variant);
    CHECK(back.seeds == s.seeds);
    CHECK(back.targets == s.targets);
    try {
      spec_from_json({{"variant", "T"}, {"targets", {"grn"}}, {"decoding", {{"mode", "beam"}, {"top_p", 0.8}}}});
      FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigInvalid);
    }
  }

  TEST_CASE("count laws for every variant on a 100-instance fixture") {
    const auto data = testing::make_tc_dataset(100, 1);
    const IdentityTranslator id(all_languages());
    const auto res = make_resources(data, id);
    for (auto v : all_variants()) {
      for (auto schedule : {Schedule::Joint, Schedule::Sequential}) {
        if (schedule == Schedule::Sequential && v != Variant::T_SRC && v != Variant::M_T_SRC) continue;
        CAPTURE(to_string(v));
        CAPTURE(to_string(schedule));
        const auto targets = targets_for(v);
        const auto compiled = compile_strategy(spec_for(v, targets, schedule), res);
        const auto want = testing::closed_form_phase_sizes(v, schedule, 100, targets.size(), 3);
        CHECK(sizes_of(compiled.plan) == want);
        CHECK(compiled.pipeline.transforms.size() == compiled.plan.model_count());
      }
    }
  }

  TEST_CASE("RT_ENS_SRC with clean data doubles each member") {
    const auto data = testing::make_tc_dataset(50, 2);
    const IdentityTranslator id(all_languages());
    auto spec = spec_for(Variant::RT_ENS_SRC, {grn});
    spec.ensemble_with_clean = true;
    const auto compiled = compile_strategy(spec, make_resources(data, id));
    CHECK(sizes_of(compiled.plan) == testing::closed_form_phase_sizes(Variant::RT_ENS_SRC, Schedule::Joint, 50, 1, 3, true));
    for (std::size_t i = 0; i < 4; ++i) CHECK(compiled.plan.models[i].seed == static_cast<std::int64_t>(i + 1));
  }

  TEST_CASE("NER deficits equal projection discards") {
    const auto data = testing::make_ner_dataset(100, 3);
    const IdentityTranslator id(all_languages());
    const OracleAligner aligner(IdentityTranslator::permutation, 0.25, 9);
    const auto res = make_resources(data, id, &aligner);
    for (auto v : all_variants()) {
      CAPTURE(to_string(v));
      const auto targets = targets_for(v);
      const auto compiled = compile_strategy(spec_for(v, targets), res);
      const auto want = testing::closed_form_phase_sizes(v, Schedule::Joint, 100, targets.size(), 3);
      const auto got = sizes_of(compiled.plan);
      REQUIRE(got.size() == want.size());
      for (std::size_t m = 0; m < got.size(); ++m) {
        std::size_t discards = 0;
        for (const auto& c : compiled.plan.models[m].phases[0]) {
          if (c.projection) {
            discards += c.projection->discarded();
            CHECK(c.projection->total == 100);
          }
        }
        CHECK(got[m][0] + discards == want[m][0]);
        if (v != Variant::ZS && v != Variant::TTEST) CHECK(discards > 0);
      }
    }
  }

  TEST_CASE("projection collapse") {
    const auto data = testing::make_ner_dataset(20, 3);
    const IdentityTranslator id(all_languages());
    const OracleAligner aligner(IdentityTranslator::permutation, 1.0, 9);
    // Skip sentences without entities: they always survive.
    Dataset entities = data.empty_like();
    for (const auto& inst : data.tokens) {
      if (std::any_of(inst.tags.begin(), inst.tags.end(), [](const auto& t) { return t != "O"; })) {
        entities.tokens.push_back(inst);
      }
    }
    try {
      compile_strategy(spec_for(Variant::T, {grn}), make_resources(entities, id, &aligner));
      FAIL("expected ProjectionCollapse");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ProjectionCollapse);
    }
  }

  TEST_CASE("identity collapse: TTrain plans differ from clean only in metadata") {
    const auto data = testing::make_tc_dataset(100, 4);
    const IdentityTranslator id(all_languages());
    const auto res = make_resources(data, id);
    for (auto v : all_variants()) {
      if (family_of(v) != Family::TTrain) continue;
      CAPTURE(to_string(v));
      const auto compiled = compile_strategy(spec_for(v, targets_for(v)), res);
      for (const auto& m : compiled.plan.models) {
        for (const auto& phase : m.phases) {
          for (const auto& c : phase) {
            REQUIRE(c.data.sequences.size() == data.sequences.size());
            for (std::size_t i = 0; i < data.sequences.size(); ++i) {
              CHECK(same_but_metadata(c.data.sequences[i], data.sequences[i]));
            }
            if (c.name == "clean") CHECK(c.data == data);
          }
        }
      }
      CHECK(compiled.pipeline.transforms == std::vector<TestTransform>{TestTransform::none()});
    }
  }

  TEST_CASE("clean data is never mutated and compilation is deterministic") {
    const auto data = testing::make_tc_dataset(60, 5);
    const auto copy = data;
    const ReversalTranslator rev(all_languages());
    auto res = make_resources(data, rev);
    res.parallelism = 3;
    const auto spec = spec_for(Variant::M_T_SRC_HR, {grn, quy, aym});
    const auto a = compile_strategy(spec, res);
    const auto b = compile_strategy(spec, res);
    CHECK(res.source_train == copy);
    CHECK(a.plan.phases()[0][0].data == copy);
    REQUIRE(a.plan.phases()[0].size() == b.plan.phases()[0].size());
    for (std::size_t i = 0; i < a.plan.phases()[0].size(); ++i) {
      CHECK(a.plan.phases()[0][i].name == b.plan.phases()[0][i].name);
      CHECK(a.plan.phases()[0][i].data == b.plan.phases()[0][i].data);
    }
    // Clean first, then targets in spec order, then HR languages.
    std::vector<std::string> names;
    for (const auto& c : a.plan.phases()[0]) names.push_back(c.name);
    CHECK(names == std::vector<std::string>{"clean", "translated:grn", "translated:quy", "translated:aym",
                                            "translated:tur", "translated:rus", "translated:zho"});
  }

  TEST_CASE("sequential schedule puts clean data in phase one") {
    const auto data = testing::make_tc_dataset(30, 6);
    const IdentityTranslator id(all_languages());
    const auto c = compile_strategy(spec_for(Variant::T_SRC, {grn}, Schedule::Sequential), make_resources(data, id));
    REQUIRE(c.plan.phases().size() == 2);
    CHECK(c.plan.phases()[0].size() == 1);
    CHECK(c.plan.phases()[0][0].name == "clean");
    CHECK(c.plan.phases()[1][0].name == "translated:grn");
  }

  TEST_CASE("inference pipelines") {
    const auto data = testing::make_tc_dataset(20, 7);
    const IdentityTranslator id(all_languages());
    const auto res = make_resources(data, id);
    const auto tt = compile_strategy(spec_for(Variant::TTEST, {grn}), res);
    CHECK(tt.pipeline.transforms == std::vector<TestTransform>{TestTransform::translate_to(eng)});
    CHECK(tt.pipeline.combine == Combine::Single);

    const auto ens = compile_strategy(spec_for(Variant::RT_ENS_HR, {grn}), res);
    CHECK(ens.plan.model_count() == 4);
    CHECK(ens.pipeline.combine == Combine::AverageDistributions);
    CHECK(ens.pipeline.transforms ==
          std::vector<TestTransform>{TestTransform::translate_to(eng), TestTransform::translate_to(LanguageTag("tur")),
                                     TestTransform::translate_to(LanguageTag("rus")),
                                     TestTransform::translate_to(LanguageTag("zho"))});
    CHECK(ens.plan.models[1].phases[0][1].name == "roundtrip:eng>grn>tur");
    for (const auto& inst : ens.plan.models[3].phases[0][1].data.sequences) {
      CHECK(inst.language == LanguageTag("zho"));
      CHECK(inst.provenance.pivot == grn);
    }

    const auto seeds = compile_strategy(spec_for(Variant::RT_ENS_SRC, {grn}), res);
    CHECK(seeds.plan.model_count() == 4);
    CHECK(seeds.pipeline.combine == Combine::AverageDistributions);
  }

  TEST_CASE("per-target variants compile once per target") {
    const auto data = testing::make_tc_dataset(10, 8);
    const IdentityTranslator id(all_languages());
    const auto res = make_resources(data, id);
    CHECK_THROWS_AS(compile_strategy(spec_for(Variant::T, {grn, quy}), res), Error);
    const auto per = compile_for_targets(spec_for(Variant::T, {grn, quy}), res);
    REQUIRE(per.size() == 2);
    CHECK(per[1].eval_targets == std::vector<LanguageTag>{quy});
    CHECK(compile_for_targets(spec_for(Variant::M_T, {grn, quy}), res).size() == 1);
  }

  TEST_CASE("unsupported targets: error without proxying, substitution with it") {
    const auto data = testing::make_tc_dataset(10, 9);
    const IdentityTranslator id(all_languages());
    auto res = make_resources(data, id);
    auto spec = spec_for(Variant::T, {nah});
    spec.proxy_unsupported = false;
    try {
      compile_strategy(spec, res);
      FAIL("expected UnsupportedLanguage");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedLanguage);
    }

    TypologyStore store("fixture", 3);
    store.insert(nah, {1, 0, 1});
    store.insert(grn, {1, 0, 0.9});
    store.insert(quy, {0, 1, 0});
    store.insert(aym, {1, 1, 0});
    std::vector<ProxySubstitution> subs;
    const auto proxied = apply_proxy_substitution(spec_for(Variant::T, {nah}), store, res.supported, &subs);
    CHECK(proxied.mt_for(nah) == grn);
    CHECK(proxied.targets == std::vector<LanguageTag>{nah});
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].mt == grn);

    res.typology = &store;
    const auto compiled = compile_strategy(spec_for(Variant::T, {nah}), res);
    CHECK(compiled.eval_targets == std::vector<LanguageTag>{nah});
    CHECK(compiled.pipeline.mt_for(nah) == grn);
    CHECK(compiled.plan.phases()[0][0].name == "translated:grn");
    CHECK(compiled.metadata.at("proxies").size() == 1);

    // All targets supported: unchanged.
    const auto same = apply_proxy_substitution(spec_for(Variant::T, {grn}), store, res.supported);
    CHECK(same.mt_language.empty());

    TypologyStore missing("fixture", 3);
    missing.insert(grn, {1, 0, 0});
    try {
      apply_proxy_substitution(spec_for(Variant::T, {nah}), missing, res.supported);
      FAIL("expected TargetMissingVector");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TargetMissingVector);
    }
  }

  TEST_CASE("plan manifest round trip") {
    const auto data = testing::make_ner_dataset(30, 10);
    const IdentityTranslator id(all_languages());
    const OracleAligner aligner(IdentityTranslator::permutation, 0.1, 2);
    const auto compiled = compile_strategy(spec_for(Variant::RT_ENS_HR, {grn}), make_resources(data, id, &aligner));
    const auto dir = temp_dir("manifest");
    write_plan_manifest(dir, compiled.plan, compiled.pipeline, compiled.metadata);
    const auto plan_json = nlohmann::json::parse(std::ifstream(dir / "plan.json"));
    CHECK(plan_json.at("format") == "xlt-plan/1");
    CHECK(plan_json.at("model_count") == 4);

    const auto back = read_plan_manifest(dir);
    REQUIRE(back.plan.model_count() == 4);
    for (std::size_t m = 0; m < 4; ++m) {
      const auto& a = compiled.plan.models[m];
      const auto& b = back.plan.models[m];
      CHECK(a.name == b.name);
      CHECK(a.transform == b.transform);
      REQUIRE(a.phases.size() == b.phases.size());
      for (std::size_t p = 0; p < a.phases.size(); ++p) {
        REQUIRE(a.phases[p].size() == b.phases[p].size());
        for (std::size_t c = 0; c < a.phases[p].size(); ++c) {
          CHECK(a.phases[p][c].name == b.phases[p][c].name);
          CHECK(a.phases[p][c].data == b.phases[p][c].data);
          CHECK(a.phases[p][c].projection == b.phases[p][c].projection);
        }
      }
    }
    REQUIRE(back.pipeline);
    CHECK(back.pipeline->transforms == compiled.pipeline.transforms);
    CHECK(back.pipeline->combine == Combine::AverageDistributions);
    CHECK(back.metadata == compiled.metadata);
    std::filesystem::remove_all(dir);
    try {
      read_plan_manifest(dir);
      FAIL("expected StageDependencyMissing");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::StageDependencyMissing);
    }
  }
}
