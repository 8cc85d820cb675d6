#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "xlt/align/transfer.hpp"
#include "xlt/cli/runner.hpp"
#include "xlt/error.hpp"
#include "xlt/metrics/metrics.hpp"
#include "xlt/model/desk_model.hpp"
#include "xlt/model/ensemble.hpp"
#include "xlt/selection/selection.hpp"
#include "xlt/strategy/strategy.hpp"
#include "xlt/typology/typology.hpp"

using namespace xlt;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const LanguageTag eng("eng"), grn("grn"), quy("quy"), aym("aym");

// Collects failed checks of one criterion.
struct Outcome {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& text) { notes.push_back(text); }
};

struct Criterion {
  std::string name;
  double time_limit_s;
  std::function<void(Outcome&)> run;
};

std::string fixed(double v, int decimals) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(decimals);
  s << v;
  return s.str();
}

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

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("xlt-acceptance-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Scores keyed by target/seed/validation variant from a run manifest.
std::map<std::string, double> scores_of(const json& manifest) {
  std::map<std::string, double> out;
  for (const auto& s : manifest.at("scores")) {
    out[s.at("target").get<std::string>() + "/" + std::to_string(s.at("seed").get<int>()) + "/" +
        s.at("variant").get<std::string>()] = s.at("score").get<double>();
  }
  return out;
}

// ---------------------------------------------------------------------------

void identity_collapse(Outcome& o) {
  // (a) TTrain plans under identity MT equal clean copies up to metadata.
  const auto tc = testing::make_tc_dataset(100, 4);
  const auto ner = testing::make_ner_dataset(100, 4);
  const IdentityTranslator id(all_languages());
  const OracleAligner oracle(IdentityTranslator::permutation);
  std::size_t compared = 0;
  for (const Dataset* data : {&tc, &ner}) {
    const auto res = make_resources(*data, id, &oracle);
    for (auto v : all_variants()) {
      if (family_of(v) != Family::TTrain) continue;
      const auto compiled = compile_strategy(spec_for(v, targets_for(v)), res);
      for (const auto& m : compiled.plan.models) {
        for (const auto& phase : m.phases) {
          for (const auto& c : phase) {
            bool same = c.data.size() == data->size();
            for (std::size_t i = 0; same && i < data->sequences.size(); ++i) {
              const auto &a = c.data.sequences[i], &b = data->sequences[i];
              same = a.id == b.id && a.text_a == b.text_a && a.text_b == b.text_b && a.label == b.label;
            }
            for (std::size_t i = 0; same && i < data->tokens.size(); ++i) {
              const auto &a = c.data.tokens[i], &b = data->tokens[i];
              same = a.id == b.id && a.tokens == b.tokens && a.tags == b.tags;
            }
            o.check(same, std::string(to_string(v)) + " component " + c.name + " differs beyond metadata");
            ++compared;
          }
        }
      }
    }
  }
  o.note(std::to_string(compared) + " components equal to clean");

  // (b) TTEST and RT end to end equal ZS exactly.
  for (const auto task : {TaskKind::TC, TaskKind::NER}) {
    const std::string task_name(to_string(task));
    const auto dir = fresh_dir("collapse-" + task_name);
    const auto data =
        testing::write_task_files(testing::make_synthetic_task(task, {200, 50, 50}, 5), dir.string());
    std::map<std::string, std::map<std::string, double>> scores;
    for (const std::string variant : {"ZS", "TTEST", "RT"}) {
      const json config{{"name", variant},
                        {"task", task_name},
                        {"strategy", {{"variant", variant}, {"targets", {"grn"}}}},
                        {"data", data},
                        {"backends", {{"mt", "mock:identity"}, {"align", "mock:oracle"}, {"model", "mock:desk"}}},
                        {"hyper", {{"preset", "desk"}, {"epochs", 2}}},
                        {"selection", {"ValSrc", "ValMTTrg", "ValTrg"}},
                        {"run_seeds", {1, 2}},
                        {"feature_dimension", 1 << 13}};
      cli::Runner runner(cli::config_from_json(config, dir), {});
      scores[variant] = scores_of(runner.run("all"));
    }
    o.check(scores["ZS"].size() == 6, task_name + ": expected 6 ZS scores");
    o.check(scores["TTEST"] == scores["ZS"], task_name + ": TTEST scores differ from ZS");
    o.check(scores["RT"] == scores["ZS"], task_name + ": RT scores differ from ZS");
    o.note(task_name + " ZS=TTEST=RT on " + std::to_string(scores["ZS"].size()) + " scores");
    fs::remove_all(dir);
  }
}

void count_laws(Outcome& o) {
  const std::size_t n = 100;
  const auto data = testing::make_tc_dataset(n, 1);
  const IdentityTranslator id(all_languages());
  const auto res = make_resources(data, id);
  std::size_t checked = 0;
  for (auto v : all_variants()) {
    for (auto schedule : {Schedule::Joint, Schedule::Sequential}) {
      if (schedule == Schedule::Sequential && v != Variant::T_SRC && v != Variant::M_T_SRC) continue;
      const auto targets = targets_for(v);
      const auto compiled = compile_strategy(spec_for(v, targets, schedule), res);
      const auto want = testing::closed_form_phase_sizes(v, schedule, n, targets.size(), 3);
      o.check(sizes_of(compiled.plan) == want,
              std::string(to_string(v)) + "/" + std::string(to_string(schedule)) + " sizes differ");
      ++checked;
    }
  }
  // M_T_SRC with k targets: one model, (k+1)|D|.
  for (std::size_t k = 1; k <= 3; ++k) {
    const std::vector<LanguageTag> all{grn, quy, aym};
    const std::vector<LanguageTag> t(all.begin(), all.begin() + static_cast<long>(k));
    const auto c = compile_strategy(spec_for(Variant::M_T_SRC, t), res);
    o.check(sizes_of(c.plan) == std::vector<std::vector<std::size_t>>{{(k + 1) * n}},
            "M_T_SRC k=" + std::to_string(k));
  }
  auto with_clean = spec_for(Variant::RT_ENS_SRC, {grn});
  with_clean.ensemble_with_clean = true;
  o.check(sizes_of(compile_strategy(with_clean, res).plan) ==
              testing::closed_form_phase_sizes(Variant::RT_ENS_SRC, Schedule::Joint, n, 1, 3, true),
          "RT_ENS_SRC with clean data");

  // NER: the deficit against the closed form is exactly the projection discards.
  const auto ner = testing::make_ner_dataset(n, 3);
  const OracleAligner dropping(IdentityTranslator::permutation, 0.25, 9);
  const auto ner_res = make_resources(ner, id, &dropping);
  std::size_t total_discards = 0;
  for (auto v : all_variants()) {
    const auto targets = targets_for(v);
    const auto compiled = compile_strategy(spec_for(v, targets), ner_res);
    const auto want = testing::closed_form_phase_sizes(v, Schedule::Joint, n, targets.size(), 3);
    const auto got = sizes_of(compiled.plan);
    if (got.size() != want.size()) {
      o.check(false, std::string(to_string(v)) + " NER model count");
      continue;
    }
    for (std::size_t m = 0; m < got.size(); ++m) {
      std::size_t discards = 0;
      for (const auto& c : compiled.plan.models[m].phases[0]) {
        if (c.projection) discards += c.projection->discarded();
      }
      total_discards += discards;
      o.check(got[m][0] + discards == want[m][0], std::string(to_string(v)) + " NER deficit != discards");
    }
  }
  o.check(total_discards > 0, "NER fixture discarded nothing");
  o.note(std::to_string(checked) + " variant/schedule plans, " + std::to_string(total_discards) +
         " NER discards accounted for");
}

void projection(Outcome& o) {
  const auto r = testing::exhaustive_projection_check(5, 2, 8, {"X"});
  o.check(r.mismatches == 0, "exhaustive mismatch: " + r.first_mismatch);
  o.note(std::to_string(r.configurations) + " configurations");

  const auto d = testing::make_ner_dataset(1000, 1);
  const ReversalTranslator rev({eng, grn});
  const OracleAligner oracle(ReversalTranslator::permutation);
  const auto kept = translate_and_project(rev, oracle, d, eng, grn, {});
  o.check(kept.report.projection_rate() == 100.0, "oracle rate " + fixed(kept.report.projection_rate(), 2));

  // One single-token entity per sentence, distinct words throughout: it
  // survives exactly when its link does.
  Dataset single;
  single.task = TaskKind::NER;
  single.label_set = {"PER"};
  std::mt19937_64 rng(2024);
  for (std::size_t i = 0; i < 10000; ++i) {
    const std::size_t len = 1 + rng() % 8;
    TokenInstance t{std::to_string(i), {}, std::vector<std::string>(len, "O"), eng, {}};
    for (std::size_t k = 0; k < len; ++k) t.tokens.push_back("s" + std::to_string(i) + "w" + std::to_string(k));
    t.tags[rng() % len] = "B-PER";
    single.tokens.push_back(std::move(t));
  }
  const IdentityTranslator id({eng, grn});
  const OracleAligner half(IdentityTranslator::permutation, 0.5, 7);
  const auto dropped = translate_and_project(id, half, single, eng, grn, {});
  const double rate = dropped.report.projection_rate();
  o.check(std::abs(rate - 50.0) <= 2.0, "50% drop rate " + fixed(rate, 2));
  o.note("oracle 100.0, 50% drop " + fixed(rate, 2));
}

class FixedModel final : public TaskModel {
 public:
  explicit FixedModel(std::vector<double> p) : p_(std::move(p)) {}
  CheckpointSeries train(const ModelPlan&, const Hyperparameters&, std::int64_t, double) const override {
    return {};
  }
  Distribution predict_proba(const Checkpoint&, const SequenceInstance&) const override { return Distribution(p_); }
  std::vector<Distribution> predict_token_proba(const Checkpoint&, const TokenInstance& t) const override {
    return std::vector<Distribution>(t.tokens.size(), Distribution(p_));
  }
  std::string identity() const override { return "fixed"; }

 private:
  std::vector<double> p_;
};

class LabelState final : public CheckpointState {
 public:
  explicit LabelState(std::vector<std::string> l) : CheckpointState(TaskKind::TC, std::move(l)) {}
  std::string handle() const override { return "labels"; }
};

void ensemble(Outcome& o) {
  const DeskModel m({1 << 12});
  const auto task = testing::make_synthetic_task(TaskKind::TC, {100, 10, 50});
  const ModelPlan plan{"m", {{{"clean", task.source_train, 1.0, {}}}}, {}, {}};
  const auto series = m.train(plan, {2, 8, 0.5, 0.0}, 1, 1.0);
  double worst = 0.0;
  for (std::size_t k = 1; k <= 5; ++k) {
    const std::vector<EnsembleMember> members(k, EnsembleMember{&m, series.last(), TestTransform::none()});
    for (const auto& inst : task.source_test.sequences) {
      const auto single = m.predict_proba(series.last(), inst);
      const auto avg = ensemble_predict(members, inst, {});
      for (std::size_t i = 0; i < single.size(); ++i) worst = std::max(worst, std::abs(single[i] - avg[i]));
    }
  }
  o.check(worst <= 1e-9, "identical members deviate by " + std::to_string(worst));

  const FixedModel a({0.8, 0.2}), b({0.4, 0.6});
  const auto state = std::make_shared<const LabelState>(std::vector<std::string>{"x", "y"});
  const std::vector<EnsembleMember> pair{{&a, {1.0, state}, {}}, {&b, {1.0, state}, {}}};
  const auto d = ensemble_predict(pair, {"i", "t", std::nullopt, "x", eng, {}}, {});
  // The exact mean of the doubles nearest 0.8 and 0.4 rounds to 0.6 + 1 ulp.
  o.check(std::abs(d[0] - 0.6) <= 1e-15 && std::abs(d[1] - 0.4) <= 1e-15,
          "worked case gave (" + std::to_string(d[0]) + "," + std::to_string(d[1]) + ")");

  const IdentityTranslator id(all_languages());
  const auto c = compile_strategy(spec_for(Variant::RT_ENS_HR, {grn}), make_resources(testing::make_tc_dataset(20, 7), id));
  o.check(c.plan.model_count() == 4, "RT_ENS_HR model count " + std::to_string(c.plan.model_count()));
  o.check(c.pipeline.combine == Combine::AverageDistributions, "RT_ENS_HR does not average");
  const std::vector<LanguageTag> langs{eng, LanguageTag("tur"), LanguageTag("rus"), LanguageTag("zho")};
  for (std::size_t i = 0; i < 4 && i < c.plan.models.size(); ++i) {
    o.check(c.pipeline.transforms.at(i) == (i == 0 ? TestTransform::translate_to(eng)
                                                   : TestTransform::translate_to(langs[i])),
            "member " + std::to_string(i) + " transform");
    const auto& comps = c.plan.models[i].phases.at(0);
    o.check(comps.size() == 2 && comps[0].name == "clean", "member " + std::to_string(i) + " lacks clean data");
    if (comps.size() < 2) continue;
    o.check(comps[1].name == "roundtrip:eng>grn>" + langs[i].str(), "member " + std::to_string(i) + " component " +
                                                                          comps[1].name);
    for (const auto& inst : comps[1].data.sequences) {
      if (!(inst.language == langs[i]) || !(inst.provenance.pivot == grn)) {
        o.check(false, "member " + std::to_string(i) + " data language/pivot");
        break;
      }
    }
  }
  o.note("max deviation " + std::to_string(worst) + ", members [eng,tur,rus,zho]");
}

void typology(Outcome& o) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto code = [](std::size_t i) {
    std::string s = "aaa";
    s[1] = static_cast<char>('a' + i / 26 % 26);
    s[2] = static_cast<char>('a' + i % 26);
    return s;
  };
  for (int fixture = 0; fixture < 50; ++fixture) {
    const std::size_t dim = 4 + rng() % 20, candidates = 2 + rng() % 10;
    auto random_vec = [&] {
      std::vector<double> v(dim);
      for (auto& x : v) x = u(rng) < 0.3 ? 0.0 : u(rng);
      v[rng() % dim] = 1.0;
      return v;
    };
    TypologyStore store("fixture", dim), scaled("fixture", dim);
    const auto target = random_vec();
    store.insert(LanguageTag("tgt"), target);
    scaled.insert(LanguageTag("tgt"), target);
    LanguageSet supported;
    std::string best;
    double best_score = -2;
    for (std::size_t i = 0; i < candidates; ++i) {
      const auto v = random_vec();
      double ab = 0, aa = 0, bb = 0;
      for (std::size_t j = 0; j < dim; ++j) {
        ab += target[j] * v[j];
        aa += target[j] * target[j];
        bb += v[j] * v[j];
      }
      const double s = ab / std::sqrt(aa * bb);
      if (s > best_score) {
        best_score = s;
        best = code(i);
      }
      store.insert(LanguageTag(code(i)), v);
      auto w = v;
      const double k = 0.01 + 100.0 * u(rng);
      for (auto& x : w) x *= k;
      scaled.insert(LanguageTag(code(i)), w);
      supported.emplace(code(i));
    }
    const auto r = closest_supported(LanguageTag("tgt"), supported, store);
    o.check(r.language.code() == best, "fixture " + std::to_string(fixture) + " argmax");
    o.check(closest_supported(LanguageTag("tgt"), supported, scaled).language == r.language,
            "fixture " + std::to_string(fixture) + " scaling");
  }

  const auto store = TypologyStore::load_csv(std::string(XLT_TEST_DATA_DIR) + "/uriel_knn.csv");
  const auto checks = check_reference_pairs(store, reference_closest_pairs());
  o.check(checks.size() == 12, "expected 12 reference pairs");
  const auto report = render_discrepancy_report(checks, store.feature_set());
  std::size_t reproduced = 0;
  std::string deviations;
  for (const auto& c : checks) {
    if (c.reproduced) {
      ++reproduced;
      continue;
    }
    // Each deviation must be reported with the winner and both scores.
    bool listed = false;
    std::istringstream lines(report);
    for (std::string line; std::getline(lines, line);) {
      listed = listed || (line.find(c.pair.target.str()) != std::string::npos &&
                          line.find("winner " + c.winner.str()) != std::string::npos &&
                          line.find(fixed(c.winner_score, 6)) != std::string::npos &&
                          line.find(fixed(c.expected_score, 6)) != std::string::npos);
    }
    o.check(listed, "deviation " + c.pair.target.str() + " missing from the discrepancy report");
    deviations += " " + c.pair.target.str() + "->" + c.winner.str() + " (" + fixed(c.winner_score, 6) + " vs " +
                  c.pair.expected.str() + " " + fixed(c.expected_score, 6) + ")";
  }
  o.note("50 fixtures; reference pairs reproduced " + std::to_string(reproduced) + "/12" +
         (deviations.empty() ? "" : ", reported:" + deviations));
}

// Test accuracy of a checkpoint, computed from decoded predictions.
double accuracy_on(const TaskModel& m, const Checkpoint& c, const Dataset& d) {
  const auto preds = m.predict_dataset(c, d);
  std::vector<std::string> got, gold;
  for (std::size_t i = 0; i < d.sequences.size(); ++i) {
    got.push_back(decode_prediction(preds[i], c.state->labels(), d.task).at(0));
    gold.push_back(d.sequences[i].label);
  }
  return metrics::accuracy(got, gold);
}

struct DeskRun {
  double zs = 0, tsrc = 0, by_valsrc = 0, by_valtrg = 0;
  MetricSeries valtrg_series;
};

DeskRun desk_run(const testing::SyntheticTask& task, std::int64_t seed) {
  const auto tr = task.translator();
  const auto res = make_resources(task.source_train, tr);
  const DeskModel m;
  const auto hyper = Hyperparameters::desk_preset(TaskKind::TC);

  ValidationResources v;
  v.source = task.source;
  v.source_validation = task.source_validation;
  v.target_validation = {{task.target, task.target_validation}};
  v.translator = &tr;
  const auto valsrc = build_validation(ValidationVariant::ValSrc, Family::TTrain, v, task.target);
  const auto valtrg = build_validation(ValidationVariant::ValTrg, Family::TTrain, v, task.target);

  DeskRun out;
  const auto zs = compile_strategy(spec_for(Variant::ZS, {task.target}), res);
  const auto zs_series = m.train(zs.plan.models.at(0), hyper, seed, 0.1);
  const auto zs_pick = select_checkpoint(score_series(m, zs_series, valtrg));
  out.zs = accuracy_on(m, zs_series.at(zs_pick), task.target_test);

  const auto tsrc = compile_strategy(spec_for(Variant::T_SRC, {task.target}), res);
  const auto series = m.train(tsrc.plan.models.at(0), hyper, seed, 0.1);
  out.valtrg_series = score_series(m, series, valtrg);
  const auto by_trg = select_checkpoint(out.valtrg_series);
  const auto by_src = select_checkpoint(score_series(m, series, valsrc));
  out.tsrc = out.by_valtrg = accuracy_on(m, series.at(by_trg), task.target_test);
  out.by_valsrc = accuracy_on(m, series.at(by_src), task.target_test);
  return out;
}

void end_to_end(Outcome& o) {
  const auto task = testing::make_synthetic_task(TaskKind::TC, {500, 100, 100}, 1);
  double zs = 0, tsrc = 0, valsrc = 0, valtrg = 0;
  const std::vector<std::int64_t> seeds{1, 2, 3};
  for (const auto seed : seeds) {
    const auto r = desk_run(task, seed);
    zs += r.zs / 3;
    tsrc += r.tsrc / 3;
    valsrc += r.by_valsrc / 3;
    valtrg += r.by_valtrg / 3;
    o.note("seed " + std::to_string(seed) + ": ZS " + fixed(100 * r.zs, 1) + ", T_SRC " + fixed(100 * r.tsrc, 1) +
           ", ValSrc " + fixed(100 * r.by_valsrc, 1) + ", ValTrg " + fixed(100 * r.by_valtrg, 1));
  }
  o.check(tsrc >= zs, "T_SRC " + fixed(100 * tsrc, 2) + " < ZS " + fixed(100 * zs, 2));
  o.check(valtrg >= valsrc, "ValTrg " + fixed(100 * valtrg, 2) + " < ValSrc " + fixed(100 * valsrc, 2));
  const auto a = desk_run(task, 1), b = desk_run(task, 1);
  o.check(a.valtrg_series == b.valtrg_series && a.zs == b.zs && a.by_valsrc == b.by_valsrc,
          "repeated run with seed 1 differs");
  o.note("mean accuracy over seeds: ZS " + fixed(100 * zs, 1) + ", T_SRC " + fixed(100 * tsrc, 1) + ", ValSrc " +
         fixed(100 * valsrc, 1) + ", ValTrg " + fixed(100 * valtrg, 1) + "; repeat identical");
}

void metric_oracle(Outcome& o) {
  std::size_t pairs = 0, invalid = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto valid = testing::all_bio_sequences(n, {"X"}, n);
    for (const auto& p : valid) {
      for (const auto& g : valid) {
        const double got = metrics::span_f1(p, g), want = testing::brute_force_span_f1({p}, {g});
        if (std::abs(got - want) > 1e-15) o.check(false, "span_f1 differs from enumeration");
        ++pairs;
      }
    }
    // Strings that are not valid BIO are rejected.
    for (const auto& s : testing::all_tag_strings(n, {"X"})) {
      if (std::find(valid.begin(), valid.end(), s) != valid.end()) continue;
      ++invalid;
      try {
        metrics::span_f1(s, s);
        o.check(false, "invalid BIO accepted");
      } catch (const Error& e) {
        o.check(e.code() == ErrorCode::InvalidBIO, "invalid BIO raised the wrong error");
      }
    }
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto valid = testing::all_bio_sequences(n, {"PER", "LOC"}, n);
    for (const auto& p : valid) {
      for (const auto& g : valid) {
        if (std::abs(metrics::span_f1(p, g) - testing::brute_force_span_f1({p}, {g})) > 1e-15) {
          o.check(false, "two-type span_f1 differs from enumeration");
        }
        ++pairs;
      }
    }
  }

  using L = std::vector<std::string>;
  const L g2{"pos", "pos", "neg", "neg"}, p2{"pos", "neg", "pos", "neg"};
  o.check(metrics::accuracy(p2, g2) == 0.5, "two-class accuracy");
  o.check(metrics::macro_f1(p2, g2, L{"pos", "neg"}) == 0.5, "two-class macro-F1");
  // gold a a a b b c / pred a b c b a c: F1 a = 2/5, b = 1/2, c = 2/3.
  const L g3{"a", "a", "a", "b", "b", "c"}, p3{"a", "b", "c", "b", "a", "c"};
  o.check(metrics::accuracy(p3, g3) == 0.5, "three-class accuracy");
  o.check(std::abs(metrics::macro_f1(p3, g3, L{"a", "b", "c"}) - (0.4 + 0.5 + 2.0 / 3.0) / 3.0) <= 1e-15,
          "three-class macro-F1");
  const L g4{"x", "x", "y", "y", "y"}, p4{"x", "x", "x", "x", "y"};
  o.check(metrics::accuracy(p4, g4) == 0.6, "skewed accuracy");
  // x: tp 2 fp 2 -> 2/3; y: tp 1 fn 2 -> 1/2.
  o.check(std::abs(metrics::macro_f1(p4, g4, L{"x", "y"}) - (2.0 / 3.0 + 0.5) / 2.0) <= 1e-15, "skewed macro-F1");

  const std::vector<double> runs{62.4, 62.7, 62.6};
  const auto agg = metrics::aggregate_seeds(runs);
  const double mean = (62.4 + 62.7 + 62.6) / 3.0;
  double ss = 0;
  for (double r : runs) ss += (r - mean) * (r - mean);
  o.check(std::abs(agg.std - std::sqrt(ss / 2.0)) < 1e-12, "sample std");
  const auto one = metrics::format_score(agg), two = metrics::format_score(agg, 2);
  o.check(one == "62.6±0.2", "rendered " + one);
  o.check(two == "62.57±0.15", "two decimals rendered " + two);
  o.note(std::to_string(pairs) + " tag-string pairs, " + std::to_string(invalid) + " invalid strings rejected, \"" +
         one + "\" / \"" + two + "\"");
}

void selection(Outcome& o) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    MetricSeries s;
    const std::size_t n = 1 + rng() % 40;
    const int levels = 1 + static_cast<int>(rng() % 10);
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(static_cast<double>(rng() % levels) / levels);
      s.emplace_back(0.1 * static_cast<double>(i + 1), scores.back());
    }
    if (select_checkpoint(s) != s[testing::max_scan(scores)].first) {
      o.check(false, "series " + std::to_string(trial) + " disagrees with the scan");
    }
  }
  o.check(select_checkpoint({{0.1, 0.7}, {0.2, 0.7}, {0.3, 0.6}}) == 0.1, "tie not resolved to the earliest");
  o.check(select_checkpoint({{0.1, 0.2}, {0.2, 0.9}, {0.3, 0.9}, {0.4, 0.9}}) == 0.2, "later tie");

  o.check(2 * checkpoints_per_epoch(0.1) == 20, "cadence arithmetic");
  const auto task = testing::make_synthetic_task(TaskKind::TC, {100, 20, 10});
  const DeskModel m({1 << 12});
  auto h = Hyperparameters::desk_preset(TaskKind::TC);
  h.epochs = 2;
  const auto series = m.train({"m", {{{"clean", task.source_train, 1.0, {}}}}, {}, {}}, h, 1, 0.1);
  o.check(series.checkpoints.size() == 20, "desk run produced " + std::to_string(series.checkpoints.size()));
  o.check(std::abs(series.checkpoints.back().epoch_fraction - 2.0) < 1e-12, "last checkpoint not at epoch 2");
  o.note("1000 random series agree, 20 checkpoints");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"identity-collapse", 30, identity_collapse}, {"count-laws", 0, count_laws},
      {"projection", 60, projection},                {"ensemble", 0, ensemble},
      {"typology", 0, typology},                     {"end-to-end-desk", 120, end_to_end},
      {"metric-oracle", 0, metric_oracle},           {"selection", 0, selection},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      o.failures.push_back("runtime " + fixed(secs, 1) + " s exceeds " + fixed(c.time_limit_s, 0) + " s");
    }
    const bool pass = o.failures.empty();
    failed += !pass;
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << " (" << fixed(secs, 1) << " s)";
    for (const auto& n : o.notes) std::cout << "; " << n;
    std::cout << "\n";
    std::size_t shown = 0;
    for (const auto& f : o.failures) {
      if (shown++ == 10) {
        std::cout << "    ... " << o.failures.size() - 10 << " more\n";
        break;
      }
      std::cout << "    " << f << "\n";
    }
    std::cout.flush();
  }
  std::cout << (failed ? "FAIL " : "PASS ") << criteria.size() - static_cast<std::size_t>(failed) << "/"
            << criteria.size() << " criteria\n";
  return failed ? 1 : 0;
}
