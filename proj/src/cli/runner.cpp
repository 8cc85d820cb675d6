#include "xlt/cli/runner.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "xlt/align/projection.hpp"
#include "xlt/error.hpp"
#include "xlt/metrics/metrics.hpp"
#include "xlt/model/desk_model.hpp"
#include "xlt/model/ensemble.hpp"
#include "xlt/model/http_task_model.hpp"
#include "xlt/strategy/plan_io.hpp"
#include "xlt/typology/typology.hpp"
#include "xlt/util/files.hpp"
#include "xlt/util/hash.hpp"
#include "xlt/util/text.hpp"

namespace xlt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs f(0..n-1) on at most `jobs` threads; the first failure is rethrown
// after every worker has stopped.
template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  if (n == 0) return;
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::future<void>> futures;
  for (std::size_t w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (;;) {
        const std::size_t i = next++;
        if (i >= n || failed) return;
        try {
          f(i);
        } catch (...) {
          failed = true;
          throw;
        }
      }
    }));
  }
  std::exception_ptr first;
  for (auto& fut : futures) {
    try {
      fut.get();
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

// Remembers translations so repeated test-time transforms and validation
// builds cost one backend call per distinct text.
class MemoTranslator final : public TranslatorBackend {
 public:
  explicit MemoTranslator(const TranslatorBackend& inner) : inner_(inner) {}

  LanguageSet supported_languages() const override { return inner_.supported_languages(); }
  bool accepts_concurrent_requests() const override { return inner_.accepts_concurrent_requests(); }
  std::string identity() const override { return inner_.identity(); }

  std::vector<std::string> translate_batch(std::span<const TranslationRequest> requests,
                                           const DecodingConfig& decoding) const override {
    const std::string dkey = to_json(decoding).dump();
    std::vector<std::string> out(requests.size());
    std::vector<TranslationRequest> missing;
    std::vector<std::size_t> where;
    {
      std::lock_guard lock(mutex_);
      for (std::size_t i = 0; i < requests.size(); ++i) {
        auto it = memo_.find(key(requests[i], dkey));
        if (it != memo_.end()) {
          out[i] = it->second;
        } else {
          missing.push_back(requests[i]);
          where.push_back(i);
        }
      }
    }
    if (missing.empty()) return out;
    std::vector<std::string> fresh;
    try {
      fresh = inner_.translate_batch(missing, decoding);
    } catch (const Error& e) {
      if (e.index() && *e.index() < where.size()) throw Error(e.code(), e.detail(), where[*e.index()]);
      throw;
    }
    std::lock_guard lock(mutex_);
    for (std::size_t k = 0; k < where.size(); ++k) {
      out[where[k]] = fresh.at(k);
      memo_.emplace(key(missing[k], dkey), fresh[k]);
    }
    return out;
  }

 private:
  static std::string key(const TranslationRequest& r, const std::string& dkey) {
    return r.src.str() + '\x1f' + r.tgt.str() + '\x1f' + dkey + '\x1f' + r.text;
  }
  const TranslatorBackend& inner_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::string> memo_;
};

// Selection on the concatenated target validation sets of a multi-target plan.
const std::string pooled_variant = "ValTrgPooled";

std::string file_digest(const fs::path& p) { return sha256_hex(files::read(p)); }

std::string lang_file(const std::string& prefix, const LanguageTag& lang) {
  return prefix + "." + lang.str() + ".jsonl";
}

template <typename Map>
auto find_language(const Map& m, const LanguageTag& lang) {
  for (auto it = m.begin(); it != m.end(); ++it) {
    if (it->first.same_language(lang)) return it;
  }
  return m.end();
}

Family validation_family(Variant v) {
  const Family f = family_of(v);
  return f == Family::ZeroShot ? Family::TTrain : f;
}

struct PlanInfo {
  std::string dir;
  std::vector<LanguageTag> eval_targets;
  std::size_t models = 1;
  bool ensemble = false;
};

struct LoadedPlan {
  PlanManifest manifest;
  PlanInfo info;
};

json digest_source(const DataSource& s) {
  json j{{"digest", file_digest(s.path)},
         {"format", s.format == DataFormat::Tsv ? "tsv" : s.format == DataFormat::Conll ? "conll" : "jsonl"},
         {"language", s.language.str()},
         {"column", s.column}};
  return j;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"build-data", "project", "train", "select",
                                              "ensemble",   "evaluate", "report"};
  return names;
}

const std::vector<std::string>& stage_dependencies(const std::string& stage) {
  static const std::map<std::string, std::vector<std::string>> deps{
      {"build-data", {}},          {"project", {"build-data"}},        {"train", {"project"}},
      {"select", {"train"}},       {"ensemble", {"train"}},            {"evaluate", {"select", "ensemble"}},
      {"report", {"evaluate"}}};
  auto it = deps.find(stage);
  if (it == deps.end()) fail(ErrorCode::ConfigInvalid, "unknown stage '" + stage + "'");
  return it->second;
}

std::int64_t effective_seed(std::optional<std::int64_t> member_seed, std::int64_t run_seed) {
  return member_seed ? *member_seed * 1000003 + run_seed : run_seed;
}

struct Runner::Impl {
  std::optional<Backends> backends;
  std::unique_ptr<MemoTranslator> memo;
  std::map<std::string, Dataset> data;
  std::optional<json> summary;
};

Runner::Runner(RunConfig config, RunOptions options)
    : config_(std::move(config)), options_(std::move(options)), impl_(std::make_unique<Impl>()) {
  if (options_.seed) config_.run_seeds = {*options_.seed};
  if (options_.typology_csv) config_.typology_csv = fs::absolute(*options_.typology_csv);
  if (options_.jobs == 0) options_.jobs = 1;
  choice_ = apply_backend_overrides(config_.backends, options_.backend_overrides);

  // Content-addressed: data enters through its digest, not its path.
  json key = config_.raw;
  key.erase("runs_dir");
  key.erase("backends");
  key.erase("typology_csv");
  json data{{"source_train", digest_source(config_.source_train)}};
  if (config_.source_validation) data["source_validation"] = digest_source(*config_.source_validation);
  for (const auto& [lang, s] : config_.target_test) data["target_test"][lang.str()] = digest_source(s);
  for (const auto& [lang, s] : config_.target_validation) data["target_validation"][lang.str()] = digest_source(s);
  for (auto& [role, src] : key["data"].items()) {
    (void)src;
    key["data"][role] = data[role];
  }
  json backends{{"mt", choice_.mt}, {"align", choice_.align}, {"model", choice_.model}};
  if (choice_.mt.rfind("mock:dict:", 0) == 0) {
    fs::path file(choice_.mt.substr(10));
    if (file.is_relative()) file = config_.base_dir / file;
    backends["mt"] = "mock:dict:sha256:" + file_digest(file);
  }
  key["backends"] = backends;
  key["run_seeds"] = config_.run_seeds;
  if (config_.typology_csv) key["typology"] = file_digest(*config_.typology_csv);
  hash_ = sha256_hex(key.dump()).substr(0, 16);
  run_dir_ = config_.runs_dir / hash_;
}

Runner::~Runner() = default;

std::string Runner::inputs_digest(const std::string& stage) const {
  std::string text = hash_ + "|" + stage;
  for (const auto& dep : stage_dependencies(stage)) {
    const auto record = run_dir_ / dep / "stage.json";
    text += "|" + dep + ":" + (fs::exists(record) ? file_digest(record) : std::string("missing"));
  }
  return sha256_hex(text);
}

bool Runner::is_complete(const std::string& stage) const {
  const auto record_path = run_dir_ / stage / "stage.json";
  if (!fs::exists(record_path)) return false;
  try {
    for (const auto& dep : stage_dependencies(stage)) {
      if (!is_complete(dep)) return false;
    }
    const auto record = json::parse(files::read(record_path));
    if (record.at("inputs") != inputs_digest(stage)) return false;
    for (const auto& [rel, digest] : record.at("files").items()) {
      const auto p = run_dir_ / rel;
      if (!fs::exists(p) || file_digest(p) != digest.get<std::string>()) return false;
    }
    return true;
  } catch (const json::exception&) {
    return false;
  }
}

json Runner::run(const std::string& stage) {
  if (stage == "all") {
    for (const auto& s : stage_names()) ensure(s);
  } else {
    for (const auto& dep : stage_dependencies(stage)) {
      if (!is_complete(dep)) {
        fail(ErrorCode::StageDependencyMissing,
             "stage '" + stage + "' needs '" + dep + "' (run it first or use 'all')");
      }
    }
    ensure(stage);
  }
  write_manifest();
  return manifest();
}

void Runner::ensure(const std::string& stage) {
  if (!options_.force && is_complete(stage)) {
    if (options_.log) *options_.log << "stage " << stage << ": cached\n";
    return;
  }
  const auto dir = run_dir_ / stage;
  fs::remove_all(dir);
  fs::create_directories(dir);
  execute(stage);

  json record{{"stage", stage}, {"inputs", inputs_digest(stage)}, {"files", json::object()}};
  std::vector<fs::path> produced;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() != "stage.json") produced.push_back(entry.path());
  }
  std::sort(produced.begin(), produced.end());
  for (const auto& p : produced) {
    record["files"][fs::relative(p, run_dir_).generic_string()] = file_digest(p);
  }
  files::write(dir / "stage.json", record.dump(2) + "\n");
  if (options_.log) *options_.log << "stage " << stage << ": done (" << produced.size() << " files)\n";
  write_manifest();
}

void Runner::execute(const std::string& stage) {
  auto& im = *impl_;
  const auto dir = run_dir_ / stage;
  const TaskKind task = config_.task;
  const std::size_t jobs = options_.jobs;

  auto backends = [&]() -> Backends& {
    if (!im.backends) {
      im.backends = make_backends(config_, choice_, run_dir_ / "remote-plans");
      im.memo = std::make_unique<MemoTranslator>(*im.backends->translator);
    }
    return *im.backends;
  };
  auto summary = [&]() -> const json& {
    if (!im.summary) im.summary = json::parse(files::read(run_dir_ / "build-data" / "summary.json"));
    return *im.summary;
  };
  auto data = [&](const std::string& file, Split split) -> const Dataset& {
    auto it = im.data.find(file);
    if (it != im.data.end()) return it->second;
    JsonlReadOptions o;
    o.split = split;
    o.task = task;
    const auto& labels = summary().at("labels").at(file);
    o.label_set = labels.get<std::vector<std::string>>();
    return im.data.emplace(file, read_jsonl(files::read(run_dir_ / "build-data" / file), o)).first->second;
  };
  auto plans = [&]() {
    std::vector<PlanInfo> out;
    for (const auto& p : json::parse(files::read(run_dir_ / "project" / "plans.json"))) {
      PlanInfo info;
      info.dir = p.at("dir").get<std::string>();
      for (const auto& t : p.at("eval_targets")) info.eval_targets.push_back(LanguageTag::parse(t.get<std::string>()));
      info.models = p.at("models").get<std::size_t>();
      info.ensemble = p.at("ensemble").get<bool>();
      out.push_back(info);
    }
    return out;
  };
  auto load_plan = [&](const PlanInfo& info) { return LoadedPlan{read_plan_manifest(run_dir_ / info.dir), info}; };
  auto series_dir = [&](std::size_t plan, std::size_t model, std::int64_t seed) {
    return run_dir_ / "train" / ("plan" + std::to_string(plan)) / ("m" + std::to_string(model)) /
           ("s" + std::to_string(seed));
  };
  auto load_checkpoint = [&](const fs::path& sdir, const json& entry, const json& series_json) {
    Checkpoint c;
    c.epoch_fraction = entry.at("epoch_fraction").get<double>();
    if (entry.contains("file")) {
      c.state = deserialize_checkpoint(files::read(sdir / entry.at("file").get<std::string>()));
    } else {
      c.state = std::make_shared<const RemoteCheckpoint>(
          parse_task_kind(series_json.at("task").get<std::string>()),
          series_json.at("labels").get<std::vector<std::string>>(), entry.at("remote_id").get<std::string>());
    }
    return c;
  };
  auto load_series = [&](std::size_t plan, std::size_t model, std::int64_t seed) {
    const auto sdir = series_dir(plan, model, seed);
    const auto j = json::parse(files::read(sdir / "series.json"));
    CheckpointSeries s;
    s.hyper = hyperparameters_from_json(j.at("hyper"));
    for (const auto& e : j.at("checkpoints")) s.checkpoints.push_back(load_checkpoint(sdir, e, j));
    return s;
  };
  auto load_one = [&](std::size_t plan, std::size_t model, std::int64_t seed, double fraction) {
    const auto sdir = series_dir(plan, model, seed);
    const auto j = json::parse(files::read(sdir / "series.json"));
    for (const auto& e : j.at("checkpoints")) {
      if (std::abs(e.at("epoch_fraction").get<double>() - fraction) < 1e-9) return load_checkpoint(sdir, e, j);
    }
    fail(ErrorCode::StageDependencyMissing, "no checkpoint at fraction " + std::to_string(fraction));
  };
  auto validation_resources = [&](const InferencePipeline& pipeline) {
    auto& b = backends();
    ValidationResources r;
    r.source = config_.strategy.source;
    if (config_.source_validation) r.source_validation = data("source_validation.jsonl", Split::Validation);
    for (const auto& [lang, src] : config_.target_validation) {
      r.target_validation.emplace(lang, data(lang_file("validation", lang), Split::Validation));
    }
    r.translator = im.memo.get();
    r.aligner = task == TaskKind::NER ? b.aligner.get() : nullptr;
    r.decoding = config_.strategy.decoding;
    r.transfer.translate.max_batch = config_.max_batch;
    r.transfer.translate.parallelism = jobs;
    r.transfer.align_parallelism = jobs;
    r.mt_language = pipeline.mt_language;
    return r;
  };
  auto inference_context = [&](const InferencePipeline& pipeline, std::optional<LanguageTag> mt_source) {
    auto& b = backends();
    InferenceContext ctx;
    ctx.translator = im.memo.get();
    ctx.aligner = task == TaskKind::NER ? b.aligner.get() : nullptr;
    ctx.decoding = config_.strategy.decoding;
    ctx.translate.max_batch = config_.max_batch;
    ctx.translate.parallelism = jobs;
    (void)pipeline;
    ctx.mt_source = std::move(mt_source);
    return ctx;
  };

  if (stage == "build-data") {
    json labels = json::object(), counts = json::object();
    auto store = [&](const std::string& file, const DataSource& src, Split split) {
      const Dataset d = load_source(src, task, split);
      if (d.empty()) fail(ErrorCode::EmptyInput, src.path.string() + " has no instances");
      files::write(dir / file, write_jsonl(d));
      labels[file] = d.label_set;
      counts[file] = d.size();
    };
    store("source_train.jsonl", config_.source_train, Split::Train);
    if (config_.source_validation) store("source_validation.jsonl", *config_.source_validation, Split::Validation);
    for (const auto& [lang, src] : config_.target_test) store(lang_file("test", lang), src, Split::Test);
    for (const auto& [lang, src] : config_.target_validation) {
      store(lang_file("validation", lang), src, Split::Validation);
    }
    files::write(dir / "summary.json",
                 json{{"task", to_string(task)}, {"labels", labels}, {"counts", counts}}.dump(2) + "\n");
    return;
  }

  if (stage == "project") {
    auto& b = backends();
    std::optional<TypologyStore> typology;
    if (config_.typology_csv) typology = TypologyStore::load_csv(config_.typology_csv->string());
    Resources res = make_resources(data("source_train.jsonl", Split::Train), *im.memo,
                                   task == TaskKind::NER ? b.aligner.get() : nullptr,
                                   typology ? &*typology : nullptr);
    res.supported = b.supported;
    res.transfer.translate.max_batch = config_.max_batch;
    res.transfer.translate.parallelism = jobs;
    res.transfer.align_parallelism = jobs;
    res.parallelism = jobs;
    const auto compiled = compile_for_targets(config_.strategy, res);
    json plans_json = json::array(), proxies = json::array();
    std::vector<std::pair<std::string, ProjectionReport>> table;
    for (std::size_t i = 0; i < compiled.size(); ++i) {
      const auto& c = compiled[i];
      const std::string rel = "project/plan" + std::to_string(i);
      json meta = c.metadata;
      meta["eval_targets"] = json::array();
      for (const auto& t : c.eval_targets) meta["eval_targets"].push_back(t.str());
      write_plan_manifest(run_dir_ / rel, c.plan, c.pipeline, meta);
      plans_json.push_back({{"dir", rel},
                            {"eval_targets", meta["eval_targets"]},
                            {"models", c.plan.model_count()},
                            {"ensemble", c.pipeline.combine == Combine::AverageDistributions}});
      if (c.metadata.contains("proxies")) {
        for (const auto& p : c.metadata["proxies"]) proxies.push_back(p);
      }
      const auto& m = c.plan.models.front();
      for (const auto& phase : m.phases) {
        for (const auto& comp : phase) {
          if (comp.projection) table.emplace_back(comp.name, *comp.projection);
        }
      }
    }
    files::write(dir / "plans.json", plans_json.dump(2) + "\n");
    files::write(dir / "proxies.json", proxies.dump(2) + "\n");
    if (!table.empty()) files::write(dir / "projection.txt", render_projection_table(table));
    return;
  }

  if (stage == "train") {
    auto& b = backends();
    const auto all = plans();
    struct Job {
      std::size_t plan, model;
      std::int64_t run_seed;
    };
    std::vector<Job> work;
    std::vector<LoadedPlan> loaded;
    for (std::size_t p = 0; p < all.size(); ++p) {
      loaded.push_back(load_plan(all[p]));
      for (std::size_t m = 0; m < all[p].models; ++m) {
        for (auto s : config_.run_seeds) work.push_back({p, m, s});
      }
    }
    parallel_for(work.size(), jobs, [&](std::size_t i) {
      const auto& job = work[i];
      const auto& mp = loaded[job.plan].manifest.plan.models.at(job.model);
      const auto seed = effective_seed(mp.seed, job.run_seed);
      const auto series = b.model->train(mp, config_.hyper, seed, config_.checkpoint_fraction);
      const auto sdir = series_dir(job.plan, job.model, job.run_seed);
      const auto& first = *series.checkpoints.front().state;
      json sj{{"plan", job.plan},
              {"model", job.model},
              {"model_name", mp.name},
              {"run_seed", job.run_seed},
              {"seed", seed},
              {"hyper", to_json(series.hyper)},
              {"task", to_string(first.task())},
              {"labels", first.labels()},
              {"backend", b.model->identity()},
              {"checkpoints", json::array()}};
      for (std::size_t k = 0; k < series.checkpoints.size(); ++k) {
        const auto& c = series.checkpoints[k];
        json entry{{"epoch_fraction", c.epoch_fraction}};
        if (const auto* desk = dynamic_cast<const DeskCheckpoint*>(c.state.get())) {
          const std::string file = "ckpt" + std::to_string(k) + ".bin";
          files::write(sdir / file, serialize_checkpoint(*desk));
          entry["file"] = file;
        } else if (const auto* remote = dynamic_cast<const RemoteCheckpoint*>(c.state.get())) {
          entry["remote_id"] = remote->id();
        } else {
          fail(ErrorCode::ContractViolation, "checkpoint kind cannot be stored");
        }
        sj["checkpoints"].push_back(entry);
      }
      files::write(sdir / "series.json", sj.dump(2) + "\n");
    });
    return;
  }

  if (stage == "select" || stage == "ensemble") {
    auto& b = backends();
    const bool ensembles = stage == "ensemble";
    const auto all = plans();
    json records = json::array();
    for (std::size_t p = 0; p < all.size(); ++p) {
      if (all[p].ensemble != ensembles) continue;
      const auto lp = load_plan(all[p]);
      const auto& pipeline = *lp.manifest.pipeline;
      const Family family = validation_family(config_.strategy.variant);
      const auto vres = validation_resources(pipeline);
      for (auto seed : config_.run_seeds) {
        std::vector<CheckpointSeries> members;
        for (std::size_t m = 0; m < all[p].models; ++m) members.push_back(load_series(p, m, seed));
        for (const auto& target : all[p].eval_targets) {
          for (auto variant : config_.selection) {
            MetricSeries series;
            if (!ensembles) {
              const auto validation = build_validation(variant, family, vres, target);
              series = score_series(*b.model, members.front(), validation, jobs);
            } else {
              const auto raw = raw_validation(variant, vres, target);
              std::optional<LanguageTag> mt_source;
              if (variant == ValidationVariant::ValTrg) mt_source = pipeline.mt_for(target);
              const auto ctx = inference_context(pipeline, mt_source);
              const std::size_t n = members.front().checkpoints.size();
              series.resize(n);
              for (std::size_t k = 0; k < n; ++k) {
                std::vector<EnsembleMember> ms;
                for (std::size_t m = 0; m < members.size(); ++m) {
                  ms.push_back({b.model.get(), members[m].checkpoints.at(k), pipeline.transforms.at(m)});
                }
                const auto preds = ensemble_predict_dataset(ms, raw, ctx);
                const auto& labels = members.front().checkpoints.at(k).state->labels();
                series[k] = {members.front().checkpoints[k].epoch_fraction, score_predictions(raw, preds, labels)};
              }
            }
            auto record = to_json(select_from_series(variant, target, std::move(series)));
            record["plan"] = p;
            record["seed"] = seed;
            records.push_back(record);
          }
        }
        // Multi-target plans also select once on the pooled target validation
        // data; each evaluation language is then scored at that checkpoint.
        const auto& targets = all[p].eval_targets;
        const bool has_trg = std::find(config_.selection.begin(), config_.selection.end(),
                                       ValidationVariant::ValTrg) != config_.selection.end();
        if (!ensembles && has_trg && targets.size() > 1) {
          Dataset pooled;
          for (std::size_t t = 0; t < targets.size(); ++t) {
            const auto v = build_validation(ValidationVariant::ValTrg, family, vres, targets[t]);
            if (t == 0) pooled = v.empty_like();
            pooled.sequences.insert(pooled.sequences.end(), v.sequences.begin(), v.sequences.end());
            pooled.tokens.insert(pooled.tokens.end(), v.tokens.begin(), v.tokens.end());
            for (const auto& l : v.label_set) remember_label(pooled.label_set, l);
          }
          const auto chosen = select_from_series(ValidationVariant::ValTrg, targets.front(),
                                                 score_series(*b.model, members.front(), pooled, jobs));
          for (const auto& target : targets) {
            auto record = to_json(chosen);
            record["target"] = target.str();
            record["variant"] = pooled_variant;
            record["plan"] = p;
            record["seed"] = seed;
            records.push_back(record);
          }
        }
      }
    }
    files::write(dir / "selection.json", records.dump(2) + "\n");
    return;
  }

  if (stage == "evaluate") {
    auto& b = backends();
    const auto all = plans();
    std::vector<json> chosen;
    for (const auto* name : {"select", "ensemble"}) {
      for (const auto& r : json::parse(files::read(run_dir_ / name / "selection.json"))) chosen.push_back(r);
    }
    json scores = json::array();
    std::map<std::size_t, LoadedPlan> cache;
    for (const auto& r : chosen) {
      const std::size_t p = r.at("plan").get<std::size_t>();
      if (!cache.count(p)) cache.emplace(p, load_plan(all.at(p)));
      const auto& pipeline = *cache.at(p).manifest.pipeline;
      const auto target = LanguageTag::parse(r.at("target").get<std::string>());
      const auto seed = r.at("seed").get<std::int64_t>();
      const double fraction = r.at("chosen_fraction").get<double>();
      const auto it = find_language(config_.target_test, target);
      const Dataset& test = data(lang_file("test", it->first), Split::Test);
      const auto ctx = inference_context(pipeline, pipeline.mt_for(target));
      std::vector<EnsembleMember> members;
      for (std::size_t m = 0; m < all.at(p).models; ++m) {
        members.push_back({b.model.get(), load_one(p, m, seed, fraction), pipeline.transforms.at(m)});
      }
      const auto preds = members.size() == 1
                             ? transformed_predictions(*b.model, members[0].checkpoint, members[0].transform, test, ctx)
                             : ensemble_predict_dataset(members, test, ctx);
      const double score = score_predictions(test, preds, members[0].checkpoint.state->labels());
      scores.push_back({{"plan", p},
                        {"target", target.str()},
                        {"seed", seed},
                        {"variant", r.at("variant")},
                        {"chosen_fraction", fraction},
                        {"score", score}});
    }
    files::write(dir / "scores.json", scores.dump(2) + "\n");
    return;
  }

  if (stage == "report") {
    const auto scores = json::parse(files::read(run_dir_ / "evaluate" / "scores.json"));
    const std::string strategy(to_string(config_.strategy.variant));
    std::vector<std::string> languages;
    for (const auto& t : config_.strategy.targets) languages.push_back(t.str());
    auto report_for = [&](const std::string& variant, const std::string& name) {
      metrics::ScoreReport r;
      r.strategy = name;
      r.metric = metrics::metric_name(task);
      r.languages = languages;
      // Seeds in configured order for every language.
      for (auto seed : config_.run_seeds) {
        for (const auto& s : scores) {
          if (s.at("variant") == variant && s.at("seed").get<std::int64_t>() == seed) {
            r.add(s.at("target").get<std::string>(), 100.0 * s.at("score").get<double>());
          }
        }
      }
      return r;
    };
    const auto main_report = report_for(std::string(to_string(config_.select_by)), strategy);
    files::write(dir / "report.csv", metrics::render_report_csv({main_report}));
    std::vector<std::string> variants;
    for (auto v : config_.selection) variants.emplace_back(to_string(v));
    for (const auto& s : scores) {
      if (s.at("variant") == pooled_variant) {
        variants.push_back(pooled_variant);
        break;
      }
    }
    std::vector<metrics::ScoreReport> by_variant;
    for (const auto& v : variants) by_variant.push_back(report_for(v, strategy + "/" + v));
    files::write(dir / "selection.csv", metrics::render_report_csv(by_variant));
    json out{{"strategy", strategy},
             {"select_by", to_string(config_.select_by)},
             {"metric", metrics::metric_name(task)},
             {"report", json::parse(metrics::render_report_json({main_report}))},
             {"by_validation", json::parse(metrics::render_report_json(by_variant))}};
    if (task == TaskKind::TC) out["note"] = "TC scores are macro-averaged F1";
    files::write(dir / "report.json", out.dump(2) + "\n");
    const auto projection = run_dir_ / "project" / "projection.txt";
    if (fs::exists(projection)) files::write(dir / "projection.txt", files::read(projection));
    return;
  }

  fail(ErrorCode::ConfigInvalid, "unknown stage '" + stage + "'");
}

json Runner::manifest() const {
  json m{{"format", "xlt-run/1"},
         {"config_hash", hash_},
         {"name", config_.name},
         {"task", to_string(config_.task)},
         {"strategy", to_json(config_.strategy)},
         {"hyper", to_json(config_.hyper)},
         {"checkpoint_fraction", config_.checkpoint_fraction},
         {"seeds", config_.run_seeds},
         {"backends", {{"mt", choice_.mt}, {"align", choice_.align}, {"model", choice_.model}}},
         {"config", config_.raw},
         {"stages", json::object()}};
  for (const auto& s : stage_names()) {
    const auto record = run_dir_ / s / "stage.json";
    if (!fs::exists(record)) continue;
    auto r = json::parse(files::read(record));
    r["digest"] = file_digest(record);
    m["stages"][s] = r;
  }
  auto attach = [&](const std::string& key, const fs::path& rel) {
    const auto p = run_dir_ / rel;
    if (fs::exists(p)) m[key] = json::parse(files::read(p));
  };
  attach("data", "build-data/summary.json");
  attach("proxies", "project/proxies.json");
  if (fs::exists(run_dir_ / "project" / "plans.json")) {
    json reports = json::array();
    for (const auto& p : json::parse(files::read(run_dir_ / "project" / "plans.json"))) {
      const auto plan = json::parse(files::read(run_dir_ / p.at("dir").get<std::string>() / "plan.json"));
      if (plan.contains("metadata") && plan["metadata"].contains("projection_reports")) {
        reports.push_back({{"plan", p.at("dir")}, {"reports", plan["metadata"]["projection_reports"]}});
      }
    }
    m["projection_reports"] = reports;
  }
  json selection = json::array();
  for (const auto* name : {"select", "ensemble"}) {
    const auto p = run_dir_ / name / "selection.json";
    if (!fs::exists(p)) continue;
    for (auto r : json::parse(files::read(p))) {
      r.erase("series");
      selection.push_back(r);
    }
  }
  m["selection_records"] = selection;
  attach("scores", "evaluate/scores.json");
  attach("score_reports", "report/report.json");
  return m;
}

void Runner::write_manifest() const {
  fs::create_directories(run_dir_);
  files::write(run_dir_ / "manifest.json", manifest().dump(2) + "\n");
}

json run_config(const fs::path& config_path, const std::string& stage, const RunOptions& options) {
  Runner runner(load_config(config_path), options);
  if (options.log) *options.log << "run " << runner.config_hash() << " at " << runner.run_dir().string() << "\n";
  return runner.run(stage);
}

std::string closest_lang_report(const LanguageTag& target, const fs::path& typology_csv,
                                const std::string& supported_text) {
  LanguageSet supported;
  for (auto line : text::lines(supported_text)) {
    std::string l(line.substr(0, line.find('#')));
    std::replace(l.begin(), l.end(), ',', ' ');
    std::istringstream in(l);
    std::string code;
    while (in >> code) supported.insert(LanguageTag::parse(code));
  }
  if (supported.empty()) fail(ErrorCode::ConfigInvalid, "supported language list is empty");
  const auto store = TypologyStore::load_csv(typology_csv.string());
  const auto c = closest_supported(target, supported, store);
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << target.str() << " -> " << c.language.str() << " " << c.score << "\n";
  for (const auto& r : c.ranking) out << "  " << r.language.str() << " " << r.score << "\n";
  return out.str();
}

std::string reference_pairs_report(const fs::path& typology_csv) {
  const auto store = TypologyStore::load_csv(typology_csv.string());
  const auto checks = check_reference_pairs(store, reference_closest_pairs());
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const auto& c : checks) {
    out << (c.reproduced ? "MATCH " : "DIFF  ") << c.pair.benchmark << " " << c.pair.target.str() << " -> "
        << c.winner.str() << " " << c.winner_score << " (expected " << c.pair.expected.str() << " "
        << c.expected_score << ")\n";
  }
  out << render_discrepancy_report(checks, store.feature_set());
  return out.str();
}

}  // namespace xlt::cli
