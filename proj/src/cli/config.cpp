#include "xlt/cli/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "xlt/error.hpp"
#include "xlt/util/files.hpp"

namespace xlt::cli {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& message) { fail(ErrorCode::ConfigInvalid, message); }

json interpolate_all(const json& j) {
  if (j.is_string()) return interpolate_env(j.get<std::string>());
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(interpolate_all(v));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = interpolate_all(v);
    return out;
  }
  return j;
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) invalid(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) invalid("unknown key '" + k + "' in " + where);
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

DataFormat parse_format(const std::string& s) {
  if (s == "tsv") return DataFormat::Tsv;
  if (s == "conll") return DataFormat::Conll;
  if (s == "jsonl") return DataFormat::Jsonl;
  invalid("unknown data format '" + s + "'");
}

TsvSchema parse_schema(const json& j, TaskKind task) {
  TsvSchema s = default_schema(task);
  if (j.is_null()) return s;
  check_keys(j, "schema", {"header", "id", "text_a", "text_b", "label", "closed_labels"});
  s.header = j.value("header", s.header);
  if (j.contains("id")) {
    s.id = j["id"].is_null() ? std::nullopt : std::optional<std::string>(j["id"].get<std::string>());
  }
  s.text_a = j.value("text_a", s.text_a);
  if (j.contains("text_b")) {
    s.text_b = j["text_b"].is_null() ? std::nullopt : std::optional<std::string>(j["text_b"].get<std::string>());
  }
  s.label = j.value("label", s.label);
  if (j.contains("closed_labels")) s.closed_labels = j["closed_labels"].get<std::vector<std::string>>();
  return s;
}

DataSource parse_source(const json& j, const std::filesystem::path& base, TaskKind task,
                        const LanguageTag& default_language, const std::string& where) {
  check_keys(j, where, {"path", "format", "language", "column", "schema"});
  if (!j.contains("path")) invalid(where + " needs a path");
  DataSource s;
  s.path = resolve(base, j.at("path").get<std::string>());
  if (j.contains("format")) {
    s.format = parse_format(j["format"].get<std::string>());
  } else {
    const auto ext = s.path.extension().string();
    s.format = ext == ".jsonl" ? DataFormat::Jsonl : ext == ".conll" || ext == ".txt" ? DataFormat::Conll
                                                                                        : DataFormat::Tsv;
  }
  s.language = j.contains("language") ? LanguageTag::parse(j["language"].get<std::string>()) : default_language;
  s.column = j.value("column", std::size_t{1});
  s.schema = parse_schema(j.value("schema", json()), task);
  return s;
}

std::map<LanguageTag, DataSource> parse_per_language(const json& j, const std::filesystem::path& base,
                                                     TaskKind task, const std::string& where) {
  std::map<LanguageTag, DataSource> out;
  if (j.is_null()) return out;
  if (!j.is_object()) invalid(where + " must map languages to data sources");
  for (const auto& [lang, src] : j.items()) {
    const auto tag = LanguageTag::parse(lang);
    out.emplace(tag, parse_source(src, base, task, tag, where + "." + lang));
  }
  return out;
}

Hyperparameters parse_hyper(const json& j, TaskKind task) {
  auto preset = [&](const std::string& name) {
    if (name == "desk") return Hyperparameters::desk_preset(task);
    if (name == "published") return Hyperparameters::published_preset(task);
    if (name.rfind("published:", 0) == 0) return Hyperparameters::published_preset(name.substr(10));
    invalid("unknown hyperparameter preset '" + name + "'");
  };
  if (j.is_null()) return Hyperparameters::desk_preset(task);
  if (j.is_string()) return preset(j.get<std::string>());
  check_keys(j, "hyper", {"preset", "epochs", "batch_size", "learning_rate", "weight_decay"});
  auto h = preset(j.value("preset", std::string("desk")));
  h.epochs = j.value("epochs", h.epochs);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.weight_decay = j.value("weight_decay", h.weight_decay);
  h.validate();
  return h;
}

}  // namespace

std::string interpolate_env(const std::string& text) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto start = text.find("${", i);
    if (start == std::string::npos) {
      out += text.substr(i);
      break;
    }
    const auto end = text.find('}', start);
    if (end == std::string::npos) invalid("unterminated ${ in '" + text + "'");
    out += text.substr(i, start - i);
    const std::string name = text.substr(start + 2, end - start - 2);
    const char* value = std::getenv(name.c_str());
    if (!value) invalid("environment variable " + name + " is not set");
    out += value;
    i = end + 1;
  }
  return out;
}

RunConfig config_from_json(const json& input, const std::filesystem::path& base_dir) {
  try {
    const json j = interpolate_all(input);
    check_keys(j, "config",
               {"name", "task", "strategy", "data", "backends", "hyper", "checkpoint_fraction", "selection",
                "select_by", "typology_csv", "supported", "run_seeds", "feature_dimension", "runs_dir",
                "max_batch"});
    RunConfig c;
    c.raw = j;
    c.base_dir = base_dir;
    c.name = j.value("name", c.name);
    if (!j.contains("task")) invalid("config needs a task");
    c.task = parse_task_kind(j.at("task").get<std::string>());
    if (!j.contains("strategy")) invalid("config needs a strategy");
    c.strategy = spec_from_json(j.at("strategy"));
    c.strategy.validate();

    if (!j.contains("data")) invalid("config needs data");
    const auto& d = j.at("data");
    check_keys(d, "data", {"source_train", "source_validation", "target_test", "target_validation"});
    if (!d.contains("source_train")) invalid("data needs source_train");
    c.source_train = parse_source(d.at("source_train"), base_dir, c.task, c.strategy.source, "source_train");
    if (d.contains("source_validation")) {
      c.source_validation =
          parse_source(d.at("source_validation"), base_dir, c.task, c.strategy.source, "source_validation");
    }
    c.target_test = parse_per_language(d.value("target_test", json()), base_dir, c.task, "target_test");
    c.target_validation = parse_per_language(d.value("target_validation", json()), base_dir, c.task,
                                             "target_validation");
    for (const auto& t : c.strategy.targets) {
      bool found = false;
      for (const auto& [lang, src] : c.target_test) found = found || lang.same_language(t);
      if (!found) invalid("no target_test data for " + t.str());
    }

    if (j.contains("backends")) {
      const auto& b = j.at("backends");
      check_keys(b, "backends", {"mt", "align", "model"});
      c.backends.mt = b.value("mt", c.backends.mt);
      c.backends.align = b.value("align", c.backends.align);
      c.backends.model = b.value("model", c.backends.model);
    }
    c.hyper = parse_hyper(j.value("hyper", json()), c.task);
    c.checkpoint_fraction = j.value("checkpoint_fraction", c.checkpoint_fraction);
    checkpoints_per_epoch(c.checkpoint_fraction);

    if (j.contains("selection")) {
      c.selection.clear();
      for (const auto& v : j.at("selection")) c.selection.push_back(parse_validation_variant(v.get<std::string>()));
      if (c.selection.empty()) invalid("selection needs at least one validation variant");
    } else {
      c.selection.clear();
      if (c.source_validation) {
        c.selection.push_back(ValidationVariant::ValSrc);
        c.selection.push_back(ValidationVariant::ValMTTrg);
      }
      if (!c.target_validation.empty()) c.selection.push_back(ValidationVariant::ValTrg);
      if (c.selection.empty()) invalid("no validation data configured");
    }
    c.select_by = j.contains("select_by") ? parse_validation_variant(j.at("select_by").get<std::string>())
                                          : c.selection.front();
    if (std::find(c.selection.begin(), c.selection.end(), c.select_by) == c.selection.end()) {
      invalid("select_by must be one of the selection variants");
    }
    for (auto v : c.selection) {
      if (v != ValidationVariant::ValTrg && !c.source_validation) {
        invalid(std::string(to_string(v)) + " needs data.source_validation");
      }
      if (v == ValidationVariant::ValTrg) {
        for (const auto& t : c.strategy.targets) {
          bool found = false;
          for (const auto& [lang, src] : c.target_validation) found = found || lang.same_language(t);
          if (!found) invalid("ValTrg needs target_validation data for " + t.str());
        }
      }
    }

    if (j.contains("typology_csv")) c.typology_csv = resolve(base_dir, j.at("typology_csv").get<std::string>());
    if (j.contains("supported")) {
      LanguageSet s;
      for (const auto& l : j.at("supported")) s.insert(LanguageTag::parse(l.get<std::string>()));
      c.supported = s;
    }
    if (j.contains("run_seeds")) {
      c.run_seeds = j.at("run_seeds").get<std::vector<std::int64_t>>();
      if (c.run_seeds.empty()) invalid("run_seeds must not be empty");
    }
    c.feature_dimension = j.value("feature_dimension", c.feature_dimension);
    if (c.feature_dimension == 0) invalid("feature_dimension must be positive");
    c.runs_dir = resolve(base_dir, j.value("runs_dir", std::string("runs")));
    c.max_batch = j.value("max_batch", c.max_batch);
    if (c.max_batch == 0) invalid("max_batch must be positive");
    return c;
  } catch (const json::exception& e) {
    invalid(std::string("config: ") + e.what());
  } catch (const Error& e) {
    // Parsers of names and tags report bad values as contract violations.
    if (e.code() == ErrorCode::ContractViolation) invalid(std::string("config: ") + e.what());
    throw;
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) invalid("config file " + path.string() + " not found");
  json j;
  try {
    j = json::parse(files::read(path));
  } catch (const json::exception& e) {
    invalid("config " + path.string() + " is not JSON: " + e.what());
  }
  return config_from_json(j, std::filesystem::absolute(path).parent_path());
}

Dataset load_source(const DataSource& source, TaskKind task, Split split) {
  const std::string text = files::read(source.path);
  ParseOptions options;
  options.language = source.language;
  options.split = split;
  Dataset d;
  switch (source.format) {
    case DataFormat::Tsv:
      if (task == TaskKind::NER) invalid("NER data must be CoNLL or JSONL: " + source.path.string());
      d = parse_sequence_tsv(text, source.schema, task, options);
      break;
    case DataFormat::Conll:
      if (task != TaskKind::NER) invalid("CoNLL data is NER only: " + source.path.string());
      d = parse_conll(text, source.column, options);
      break;
    case DataFormat::Jsonl: {
      JsonlReadOptions o;
      o.split = split;
      o.task = task;
      d = read_jsonl(text, o);
      break;
    }
  }
  d.validate();
  return d;
}

}  // namespace xlt::cli
