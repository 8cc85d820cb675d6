#include "xlt/strategy/plan_io.hpp"

#include "xlt/corpus/formats.hpp"
#include "xlt/error.hpp"
#include "xlt/util/files.hpp"

namespace xlt {

using nlohmann::json;

json to_json(const TestTransform& transform) {
  if (transform.kind == TestTransform::Kind::None) return {{"kind", "none"}};
  return {{"kind", "translate_to"}, {"language", transform.language->str()}};
}

TestTransform transform_from_json(const json& j) {
  const std::string kind = j.value("kind", "");
  if (kind == "none") return TestTransform::none();
  if (kind == "translate_to") {
    return TestTransform::translate_to(LanguageTag::parse(j.at("language").get<std::string>()));
  }
  fail(ErrorCode::ConfigInvalid, "unknown test transform '" + kind + "'");
}

std::string_view to_string(Combine combine) {
  return combine == Combine::Single ? "single" : "average_distributions";
}

Combine parse_combine(std::string_view text) {
  if (text == "single") return Combine::Single;
  if (text == "average_distributions") return Combine::AverageDistributions;
  fail(ErrorCode::ConfigInvalid, "unknown combine rule '" + std::string(text) + "'");
}

json to_json(const InferencePipeline& pipeline) {
  json transforms = json::array();
  for (const auto& t : pipeline.transforms) transforms.push_back(to_json(t));
  json mt = json::object();
  for (const auto& [eval, used] : pipeline.mt_language) mt[eval.str()] = used.str();
  return {{"transforms", transforms},
          {"combine", to_string(pipeline.combine)},
          {"source", pipeline.source.str()},
          {"mt_language", mt}};
}

InferencePipeline pipeline_from_json(const json& j) {
  InferencePipeline p;
  for (const auto& t : j.at("transforms")) p.transforms.push_back(transform_from_json(t));
  p.combine = parse_combine(j.at("combine").get<std::string>());
  p.source = LanguageTag::parse(j.at("source").get<std::string>());
  const json mt_language = j.value("mt_language", json::object());
  for (const auto& [eval, used] : mt_language.items()) {
    p.mt_language.emplace(LanguageTag::parse(eval), LanguageTag::parse(used.get<std::string>()));
  }
  return p;
}

namespace {

ProjectionReport report_from_json(const json& j) {
  ProjectionReport r;
  r.total = j.at("total").get<std::size_t>();
  r.retained = j.at("retained").get<std::size_t>();
  r.discarded_no_link = j.at("discarded_no_link").get<std::size_t>();
  r.discarded_span_conflict = j.at("discarded_span_conflict").get<std::size_t>();
  r.absorbed_tokens = j.at("absorbed_tokens").get<std::size_t>();
  return r;
}

std::string component_file(std::size_t m, std::size_t p, std::size_t c) {
  return "m" + std::to_string(m) + ".p" + std::to_string(p) + ".c" + std::to_string(c) + ".jsonl";
}

}  // namespace

json write_plan_manifest(const std::filesystem::path& dir, const TrainingPlan& plan,
                         const std::optional<InferencePipeline>& pipeline, const json& metadata) {
  json models = json::array();
  for (std::size_t m = 0; m < plan.models.size(); ++m) {
    const auto& model = plan.models[m];
    json phases = json::array();
    for (std::size_t p = 0; p < model.phases.size(); ++p) {
      json components = json::array();
      for (std::size_t c = 0; c < model.phases[p].size(); ++c) {
        const auto& comp = model.phases[p][c];
        const std::string file = component_file(m, p, c);
        files::write(dir / file, write_jsonl(comp.data));
        components.push_back({{"name", comp.name},
                              {"file", file},
                              {"task", to_string(comp.data.task)},
                              {"split", to_string(comp.data.split)},
                              {"label_set", comp.data.label_set},
                              {"size", comp.data.size()},
                              {"weight", comp.weight},
                              {"projection", comp.projection ? to_json(*comp.projection) : json()}});
      }
      phases.push_back(components);
    }
    json entry = {{"name", model.name}, {"phases", phases}, {"transform", to_json(model.transform)}};
    entry["seed"] = model.seed ? json(*model.seed) : json();
    models.push_back(entry);
  }
  json doc = {{"format", "xlt-plan/1"},
              {"model_count", plan.model_count()},
              {"models", models},
              {"pipeline", pipeline ? to_json(*pipeline) : json()},
              {"metadata", metadata}};
  files::write(dir / "plan.json", doc.dump(2) + "\n");
  return doc;
}

PlanManifest read_plan_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "plan.json";
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::StageDependencyMissing, "no plan manifest at '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(files::read(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, "plan.json: " + std::string(e.what()));
  }
  PlanManifest out;
  try {
    for (const auto& m : doc.at("models")) {
      ModelPlan model;
      model.name = m.at("name").get<std::string>();
      model.transform = transform_from_json(m.at("transform"));
      if (!m.at("seed").is_null()) model.seed = m.at("seed").get<std::int64_t>();
      for (const auto& p : m.at("phases")) {
        Phase phase;
        for (const auto& c : p) {
          JsonlReadOptions opts;
          opts.split = parse_split(c.at("split").get<std::string>());
          opts.task = parse_task_kind(c.at("task").get<std::string>());
          opts.label_set = c.at("label_set").get<std::vector<std::string>>();
          PlanComponent comp;
          comp.name = c.at("name").get<std::string>();
          comp.data = read_jsonl(files::read(dir / c.at("file").get<std::string>()), opts);
          comp.weight = c.value("weight", 1.0);
          if (c.contains("projection") && !c.at("projection").is_null()) {
            comp.projection = report_from_json(c.at("projection"));
          }
          if (comp.data.size() != c.at("size").get<std::size_t>()) {
            fail(ErrorCode::ContractViolation, "component '" + comp.name + "' size differs from plan.json");
          }
          phase.push_back(std::move(comp));
        }
        model.phases.push_back(std::move(phase));
      }
      out.plan.models.push_back(std::move(model));
    }
    if (doc.contains("pipeline") && !doc.at("pipeline").is_null()) {
      out.pipeline = pipeline_from_json(doc.at("pipeline"));
    }
    out.metadata = doc.value("metadata", json::object());
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, "plan.json: " + std::string(e.what()));
  }
  return out;
}

}  // namespace xlt
