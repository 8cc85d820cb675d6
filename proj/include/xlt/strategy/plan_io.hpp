#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "xlt/strategy/plan.hpp"

namespace xlt {

nlohmann::json to_json(const TestTransform& transform);
TestTransform transform_from_json(const nlohmann::json& j);

std::string_view to_string(Combine combine);
Combine parse_combine(std::string_view text);

nlohmann::json to_json(const InferencePipeline& pipeline);
InferencePipeline pipeline_from_json(const nlohmann::json& j);

/// A plan manifest directory: plan.json plus one JSONL file per component
/// ("m<model>.p<phase>.c<component>.jsonl"). plan.json records, for every
/// component, its file, task, split, label set, size and projection report;
/// `metadata` is stored verbatim (proxy substitutions, spec, ...).
/// Returns the written plan.json document.
nlohmann::json write_plan_manifest(const std::filesystem::path& dir, const TrainingPlan& plan,
                                   const std::optional<InferencePipeline>& pipeline = std::nullopt,
                                   const nlohmann::json& metadata = nlohmann::json::object());

struct PlanManifest {
  TrainingPlan plan;
  std::optional<InferencePipeline> pipeline;
  nlohmann::json metadata;
};

/// Errors: StageDependencyMissing (no plan.json), MalformedLine, ConfigInvalid.
PlanManifest read_plan_manifest(const std::filesystem::path& dir);

}  // namespace xlt
