#include "xlt/model/http_task_model.hpp"

#include <thread>

#include "xlt/corpus/formats.hpp"
#include "xlt/error.hpp"
#include "xlt/strategy/plan_io.hpp"
#include "xlt/util/hash.hpp"
#include "xlt/util/text.hpp"

namespace xlt {

using nlohmann::json;

std::vector<json> instances_to_json(const Dataset& data) {
  std::vector<json> out;
  const std::string jsonl = write_jsonl(data);
  for (auto line : text::lines(jsonl)) {
    if (!text::is_blank(line)) out.push_back(json::parse(line));
  }
  return out;
}

HttpTaskModel::HttpTaskModel(std::string base_url, std::filesystem::path manifest_root,
                             RetryPolicy policy, std::chrono::milliseconds poll_interval,
                             std::chrono::seconds train_timeout)
    : client_(std::move(base_url), policy),
      manifest_root_(std::move(manifest_root)),
      poll_interval_(poll_interval),
      train_timeout_(train_timeout) {}

namespace {

const RemoteCheckpoint& remote_state(const Checkpoint& checkpoint) {
  const auto* state = dynamic_cast<const RemoteCheckpoint*>(checkpoint.state.get());
  if (!state) fail(ErrorCode::ContractViolation, "not a remote checkpoint");
  return *state;
}

Distribution distribution_from(const json& j, std::size_t n_labels, std::size_t index) {
  if (!j.is_array() || j.size() != n_labels) {
    fail(ErrorCode::BackendFailure, "probability vector does not match the label count", index);
  }
  try {
    return Distribution(j.get<std::vector<double>>());
  } catch (const Error& e) {
    fail(ErrorCode::BackendFailure, "invalid distribution: " + e.detail(), index);
  }
}

}  // namespace

CheckpointSeries HttpTaskModel::train(const ModelPlan& plan, const Hyperparameters& hyper,
                                      std::int64_t seed, double checkpoint_fraction) const {
  hyper.validate();
  checkpoints_per_epoch(checkpoint_fraction);
  if (plan.phases.empty()) fail(ErrorCode::EmptyPlan, "plan '" + plan.name + "' has no phases");

  TrainingPlan single{{plan}};
  const std::string key = plan.name + "|" + std::to_string(seed) + "|" + to_json(hyper).dump();
  const auto dir = std::filesystem::absolute(manifest_root_) /
                   (plan.name + "-" + sha256_hex(key).substr(0, 12));
  write_plan_manifest(dir, single);

  const json reply = client_.post("/v1/train", {{"plan", dir.string()},
                                                {"model", 0},
                                                {"hyper", to_json(hyper)},
                                                {"seed", seed},
                                                {"checkpoint_fraction", checkpoint_fraction}});
  if (!reply.contains("job_id")) fail(ErrorCode::BackendFailure, "train reply without job_id");
  const std::string job = reply.at("job_id").get<std::string>();

  const auto deadline = std::chrono::steady_clock::now() + train_timeout_;
  for (;;) {
    const json status = client_.get("/v1/checkpoints?job_id=" + job);
    const std::string state = status.value("status", "");
    if (state == "failed") {
      fail(ErrorCode::BackendFailure, "training job " + job + " failed: " + status.value("message", ""));
    }
    if (state == "done") {
      CheckpointSeries series;
      series.hyper = hyper;
      const TaskKind task = parse_task_kind(status.at("task").get<std::string>());
      const auto labels = status.at("labels").get<std::vector<std::string>>();
      for (const auto& c : status.at("checkpoints")) {
        series.checkpoints.push_back(
            {c.at("epoch_fraction").get<double>(),
             std::make_shared<const RemoteCheckpoint>(task, labels, c.at("id").get<std::string>())});
      }
      if (series.checkpoints.empty()) fail(ErrorCode::BackendFailure, "job " + job + " emitted no checkpoints");
      return series;
    }
    if (state != "running") fail(ErrorCode::BackendFailure, "unknown job status '" + state + "'");
    if (std::chrono::steady_clock::now() > deadline) {
      fail(ErrorCode::BackendUnreachable, "training job " + job + " timed out");
    }
    std::this_thread::sleep_for(poll_interval_);
  }
}

std::vector<Prediction> HttpTaskModel::predict_dataset(const Checkpoint& checkpoint,
                                                       const Dataset& data) const {
  const auto& state = remote_state(checkpoint);
  if (is_sequence_task(state.task()) != is_sequence_task(data.task)) {
    fail(ErrorCode::TaskMismatch, std::string(to_string(state.task())) + " model given " +
                                      std::string(to_string(data.task)) + " data");
  }
  std::vector<Prediction> out;
  if (data.empty()) return out;
  const json reply = client_.post("/v1/predict_proba",
                                  {{"checkpoint", state.id()}, {"instances", instances_to_json(data)}});
  const auto& probs = reply.at("probabilities");
  if (!probs.is_array() || probs.size() != data.size()) {
    fail(ErrorCode::BackendFailure, "predict_proba answered the wrong number of instances");
  }
  const std::size_t n = state.labels().size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    Prediction p;
    if (is_sequence_task(data.task)) {
      p.push_back(distribution_from(probs[i], n, i));
    } else {
      if (!probs[i].is_array() || probs[i].size() != data.tokens[i].tokens.size()) {
        fail(ErrorCode::BackendFailure, "token distributions do not match the token count", i);
      }
      for (const auto& d : probs[i]) p.push_back(distribution_from(d, n, i));
    }
    out.push_back(std::move(p));
  }
  return out;
}

Distribution HttpTaskModel::predict_proba(const Checkpoint& checkpoint,
                                          const SequenceInstance& instance) const {
  Dataset d;
  d.task = remote_state(checkpoint).task();
  if (!is_sequence_task(d.task)) fail(ErrorCode::TaskMismatch, "NER model given a sequence instance");
  d.split = Split::Test;
  d.sequences.push_back(instance);
  return predict_dataset(checkpoint, d).front().front();
}

std::vector<Distribution> HttpTaskModel::predict_token_proba(const Checkpoint& checkpoint,
                                                             const TokenInstance& instance) const {
  Dataset d;
  d.task = TaskKind::NER;
  d.split = Split::Test;
  d.tokens.push_back(instance);
  return predict_dataset(checkpoint, d).front();
}

}  // namespace xlt
