#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "xlt/model/model.hpp"
#include "xlt/util/http_json.hpp"

namespace xlt {

/// A checkpoint that lives on a remote task-model service.
class RemoteCheckpoint final : public CheckpointState {
 public:
  RemoteCheckpoint(TaskKind task, std::vector<std::string> labels, std::string id)
      : CheckpointState(task, std::move(labels)), id_(std::move(id)) {}

  const std::string& id() const { return id_; }
  std::string handle() const override { return "remote:" + id_; }

 private:
  std::string id_;
};

/// Client of the remote task-model protocol.
///
///   POST /v1/train {"plan": <manifest dir>, "model": 0, "hyper": {...},
///                   "seed": n, "checkpoint_fraction": f} -> {"job_id": id}
///   GET  /v1/checkpoints?job_id=id -> {"status": "running"|"done"|"failed",
///        "task", "labels", "checkpoints": [{"epoch_fraction", "id"}], "message"}
///   POST /v1/predict_proba {"checkpoint": id, "instances": [<jsonl object>]}
///        -> {"probabilities": [...]} one entry per instance, in label order;
///        a list of per-token lists for NER.
///
/// Plans are handed over as manifest directories written under
/// `manifest_root`, which the service must be able to read.
class HttpTaskModel final : public TaskModel {
 public:
  HttpTaskModel(std::string base_url, std::filesystem::path manifest_root,
                RetryPolicy policy = {},
                std::chrono::milliseconds poll_interval = std::chrono::milliseconds(200),
                std::chrono::seconds train_timeout = std::chrono::hours(24));

  CheckpointSeries train(const ModelPlan& plan, const Hyperparameters& hyper, std::int64_t seed,
                         double checkpoint_fraction) const override;

  Distribution predict_proba(const Checkpoint& checkpoint,
                             const SequenceInstance& instance) const override;
  std::vector<Distribution> predict_token_proba(const Checkpoint& checkpoint,
                                                const TokenInstance& instance) const override;
  std::vector<Prediction> predict_dataset(const Checkpoint& checkpoint,
                                          const Dataset& data) const override;

  std::string identity() const override { return "http:" + client_.base_url(); }

 private:
  JsonHttpClient client_;
  std::filesystem::path manifest_root_;
  std::chrono::milliseconds poll_interval_;
  std::chrono::seconds train_timeout_;
};

/// One JSONL object per instance of `data` (the line format of write_jsonl).
std::vector<nlohmann::json> instances_to_json(const Dataset& data);

}  // namespace xlt
