#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "xlt/align/aligner.hpp"
#include "xlt/error.hpp"
#include "xlt/model/model.hpp"
#include "xlt/translate/backend.hpp"

namespace httplib {
class Server;
}

namespace xlt::wire {

/// {"error": {"code", "message", "index"?}} for a toolkit error.
nlohmann::json error_body(const Error& e);

/// GET /v1/languages and POST /v1/translate backed by `backend`. The
/// handshake advertises `concurrent` as the backend's own flag.
void serve_translator(httplib::Server& server, const TranslatorBackend& backend);

/// POST /v1/align backed by `backend`.
void serve_aligner(httplib::Server& server, const AlignerBackend& backend);

/// Training jobs over plan manifest directories, run one at a time in the
/// background, plus predictions from any emitted checkpoint.
class TaskModelService {
 public:
  explicit TaskModelService(std::shared_ptr<const TaskModel> model);
  ~TaskModelService();

  /// Returns the job id.
  std::string start(const std::filesystem::path& manifest, std::size_t model_index,
                    const Hyperparameters& hyper, std::int64_t seed, double checkpoint_fraction);
  nlohmann::json status(const std::string& job_id) const;
  nlohmann::json predict(const std::string& checkpoint_id, const nlohmann::json& instances) const;

 private:
  struct Job;
  std::shared_ptr<const TaskModel> model_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::size_t next_ = 0;
};

/// POST /v1/train, GET /v1/checkpoints, POST /v1/predict_proba.
void serve_task_model(httplib::Server& server, std::shared_ptr<TaskModelService> service);

}  // namespace xlt::wire
