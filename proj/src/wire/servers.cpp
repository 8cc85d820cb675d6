#include "xlt/wire/servers.hpp"

#include <future>

#include <httplib.h>

#include "xlt/corpus/formats.hpp"
#include "xlt/error.hpp"
#include "xlt/strategy/plan_io.hpp"

namespace xlt::wire {

using nlohmann::json;

json error_body(const Error& e) {
  json err = {{"code", to_string(e.code())}, {"message", e.detail()}};
  if (e.index()) err["index"] = *e.index();
  return {{"error", err}};
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::ContractViolation:
    case ErrorCode::MalformedLine:
      return 400;
    case ErrorCode::StageDependencyMissing:
      return 404;
    default:
      return 422;
  }
}

// Runs a JSON handler, mapping failures to error objects.
template <typename F>
void guarded(httplib::Response& res, F&& handler) {
  try {
    reply(res, 200, handler());
  } catch (const Error& e) {
    reply(res, status_for(e.code()), error_body(e));
  } catch (const json::exception& e) {
    reply(res, 400, {{"error", {{"code", "BadRequest"}, {"message", e.what()}}}});
  } catch (const std::exception& e) {
    reply(res, 500, {{"error", {{"code", "Internal"}, {"message", e.what()}}}});
  }
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body);
  if (!body.is_object()) fail(ErrorCode::ContractViolation, "request body must be a JSON object");
  return body;
}

}  // namespace

void serve_translator(httplib::Server& server, const TranslatorBackend& backend) {
  server.Get("/v1/languages", [&backend](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json langs = json::array();
      for (const auto& l : backend.supported_languages()) langs.push_back(l.str());
      return json{{"languages", langs}, {"concurrent", backend.accepts_concurrent_requests()}};
    });
  });
  server.Post("/v1/translate", [&backend](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      DecodingConfig decoding;
      try {
        decoding = decoding_from_json(body.at("decoding"));
        decoding.validate();
      } catch (const Error& e) {
        fail(ErrorCode::ContractViolation, "invalid decoding: " + e.detail());
      }
      const auto src = LanguageTag::parse(body.at("src").get<std::string>());
      const auto tgt = LanguageTag::parse(body.at("tgt").get<std::string>());
      std::vector<TranslationRequest> requests;
      for (const auto& t : body.at("texts")) requests.push_back({t.get<std::string>(), src, tgt});
      return json{{"translations", backend.translate_batch(requests, decoding)}};
    });
  });
}

void serve_aligner(httplib::Server& server, const AlignerBackend& backend) {
  server.Post("/v1/align", [&backend](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      const auto src = body.at("src_tokens").get<std::vector<std::string>>();
      const auto tgt = body.at("tgt_tokens").get<std::vector<std::string>>();
      if (src.empty() || tgt.empty()) fail(ErrorCode::ContractViolation, "token lists must be non-empty");
      const auto aligned = backend.align(src, tgt);
      json links = json::array();
      for (const auto& [i, j] : aligned.links()) links.push_back({i, j});
      return json{{"links", links}};
    });
  });
}

struct TaskModelService::Job {
  std::shared_future<CheckpointSeries> result;
};

TaskModelService::TaskModelService(std::shared_ptr<const TaskModel> model) : model_(std::move(model)) {}

TaskModelService::~TaskModelService() {
  std::lock_guard lock(mutex_);
  for (auto& [id, job] : jobs_) job->result.wait();
}

std::string TaskModelService::start(const std::filesystem::path& manifest, std::size_t model_index,
                                    const Hyperparameters& hyper, std::int64_t seed,
                                    double checkpoint_fraction) {
  auto loaded = read_plan_manifest(manifest);
  if (model_index >= loaded.plan.models.size()) {
    fail(ErrorCode::ContractViolation, "plan has no model " + std::to_string(model_index));
  }
  hyper.validate();
  checkpoints_per_epoch(checkpoint_fraction);
  auto job = std::make_shared<Job>();
  job->result = std::async(std::launch::async,
                           [model = model_, plan = std::move(loaded.plan.models[model_index]), hyper,
                            seed, checkpoint_fraction] {
                             return model->train(plan, hyper, seed, checkpoint_fraction);
                           })
                    .share();
  std::lock_guard lock(mutex_);
  const std::string id = "job" + std::to_string(next_++);
  jobs_[id] = job;
  return id;
}

json TaskModelService::status(const std::string& job_id) const {
  std::shared_ptr<Job> job;
  {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) fail(ErrorCode::StageDependencyMissing, "unknown job '" + job_id + "'");
    job = it->second;
  }
  if (job->result.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
    return {{"status", "running"}};
  }
  try {
    const auto& series = job->result.get();
    json checkpoints = json::array();
    for (std::size_t i = 0; i < series.checkpoints.size(); ++i) {
      checkpoints.push_back({{"epoch_fraction", series.checkpoints[i].epoch_fraction},
                             {"id", job_id + ":" + std::to_string(i)}});
    }
    const auto& state = *series.checkpoints.front().state;
    return {{"status", "done"},
            {"task", to_string(state.task())},
            {"labels", state.labels()},
            {"checkpoints", checkpoints}};
  } catch (const Error& e) {
    return {{"status", "failed"}, {"message", std::string(e.what())}};
  }
}

json TaskModelService::predict(const std::string& checkpoint_id, const json& instances) const {
  const auto colon = checkpoint_id.rfind(':');
  if (colon == std::string::npos) fail(ErrorCode::ContractViolation, "malformed checkpoint id");
  const std::string job_id = checkpoint_id.substr(0, colon);
  const std::size_t index = std::stoul(checkpoint_id.substr(colon + 1));
  std::shared_ptr<Job> job;
  {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) fail(ErrorCode::StageDependencyMissing, "unknown job '" + job_id + "'");
    job = it->second;
  }
  if (job->result.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
    fail(ErrorCode::ContractViolation, "job " + job_id + " is still running");
  }
  const auto& series = job->result.get();
  if (index >= series.checkpoints.size()) fail(ErrorCode::StageDependencyMissing, "unknown checkpoint");
  const auto& checkpoint = series.checkpoints[index];

  std::string lines;
  for (const auto& inst : instances) lines += inst.dump() + "\n";
  JsonlReadOptions opts;
  opts.split = Split::Test;
  opts.task = checkpoint.state->task();
  const Dataset data = read_jsonl(lines, opts);

  json probabilities = json::array();
  for (const auto& prediction : model_->predict_dataset(checkpoint, data)) {
    if (is_sequence_task(data.task)) {
      probabilities.push_back(prediction.front().probabilities());
    } else {
      json tokens = json::array();
      for (const auto& d : prediction) tokens.push_back(d.probabilities());
      probabilities.push_back(tokens);
    }
  }
  return {{"probabilities", probabilities}};
}

void serve_task_model(httplib::Server& server, std::shared_ptr<TaskModelService> service) {
  server.Post("/v1/train", [service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      const auto id = service->start(body.at("plan").get<std::string>(), body.value("model", 0),
                                     hyperparameters_from_json(body.at("hyper")),
                                     body.at("seed").get<std::int64_t>(),
                                     body.at("checkpoint_fraction").get<double>());
      return json{{"job_id", id}};
    });
  });
  server.Get("/v1/checkpoints", [service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return service->status(req.get_param_value("job_id")); });
  });
  server.Post("/v1/predict_proba", [service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      return service->predict(body.at("checkpoint").get<std::string>(), body.at("instances"));
    });
  });
}

}  // namespace xlt::wire
