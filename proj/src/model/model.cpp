#include "xlt/model/model.hpp"

#include <algorithm>
#include <cmath>

#include "xlt/corpus/bio.hpp"
#include "xlt/error.hpp"
#include "xlt/metrics/metrics.hpp"

namespace xlt {

Distribution::Distribution(std::vector<double> probabilities) : p_(std::move(probabilities)) {
  if (p_.empty()) fail(ErrorCode::ContractViolation, "empty distribution");
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::ContractViolation, "distribution entry " + std::to_string(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorCode::ContractViolation, "distribution sums to " + std::to_string(sum));
  }
}

Distribution Distribution::uniform(std::size_t n) {
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::one_hot(std::size_t n, std::size_t k) {
  std::vector<double> p(n, 0.0);
  p.at(k) = 1.0;
  return Distribution(std::move(p));
}

std::size_t argmax(const Distribution& d, std::span<const std::string> labels) {
  if (d.size() != labels.size()) {
    fail(ErrorCode::LabelOrderMismatch, std::to_string(d.size()) + " probabilities for " +
                                            std::to_string(labels.size()) + " labels");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] > d[best] || (d[i] == d[best] && labels[i] < labels[best])) best = i;
  }
  return best;
}

Distribution average(std::span<const Distribution> distributions) {
  if (distributions.empty()) fail(ErrorCode::Empty, "nothing to average");
  const std::size_t n = distributions.front().size();
  std::vector<double> sum(n, 0.0);
  for (const auto& d : distributions) {
    if (d.size() != n) fail(ErrorCode::LabelOrderMismatch, "distributions of different length");
    for (std::size_t i = 0; i < n; ++i) sum[i] += d[i];
  }
  const double k = static_cast<double>(distributions.size());
  for (auto& v : sum) v /= k;
  return Distribution(std::move(sum));
}

void Hyperparameters::validate() const {
  if (epochs <= 0) fail(ErrorCode::ConfigInvalid, "epochs must be positive");
  if (batch_size == 0) fail(ErrorCode::ConfigInvalid, "batch_size must be positive");
  if (!(learning_rate > 0.0)) fail(ErrorCode::ConfigInvalid, "learning_rate must be positive");
  if (!(weight_decay >= 0.0)) fail(ErrorCode::ConfigInvalid, "weight_decay must be >= 0");
}

Hyperparameters Hyperparameters::published_preset(std::string_view benchmark) {
  if (benchmark == "AmNLI") return {2, 32, 2e-6, 0.01};
  if (benchmark == "NusaX") return {20, 32, 1e-5, 0.01};
  if (benchmark == "Masakha") return {10, 32, 1e-5, 0.01};
  fail(ErrorCode::ConfigInvalid, "no preset for benchmark '" + std::string(benchmark) + "'");
}

Hyperparameters Hyperparameters::published_preset(TaskKind task) {
  switch (task) {
    case TaskKind::NLI: return published_preset("AmNLI");
    case TaskKind::TC: return published_preset("NusaX");
    case TaskKind::NER: return published_preset("Masakha");
  }
  return published_preset("AmNLI");
}

Hyperparameters Hyperparameters::desk_preset(TaskKind task) {
  switch (task) {
    case TaskKind::NLI: return {10, 16, 2.0, 1e-4};
    case TaskKind::TC: return {10, 16, 2.0, 1e-4};
    case TaskKind::NER: return {6, 8, 5.0, 1e-4};
  }
  return {5, 16, 0.5, 1e-4};
}

nlohmann::json to_json(const Hyperparameters& h) {
  return {{"epochs", h.epochs},
          {"batch_size", h.batch_size},
          {"learning_rate", h.learning_rate},
          {"weight_decay", h.weight_decay}};
}

Hyperparameters hyperparameters_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigInvalid, "hyperparameters must be an object");
  Hyperparameters h;
  try {
    h.epochs = j.at("epochs").get<int>();
    h.batch_size = j.at("batch_size").get<std::size_t>();
    h.learning_rate = j.at("learning_rate").get<double>();
    h.weight_decay = j.at("weight_decay").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string("hyperparameters: ") + e.what());
  }
  h.validate();
  return h;
}

const Checkpoint& CheckpointSeries::last() const {
  if (checkpoints.empty()) fail(ErrorCode::EmptySeries, "no checkpoints");
  return checkpoints.back();
}

const Checkpoint& CheckpointSeries::at(double epoch_fraction) const {
  for (const auto& c : checkpoints) {
    if (std::abs(c.epoch_fraction - epoch_fraction) < 1e-9) return c;
  }
  fail(ErrorCode::ContractViolation, "no checkpoint at epoch " + std::to_string(epoch_fraction));
}

void CheckpointSeries::validate(double total_epochs) const {
  if (checkpoints.empty()) fail(ErrorCode::EmptySeries, "no checkpoints");
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i].epoch_fraction > checkpoints[i - 1].epoch_fraction)) {
      fail(ErrorCode::ContractViolation, "checkpoint fractions are not increasing", i);
    }
  }
  if (std::abs(checkpoints.back().epoch_fraction - total_epochs) > 1e-9) {
    fail(ErrorCode::ContractViolation, "last checkpoint at " +
                                           std::to_string(checkpoints.back().epoch_fraction) +
                                           ", expected " + std::to_string(total_epochs));
  }
}

std::vector<Prediction> TaskModel::predict_dataset(const Checkpoint& checkpoint,
                                                   const Dataset& data) const {
  std::vector<Prediction> out;
  out.reserve(data.size());
  if (is_sequence_task(data.task)) {
    for (const auto& inst : data.sequences) out.push_back({predict_proba(checkpoint, inst)});
  } else {
    for (const auto& inst : data.tokens) out.push_back(predict_token_proba(checkpoint, inst));
  }
  return out;
}

std::size_t checkpoints_per_epoch(double checkpoint_fraction) {
  if (!(checkpoint_fraction > 0.0) || checkpoint_fraction > 1.0) {
    fail(ErrorCode::ConfigInvalid, "checkpoint fraction must lie in (0, 1]");
  }
  const double k = 1.0 / checkpoint_fraction;
  const double rounded = std::round(k);
  if (std::abs(k - rounded) > 1e-6) {
    fail(ErrorCode::ConfigInvalid,
         "1 / checkpoint fraction must be an integer, got " + std::to_string(k));
  }
  return static_cast<std::size_t>(rounded);
}

std::vector<std::string> decode_prediction(const Prediction& prediction,
                                           std::span<const std::string> labels, TaskKind task) {
  std::vector<std::string> out;
  out.reserve(prediction.size());
  for (const auto& d : prediction) out.push_back(labels[argmax(d, labels)]);
  if (task == TaskKind::NER) return bio::repair(out);
  return out;
}

double score_predictions(const Dataset& data, const std::vector<Prediction>& predictions,
                         std::span<const std::string> labels) {
  if (predictions.size() != data.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                        std::to_string(data.size()) + " instances");
  }
  if (data.task == TaskKind::NER) {
    std::vector<std::vector<std::string>> pred, gold;
    for (std::size_t i = 0; i < data.tokens.size(); ++i) {
      pred.push_back(decode_prediction(predictions[i], labels, data.task));
      gold.push_back(data.tokens[i].tags);
    }
    return metrics::span_f1(pred, gold);
  }
  std::vector<std::string> pred, gold;
  for (std::size_t i = 0; i < data.sequences.size(); ++i) {
    if (predictions[i].size() != 1) {
      fail(ErrorCode::TaskMismatch, "sequence prediction with several distributions", i);
    }
    pred.push_back(decode_prediction(predictions[i], labels, data.task).front());
    gold.push_back(data.sequences[i].label);
  }
  if (data.task == TaskKind::TC) return metrics::macro_f1(pred, gold, data.label_set);
  return metrics::accuracy(pred, gold);
}

double evaluate_checkpoint(const TaskModel& model, const Checkpoint& checkpoint,
                           const Dataset& data) {
  return score_predictions(data, model.predict_dataset(checkpoint, data),
                           checkpoint.state->labels());
}

}  // namespace xlt
