#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xlt/corpus/dataset.hpp"
#include "xlt/strategy/plan.hpp"

namespace xlt {

/// Class probabilities indexed by the model's ordered label list.
class Distribution {
 public:
  Distribution() = default;
  /// Throws ContractViolation unless entries are >= 0 and sum to 1 within 1e-9.
  explicit Distribution(std::vector<double> probabilities);

  static Distribution uniform(std::size_t n);
  static Distribution one_hot(std::size_t n, std::size_t k);

  const std::vector<double>& probabilities() const { return p_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }

  bool operator==(const Distribution&) const = default;

 private:
  std::vector<double> p_;
};

/// Index of the most probable label; exact ties go to the label that sorts
/// first as a string.
std::size_t argmax(const Distribution& d, std::span<const std::string> labels);

/// Element-wise arithmetic mean. Errors: Empty, LabelOrderMismatch (sizes).
Distribution average(std::span<const Distribution> distributions);

struct Hyperparameters {
  int epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 1e-5;
  double weight_decay = 0.01;

  /// Throws ConfigInvalid unless epochs, batch size and learning rate are
  /// positive and weight decay is non-negative.
  void validate() const;

  /// Fine-tuning settings of the reference setup: "AmNLI", "NusaX", "Masakha".
  static Hyperparameters published_preset(std::string_view benchmark);
  /// The reference benchmark of each task kind (NLI, TC, NER in that order).
  static Hyperparameters published_preset(TaskKind task);
  /// Settings that make the desk model learn on small synthetic data.
  static Hyperparameters desk_preset(TaskKind task);

  bool operator==(const Hyperparameters&) const = default;
};

nlohmann::json to_json(const Hyperparameters& h);
Hyperparameters hyperparameters_from_json(const nlohmann::json& j);

/// Immutable model state at one point of training.
class CheckpointState {
 public:
  CheckpointState(TaskKind task, std::vector<std::string> labels)
      : task_(task), labels_(std::move(labels)) {}
  virtual ~CheckpointState() = default;

  TaskKind task() const { return task_; }
  /// Output order of every distribution this state produces. For NER, the
  /// tag vocabulary ("O", "B-X", "I-X", ...).
  const std::vector<std::string>& labels() const { return labels_; }

  virtual std::string handle() const = 0;

 private:
  TaskKind task_;
  std::vector<std::string> labels_;
};

struct Checkpoint {
  double epoch_fraction = 0.0;
  std::shared_ptr<const CheckpointState> state;
};

struct CheckpointSeries {
  Hyperparameters hyper;
  std::vector<Checkpoint> checkpoints;

  const Checkpoint& last() const;
  /// Exact match within 1e-9. Throws ContractViolation when absent.
  const Checkpoint& at(double epoch_fraction) const;
  /// Fractions strictly increasing and the last one equal to the total
  /// number of epochs trained.
  void validate(double total_epochs) const;
};

/// One Distribution for a sequence instance, one per token for NER.
using Prediction = std::vector<Distribution>;

class TaskModel {
 public:
  virtual ~TaskModel() = default;

  /// Errors: EmptyPlan, LabelSetMismatch.
  virtual CheckpointSeries train(const ModelPlan& plan, const Hyperparameters& hyper,
                                 std::int64_t seed, double checkpoint_fraction) const = 0;

  /// Errors: TaskMismatch.
  virtual Distribution predict_proba(const Checkpoint& checkpoint,
                                     const SequenceInstance& instance) const = 0;
  virtual std::vector<Distribution> predict_token_proba(const Checkpoint& checkpoint,
                                                        const TokenInstance& instance) const = 0;

  /// Every instance of `data`; the default loops over the single-instance calls.
  virtual std::vector<Prediction> predict_dataset(const Checkpoint& checkpoint,
                                                  const Dataset& data) const;

  virtual std::string identity() const = 0;
};

/// Number of checkpoints per epoch for a fraction such as 0.1 (-> 10).
/// Throws ConfigInvalid unless 1/fraction is a positive integer.
std::size_t checkpoints_per_epoch(double checkpoint_fraction);

/// Label strings for a prediction: argmax for sequence tasks, per-token
/// argmax followed by BIO repair for NER.
std::vector<std::string> decode_prediction(const Prediction& prediction,
                                           std::span<const std::string> labels, TaskKind task);

/// Task metric (0..1) of predictions against the gold labels of `data`.
double score_predictions(const Dataset& data, const std::vector<Prediction>& predictions,
                         std::span<const std::string> labels);

/// predict_dataset followed by score_predictions.
double evaluate_checkpoint(const TaskModel& model, const Checkpoint& checkpoint,
                           const Dataset& data);

}  // namespace xlt
