#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xlt/model/model.hpp"

namespace xlt {

/// Sparse, L2-normalized feature vector: (hashed index, value) pairs in
/// ascending index order.
using SparseFeatures = std::vector<std::pair<std::uint32_t, double>>;

/// Lowercased character 3-5-grams of each text field, whole words, a bias
/// and, for NLI pairs, a lexical-overlap bucket.
SparseFeatures sequence_features(const SequenceInstance& instance, std::size_t dimension);

/// Window features of token i: the token, its 3-5-grams, its shape and the
/// neighbouring words and their shapes.
SparseFeatures token_features(const std::vector<std::string>& tokens, std::size_t i,
                              std::size_t dimension);

struct DeskModelOptions {
  std::size_t feature_dimension = std::size_t{1} << 15;
};

/// Weights of a multinomial logistic regression, label-major.
class DeskCheckpoint final : public CheckpointState {
 public:
  DeskCheckpoint(TaskKind task, std::vector<std::string> labels, std::size_t dimension,
                 std::vector<double> weights);

  std::size_t dimension() const { return dimension_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Softmax of the label scores.
  Distribution distribution(const SparseFeatures& x) const;

  std::string handle() const override;

 private:
  std::size_t dimension_;
  std::vector<double> weights_;
};

/// Softmax regression over hashed features, trained with mini-batch SGD and
/// decoupled weight decay. Parameters start at zero; the seed drives the
/// per-epoch shuffle only. Sequential plans continue from the previous
/// phase; empty phases are skipped.
class DeskModel final : public TaskModel {
 public:
  explicit DeskModel(DeskModelOptions options = {});

  CheckpointSeries train(const ModelPlan& plan, const Hyperparameters& hyper, std::int64_t seed,
                         double checkpoint_fraction) const override;

  Distribution predict_proba(const Checkpoint& checkpoint,
                             const SequenceInstance& instance) const override;
  std::vector<Distribution> predict_token_proba(const Checkpoint& checkpoint,
                                                const TokenInstance& instance) const override;

  std::string identity() const override;

  /// A zero-parameter checkpoint: every prediction is uniform.
  Checkpoint untrained(TaskKind task, const std::vector<std::string>& label_set) const;

 private:
  DeskModelOptions options_;
};

/// Compact binary form: a JSON header line (task, labels, dimension) and
/// the non-zero weights as little-endian (uint32 index, float64 value)
/// pairs. Round trips bit for bit.
std::string serialize_checkpoint(const DeskCheckpoint& checkpoint);
std::shared_ptr<const DeskCheckpoint> deserialize_checkpoint(std::string_view bytes);

/// Seeded Fisher-Yates permutation of 0..n-1 (platform independent).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace xlt
