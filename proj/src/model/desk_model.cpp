#include "xlt/model/desk_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>

#include <json.hpp>

#include "xlt/error.hpp"
#include "xlt/util/hash.hpp"
#include "xlt/util/text.hpp"

namespace xlt {

namespace {

constexpr std::size_t kMinGram = 3;
constexpr std::size_t kMaxGram = 5;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class FeatureBuilder {
 public:
  explicit FeatureBuilder(std::size_t dimension) : dimension_(dimension) {}

  void add(std::string_view prefix, std::string_view body) {
    indices_.push_back(
        static_cast<std::uint32_t>(fnv1a64(body, fnv1a64(prefix)) % dimension_));
  }

  void add_ngrams(std::string_view prefix, std::string_view word_or_text) {
    const std::string padded = " " + std::string(word_or_text) + " ";
    for (std::size_t n = kMinGram; n <= kMaxGram; ++n) {
      if (padded.size() < n) break;
      for (std::size_t i = 0; i + n <= padded.size(); ++i) add(prefix, std::string_view(padded).substr(i, n));
    }
  }

  SparseFeatures finish() {
    std::sort(indices_.begin(), indices_.end());
    SparseFeatures out;
    for (auto idx : indices_) {
      if (!out.empty() && out.back().first == idx) {
        out.back().second += 1.0;
      } else {
        out.emplace_back(idx, 1.0);
      }
    }
    double norm = 0.0;
    for (const auto& [i, v] : out) norm += v * v;
    norm = std::sqrt(norm);
    for (auto& [i, v] : out) v /= norm;
    return out;
  }

 private:
  std::size_t dimension_;
  std::vector<std::uint32_t> indices_;
};

void check_dimension(std::size_t dimension) {
  if (dimension == 0 || dimension > (std::size_t{1} << 31)) {
    fail(ErrorCode::ConfigInvalid, "feature dimension must lie in [1, 2^31]");
  }
}

std::string shape_of(const std::string& token) {
  std::string shape;
  for (unsigned char c : token) {
    char s = std::isupper(c) ? 'X' : std::islower(c) ? 'x' : std::isdigit(c) ? 'd' : c < 128 ? 'p' : 'u';
    if (shape.empty() || shape.back() != s) shape += s;
  }
  return shape;
}

// One training example: a sequence instance gives one row, an NER sentence
// one row per token.
struct Example {
  std::vector<SparseFeatures> rows;
  std::vector<std::size_t> labels;
};

std::size_t label_index(const std::vector<std::string>& labels, const std::string& label,
                        std::size_t instance) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) fail(ErrorCode::LabelOutsideSet, "label '" + label + "'", instance);
  return static_cast<std::size_t>(it - labels.begin());
}

std::vector<Example> examples_of(const Phase& phase, const std::vector<std::string>& labels,
                                 std::size_t dimension) {
  std::vector<Example> out;
  out.reserve(phase_size(phase));
  for (const auto& component : phase) {
    const Dataset& d = component.data;
    if (is_sequence_task(d.task)) {
      for (std::size_t i = 0; i < d.sequences.size(); ++i) {
        const auto& inst = d.sequences[i];
        out.push_back({{sequence_features(inst, dimension)}, {label_index(labels, inst.label, i)}});
      }
    } else {
      for (std::size_t i = 0; i < d.tokens.size(); ++i) {
        const auto& inst = d.tokens[i];
        Example ex;
        for (std::size_t t = 0; t < inst.tokens.size(); ++t) {
          ex.rows.push_back(token_features(inst.tokens, t, dimension));
          ex.labels.push_back(label_index(labels, inst.tags[t], i));
        }
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

// Softmax regression with the true weights equal to scale * stored.
class Trainer {
 public:
  Trainer(std::size_t n_labels, std::size_t dimension)
      : labels_(n_labels), dimension_(dimension), w_(n_labels * dimension, 0.0) {}

  void step(const std::vector<Example>& examples, std::span<const std::size_t> batch,
            const Hyperparameters& hyper) {
    // Gradients are taken at the parameters from before the step.
    std::vector<std::vector<double>> residuals;
    std::size_t rows = 0;
    for (std::size_t idx : batch) {
      const auto& ex = examples[idx];
      for (std::size_t r = 0; r < ex.rows.size(); ++r) {
        auto p = probabilities(ex.rows[r]);
        p[ex.labels[r]] -= 1.0;
        residuals.push_back(std::move(p));
        ++rows;
      }
    }
    if (rows == 0) return;
    scale_ *= 1.0 - hyper.learning_rate * hyper.weight_decay;
    const double rate = hyper.learning_rate / static_cast<double>(rows) / scale_;
    std::size_t k = 0;
    for (std::size_t idx : batch) {
      const auto& ex = examples[idx];
      for (const auto& x : ex.rows) {
        const auto& g = residuals[k++];
        for (std::size_t l = 0; l < labels_; ++l) {
          if (g[l] == 0.0) continue;
          double* row = &w_[l * dimension_];
          for (const auto& [f, v] : x) row[f] -= rate * g[l] * v;
        }
      }
    }
    if (scale_ < 1e-6) {
      for (auto& v : w_) v *= scale_;
      scale_ = 1.0;
    }
  }

  std::vector<double> snapshot() const {
    std::vector<double> out(w_);
    for (auto& v : out) v *= scale_;
    return out;
  }

 private:
  std::vector<double> probabilities(const SparseFeatures& x) const {
    std::vector<double> z(labels_, 0.0);
    for (std::size_t l = 0; l < labels_; ++l) {
      const double* row = &w_[l * dimension_];
      double s = 0.0;
      for (const auto& [f, v] : x) s += row[f] * v;
      z[l] = s * scale_;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) {
      v = std::exp(v - m);
      sum += v;
    }
    for (auto& v : z) v /= sum;
    return z;
  }

  std::size_t labels_;
  std::size_t dimension_;
  std::vector<double> w_;
  double scale_ = 1.0;
};

// Output label order shared by every component of the plan.
std::pair<TaskKind, std::vector<std::string>> plan_signature(const ModelPlan& plan) {
  const Dataset* first = nullptr;
  for (const auto& phase : plan.phases) {
    for (const auto& c : phase) {
      if (!first) {
        first = &c.data;
        continue;
      }
      if (c.data.task != first->task) {
        fail(ErrorCode::TaskMismatch, "plan mixes " + std::string(to_string(first->task)) +
                                          " and " + std::string(to_string(c.data.task)));
      }
      if (c.data.label_set != first->label_set) {
        fail(ErrorCode::LabelSetMismatch, "component '" + c.name + "' has a different label set");
      }
    }
  }
  if (!first) fail(ErrorCode::EmptyPlan, "plan '" + plan.name + "' has no datasets");
  std::vector<std::string> labels = first->task == TaskKind::NER
                                        ? ner_tag_vocabulary(first->label_set)
                                        : first->label_set;
  if (labels.empty()) fail(ErrorCode::LabelSetMismatch, "empty label set");
  return {first->task, std::move(labels)};
}

const DeskCheckpoint& desk_state(const Checkpoint& checkpoint, bool sequence) {
  const auto* state = dynamic_cast<const DeskCheckpoint*>(checkpoint.state.get());
  if (!state) fail(ErrorCode::ContractViolation, "not a desk-model checkpoint");
  if (is_sequence_task(state->task()) != sequence) {
    fail(ErrorCode::TaskMismatch, std::string(to_string(state->task())) + " model given " +
                                      (sequence ? "a sequence" : "a token") + " instance");
  }
  return *state;
}

}  // namespace

SparseFeatures sequence_features(const SequenceInstance& instance, std::size_t dimension) {
  check_dimension(dimension);
  FeatureBuilder b(dimension);
  b.add("bias", "");
  const std::string a = lower(instance.text_a);
  b.add_ngrams("ga:", a);
  const auto words_a = text::split_whitespace(a);
  for (const auto& w : words_a) b.add("wa:", w);
  if (instance.text_b) {
    const std::string bt = lower(*instance.text_b);
    b.add_ngrams("gb:", bt);
    const auto words_b = text::split_whitespace(bt);
    for (const auto& w : words_b) b.add("wb:", w);
    const std::set<std::string> in_a(words_a.begin(), words_a.end());
    std::size_t shared = 0;
    for (const auto& w : words_b) shared += in_a.contains(w);
    const double ratio = words_b.empty() ? 0.0 : static_cast<double>(shared) / words_b.size();
    b.add("overlap:", std::to_string(static_cast<int>(ratio * 4.0)));
  }
  return b.finish();
}

SparseFeatures token_features(const std::vector<std::string>& tokens, std::size_t i,
                              std::size_t dimension) {
  check_dimension(dimension);
  FeatureBuilder b(dimension);
  b.add("bias", "");
  const std::string w = lower(tokens.at(i));
  b.add("w:", w);
  b.add_ngrams("g:", w);
  b.add("shape:", shape_of(tokens[i]));
  b.add("prev:", i == 0 ? "<s>" : lower(tokens[i - 1]));
  b.add("next:", i + 1 == tokens.size() ? "</s>" : lower(tokens[i + 1]));
  b.add("prev-shape:", i == 0 ? "<s>" : shape_of(tokens[i - 1]));
  b.add("next-shape:", i + 1 == tokens.size() ? "</s>" : shape_of(tokens[i + 1]));
  if (i == 0) b.add("first", "");
  return b.finish();
}

DeskCheckpoint::DeskCheckpoint(TaskKind task, std::vector<std::string> labels,
                               std::size_t dimension, std::vector<double> weights)
    : CheckpointState(task, std::move(labels)), dimension_(dimension), weights_(std::move(weights)) {
  if (weights_.size() != this->labels().size() * dimension_) {
    fail(ErrorCode::DimensionMismatch, "weight matrix does not match labels x dimension");
  }
}

Distribution DeskCheckpoint::distribution(const SparseFeatures& x) const {
  const std::size_t n = labels().size();
  std::vector<double> z(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    const double* row = &weights_[l * dimension_];
    double s = 0.0;
    for (const auto& [f, v] : x) s += row[f] * v;
    z[l] = s;
  }
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return Distribution(std::move(z));
}

std::string DeskCheckpoint::handle() const {
  const auto bytes = std::string_view(reinterpret_cast<const char*>(weights_.data()),
                                      weights_.size() * sizeof(double));
  char buf[32];
  std::snprintf(buf, sizeof buf, "desk:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

DeskModel::DeskModel(DeskModelOptions options) : options_(options) {
  check_dimension(options_.feature_dimension);
}

std::string DeskModel::identity() const {
  return "desk:softmax-char3-5:dim=" + std::to_string(options_.feature_dimension);
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::uint64_t state = seed;
  for (std::size_t i = n; i > 1; --i) {
    state = splitmix64(state);
    const std::size_t j = static_cast<std::size_t>(unit_interval(state) * static_cast<double>(i));
    std::swap(p[i - 1], p[std::min(j, i - 1)]);
  }
  return p;
}

CheckpointSeries DeskModel::train(const ModelPlan& plan, const Hyperparameters& hyper,
                                  std::int64_t seed, double checkpoint_fraction) const {
  hyper.validate();
  const std::size_t per_epoch = checkpoints_per_epoch(checkpoint_fraction);
  auto [task, labels] = plan_signature(plan);
  const std::size_t dim = options_.feature_dimension;

  Trainer trainer(labels.size(), dim);
  CheckpointSeries series;
  series.hyper = hyper;
  std::size_t epochs_done = 0;
  for (std::size_t phase_index = 0; phase_index < plan.phases.size(); ++phase_index) {
    const auto examples = examples_of(plan.phases[phase_index], labels, dim);
    if (examples.empty()) continue;
    const std::size_t n = examples.size();
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
      const std::uint64_t key = splitmix64(splitmix64(static_cast<std::uint64_t>(seed)) ^
                                           (phase_index * 0x9e37ULL + static_cast<std::uint64_t>(epoch)));
      const auto order = seeded_permutation(n, key);
      std::size_t begin = 0;
      for (std::size_t k = 1; k <= per_epoch; ++k) {
        const std::size_t end = k * n / per_epoch;
        for (std::size_t b = begin; b < end; b += hyper.batch_size) {
          const std::size_t e = std::min(end, b + hyper.batch_size);
          trainer.step(examples, std::span<const std::size_t>(order).subspan(b, e - b), hyper);
        }
        begin = end;
        const std::size_t ticks = (epochs_done + static_cast<std::size_t>(epoch)) * per_epoch + k;
        series.checkpoints.push_back(
            {static_cast<double>(ticks) / static_cast<double>(per_epoch),
             std::make_shared<const DeskCheckpoint>(task, labels, dim, trainer.snapshot())});
      }
    }
    epochs_done += static_cast<std::size_t>(hyper.epochs);
  }
  if (series.checkpoints.empty()) fail(ErrorCode::EmptyPlan, "plan '" + plan.name + "' has no instances");
  return series;
}

Distribution DeskModel::predict_proba(const Checkpoint& checkpoint,
                                      const SequenceInstance& instance) const {
  const auto& state = desk_state(checkpoint, true);
  if ((state.task() == TaskKind::NLI) != instance.text_b.has_value()) {
    fail(ErrorCode::TaskMismatch, std::string(to_string(state.task())) + " model given instance '" +
                                      instance.id + "'");
  }
  return state.distribution(sequence_features(instance, state.dimension()));
}

std::vector<Distribution> DeskModel::predict_token_proba(const Checkpoint& checkpoint,
                                                         const TokenInstance& instance) const {
  const auto& state = desk_state(checkpoint, false);
  std::vector<Distribution> out;
  out.reserve(instance.tokens.size());
  for (std::size_t i = 0; i < instance.tokens.size(); ++i) {
    out.push_back(state.distribution(token_features(instance.tokens, i, state.dimension())));
  }
  return out;
}

Checkpoint DeskModel::untrained(TaskKind task, const std::vector<std::string>& label_set) const {
  auto labels = task == TaskKind::NER ? ner_tag_vocabulary(label_set) : label_set;
  const std::size_t n = labels.size();
  return {0.0, std::make_shared<const DeskCheckpoint>(task, std::move(labels),
                                                      options_.feature_dimension,
                                                      std::vector<double>(n * options_.feature_dimension, 0.0))};
}

namespace {

constexpr std::string_view kMagic = "xlt-desk-checkpoint/1\n";

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view& in) {
  if (in.size() < sizeof(T)) fail(ErrorCode::MalformedLine, "truncated checkpoint");
  T value;
  std::memcpy(&value, in.data(), sizeof(T));
  in.remove_prefix(sizeof(T));
  return value;
}

}  // namespace

std::string serialize_checkpoint(const DeskCheckpoint& checkpoint) {
  static_assert(sizeof(double) == 8);
  const auto& w = checkpoint.weights();
  std::size_t nonzero = 0;
  for (double v : w) nonzero += v != 0.0;
  const nlohmann::json header = {{"task", to_string(checkpoint.task())},
                                 {"labels", checkpoint.labels()},
                                 {"dimension", checkpoint.dimension()},
                                 {"nonzero", nonzero}};
  std::string out(kMagic);
  out += header.dump() + "\n";
  out.reserve(out.size() + nonzero * 12);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(i));
    put<double>(out, w[i]);
  }
  return out;
}

std::shared_ptr<const DeskCheckpoint> deserialize_checkpoint(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) fail(ErrorCode::MalformedLine, "not a desk checkpoint");
  bytes.remove_prefix(kMagic.size());
  const auto eol = bytes.find('\n');
  if (eol == std::string_view::npos) fail(ErrorCode::MalformedLine, "checkpoint header missing");
  const auto header = nlohmann::json::parse(bytes.substr(0, eol), nullptr, false);
  if (header.is_discarded()) fail(ErrorCode::MalformedLine, "checkpoint header is not JSON");
  bytes.remove_prefix(eol + 1);
  const auto task = parse_task_kind(header.at("task").get<std::string>());
  auto labels = header.at("labels").get<std::vector<std::string>>();
  const auto dim = header.at("dimension").get<std::size_t>();
  const auto nonzero = header.at("nonzero").get<std::size_t>();
  std::vector<double> w(labels.size() * dim, 0.0);
  for (std::size_t k = 0; k < nonzero; ++k) {
    const auto i = take<std::uint32_t>(bytes);
    const auto v = take<double>(bytes);
    if (i >= w.size()) fail(ErrorCode::IndexOutOfRange, "checkpoint weight index out of range");
    w[i] = v;
  }
  if (!bytes.empty()) fail(ErrorCode::MalformedLine, "trailing bytes in checkpoint");
  return std::make_shared<const DeskCheckpoint>(task, std::move(labels), dim, std::move(w));
}

}  // namespace xlt
