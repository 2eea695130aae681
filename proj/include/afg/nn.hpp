#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afg/objectives.hpp"
#include "afg/textproc.hpp"

namespace afg::nn {

using text::TokenId;

enum class HeadKind : std::uint32_t { regression = 0, classification = 1 };

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t attention_dim = 32;
  HeadKind head = HeadKind::regression;
  std::size_t n_classes = 3;  // classification only
  std::uint64_t seed = 0;
  std::size_t max_sequence_length = 512;

  // 1 for regression, n_classes for classification.
  std::size_t head_outputs() const noexcept {
    return head == HeadKind::regression ? 1 : n_classes;
  }
  void validate() const;

  bool operator==(const EncoderConfig&) const = default;
};

template <typename T>
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T{}) {}

  T* row(std::size_t r) noexcept { return data.data() + r * cols; }
  const T* row(std::size_t r) const noexcept { return data.data() + r * cols; }
  std::size_t size() const noexcept { return data.size(); }

  bool operator==(const Tensor&) const = default;
};

// Gate rows are stacked as [input; forget; cell; output], each hidden_dim tall.
template <typename T>
struct LstmWeights {
  Tensor<T> input;      // 4H x E
  Tensor<T> recurrent;  // 4H x H
  Tensor<T> bias;       // 4H x 1

  bool operator==(const LstmWeights&) const = default;
};

// All trainable tensors. `visit` walks them in the fixed order used by the
// model file, the optimizer and the gradient checker:
//   embedding, forward.{input,recurrent,bias}, backward.{input,recurrent,bias},
//   attention.projection, attention.context, head.weight, head.bias
template <typename T>
struct ParamSet {
  Tensor<T> embedding;            // V x E
  LstmWeights<T> forward;
  LstmWeights<T> backward;
  Tensor<T> attention_projection;  // A x 2H
  Tensor<T> attention_context;     // A x 1
  Tensor<T> head_weight;           // K x 2H
  Tensor<T> head_bias;             // K x 1

  static constexpr std::size_t kTensorCount = 11;

  static ParamSet zeros(const EncoderConfig& c) {
    const std::size_t h4 = 4 * c.hidden_dim, h2 = 2 * c.hidden_dim, k = c.head_outputs();
    ParamSet p;
    p.embedding = Tensor<T>(c.vocab_size, c.embed_dim);
    for (auto* dir : {&p.forward, &p.backward}) {
      dir->input = Tensor<T>(h4, c.embed_dim);
      dir->recurrent = Tensor<T>(h4, c.hidden_dim);
      dir->bias = Tensor<T>(h4, 1);
    }
    p.attention_projection = Tensor<T>(c.attention_dim, h2);
    p.attention_context = Tensor<T>(c.attention_dim, 1);
    p.head_weight = Tensor<T>(k, h2);
    p.head_bias = Tensor<T>(k, 1);
    return p;
  }

  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    visit([&](std::string_view, const Tensor<T>& t) { n += t.size(); });
    return n;
  }

  bool operator==(const ParamSet&) const = default;

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& s, F& f) {
    f("embedding", s.embedding);
    f("forward.input", s.forward.input);
    f("forward.recurrent", s.forward.recurrent);
    f("forward.bias", s.forward.bias);
    f("backward.input", s.backward.input);
    f("backward.recurrent", s.backward.recurrent);
    f("backward.bias", s.backward.bias);
    f("attention.projection", s.attention_projection);
    f("attention.context", s.attention_context);
    f("head.weight", s.head_weight);
    f("head.bias", s.head_bias);
  }
};

using ModelParams = ParamSet<float>;
using Gradients = ParamSet<double>;

struct Model {
  EncoderConfig config;
  ModelParams params;

  bool operator==(const Model&) const = default;
};

// Weights uniform in [-s, s], s = sqrt(6 / (fan_in + fan_out)) per matrix
// (fan_in = cols, fan_out = rows); biases zero. Deterministic in config.seed.
Model init_model(const EncoderConfig& config);

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

struct Encoding {
  std::vector<double> context;    // 2H
  std::vector<double> attention;  // one weight per (possibly truncated) position
  bool truncated = false;
};

// BiLSTM over the embedded tokens, additive attention pooling
// (score_i = v . tanh(W h_i), weights = softmax(scores)). Sequences longer
// than max_sequence_length are truncated.
Encoding encode(std::span<const TokenId> tokens, const Model& model);

// Raw head outputs for one sequence (1 logit for regression, K for
// classification).
std::vector<double> head_logits(std::span<const TokenId> tokens, const Model& model);

// sigmoid(head(context)), in (0, 1).
double predict_score(std::span<const TokenId> tokens, const Model& model);
double predict_score(std::string_view text, const Model& model, const text::Vocabulary& vocab);

// softmax(head(context)).
std::vector<double> class_probabilities(std::span<const TokenId> tokens, const Model& model);

// (BACKGROUND, TECHNIQUE, OBSERVATION) probabilities; requires a 3-class head.
std::array<double, 3> classify_sentence(std::string_view sentence, const Model& model,
                                        const text::Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

// `target` is the normalized score for regression and the class index for
// classification.
struct Example {
  std::vector<TokenId> tokens;
  double target = 0.0;
};

enum class LossKind { mse, combined, cross_entropy };

struct LossSpec {
  LossKind kind = LossKind::mse;
  double p = 0.0;  // STDE weight for LossKind::combined
};

// Mean batch loss. When `grads` is non-null the analytic gradient is added to
// it (64-bit accumulation over the 32-bit weights).
double batch_loss(const Model& model, std::span<const Example> batch, const LossSpec& loss,
                  Gradients* grads = nullptr);

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Regression only; total_steps is overwritten with epochs * ceil(N / batch).
  objectives::LossSchedule schedule;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StepRecord {
  std::int64_t t = 0;
  double p = 0.0;  // STDE weight used (0 for classification)
  double loss = 0.0;
};

struct TrainLog {
  std::int64_t total_steps = 0;
  std::vector<StepRecord> steps;
  std::vector<double> epoch_mean_loss;
};

struct TrainResult {
  Model model;
  TrainLog log;
};

// epochs * ceil(n / batch_size)
std::int64_t total_steps(std::size_t n, std::size_t epochs, std::size_t batch_size);

// Mini-batch Adam. Batches come from a SplitMix64 shuffle per epoch; the
// regression head is trained on p(t) * STDE + (1 - p(t)) * MSE, the
// classification head on cross-entropy. Throws DivergedError on a non-finite
// loss.
TrainResult train(std::span<const Example> data, const TrainConfig& config, Model model);

Example make_example(std::string_view text, double target, const text::Vocabulary& vocab,
                     std::size_t max_sequence_length);

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

struct GradCheckOptions {
  double epsilon = 1e-4;
  std::size_t n_weights = 256;
  std::uint64_t seed = 0;
  // Fault injection for testing the checker: flip the sign of the analytic
  // gradient of the tensor at this visit() index.
  std::optional<std::size_t> corrupt_tensor;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::string worst_tensor;
};

// Compares analytic gradients with central differences on a stratified sample
// of weights (every tensor contributes; embedding rows only for tokens present
// in the batch). Relative error = |a - n| / max(|a| + |n|, 1e-8).
GradCheckResult grad_check(const Model& model, std::span<const Example> batch, const LossSpec& loss,
                           const GradCheckOptions& options = {});

// Single-sample form: MSE for regression, cross-entropy for classification.
double grad_check(const Model& model, const Example& sample, double epsilon);

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

// "AFGM", version byte 1, config block, tensors in visit() order (u32 rows,
// u32 cols, row-major f32 data; all little-endian), then the FNV-1a 64
// checksum of everything after the version byte.
void save_model(const Model& model, std::ostream& out);
Model load_model(std::istream& in);

}  // namespace afg::nn
