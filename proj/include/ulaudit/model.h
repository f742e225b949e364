// Copyright 2026 The ulaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small trainable models with hand-written gradients:
//
//   linear    softmax(W x + b)
//   mlp       softmax(W2 act(W1 x + b1) + b2)
//   token-lm  softmax(W mean(E[context]) + b), next-token prediction
//
// Parameters live in one flat vector. Layouts (row-major):
//   linear    W[k][d], b[k]
//   mlp       W1[h][d], b1[h], W2[k][h], b2[k]
//   token-lm  E[V][h], W[V][h], b[V]      (input_dim = context window)

#ifndef ULAUDIT_MODEL_H_
#define ULAUDIT_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ulaudit {

enum class ModelKind { kLinear, kMlp, kTokenLm };
enum class Activation { kRelu, kTanh };

std::string_view ToString(ModelKind kind);
std::string_view ToString(Activation activation);
ModelKind ParseModelKind(std::string_view text);
Activation ParseActivation(std::string_view text);

struct ModelSpec {
  ModelKind kind = ModelKind::kMlp;
  std::size_t input_dim = 2;     // feature dim, or context window for token-lm
  std::size_t hidden_dim = 16;   // 0 for linear; embedding dim for token-lm
  std::size_t num_outputs = 2;   // classes, or vocabulary size
  Activation activation = Activation::kRelu;

  void Validate() const;
  std::size_t ParamCount() const;
  // true on weight coordinates, false on biases.
  std::vector<bool> WeightMask() const;
  bool operator==(const ModelSpec&) const = default;
};

enum class ParamTag { kInitial, kRetrained, kUnlearned, kShadow };
std::string_view ToString(ParamTag tag);
ParamTag ParseParamTag(std::string_view text);

struct ParamVector {
  std::vector<double> values;
  ParamTag tag = ParamTag::kInitial;

  bool operator==(const ParamVector&) const = default;
};

struct TrainHyper {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;

  void Validate() const;
};

enum class SignalKind { kLogitConfidence, kLoss };
std::string_view ToString(SignalKind kind);
SignalKind ParseSignalKind(std::string_view text);

struct SignalValue {
  double value = 0.0;
  SignalKind kind = SignalKind::kLogitConfidence;
};

// A non-owning model input: dense features (linear/mlp) or a token context
// window (token-lm). Exactly one of the two is non-empty.
struct InputRef {
  std::span<const double> features;
  std::span<const std::int32_t> context;
};

// Owning collection of supervised examples for one model family.
class ExampleSet {
 public:
  ExampleSet() = default;

  void AddDense(std::span<const double> features, std::int32_t label);
  void AddContext(std::span<const std::int32_t> context, std::int32_t label);
  void Append(const ExampleSet& other);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  InputRef input(std::size_t i) const;
  std::int32_t label(std::size_t i) const { return labels_[i]; }

 private:
  std::size_t feature_dim_ = 0;
  std::vector<double> features_;
  std::vector<std::int32_t> tokens_;
  std::vector<std::size_t> token_offsets_ = {0};
  std::vector<std::int32_t> labels_;
};

ParamVector InitParams(const ModelSpec& spec, std::uint64_t seed);

// Forward/backward evaluator with cached activations. Not thread-safe; create
// one per thread.
class Evaluator {
 public:
  explicit Evaluator(const ModelSpec& spec);

  // Computes logits and caches the activations needed by Backward.
  std::span<const double> Logits(std::span<const double> params, InputRef in);
  // Accumulates d(loss)/d(params) into grad given d(loss)/d(logits) for the
  // input most recently passed to Logits.
  void Backward(std::span<const double> params, std::span<const double> dlogits,
                std::span<double> grad);
  const ModelSpec& spec() const { return spec_; }

 private:
  ModelSpec spec_;
  InputRef last_input_;
  std::vector<double> hidden_pre_;
  std::vector<double> hidden_;
  std::vector<double> logits_;
  std::vector<double> dhidden_;
};

// Softmax probabilities.
std::vector<double> Forward(const ModelSpec& spec, const ParamVector& params,
                            InputRef in);

void SoftmaxInPlace(std::span<double> values);
std::vector<double> LogSoftmax(std::span<const double> logits);

// Per-example loss head: given logits, writes d(loss)/d(logits) and returns
// the loss. `example` indexes the ExampleSet being evaluated.
using LossHead = std::function<double(std::size_t example,
                                      std::span<const double> logits,
                                      std::span<double> dlogits)>;

// Cross-entropy against the example labels.
LossHead CrossEntropyHead(const ExampleSet& data);

// KL(student || teacher) at temperature T; teacher_probs[i] holds the
// teacher distribution for example i at the same temperature.
LossHead DistillKlHead(const std::vector<std::vector<double>>& teacher_probs,
                       double temperature);

// Per-token negative preference loss
//   (2 / beta) * log(1 + exp(beta * (log p(y) - ref_log_prob[i]))).
LossHead NpoHead(const ExampleSet& data, const std::vector<double>& ref_log_prob,
                 double beta);

// Mean loss over `batch` (indices into data) and the mean gradient. `grad` is
// overwritten.
double BatchGradient(Evaluator& evaluator, std::span<const double> params,
                     const ExampleSet& data, std::span<const std::size_t> batch,
                     const LossHead& head, std::span<double> grad);

// Mean loss over the whole set (no gradient).
double MeanLoss(const ModelSpec& spec, const ParamVector& params,
                const ExampleSet& data, const LossHead& head);

double Accuracy(const ModelSpec& spec, const ParamVector& params,
                const ExampleSet& data);

// SGD with momentum and decoupled-from-loss L2 (PyTorch semantics):
//   v = momentum * v + (direction + weight_decay * theta); theta -= lr * v.
class SgdMomentum {
 public:
  SgdMomentum(std::size_t size, double learning_rate, double momentum,
              double weight_decay);
  void Step(std::span<double> params, std::span<const double> direction);

 private:
  double learning_rate_;
  double momentum_;
  double weight_decay_;
  std::vector<double> velocity_;
};

// Full training from InitParams(spec, hyper.seed).
ParamVector Train(const ModelSpec& spec, const ExampleSet& data,
                  const TrainHyper& hyper);

// Continues cross-entropy SGD from `start` for hyper.epochs epochs.
ParamVector FineTune(const ModelSpec& spec, const ParamVector& start,
                     const ExampleSet& data, const TrainHyper& hyper);

// Aborts with ErrorKind::kCompute when a loss is NaN/inf or above `limit`.
void CheckLoss(double loss, double limit, std::string_view what);

// log(p / (1 - p)) with p = probs[label] clamped to [1e-6, 1 - 1e-6].
SignalValue PhiLogitConfidence(std::span<const double> probs,
                               std::int32_t label);

// Mean negative log-likelihood of `target` given `prefix`, conditioning each
// step on the last input_dim tokens of prefix + preceding targets.
SignalValue PhiSequenceLoss(const ModelSpec& spec, const ParamVector& params,
                            std::span<const std::int32_t> prefix,
                            std::span<const std::int32_t> target);

// Per-token log-probabilities of `target` under the chain rule.
std::vector<double> SequenceLogProbs(const ModelSpec& spec,
                                     const ParamVector& params,
                                     std::span<const std::int32_t> prefix,
                                     std::span<const std::int32_t> target);

// `.params` files: one JSON header line, then little-endian float64 values.
void WriteParams(std::ostream& out, const ModelSpec& spec,
                 const ParamVector& params);
void ReadParams(std::istream& in, ModelSpec* spec, ParamVector* params);
void SaveParams(const std::string& path, const ModelSpec& spec,
                const ParamVector& params);
void LoadParams(const std::string& path, ModelSpec* spec, ParamVector* params);

}  // namespace ulaudit

#endif  // ULAUDIT_MODEL_H_
