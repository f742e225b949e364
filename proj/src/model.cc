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

#include "ulaudit/model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ulaudit/common.h"

namespace ulaudit {
namespace {

constexpr double kProbClamp = 1e-6;

double LogSumExp(std::span<const double> v) {
  double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view ToString(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear: return "linear";
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kTokenLm: return "token-lm";
  }
  return "?";
}

std::string_view ToString(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "tanh";
}

ModelKind ParseModelKind(std::string_view text) {
  if (text == "linear") return ModelKind::kLinear;
  if (text == "mlp") return ModelKind::kMlp;
  if (text == "token-lm") return ModelKind::kTokenLm;
  Fail(ErrorKind::kInvalidArgument, fmt::format("unknown model kind '{}'", text));
}

Activation ParseActivation(std::string_view text) {
  if (text == "relu") return Activation::kRelu;
  if (text == "tanh") return Activation::kTanh;
  Fail(ErrorKind::kInvalidArgument, fmt::format("unknown activation '{}'", text));
}

std::string_view ToString(ParamTag tag) {
  switch (tag) {
    case ParamTag::kInitial: return "initial";
    case ParamTag::kRetrained: return "retrained";
    case ParamTag::kUnlearned: return "unlearned";
    case ParamTag::kShadow: return "shadow";
  }
  return "?";
}

ParamTag ParseParamTag(std::string_view text) {
  if (text == "initial") return ParamTag::kInitial;
  if (text == "retrained") return ParamTag::kRetrained;
  if (text == "unlearned") return ParamTag::kUnlearned;
  if (text == "shadow") return ParamTag::kShadow;
  Fail(ErrorKind::kInvalidArgument, fmt::format("unknown param tag '{}'", text));
}

std::string_view ToString(SignalKind kind) {
  return kind == SignalKind::kLogitConfidence ? "logit-confidence" : "loss";
}

SignalKind ParseSignalKind(std::string_view text) {
  if (text == "logit-confidence") return SignalKind::kLogitConfidence;
  if (text == "loss") return SignalKind::kLoss;
  Fail(ErrorKind::kInvalidArgument, fmt::format("unknown signal kind '{}'", text));
}

void ModelSpec::Validate() const {
  Require(num_outputs >= 2, "model needs at least 2 classes/tokens");
  Require(input_dim >= 1, "model input_dim must be >= 1");
  Require((hidden_dim == 0) == (kind == ModelKind::kLinear),
          "hidden_dim must be 0 exactly for linear models");
}

std::size_t ModelSpec::ParamCount() const {
  const std::size_t d = input_dim, h = hidden_dim, k = num_outputs;
  switch (kind) {
    case ModelKind::kLinear: return d * k + k;
    case ModelKind::kMlp: return h * d + h + k * h + k;
    case ModelKind::kTokenLm: return k * h + k * h + k;
  }
  return 0;
}

std::vector<bool> ModelSpec::WeightMask() const {
  const std::size_t d = input_dim, h = hidden_dim, k = num_outputs;
  std::vector<bool> mask(ParamCount(), true);
  auto clear = [&](std::size_t from, std::size_t count) {
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(from), count, false);
  };
  switch (kind) {
    case ModelKind::kLinear: clear(d * k, k); break;
    case ModelKind::kMlp:
      clear(h * d, h);
      clear(h * d + h + k * h, k);
      break;
    case ModelKind::kTokenLm: clear(2 * k * h, k); break;
  }
  return mask;
}

void TrainHyper::Validate() const {
  Require(learning_rate > 0, "learning_rate must be > 0");
  Require(batch_size >= 1, "batch_size must be >= 1");
  Require(momentum >= 0 && momentum < 1, "momentum must be in [0, 1)");
  Require(weight_decay >= 0, "weight_decay must be >= 0");
}

void ExampleSet::AddDense(std::span<const double> features, std::int32_t label) {
  Require(tokens_.empty(), "cannot mix dense and token examples");
  if (labels_.empty()) feature_dim_ = features.size();
  Require(features.size() == feature_dim_, "feature dimension mismatch");
  features_.insert(features_.end(), features.begin(), features.end());
  labels_.push_back(label);
}

void ExampleSet::AddContext(std::span<const std::int32_t> context,
                            std::int32_t label) {
  Require(features_.empty() && feature_dim_ == 0,
          "cannot mix dense and token examples");
  Require(!context.empty(), "token context must be non-empty");
  tokens_.insert(tokens_.end(), context.begin(), context.end());
  token_offsets_.push_back(tokens_.size());
  labels_.push_back(label);
}

void ExampleSet::Append(const ExampleSet& other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    InputRef in = other.input(i);
    if (!in.context.empty()) {
      AddContext(in.context, other.label(i));
    } else {
      AddDense(in.features, other.label(i));
    }
  }
}

InputRef ExampleSet::input(std::size_t i) const {
  InputRef in;
  if (feature_dim_ > 0 || tokens_.empty()) {
    in.features = std::span<const double>(features_).subspan(i * feature_dim_,
                                                             feature_dim_);
  } else {
    const std::size_t b = token_offsets_[i], e = token_offsets_[i + 1];
    in.context = std::span<const std::int32_t>(tokens_).subspan(b, e - b);
  }
  return in;
}

ParamVector InitParams(const ModelSpec& spec, std::uint64_t seed) {
  spec.Validate();
  ParamVector p;
  p.values.resize(spec.ParamCount());
  Rng rng = MakeRng(DeriveSeed(seed, {Tag("init")}));
  auto fill = [&](std::size_t from, std::size_t count, std::size_t fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = from; i < from + count; ++i) {
      p.values[i] = (2.0 * Uniform01(rng) - 1.0) * scale;
    }
  };
  const std::size_t d = spec.input_dim, h = spec.hidden_dim,
                    k = spec.num_outputs;
  switch (spec.kind) {
    case ModelKind::kLinear: fill(0, d * k + k, d); break;
    case ModelKind::kMlp:
      fill(0, h * d + h, d);
      fill(h * d + h, k * h + k, h);
      break;
    case ModelKind::kTokenLm:
      // Embedding rows use the embedding width as fan-in.
      fill(0, 2 * k * h + k, h);
      break;
  }
  return p;
}

Evaluator::Evaluator(const ModelSpec& spec)
    : spec_(spec),
      hidden_pre_(spec.hidden_dim),
      hidden_(spec.hidden_dim),
      logits_(spec.num_outputs),
      dhidden_(spec.hidden_dim) {
  spec_.Validate();
}

std::span<const double> Evaluator::Logits(std::span<const double> params,
                                          InputRef in) {
  const std::size_t d = spec_.input_dim, h = spec_.hidden_dim,
                    k = spec_.num_outputs;
  Require(params.size() == spec_.ParamCount(), "parameter length mismatch");
  last_input_ = in;
  const double* p = params.data();
  switch (spec_.kind) {
    case ModelKind::kLinear: {
      Require(in.features.size() == d, "feature dimension mismatch");
      const double* b = p + d * k;
      for (std::size_t c = 0; c < k; ++c) {
        double z = b[c];
        for (std::size_t i = 0; i < d; ++i) z += p[c * d + i] * in.features[i];
        logits_[c] = z;
      }
      break;
    }
    case ModelKind::kMlp: {
      Require(in.features.size() == d, "feature dimension mismatch");
      const double* w1 = p;
      const double* b1 = p + h * d;
      const double* w2 = b1 + h;
      const double* b2 = w2 + k * h;
      for (std::size_t j = 0; j < h; ++j) {
        double z = b1[j];
        for (std::size_t i = 0; i < d; ++i) z += w1[j * d + i] * in.features[i];
        hidden_pre_[j] = z;
        hidden_[j] = spec_.activation == Activation::kRelu ? std::max(z, 0.0)
                                                           : std::tanh(z);
      }
      for (std::size_t c = 0; c < k; ++c) {
        double z = b2[c];
        for (std::size_t j = 0; j < h; ++j) z += w2[c * h + j] * hidden_[j];
        logits_[c] = z;
      }
      break;
    }
    case ModelKind::kTokenLm: {
      Require(!in.context.empty(), "token-lm needs a non-empty context");
      const double* emb = p;
      const double* w = p + k * h;
      const double* b = w + k * h;
      std::fill(hidden_.begin(), hidden_.end(), 0.0);
      for (std::int32_t t : in.context) {
        Require(t >= 0 && static_cast<std::size_t>(t) < k, "token out of range");
        const double* row = emb + static_cast<std::size_t>(t) * h;
        for (std::size_t j = 0; j < h; ++j) hidden_[j] += row[j];
      }
      const double inv = 1.0 / static_cast<double>(in.context.size());
      for (std::size_t j = 0; j < h; ++j) hidden_[j] *= inv;
      for (std::size_t c = 0; c < k; ++c) {
        double z = b[c];
        for (std::size_t j = 0; j < h; ++j) z += w[c * h + j] * hidden_[j];
        logits_[c] = z;
      }
      break;
    }
  }
  return logits_;
}

void Evaluator::Backward(std::span<const double> params,
                         std::span<const double> dlogits,
                         std::span<double> grad) {
  const std::size_t d = spec_.input_dim, h = spec_.hidden_dim,
                    k = spec_.num_outputs;
  const double* p = params.data();
  double* g = grad.data();
  const InputRef& in = last_input_;
  switch (spec_.kind) {
    case ModelKind::kLinear: {
      for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < d; ++i) g[c * d + i] += dlogits[c] * in.features[i];
        g[d * k + c] += dlogits[c];
      }
      break;
    }
    case ModelKind::kMlp: {
      const double* w2 = p + h * d + h;
      double* gw1 = g;
      double* gb1 = g + h * d;
      double* gw2 = gb1 + h;
      double* gb2 = gw2 + k * h;
      std::fill(dhidden_.begin(), dhidden_.end(), 0.0);
      for (std::size_t c = 0; c < k; ++c) {
        const double dc = dlogits[c];
        gb2[c] += dc;
        for (std::size_t j = 0; j < h; ++j) {
          gw2[c * h + j] += dc * hidden_[j];
          dhidden_[j] += dc * w2[c * h + j];
        }
      }
      for (std::size_t j = 0; j < h; ++j) {
        double dpre;
        if (spec_.activation == Activation::kRelu) {
          dpre = hidden_pre_[j] > 0.0 ? dhidden_[j] : 0.0;
        } else {
          dpre = dhidden_[j] * (1.0 - hidden_[j] * hidden_[j]);
        }
        gb1[j] += dpre;
        for (std::size_t i = 0; i < d; ++i) gw1[j * d + i] += dpre * in.features[i];
      }
      break;
    }
    case ModelKind::kTokenLm: {
      const double* w = p + k * h;
      double* gemb = g;
      double* gw = g + k * h;
      double* gb = gw + k * h;
      std::fill(dhidden_.begin(), dhidden_.end(), 0.0);
      for (std::size_t c = 0; c < k; ++c) {
        const double dc = dlogits[c];
        if (dc == 0.0) continue;
        gb[c] += dc;
        for (std::size_t j = 0; j < h; ++j) {
          gw[c * h + j] += dc * hidden_[j];
          dhidden_[j] += dc * w[c * h + j];
        }
      }
      const double inv = 1.0 / static_cast<double>(in.context.size());
      for (std::int32_t t : in.context) {
        double* row = gemb + static_cast<std::size_t>(t) * h;
        for (std::size_t j = 0; j < h; ++j) row[j] += dhidden_[j] * inv;
      }
      break;
    }
  }
}

void SoftmaxInPlace(std::span<double> values) {
  const double m = *std::max_element(values.begin(), values.end());
  double s = 0.0;
  for (double& v : values) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : values) v /= s;
}

std::vector<double> LogSoftmax(std::span<const double> logits) {
  const double lse = LogSumExp(logits);
  std::vector<double> out(logits.begin(), logits.end());
  for (double& v : out) v -= lse;
  return out;
}

std::vector<double> Forward(const ModelSpec& spec, const ParamVector& params,
                            InputRef in) {
  Evaluator ev(spec);
  std::span<const double> z = ev.Logits(params.values, in);
  std::vector<double> probs(z.begin(), z.end());
  SoftmaxInPlace(probs);
  return probs;
}

LossHead CrossEntropyHead(const ExampleSet& data) {
  return [&data](std::size_t i, std::span<const double> logits,
                 std::span<double> dlogits) {
    const double lse = LogSumExp(logits);
    const auto y = static_cast<std::size_t>(data.label(i));
    for (std::size_t c = 0; c < logits.size(); ++c) {
      dlogits[c] = std::exp(logits[c] - lse);
    }
    dlogits[y] -= 1.0;
    return lse - logits[y];
  };
}

LossHead DistillKlHead(const std::vector<std::vector<double>>& teacher_probs,
                       double temperature) {
  Require(temperature > 0, "distillation temperature must be > 0");
  return [&teacher_probs, temperature](std::size_t i,
                                       std::span<const double> logits,
                                       std::span<double> dlogits) {
    const std::vector<double>& t = teacher_probs[i];
    std::vector<double> scaled(logits.begin(), logits.end());
    for (double& v : scaled) v /= temperature;
    const std::vector<double> log_s = LogSoftmax(scaled);
    double kl = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
      const double s = std::exp(log_s[c]);
      const double a = log_s[c] - std::log(std::max(t[c], 1e-12));
      dlogits[c] = a;  // stash
      kl += s * a;
    }
    for (std::size_t c = 0; c < logits.size(); ++c) {
      dlogits[c] = std::exp(log_s[c]) * (dlogits[c] - kl) / temperature;
    }
    return kl;
  };
}

LossHead NpoHead(const ExampleSet& data, const std::vector<double>& ref_log_prob,
                 double beta) {
  Require(beta > 0, "NPO beta must be > 0");
  return [&data, &ref_log_prob, beta](std::size_t i,
                                      std::span<const double> logits,
                                      std::span<double> dlogits) {
    const double lse = LogSumExp(logits);
    const auto y = static_cast<std::size_t>(data.label(i));
    const double delta = (logits[y] - lse) - ref_log_prob[i];
    const double loss = 2.0 / beta * Softplus(beta * delta);
    const double dlp = 2.0 * Sigmoid(beta * delta);
    for (std::size_t c = 0; c < logits.size(); ++c) {
      dlogits[c] = -dlp * std::exp(logits[c] - lse);
    }
    dlogits[y] += dlp;
    return loss;
  };
}

double BatchGradient(Evaluator& evaluator, std::span<const double> params,
                     const ExampleSet& data, std::span<const std::size_t> batch,
                     const LossHead& head, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  if (batch.empty()) return 0.0;
  std::vector<double> dlogits(evaluator.spec().num_outputs);
  double total = 0.0;
  for (std::size_t i : batch) {
    std::span<const double> z = evaluator.Logits(params, data.input(i));
    total += head(i, z, dlogits);
    evaluator.Backward(params, dlogits, grad);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  return total * inv;
}

double MeanLoss(const ModelSpec& spec, const ParamVector& params,
                const ExampleSet& data, const LossHead& head) {
  if (data.empty()) return 0.0;
  Evaluator ev(spec);
  std::vector<double> dlogits(spec.num_outputs);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += head(i, ev.Logits(params.values, data.input(i)), dlogits);
  }
  return total / static_cast<double>(data.size());
}

double Accuracy(const ModelSpec& spec, const ParamVector& params,
                const ExampleSet& data) {
  if (data.empty()) return 0.0;
  Evaluator ev(spec);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::span<const double> z = ev.Logits(params.values, data.input(i));
    const auto pred = std::max_element(z.begin(), z.end()) - z.begin();
    if (pred == data.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

SgdMomentum::SgdMomentum(std::size_t size, double learning_rate,
                         double momentum, double weight_decay)
    : learning_rate_(learning_rate),
      momentum_(momentum),
      weight_decay_(weight_decay),
      velocity_(size, 0.0) {}

void SgdMomentum::Step(std::span<double> params,
                       std::span<const double> direction) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] + (direction[i] + weight_decay_ * params[i]);
    params[i] -= learning_rate_ * velocity_[i];
  }
}

void CheckLoss(double loss, double limit, std::string_view what) {
  if (!std::isfinite(loss) || loss > limit) {
    Fail(ErrorKind::kCompute,
         fmt::format("{}: loss {} is not finite or exceeds {}", what, loss, limit));
  }
}

ParamVector FineTune(const ModelSpec& spec, const ParamVector& start,
                     const ExampleSet& data, const TrainHyper& hyper) {
  hyper.Validate();
  ParamVector params = start;
  if (hyper.epochs == 0 || data.empty()) return params;
  Evaluator ev(spec);
  SgdMomentum opt(params.values.size(), hyper.learning_rate, hyper.momentum,
                  hyper.weight_decay);
  std::vector<double> grad(params.values.size());
  const LossHead head = CrossEntropyHead(data);
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    const std::vector<std::size_t> order =
        Permutation(data.size(), DeriveSeed(hyper.seed, {Tag("epoch"), epoch}));
    for (std::size_t b = 0; b < order.size(); b += hyper.batch_size) {
      const std::size_t e = std::min(order.size(), b + hyper.batch_size);
      const double loss = BatchGradient(
          ev, params.values, data,
          std::span<const std::size_t>(order).subspan(b, e - b), head, grad);
      CheckLoss(loss, std::numeric_limits<double>::infinity(),
                fmt::format("training epoch {}", epoch));
      opt.Step(params.values, grad);
    }
  }
  return params;
}

ParamVector Train(const ModelSpec& spec, const ExampleSet& data,
                  const TrainHyper& hyper) {
  Require(!data.empty(), "training data must be non-empty");
  return FineTune(spec, InitParams(spec, hyper.seed), data, hyper);
}

SignalValue PhiLogitConfidence(std::span<const double> probs,
                               std::int32_t label) {
  Require(label >= 0 && static_cast<std::size_t>(label) < probs.size(),
          "label out of range");
  const double p = std::clamp(probs[static_cast<std::size_t>(label)], kProbClamp,
                              1.0 - kProbClamp);
  return {std::log(p / (1.0 - p)), SignalKind::kLogitConfidence};
}

std::vector<double> SequenceLogProbs(const ModelSpec& spec,
                                     const ParamVector& params,
                                     std::span<const std::int32_t> prefix,
                                     std::span<const std::int32_t> target) {
  Require(spec.kind == ModelKind::kTokenLm, "sequence signals need a token-lm");
  Require(!target.empty(), "target n-gram must be non-empty");
  Require(!prefix.empty(), "prefix must be non-empty");
  std::vector<std::int32_t> full(prefix.begin(), prefix.end());
  full.insert(full.end(), target.begin(), target.end());
  Evaluator ev(spec);
  std::vector<double> out;
  out.reserve(target.size());
  for (std::size_t k = 0; k < target.size(); ++k) {
    const std::size_t pos = prefix.size() + k;
    const std::size_t from = pos > spec.input_dim ? pos - spec.input_dim : 0;
    const auto tok = full[pos];
    Require(tok >= 0 && static_cast<std::size_t>(tok) < spec.num_outputs,
            "token out of range");
    InputRef in;
    in.context = std::span<const std::int32_t>(full).subspan(from, pos - from);
    std::span<const double> z = ev.Logits(params.values, in);
    out.push_back(z[static_cast<std::size_t>(tok)] - LogSumExp(z));
  }
  return out;
}

SignalValue PhiSequenceLoss(const ModelSpec& spec, const ParamVector& params,
                            std::span<const std::int32_t> prefix,
                            std::span<const std::int32_t> target) {
  const std::vector<double> lp = SequenceLogProbs(spec, params, prefix, target);
  double total = 0.0;
  for (double v : lp) total -= v;
  return {total / static_cast<double>(lp.size()), SignalKind::kLoss};
}

void WriteParams(std::ostream& out, const ModelSpec& spec,
                 const ParamVector& params) {
  Require(params.values.size() == spec.ParamCount(), "parameter length mismatch");
  nlohmann::json header = {
      {"kind", ToString(spec.kind)},
      {"input_dim", spec.input_dim},
      {"hidden_dim", spec.hidden_dim},
      {"num_outputs", spec.num_outputs},
      {"activation", ToString(spec.activation)},
      {"tag", ToString(params.tag)},
      {"count", params.values.size()},
  };
  out << header.dump() << '\n';
  for (double v : params.values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(bytes, 8);
  }
}

void ReadParams(std::istream& in, ModelSpec* spec, ParamVector* params) {
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorKind::kIo, "params: missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
    spec->kind = ParseModelKind(header.at("kind").get<std::string>());
    spec->input_dim = header.at("input_dim").get<std::size_t>();
    spec->hidden_dim = header.at("hidden_dim").get<std::size_t>();
    spec->num_outputs = header.at("num_outputs").get<std::size_t>();
    spec->activation = ParseActivation(header.at("activation").get<std::string>());
    params->tag = ParseParamTag(header.at("tag").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kIo, fmt::format("params: bad header: {}", e.what()));
  }
  spec->Validate();
  const std::size_t count = header.at("count").get<std::size_t>();
  if (count != spec->ParamCount()) {
    Fail(ErrorKind::kIo, "params: count does not match model layout");
  }
  params->values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
      Fail(ErrorKind::kIo, "params: truncated payload");
    }
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    params->values[i] = std::bit_cast<double>(bits);
    if (!std::isfinite(params->values[i])) {
      Fail(ErrorKind::kIo, "params: non-finite value");
    }
  }
}

void SaveParams(const std::string& path, const ModelSpec& spec,
                const ParamVector& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, fmt::format("cannot write {}", path));
  WriteParams(out, spec, params);
}

void LoadParams(const std::string& path, ModelSpec* spec, ParamVector* params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, fmt::format("cannot read {}", path));
  ReadParams(in, spec, params);
}

}  // namespace ulaudit
