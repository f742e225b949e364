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

#include "ulaudit/unlearn.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ulaudit/common.h"

namespace ulaudit {
namespace {

std::uint64_t ForgetSeed(const UnlearnHyper& h) {
  return DeriveSeed(h.seed, {Tag("forget")});
}

std::uint64_t RetainSeed(const UnlearnHyper& h) {
  return DeriveSeed(h.seed, {Tag("retain")});
}

void CheckAscent(double loss, std::span<const double> params) {
  bool finite = std::isfinite(loss) && loss <= kDivergenceLimit;
  for (double v : params) finite = finite && std::isfinite(v);
  if (!finite) {
    Fail(ErrorKind::kCompute, fmt::format("ascent diverged (loss {})", loss));
  }
}

SgdMomentum MakeOptimizer(std::size_t size, double lr, const TrainHyper& train) {
  return SgdMomentum(size, lr, train.momentum, train.weight_decay);
}

// Descent with the retain stream, optionally re-applying a prune mask after
// every step. Without a mask this reproduces FineTune exactly.
ParamVector MaskedRefine(const UnlearnInput& in, ParamVector params,
                         const UnlearnHyper& hyper, const std::vector<bool>* mask) {
  const TrainHyper refine = RefineHyper(in.train, hyper);
  if (mask == nullptr) return FineTune(in.spec, params, in.remain, refine);
  if (refine.epochs == 0 || in.remain.empty()) return params;
  Evaluator ev(in.spec);
  SgdMomentum opt = MakeOptimizer(params.values.size(), refine.learning_rate, in.train);
  std::vector<double> grad(params.values.size());
  const LossHead ce = CrossEntropyHead(in.remain);
  BatchStream stream(in.remain.size(), refine.batch_size, refine.seed);
  const std::size_t steps = refine.epochs * stream.batches_per_epoch();
  for (std::size_t s = 0; s < steps; ++s) {
    const double loss = BatchGradient(ev, params.values, in.remain, stream.Next(), ce, grad);
    CheckLoss(loss, std::numeric_limits<double>::infinity(), "masked fine-tune");
    opt.Step(params.values, grad);
    for (std::size_t i = 0; i < mask->size(); ++i) {
      if (!(*mask)[i]) params.values[i] = 0.0;
    }
  }
  return params;
}

std::vector<std::vector<double>> TeacherProbs(const ModelSpec& spec,
                                              const ParamVector& teacher,
                                              const ExampleSet& data,
                                              double temperature) {
  Evaluator ev(spec);
  std::vector<std::vector<double>> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::span<const double> z = ev.Logits(teacher.values, data.input(i));
    out[i].assign(z.begin(), z.end());
    for (double& v : out[i]) v /= temperature;
    SoftmaxInPlace(out[i]);
  }
  return out;
}

ParamVector Tagged(ParamVector p) {
  p.tag = ParamTag::kUnlearned;
  return p;
}

}  // namespace

std::string_view ToString(UnlearnMethod method) {
  switch (method) {
    case UnlearnMethod::kIdentity: return "identity";
    case UnlearnMethod::kRetrain: return "retrain";
    case UnlearnMethod::kFineTune: return "finetune";
    case UnlearnMethod::kGaPlus: return "ga_plus";
    case UnlearnMethod::kNegGradPlus: return "neggrad_plus";
    case UnlearnMethod::kL1Sparse: return "l1_sparse";
    case UnlearnMethod::kScrub: return "scrub";
    case UnlearnMethod::kGaGdr: return "ga_gdr";
    case UnlearnMethod::kNpo: return "npo";
  }
  return "?";
}

UnlearnMethod ParseUnlearnMethod(std::string_view text) {
  for (auto m : {UnlearnMethod::kIdentity, UnlearnMethod::kRetrain,
                 UnlearnMethod::kFineTune, UnlearnMethod::kGaPlus,
                 UnlearnMethod::kNegGradPlus, UnlearnMethod::kL1Sparse,
                 UnlearnMethod::kScrub, UnlearnMethod::kGaGdr, UnlearnMethod::kNpo}) {
    if (text == ToString(m)) return m;
  }
  Fail(ErrorKind::kInvalidArgument, fmt::format("unknown unlearning method '{}'", text));
}

void UnlearnHyper::Validate() const {
  using M = UnlearnMethod;
  if (method == M::kIdentity || method == M::kRetrain) return;
  Require(learning_rate > 0, "unlearn learning_rate must be > 0");
  Require(retain_batch >= 1, "retain_batch must be >= 1");
  if (method != M::kFineTune && method != M::kL1Sparse) {
    Require(forget_batch >= 1, "forget_batch must be >= 1");
  }
  if (method == M::kNegGradPlus) {
    Require(alpha >= 0 && alpha <= 1, "alpha must be in [0, 1]");
  }
  if (method == M::kL1Sparse) {
    Require(sparsity >= 0 && sparsity < 1, "sparsity must be in [0, 1)");
  }
  if (method == M::kScrub) {
    Require(temperature > 0, "temperature must be > 0");
    Require(kl_weight >= 0 && ce_weight >= 0, "scrub weights must be >= 0");
  }
  if (method == M::kNpo) Require(beta > 0, "beta must be > 0");
}

BatchStream::BatchStream(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : n_(n), batch_size_(batch_size), seed_(seed) {
  Require(batch_size >= 1, "batch size must be >= 1");
}

std::size_t BatchStream::batches_per_epoch() const {
  return (n_ + batch_size_ - 1) / batch_size_;
}

std::span<const std::size_t> BatchStream::Next() {
  Require(n_ > 0, "cannot draw batches from an empty set");
  if (pos_ == 0) order_ = Permutation(n_, DeriveSeed(seed_, {Tag("epoch"), epoch_}));
  const std::size_t b = pos_;
  const std::size_t e = std::min(n_, pos_ + batch_size_);
  if (e == n_) {
    pos_ = 0;
    ++epoch_;
  } else {
    pos_ = e;
  }
  return std::span<const std::size_t>(order_).subspan(b, e - b);
}

TrainHyper RetrainHyper(const TrainHyper& train, std::uint64_t unlearn_seed) {
  TrainHyper h = train;
  h.seed = DeriveSeed(unlearn_seed, {Tag("retrain")});
  return h;
}

TrainHyper RefineHyper(const TrainHyper& train, const UnlearnHyper& hyper) {
  TrainHyper h = train;
  h.epochs = hyper.refine_epochs;
  h.batch_size = hyper.retain_batch;
  h.learning_rate = hyper.learning_rate;
  h.seed = RetainSeed(hyper);
  return h;
}

ParamVector Unlearn(const UnlearnInput& in, const UnlearnHyper& hyper) {
  hyper.Validate();
  switch (hyper.method) {
    case UnlearnMethod::kIdentity: return Tagged(in.original);
    case UnlearnMethod::kRetrain: return UnlearnRetrain(in, hyper);
    case UnlearnMethod::kFineTune: return UnlearnFineTune(in, hyper);
    case UnlearnMethod::kGaPlus: return UnlearnGaPlus(in, hyper);
    case UnlearnMethod::kNegGradPlus: return UnlearnNegGradPlus(in, hyper);
    case UnlearnMethod::kL1Sparse: return UnlearnL1Sparse(in, hyper);
    case UnlearnMethod::kScrub: return UnlearnScrub(in, hyper);
    case UnlearnMethod::kGaGdr: return UnlearnGaGdr(in, hyper);
    case UnlearnMethod::kNpo: return UnlearnNpo(in, hyper);
  }
  return in.original;
}

ParamVector UnlearnRetrain(const UnlearnInput& in, const UnlearnHyper& hyper) {
  ParamVector p = Train(in.spec, in.remain, RetrainHyper(in.train, hyper.seed));
  p.tag = ParamTag::kRetrained;
  return p;
}

ParamVector UnlearnFineTune(const UnlearnInput& in, const UnlearnHyper& hyper) {
  return Tagged(MaskedRefine(in, in.original, hyper, nullptr));
}

ParamVector UnlearnGaPlus(const UnlearnInput& in, const UnlearnHyper& hyper) {
  ParamVector params = in.original;
  if (hyper.ascent_steps > 0 && !in.forget.empty()) {
    Evaluator ev(in.spec);
    SgdMomentum opt = MakeOptimizer(params.values.size(), hyper.learning_rate, in.train);
    std::vector<double> grad(params.values.size());
    const LossHead ce = CrossEntropyHead(in.forget);
    BatchStream forget(in.forget.size(), hyper.forget_batch, ForgetSeed(hyper));
    for (std::size_t s = 0; s < hyper.ascent_steps; ++s) {
      const double loss =
          BatchGradient(ev, params.values, in.forget, forget.Next(), ce, grad);
      CheckAscent(loss, params.values);
      for (double& g : grad) g = -g;
      opt.Step(params.values, grad);
    }
    CheckAscent(0.0, params.values);
  }
  return Tagged(MaskedRefine(in, std::move(params), hyper, nullptr));
}

ParamVector UnlearnNegGradPlus(const UnlearnInput& in, const UnlearnHyper& hyper) {
  ParamVector params = in.original;
  const bool use_forget = !in.forget.empty();
  const bool use_remain = !in.remain.empty();
  if (hyper.ascent_steps == 0 || (!use_forget && !use_remain)) {
    return Tagged(std::move(params));
  }
  Evaluator ev(in.spec);
  SgdMomentum opt = MakeOptimizer(params.values.size(), hyper.learning_rate, in.train);
  const std::size_t n = params.values.size();
  std::vector<double> g_r(n, 0.0), g_f(n, 0.0), dir(n);
  const LossHead ce_r = CrossEntropyHead(in.remain);
  const LossHead ce_f = CrossEntropyHead(in.forget);
  BatchStream retain(use_remain ? in.remain.size() : 1, hyper.retain_batch,
                     RetainSeed(hyper));
  BatchStream forget(use_forget ? in.forget.size() : 1, hyper.forget_batch,
                     ForgetSeed(hyper));
  const double a = hyper.alpha;
  for (std::size_t s = 0; s < hyper.ascent_steps; ++s) {
    double loss_r = 0.0, loss_f = 0.0;
    if (use_remain) loss_r = BatchGradient(ev, params.values, in.remain, retain.Next(), ce_r, g_r);
    if (use_forget) loss_f = BatchGradient(ev, params.values, in.forget, forget.Next(), ce_f, g_f);
    CheckAscent(loss_f, params.values);
    CheckLoss(loss_r, kDivergenceLimit, "neggrad+ remain loss");
    for (std::size_t i = 0; i < n; ++i) dir[i] = a * g_r[i] - (1.0 - a) * g_f[i];
    opt.Step(params.values, dir);
  }
  CheckAscent(0.0, params.values);
  return Tagged(std::move(params));
}

std::vector<bool> MagnitudePruneMask(const ModelSpec& spec,
                                     std::span<const double> params,
                                     double sparsity) {
  Require(sparsity >= 0 && sparsity < 1, "sparsity must be in [0, 1)");
  std::vector<bool> keep = spec.WeightMask();
  std::vector<std::size_t> weights;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) weights.push_back(i);
  }
  const auto k = static_cast<std::size_t>(
      std::floor(sparsity * static_cast<double>(weights.size())));
  std::fill(keep.begin(), keep.end(), true);
  if (k == 0) return keep;
  auto smaller = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(params[a]), mb = std::abs(params[b]);
    return ma != mb ? ma < mb : a < b;
  };
  std::nth_element(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   weights.end(), smaller);
  for (std::size_t i = 0; i < k; ++i) keep[weights[i]] = false;
  return keep;
}

ParamVector UnlearnL1Sparse(const UnlearnInput& in, const UnlearnHyper& hyper) {
  ParamVector params = in.original;
  const std::vector<bool> mask = MagnitudePruneMask(in.spec, params.values, hyper.sparsity);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) params.values[i] = 0.0;
  }
  return Tagged(MaskedRefine(in, std::move(params), hyper, &mask));
}

double MeanDistillKl(const ModelSpec& spec, const ParamVector& student,
                     const ParamVector& teacher, const ExampleSet& data,
                     double temperature) {
  const auto probs = TeacherProbs(spec, teacher, data, temperature);
  return MeanLoss(spec, student, data, DistillKlHead(probs, temperature));
}

ParamVector ScrubFrom(const UnlearnInput& in, const ParamVector& student,
                      const UnlearnHyper& hyper) {
  hyper.Validate();
  ParamVector params = student;
  const double t = hyper.temperature;
  const auto teacher_f = TeacherProbs(in.spec, in.original, in.forget, t);
  const auto teacher_r = TeacherProbs(in.spec, in.original, in.remain, t);
  const LossHead kl_f = DistillKlHead(teacher_f, t);
  const LossHead kl_r = DistillKlHead(teacher_r, t);
  const LossHead ce_r = CrossEntropyHead(in.remain);
  Evaluator ev(in.spec);
  SgdMomentum opt = MakeOptimizer(params.values.size(), hyper.learning_rate, in.train);
  const std::size_t n = params.values.size();
  std::vector<double> g_kl(n), g_ce(n), dir(n);
  BatchStream forget(std::max<std::size_t>(in.forget.size(), 1), hyper.forget_batch,
                     ForgetSeed(hyper));
  BatchStream retain(std::max<std::size_t>(in.remain.size(), 1), hyper.retain_batch,
                     RetainSeed(hyper));
  const std::size_t rounds = std::max(hyper.max_steps, hyper.min_steps);
  for (std::size_t r = 0; r < rounds; ++r) {
    if (r < hyper.max_steps && !in.forget.empty()) {
      do {
        const double kl = BatchGradient(ev, params.values, in.forget, forget.Next(), kl_f, g_kl);
        CheckAscent(kl, params.values);
        for (std::size_t i = 0; i < n; ++i) dir[i] = -hyper.kl_weight * g_kl[i];
        opt.Step(params.values, dir);
      } while (!forget.at_epoch_start());
    }
    if (r < hyper.min_steps && !in.remain.empty()) {
      do {
        const auto batch = retain.Next();
        const double kl = BatchGradient(ev, params.values, in.remain, batch, kl_r, g_kl);
        const double ce = BatchGradient(ev, params.values, in.remain, batch, ce_r, g_ce);
        CheckLoss(kl + ce, kDivergenceLimit, "scrub remain phase");
        for (std::size_t i = 0; i < n; ++i) {
          dir[i] = hyper.kl_weight * g_kl[i] + hyper.ce_weight * g_ce[i];
        }
        opt.Step(params.values, dir);
      } while (!retain.at_epoch_start());
    }
  }
  CheckAscent(0.0, params.values);
  return Tagged(std::move(params));
}

ParamVector UnlearnScrub(const UnlearnInput& in, const UnlearnHyper& hyper) {
  return ScrubFrom(in, in.original, hyper);
}

ParamVector UnlearnGaGdr(const UnlearnInput& in, const UnlearnHyper& hyper) {
  Require(in.spec.kind == ModelKind::kTokenLm, "ga_gdr needs a token-lm model");
  ParamVector params = in.original;
  if (hyper.ascent_steps > 0 && !in.forget.empty() && !in.remain.empty()) {
    Evaluator ev(in.spec);
    SgdMomentum opt = MakeOptimizer(params.values.size(), hyper.learning_rate, in.train);
    const std::size_t n = params.values.size();
    std::vector<double> g_r(n), g_f(n), dir(n);
    const LossHead ce_r = CrossEntropyHead(in.remain);
    const LossHead ce_f = CrossEntropyHead(in.forget);
    BatchStream retain(in.remain.size(), hyper.retain_batch, RetainSeed(hyper));
    BatchStream forget(in.forget.size(), hyper.forget_batch, ForgetSeed(hyper));
    for (std::size_t s = 0; s < hyper.ascent_steps; ++s) {
      BatchGradient(ev, params.values, in.remain, retain.Next(), ce_r, g_r);
      const double loss_f =
          BatchGradient(ev, params.values, in.forget, forget.Next(), ce_f, g_f);
      CheckAscent(loss_f, params.values);
      for (std::size_t i = 0; i < n; ++i) dir[i] = g_r[i] - g_f[i];
      opt.Step(params.values, dir);
    }
    CheckAscent(0.0, params.values);
  }
  return Tagged(MaskedRefine(in, std::move(params), hyper, nullptr));
}

std::vector<double> LabelLogProbs(const ModelSpec& spec, const ParamVector& params,
                                  const ExampleSet& data) {
  Evaluator ev(spec);
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::span<const double> z = ev.Logits(params.values, data.input(i));
    out[i] = LogSoftmax(z)[static_cast<std::size_t>(data.label(i))];
  }
  return out;
}

ParamVector UnlearnNpo(const UnlearnInput& in, const UnlearnHyper& hyper) {
  Require(in.spec.kind == ModelKind::kTokenLm, "npo needs a token-lm model");
  ParamVector params = in.original;
  if (hyper.ascent_steps > 0 && !in.forget.empty()) {
    const std::vector<double> ref = LabelLogProbs(in.spec, in.original, in.forget);
    Evaluator ev(in.spec);
    SgdMomentum opt = MakeOptimizer(params.values.size(), hyper.learning_rate, in.train);
    const std::size_t n = params.values.size();
    std::vector<double> g_r(n, 0.0), g_f(n), dir(n);
    const LossHead npo = NpoHead(in.forget, ref, hyper.beta);
    const LossHead ce_r = CrossEntropyHead(in.remain);
    const bool use_remain = !in.remain.empty();
    BatchStream retain(use_remain ? in.remain.size() : 1, hyper.retain_batch,
                       RetainSeed(hyper));
    BatchStream forget(in.forget.size(), hyper.forget_batch, ForgetSeed(hyper));
    for (std::size_t s = 0; s < hyper.ascent_steps; ++s) {
      if (use_remain) BatchGradient(ev, params.values, in.remain, retain.Next(), ce_r, g_r);
      const double loss_f =
          BatchGradient(ev, params.values, in.forget, forget.Next(), npo, g_f);
      CheckAscent(loss_f, params.values);
      for (std::size_t i = 0; i < n; ++i) dir[i] = g_f[i] + g_r[i];
      opt.Step(params.values, dir);
    }
    CheckAscent(0.0, params.values);
  }
  return Tagged(MaskedRefine(in, std::move(params), hyper, nullptr));
}

}  // namespace ulaudit
