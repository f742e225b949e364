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

// Unlearning algorithms. Each maps (original params, forget examples, remain
// examples, hyper) to unlearned params and is deterministic in hyper.seed.

#ifndef ULAUDIT_UNLEARN_H_
#define ULAUDIT_UNLEARN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ulaudit/model.h"

namespace ulaudit {

enum class UnlearnMethod {
  kIdentity,    // no-op
  kRetrain,     // train from scratch on the remain set
  kFineTune,    // descent on the remain set only
  kGaPlus,      // ascent on forget, then fine-tune
  kNegGradPlus, // joint alpha * remain descent - (1 - alpha) * forget ascent
  kL1Sparse,    // magnitude pruning, then masked fine-tune
  kScrub,       // distillation away from the original on forget
  kGaGdr,       // sequence: joint span ascent + remain descent, then fine-tune
  kNpo,         // sequence: negative preference loss + remain descent
};

std::string_view ToString(UnlearnMethod method);
UnlearnMethod ParseUnlearnMethod(std::string_view text);

struct UnlearnHyper {
  UnlearnMethod method = UnlearnMethod::kGaPlus;
  double learning_rate = 0.01;
  std::size_t forget_batch = 32;
  std::size_t retain_batch = 32;
  std::size_t ascent_steps = 10;
  std::size_t refine_epochs = 2;
  double alpha = 0.5;
  double sparsity = 0.6;
  std::size_t max_steps = 1;
  std::size_t min_steps = 3;
  double beta = 0.5;
  double kl_weight = 1.0;
  double ce_weight = 1.0;
  double temperature = 1.0;
  std::uint64_t seed = 0;

  // Validates only the fields the method uses.
  void Validate() const;
  bool operator==(const UnlearnHyper&) const = default;
};

// Losses above this (or NaN) abort ascent phases.
inline constexpr double kDivergenceLimit = 1e6;

// Endless mini-batch stream over n examples; epoch e uses the permutation
// seeded by DeriveSeed(seed, {Tag("epoch"), e}), the same order Train and
// FineTune use.
class BatchStream {
 public:
  BatchStream(std::size_t n, std::size_t batch_size, std::uint64_t seed);
  std::span<const std::size_t> Next();
  std::size_t epoch() const { return epoch_; }
  // True when the next call to Next starts a new epoch.
  bool at_epoch_start() const { return pos_ == 0; }
  std::size_t batches_per_epoch() const;

 private:
  std::size_t n_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::size_t pos_ = 0;
  std::vector<std::size_t> order_;
};

// Train-hyper used for both the Retrain method and the audited retrained
// model, so the two coincide exactly.
TrainHyper RetrainHyper(const TrainHyper& train, std::uint64_t unlearn_seed);

// The fine-tune schedule every refine phase uses.
TrainHyper RefineHyper(const TrainHyper& train, const UnlearnHyper& hyper);

struct UnlearnInput {
  const ModelSpec& spec;
  const ParamVector& original;
  const ExampleSet& forget;
  const ExampleSet& remain;
  const TrainHyper& train;  // momentum and weight decay; full schedule for Retrain
};

ParamVector Unlearn(const UnlearnInput& in, const UnlearnHyper& hyper);

ParamVector UnlearnRetrain(const UnlearnInput& in, const UnlearnHyper& hyper);
ParamVector UnlearnFineTune(const UnlearnInput& in, const UnlearnHyper& hyper);
ParamVector UnlearnGaPlus(const UnlearnInput& in, const UnlearnHyper& hyper);
ParamVector UnlearnNegGradPlus(const UnlearnInput& in, const UnlearnHyper& hyper);
ParamVector UnlearnL1Sparse(const UnlearnInput& in, const UnlearnHyper& hyper);
ParamVector UnlearnScrub(const UnlearnInput& in, const UnlearnHyper& hyper);
ParamVector UnlearnGaGdr(const UnlearnInput& in, const UnlearnHyper& hyper);
ParamVector UnlearnNpo(const UnlearnInput& in, const UnlearnHyper& hyper);

// Scrub with the student starting from `student` instead of the teacher.
ParamVector ScrubFrom(const UnlearnInput& in, const ParamVector& student,
                      const UnlearnHyper& hyper);

// Prune mask: false on the floor(sparsity * |weights|) smallest-magnitude
// weight coordinates (ties broken by index); biases are always kept.
std::vector<bool> MagnitudePruneMask(const ModelSpec& spec,
                                     std::span<const double> params,
                                     double sparsity);

// Mean KL(student || teacher) over a set at the given temperature.
double MeanDistillKl(const ModelSpec& spec, const ParamVector& student,
                     const ParamVector& teacher, const ExampleSet& data,
                     double temperature);

// Per-example log-probability of the label.
std::vector<double> LabelLogProbs(const ModelSpec& spec, const ParamVector& params,
                                  const ExampleSet& data);

}  // namespace ulaudit

#endif  // ULAUDIT_UNLEARN_H_
