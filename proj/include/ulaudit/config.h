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

// Experiment configuration: YAML parsing with field-path validation, the
// default template and stable hashes.

#ifndef ULAUDIT_CONFIG_H_
#define ULAUDIT_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ulaudit/data.h"
#include "ulaudit/model.h"
#include "ulaudit/targets.h"
#include "ulaudit/unlearn.h"

namespace ulaudit {

struct DatasetConfig {
  std::string source = "blobs";  // blobs | sequences | csv
  BlobOptions blobs;
  SequenceOptions sequences;
  std::string path;  // csv
  CsvSchema csv;
};

struct ModelConfig {
  ModelKind kind = ModelKind::kMlp;
  std::size_t hidden_dim = 16;
  Activation activation = Activation::kRelu;
  std::size_t context = 4;  // token-lm context window
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "run";

  DatasetConfig dataset;
  ModelConfig model;
  // Full-batch training long enough for the toy MLP to memorize its outliers.
  TrainHyper train{.epochs = 1000, .batch_size = 2000, .learning_rate = 1.0,
                   .momentum = 0.9, .weight_decay = 0.0};
  SignalKind signal = SignalKind::kLogitConfidence;

  // Vulnerability pre-attack.
  bool pre_attack_always = true;  // also run when the target mode does not need it
  std::size_t pre_shadows = 60;
  double vulnerability_fpr = 0.05;
  double protected_band = 0.05;

  TargetMode target_mode = TargetMode::kRandom;
  TargetCounts targets;

  std::size_t shadows = 30;
  double attack_fraction = 0.5;
  double forget_extras = 0.0;

  UnlearnHyper unlearn;               // base values
  std::vector<UnlearnHyper> grid;     // base with per-entry overrides; never empty

  std::vector<double> fpr_points = {0.01, 0.001};
  double forgetting_margin = 0.05;

  void Validate() const;  // throws kConfig naming the field
  bool NeedsPreAttack() const;
};

ExperimentConfig ParseConfig(const std::string& yaml_text);
ExperimentConfig LoadConfig(const std::string& path);

// A commented template holding every default.
std::string DefaultConfigYaml();

// Canonical JSON of the parsed config (output_dir excluded).
std::string CanonicalConfig(const ExperimentConfig& config);
std::string ConfigHash(const ExperimentConfig& config);

// Hash of what fixes the data and the targets: dataset, model, training,
// signal, pre-attack, target selection and seed. Runs that differ only in
// the unlearning method share it.
std::string ProvenanceHash(const ExperimentConfig& config);
std::string ProvenanceJson(const ExperimentConfig& config);

// Unlearning hyper as a JSON object (seed excluded) and back.
std::string UnlearnHyperJson(const UnlearnHyper& hyper);
UnlearnHyper ParseUnlearnHyperJson(const std::string& text);

// Builds the dataset the config describes.
Dataset BuildDataset(const ExperimentConfig& config);
ModelSpec BuildSpec(const ExperimentConfig& config, const Dataset& dataset);

}  // namespace ulaudit

#endif  // ULAUDIT_CONFIG_H_
