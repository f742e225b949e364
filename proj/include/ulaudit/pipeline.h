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

// End-to-end orchestration: pre-attack scoring, target composition, grid
// search, shadow rounds, audit and report. Every stage writes its artifact
// into the run directory (when one is set) and reuses it on the next call
// when the embedded hash still matches.

#ifndef ULAUDIT_PIPELINE_H_
#define ULAUDIT_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ulaudit/config.h"
#include "ulaudit/data.h"
#include "ulaudit/inference.h"
#include "ulaudit/metrics.h"
#include "ulaudit/shadow.h"
#include "ulaudit/targets.h"
#include "ulaudit/unlearn.h"

namespace ulaudit {

struct PipelineOptions {
  std::size_t jobs = 1;
  bool resume = false;
  std::function<void(const std::string&)> log;  // progress lines; may be empty
};

struct GridEntry {
  UnlearnHyper hyper;
  bool diverged = false;
  std::string error;
  double acc_forget = 0.0, acc_remain = 0.0, acc_test = 0.0;
  double gap = 0.0;  // summed absolute accuracy gap to the retrained model
};

struct GridResult {
  std::vector<GridEntry> entries;
  std::size_t chosen = 0;
  const UnlearnHyper& hyper() const { return entries[chosen].hyper; }
};

struct AttackMetrics {
  std::string attack;  // lambda | psi | ulira | population | trained_leakage | ...
  std::string subset;  // all | canary | ...
  RocCurve roc;
  double auc = 0.0;
  double attack_accuracy = 0.0;
  std::vector<double> tpr_at_fpr;  // aligned with config fpr_points
};

struct KsSummary {
  std::size_t targets = 0;
  std::size_t rejected = 0;  // held-out vs out differ at the 5% level
};

struct AuditResult {
  std::string config_hash;
  UnlearnHyper hyper;
  TargetComposition composition;
  AuditScores scores;
  GapReport gaps;
  std::optional<BlindCheckResult> blind;
  KsSummary ks;
};

struct ReportSummary {
  std::vector<AttackMetrics> metrics;
};

class Pipeline {
 public:
  Pipeline(ExperimentConfig config, PipelineOptions options = {});

  const ExperimentConfig& config() const { return config_; }
  const Dataset& dataset() const { return dataset_; }
  const ModelSpec& spec() const { return spec_; }
  const std::string& config_hash() const { return config_hash_; }

  // Pre-attack shadow store and per-sample vulnerability (vulnerability.csv).
  const VulnerabilityResult& ScoreTargets();
  // Target composition (composition.json).
  const TargetComposition& Compose();
  // Grid search on a held-out replica of the audit setup (grid.csv, hyper.json).
  const GridResult& GridSearch();
  // Shadow rounds with the chosen hyper (shadows.jsonl).
  const ObservationStore& RunShadows();
  // Audited models, scores and diagnostics (scores.csv, aux_scores.csv,
  // gap.csv, audit.json). Runs any missing prerequisite stage.
  const AuditResult& Audit();
  // Metrics, ROC tables and plots from the audit (metrics.csv, roc_*.csv,
  // *.svg, summary.json).
  ReportSummary Report();

  // Models of the audited setting, available after Audit.
  const AuditModels& models() const { return models_; }
  const IdList& vulnerable_remain() const { return vulnerable_remain_; }
  const ObservationStore& pre_attack_store() const { return pre_store_; }
  // Setup and role schedule of the audit shadows (after GridSearch).
  ShadowSetup shadow_setup();
  RoleSchedule shadow_schedule();

 private:
  std::string PathFor(const std::string& name) const;
  void Log(const std::string& line) const;
  std::uint64_t Seed(const char* stage) const;
  IdList AttackPool();
  IdList Vulnerable() const;
  // Store runner shared by the pre-attack and the audit shadows.
  ObservationStore RunStore(const ShadowSetup& setup, const RoleSchedule& schedule,
                            const std::string& provenance, const std::string& file);

  ExperimentConfig config_;
  PipelineOptions options_;
  std::string config_hash_;
  Dataset dataset_;
  ModelSpec spec_;

  std::optional<VulnerabilityResult> vulnerability_;
  ObservationStore pre_store_;
  std::optional<TargetComposition> composition_;
  std::optional<GridResult> grid_;
  std::optional<ObservationStore> store_;
  std::optional<AuditResult> audit_;
  AuditModels models_;
  IdList vulnerable_remain_;
};

// Metrics of every attack on every subset of an audit.
std::vector<AttackMetrics> ComputeAttackMetrics(const AuditScores& scores,
                                                const TargetComposition& composition,
                                                const std::vector<double>& fpr_points);

// Side-by-side table of several run directories. Refuses runs whose
// provenance differs or whose artifacts carry a stale config hash.
std::string CompareRuns(const std::vector<std::string>& run_dirs);

}  // namespace ulaudit

#endif  // ULAUDIT_PIPELINE_H_
