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

// Threshold metrics for attack scores, a two-sample KS test and accuracy-gap
// tables against the retrained model.

#ifndef ULAUDIT_METRICS_H_
#define ULAUDIT_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulaudit/model.h"

namespace ulaudit {

// ROC with one point per distinct score (ties form one threshold step).
// Point i classifies "score >= thresholds[i]" as positive; the first point is
// (0, 0) with an infinite threshold.
struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  std::vector<double> thresholds;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  // Twice the number of (positive, negative) pairs ranked correctly, with
  // ties counting one.
  std::uint64_t auc_twice_pairs = 0;

  double Auc() const;
  bool operator==(const RocCurve&) const = default;
};

// truths[i] is true for positives. Both classes must be present.
RocCurve ComputeRoc(std::span<const double> scores, std::span<const bool> truths);

double RocAuc(std::span<const double> scores, std::span<const bool> truths);

// Largest TPR among points with FPR <= target (no interpolation).
double TprAtFpr(const RocCurve& roc, double fpr_target);

// Maximum balanced accuracy over all thresholds.
double AttackAccuracy(const RocCurve& roc);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;  // exact two-sided
};

KsResult KsTwoSample(std::span<const double> a, std::span<const double> b);

struct NamedModel {
  std::string name;
  ParamVector params;
};

struct GapSets {
  const ExampleSet* forget = nullptr;
  const ExampleSet* remain = nullptr;
  const ExampleSet* test = nullptr;
  const ExampleSet* vulnerable_remain = nullptr;  // may be empty
};

struct GapRow {
  std::string method;
  double acc_forget = 0.0;
  double acc_remain = 0.0;
  double acc_test = 0.0;
  std::optional<double> acc_vulnerable_remain;
  double delta_forget = 0.0;
  double delta_remain = 0.0;
  double delta_test = 0.0;
  std::optional<double> delta_vulnerable_remain;
  bool unintended_forgetting = false;
};

struct GapReport {
  std::vector<GapRow> rows;  // first row is the retrained reference
};

// Deltas are method minus reference. A row is flagged when its vulnerable
// remain accuracy falls more than `margin` below the reference.
GapReport BuildGapReport(const ModelSpec& spec, const NamedModel& reference,
                         const std::vector<NamedModel>& methods, const GapSets& sets,
                         double margin);

}  // namespace ulaudit

#endif  // ULAUDIT_METRICS_H_
