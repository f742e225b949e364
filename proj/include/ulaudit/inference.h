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

// Per-target density estimation and the likelihood-ratio tests run against
// an audited model, plus the population and U-LiRA baselines.

#ifndef ULAUDIT_INFERENCE_H_
#define ULAUDIT_INFERENCE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulaudit/data.h"
#include "ulaudit/model.h"
#include "ulaudit/shadow.h"

namespace ulaudit {

inline constexpr double kDensityFloor = 1e-12;
inline constexpr double kMinBandwidth = 1e-3;

// Gaussian KDE. Default bandwidth max(1.06 * sd * n^(-1/5), 1e-3).
class DensityModel {
 public:
  static DensityModel Fit(std::vector<double> values);
  static DensityModel WithBandwidth(std::vector<double> values, double bandwidth);

  double Density(double x) const;
  double bandwidth() const { return bandwidth_; }
  const std::vector<double>& values() const { return values_; }

 private:
  DensityModel(std::vector<double> values, double bandwidth);
  std::vector<double> values_;
  double bandwidth_;
};

// max(num, floor) / max(den, floor), as a log.
double LogDensityRatio(double numerator, double denominator);

// Privacy leakage: unlearned vs held-out densities at a query on the
// unlearned model.
double LambdaScore(double query, const DensityModel& unlearned,
                   const DensityModel& held_out);
// Efficacy: unlearned vs out densities at a query answered by the test router.
double PsiScore(double query, const DensityModel& unlearned, const DensityModel& out);
// U-LiRA: unlearned vs out densities at a query on the unlearned model.
double UliraScore(double query, const DensityModel& unlearned, const DensityModel& out);

enum class AuxTest {
  kTrainedLeakage,   // in vs out on the original model
  kRemainedLeakage,  // remained vs held-out on the unlearned model
};

// Per-condition densities of one target, present when the store has >= 2
// observations for that condition.
struct TargetDensities {
  std::map<Condition, DensityModel> by_condition;
  const DensityModel& at(Condition c) const;
  bool has(Condition c) const { return by_condition.count(c) > 0; }
};

TargetDensities FitTargetDensities(const ObservationStore& store,
                                   std::uint64_t target_id);

double AuxRatio(AuxTest test, double query, const TargetDensities& densities);

enum class Membership { kTrainedAndUnlearned, kNeverTrained };

// Answers from the unlearned model for unlearned targets and from the
// retrained model otherwise.
class TestRouter {
 public:
  TestRouter(const ModelSpec& spec, const Dataset& dataset, ParamVector unlearned,
             ParamVector retrained, std::map<std::uint64_t, Membership> membership,
             SignalKind signal);
  SignalValue Route(std::uint64_t target_id) const;

 private:
  ModelSpec spec_;
  const Dataset& dataset_;
  ParamVector unlearned_;
  ParamVector retrained_;
  std::map<std::uint64_t, Membership> membership_;
  SignalKind signal_;
};

// One-feature logistic regression trained by full-batch gradient descent on
// standardized signals.
class PopulationAttack {
 public:
  static PopulationAttack Fit(std::span<const double> positives,
                              std::span<const double> negatives,
                              std::size_t iterations = 2000,
                              double learning_rate = 0.5);
  double Score(double x) const;
  double weight() const { return weight_; }
  double bias() const { return bias_; }

 private:
  double mean_ = 0.0, scale_ = 1.0, weight_ = 0.0, bias_ = 0.0;
};

enum class Truth { kUnlearned, kHeldOut };
std::string_view ToString(Truth truth);

struct ScoreRecord {
  std::uint64_t target_id = 0;
  Truth truth = Truth::kUnlearned;
  double log_lambda = 0.0;
  double log_psi = 0.0;
  double log_ulira = 0.0;
  double population = 0.0;
};

enum class AuxGroup { kUnlearned, kRemained, kHeldOut };
std::string_view ToString(AuxGroup group);

struct AuxRecord {
  std::uint64_t target_id = 0;
  AuxGroup group = AuxGroup::kHeldOut;
  double log_trained_leakage = 0.0;   // query on the original model
  double log_remained_leakage = 0.0;  // query on the unlearned model
};

struct AuditModels {
  ModelSpec spec;
  ParamVector original;
  ParamVector unlearned;
  ParamVector retrained;
};

struct AuditTargets {
  IdList unlearned;  // evaluated, trained then unlearned
  IdList held_out;   // evaluated, never trained
  IdList remained;   // trained and kept; aux tests only
};

struct AuditScores {
  std::vector<ScoreRecord> records;
  std::vector<AuxRecord> aux;
};

AuditScores ScoreAudit(const ObservationStore& store, const Dataset& dataset,
                       const AuditModels& models, const AuditTargets& targets,
                       SignalKind signal);

void WriteScoreRecords(std::ostream& out, const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> ReadScoreRecords(std::istream& in);

}  // namespace ulaudit

#endif  // ULAUDIT_INFERENCE_H_
