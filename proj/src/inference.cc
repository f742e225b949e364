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

#include "ulaudit/inference.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ulaudit/common.h"

namespace ulaudit {
namespace {

double Mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double SampleSd(std::span<const double> v) {
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

DensityModel::DensityModel(std::vector<double> values, double bandwidth)
    : values_(std::move(values)), bandwidth_(bandwidth) {}

DensityModel DensityModel::Fit(std::vector<double> values) {
  Require(values.size() >= 2, "density estimation needs at least 2 values");
  for (double v : values) Require(std::isfinite(v), "density values must be finite");
  const double n = static_cast<double>(values.size());
  const double h = std::max(1.06 * SampleSd(values) * std::pow(n, -0.2), kMinBandwidth);
  return DensityModel(std::move(values), h);
}

DensityModel DensityModel::WithBandwidth(std::vector<double> values, double bandwidth) {
  Require(!values.empty(), "density estimation needs values");
  Require(std::isfinite(bandwidth) && bandwidth > 0, "bandwidth must be finite and > 0");
  return DensityModel(std::move(values), bandwidth);
}

double DensityModel::Density(double x) const {
  const double norm = 1.0 / (bandwidth_ * std::sqrt(2.0 * std::numbers::pi));
  double s = 0.0;
  for (double v : values_) {
    const double z = (x - v) / bandwidth_;
    s += std::exp(-0.5 * z * z);
  }
  return norm * s / static_cast<double>(values_.size());
}

double LogDensityRatio(double numerator, double denominator) {
  return std::log(std::max(numerator, kDensityFloor)) -
         std::log(std::max(denominator, kDensityFloor));
}

double LambdaScore(double query, const DensityModel& unlearned,
                   const DensityModel& held_out) {
  return LogDensityRatio(unlearned.Density(query), held_out.Density(query));
}

double PsiScore(double query, const DensityModel& unlearned, const DensityModel& out) {
  return LogDensityRatio(unlearned.Density(query), out.Density(query));
}

double UliraScore(double query, const DensityModel& unlearned, const DensityModel& out) {
  return LogDensityRatio(unlearned.Density(query), out.Density(query));
}

const DensityModel& TargetDensities::at(Condition c) const {
  auto it = by_condition.find(c);
  if (it == by_condition.end()) {
    Fail(ErrorKind::kInvalidArgument,
         fmt::format("missing observations for condition {}", ToString(c)));
  }
  return it->second;
}

TargetDensities FitTargetDensities(const ObservationStore& store,
                                   std::uint64_t target_id) {
  TargetDensities out;
  for (auto c : {Condition::kIn, Condition::kOut, Condition::kUnlearned,
                 Condition::kHeldOut, Condition::kRemained}) {
    std::vector<double> v = store.Values(target_id, c);
    if (v.size() >= 2) out.by_condition.emplace(c, DensityModel::Fit(std::move(v)));
  }
  return out;
}

double AuxRatio(AuxTest test, double query, const TargetDensities& d) {
  if (test == AuxTest::kTrainedLeakage) {
    return LogDensityRatio(d.at(Condition::kIn).Density(query),
                           d.at(Condition::kOut).Density(query));
  }
  return LogDensityRatio(d.at(Condition::kRemained).Density(query),
                         d.at(Condition::kHeldOut).Density(query));
}

TestRouter::TestRouter(const ModelSpec& spec, const Dataset& dataset,
                       ParamVector unlearned, ParamVector retrained,
                       std::map<std::uint64_t, Membership> membership,
                       SignalKind signal)
    : spec_(spec),
      dataset_(dataset),
      unlearned_(std::move(unlearned)),
      retrained_(std::move(retrained)),
      membership_(std::move(membership)),
      signal_(signal) {}

SignalValue TestRouter::Route(std::uint64_t target_id) const {
  auto it = membership_.find(target_id);
  if (it == membership_.end()) {
    Fail(ErrorKind::kInvalidArgument, fmt::format("router: unknown target {}", target_id));
  }
  const ParamVector& model =
      it->second == Membership::kTrainedAndUnlearned ? unlearned_ : retrained_;
  return MeasureSignal(spec_, model, dataset_, dataset_.at(target_id), signal_);
}

PopulationAttack PopulationAttack::Fit(std::span<const double> positives,
                                       std::span<const double> negatives,
                                       std::size_t iterations, double learning_rate) {
  if (positives.empty() || negatives.empty()) {
    Fail(ErrorKind::kInvalidArgument, "population attack needs both classes");
  }
  std::vector<double> x(positives.begin(), positives.end());
  x.insert(x.end(), negatives.begin(), negatives.end());
  PopulationAttack a;
  a.mean_ = Mean(x);
  const double sd = SampleSd(x);
  a.scale_ = sd > 0 ? sd : 1.0;
  for (double& v : x) v = (v - a.mean_) / a.scale_;
  const std::size_t np = positives.size();
  // Balanced class weights so the pooled sizes do not bias the intercept.
  const double wp = 0.5 / static_cast<double>(np);
  const double wn = 0.5 / static_cast<double>(negatives.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    double gw = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double y = i < np ? 1.0 : 0.0;
      const double r = (Sigmoid(a.weight_ * x[i] + a.bias_) - y) * (i < np ? wp : wn);
      gw += r * x[i];
      gb += r;
    }
    a.weight_ -= learning_rate * gw;
    a.bias_ -= learning_rate * gb;
  }
  return a;
}

double PopulationAttack::Score(double x) const {
  return Sigmoid(weight_ * (x - mean_) / scale_ + bias_);
}

std::string_view ToString(Truth truth) {
  return truth == Truth::kUnlearned ? "unlearned" : "held-out";
}

std::string_view ToString(AuxGroup group) {
  switch (group) {
    case AuxGroup::kUnlearned: return "unlearned";
    case AuxGroup::kRemained: return "remained";
    case AuxGroup::kHeldOut: return "held-out";
  }
  return "?";
}

AuditScores ScoreAudit(const ObservationStore& store, const Dataset& dataset,
                       const AuditModels& m, const AuditTargets& targets,
                       SignalKind signal) {
  std::map<std::uint64_t, Membership> membership;
  for (auto id : targets.unlearned) membership[id] = Membership::kTrainedAndUnlearned;
  for (auto id : targets.held_out) membership[id] = Membership::kNeverTrained;
  const TestRouter router(m.spec, dataset, m.unlearned, m.retrained, membership, signal);

  std::vector<double> pos, neg;
  for (const auto& [id, kind] : membership) {
    for (double v : store.Values(id, Condition::kUnlearned)) pos.push_back(v);
    for (double v : store.Values(id, Condition::kHeldOut)) neg.push_back(v);
  }
  AuditScores out;
  if (membership.empty()) return out;
  const PopulationAttack population = PopulationAttack::Fit(pos, neg);

  auto query = [&](const ParamVector& p, std::uint64_t id) {
    return MeasureSignal(m.spec, p, dataset, dataset.at(id), signal).value;
  };
  for (const auto& [id, kind] : membership) {
    const TargetDensities d = FitTargetDensities(store, id);
    ScoreRecord r;
    r.target_id = id;
    r.truth = kind == Membership::kTrainedAndUnlearned ? Truth::kUnlearned : Truth::kHeldOut;
    const double on_unlearned = query(m.unlearned, id);
    r.log_lambda = LambdaScore(on_unlearned, d.at(Condition::kUnlearned),
                               d.at(Condition::kHeldOut));
    r.log_psi = PsiScore(router.Route(id).value, d.at(Condition::kUnlearned),
                         d.at(Condition::kOut));
    r.log_ulira =
        UliraScore(on_unlearned, d.at(Condition::kUnlearned), d.at(Condition::kOut));
    r.population = population.Score(on_unlearned);
    out.records.push_back(r);
  }
  auto add_aux = [&](const IdList& ids, AuxGroup group) {
    for (auto id : ids) {
      const TargetDensities d = FitTargetDensities(store, id);
      AuxRecord a;
      a.target_id = id;
      a.group = group;
      a.log_trained_leakage = AuxRatio(AuxTest::kTrainedLeakage, query(m.original, id), d);
      a.log_remained_leakage =
          AuxRatio(AuxTest::kRemainedLeakage, query(m.unlearned, id), d);
      out.aux.push_back(a);
    }
  };
  add_aux(targets.unlearned, AuxGroup::kUnlearned);
  add_aux(targets.remained, AuxGroup::kRemained);
  add_aux(targets.held_out, AuxGroup::kHeldOut);
  std::sort(out.aux.begin(), out.aux.end(),
            [](const AuxRecord& a, const AuxRecord& b) { return a.target_id < b.target_id; });
  return out;
}

void WriteScoreRecords(std::ostream& out, const std::vector<ScoreRecord>& records) {
  out << "target_id,truth,log_lambda,log_psi,log_ulira,population_score\n";
  for (const ScoreRecord& r : records) {
    out << fmt::format("{},{},{},{},{},{}\n", r.target_id, ToString(r.truth), r.log_lambda,
                       r.log_psi, r.log_ulira, r.population);
  }
}

std::vector<ScoreRecord> ReadScoreRecords(std::istream& in) {
  std::vector<ScoreRecord> out;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) {
      Fail(ErrorKind::kIo, fmt::format("scores line {}: expected 6 cells", line_no));
    }
    try {
      ScoreRecord r;
      r.target_id = std::stoull(cells[0]);
      r.truth = cells[1] == "unlearned" ? Truth::kUnlearned : Truth::kHeldOut;
      r.log_lambda = std::stod(cells[2]);
      r.log_psi = std::stod(cells[3]);
      r.log_ulira = std::stod(cells[4]);
      r.population = std::stod(cells[5]);
      out.push_back(r);
    } catch (const std::exception&) {
      Fail(ErrorKind::kIo, fmt::format("scores line {}: bad number", line_no));
    }
  }
  return out;
}

}  // namespace ulaudit
