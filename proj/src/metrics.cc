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

#include "ulaudit/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ulaudit/common.h"

namespace ulaudit {

double RocCurve::Auc() const {
  return static_cast<double>(auc_twice_pairs) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

RocCurve ComputeRoc(std::span<const double> scores, std::span<const bool> truths) {
  Require(scores.size() == truths.size(), "scores and truths differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  });
  RocCurve roc;
  for (bool t : truths) (t ? roc.positives : roc.negatives)++;
  if (roc.positives == 0 || roc.negatives == 0) {
    Fail(ErrorKind::kInvalidArgument, "ROC needs both positives and negatives");
  }
  for (double s : scores) Require(!std::isnan(s), "ROC scores must not be NaN");
  const double p = static_cast<double>(roc.positives);
  const double n = static_cast<double>(roc.negatives);
  roc.fpr.push_back(0.0);
  roc.tpr.push_back(0.0);
  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    std::uint64_t gp = 0, gn = 0;
    for (; k < order.size() && scores[order[k]] == s; ++k) {
      (truths[order[k]] ? gp : gn)++;
    }
    roc.auc_twice_pairs += gn * (2 * tp + gp);
    tp += gp;
    fp += gn;
    roc.fpr.push_back(static_cast<double>(fp) / n);
    roc.tpr.push_back(static_cast<double>(tp) / p);
    roc.thresholds.push_back(s);
  }
  return roc;
}

double RocAuc(std::span<const double> scores, std::span<const bool> truths) {
  return ComputeRoc(scores, truths).Auc();
}

double TprAtFpr(const RocCurve& roc, double fpr_target) {
  double best = 0.0;
  for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
    if (roc.fpr[i] <= fpr_target) best = std::max(best, roc.tpr[i]);
  }
  return best;
}

double AttackAccuracy(const RocCurve& roc) {
  double best = 0.0;
  for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
    best = std::max(best, 0.5 * (roc.tpr[i] + 1.0 - roc.fpr[i]));
  }
  return best;
}

KsResult KsTwoSample(std::span<const double> a, std::span<const double> b) {
  Require(!a.empty() && !b.empty(), "KS test needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<std::int64_t>(x.size());
  const auto m = static_cast<std::int64_t>(y.size());
  // Work in units of 1 / (n m) so the statistic and the path bound are exact.
  std::int64_t d = 0;
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j >= y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<std::int64_t>(i) * m -
                             static_cast<std::int64_t>(j) * n));
  }
  KsResult r;
  r.statistic = static_cast<double>(d) / static_cast<double>(n * m);
  if (d == 0) return r;
  // Probability that a uniformly random lattice path stays strictly inside
  // |i m - j n| < d. Rows are rescaled as we go; `log_scale` tracks it.
  std::vector<double> row(static_cast<std::size_t>(m) + 1, 0.0);
  double log_scale = 0.0;
  for (std::int64_t jj = 0; jj <= m; ++jj) {
    row[static_cast<std::size_t>(jj)] =
        (std::abs(jj * n) < d && (jj == 0 || row[static_cast<std::size_t>(jj) - 1] > 0))
            ? 1.0
            : 0.0;
  }
  for (std::int64_t ii = 1; ii <= n; ++ii) {
    double peak = 0.0;
    for (std::int64_t jj = 0; jj <= m; ++jj) {
      auto u = static_cast<std::size_t>(jj);
      if (std::abs(ii * m - jj * n) >= d) {
        row[u] = 0.0;
        continue;
      }
      row[u] = row[u] + (jj > 0 ? row[u - 1] : 0.0);
      peak = std::max(peak, row[u]);
    }
    if (peak == 0.0) return r;  // no path stays inside: p = 1
    for (double& v : row) v /= peak;
    log_scale += std::log(peak);
  }
  const double log_paths = std::lgamma(static_cast<double>(n + m) + 1) -
                           std::lgamma(static_cast<double>(n) + 1) -
                           std::lgamma(static_cast<double>(m) + 1);
  const double inside = row[static_cast<std::size_t>(m)] > 0
                            ? std::exp(std::log(row[static_cast<std::size_t>(m)]) +
                                       log_scale - log_paths)
                            : 0.0;
  r.p_value = std::clamp(1.0 - inside, 0.0, 1.0);
  return r;
}

GapReport BuildGapReport(const ModelSpec& spec, const NamedModel& reference,
                         const std::vector<NamedModel>& methods, const GapSets& sets,
                         double margin) {
  Require(sets.forget && sets.remain && sets.test, "gap report needs all example sets");
  const bool vul = sets.vulnerable_remain != nullptr && !sets.vulnerable_remain->empty();
  auto row_for = [&](const NamedModel& m) {
    GapRow r;
    r.method = m.name;
    r.acc_forget = Accuracy(spec, m.params, *sets.forget);
    r.acc_remain = Accuracy(spec, m.params, *sets.remain);
    r.acc_test = Accuracy(spec, m.params, *sets.test);
    if (vul) r.acc_vulnerable_remain = Accuracy(spec, m.params, *sets.vulnerable_remain);
    return r;
  };
  GapReport report;
  const GapRow ref = row_for(reference);
  report.rows.push_back(ref);
  report.rows.back().delta_vulnerable_remain = vul ? std::optional<double>(0.0) : std::nullopt;
  for (const NamedModel& m : methods) {
    GapRow r = row_for(m);
    r.delta_forget = r.acc_forget - ref.acc_forget;
    r.delta_remain = r.acc_remain - ref.acc_remain;
    r.delta_test = r.acc_test - ref.acc_test;
    if (vul) {
      r.delta_vulnerable_remain = *r.acc_vulnerable_remain - *ref.acc_vulnerable_remain;
      r.unintended_forgetting = *r.delta_vulnerable_remain < -margin;
    }
    report.rows.push_back(r);
  }
  return report;
}

}  // namespace ulaudit
