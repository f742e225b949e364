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

#include "ulaudit/targets.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ulaudit/common.h"
#include "ulaudit/inference.h"

namespace ulaudit {
namespace {

using nlohmann::json;

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

IdList Take(const IdList& ids, std::size_t k, std::uint64_t seed, const char* what) {
  if (ids.size() < k) {
    Fail(ErrorKind::kConfig, fmt::format("requested {} {} targets but only {} exist", k,
                                         what, ids.size()));
  }
  const std::vector<std::size_t> perm = Permutation(ids.size(), seed);
  IdList out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(ids[perm[i]]);
  return Sorted(std::move(out));
}

void AddThirds(TargetComposition& c, const IdList& ids, std::uint64_t seed,
               const std::string& group) {
  const EvaluationSplit s = SplitTargetForEvaluation(ids, seed);
  c.unlearned = Union(c.unlearned, s.unlearned);
  c.remained = Union(c.remained, s.remained);
  c.held_out = Union(c.held_out, s.never_trained);
  for (const IdList* part : {&s.unlearned, &s.remained, &s.never_trained}) {
    for (auto id : *part) c.groups[id] = group;
  }
}

// Label of a sample for class-mix purposes.
std::int32_t MixLabel(const Dataset& ds, const Sample& s) {
  if (ds.kind() == DatasetKind::kDense) return s.label;
  return s.tokens[s.tokens.size() - ds.ngram_len()];
}

std::vector<double> ProbeFeatures(const Dataset& ds, const Sample& s) {
  if (ds.kind() == DatasetKind::kDense) return s.features;
  std::vector<double> bag(ds.num_classes(), 0.0);
  for (auto t : s.tokens) bag[static_cast<std::size_t>(t)] += 1.0;
  return bag;
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view ToString(VulnClass c) {
  switch (c) {
    case VulnClass::kVulnerable: return "vulnerable";
    case VulnClass::kProtected: return "protected";
    case VulnClass::kNeither: return "neither";
  }
  return "?";
}

VulnClass ParseVulnClass(std::string_view text) {
  if (text == "vulnerable") return VulnClass::kVulnerable;
  if (text == "protected") return VulnClass::kProtected;
  if (text == "neither") return VulnClass::kNeither;
  Fail(ErrorKind::kIo, fmt::format("unknown vulnerability class '{}'", text));
}

double TauRatio(double p_in, double p_out) {
  Require(p_in >= 0 && p_out >= 0, "likelihoods must be >= 0");
  const double a = std::max(p_in, kDensityFloor), b = std::max(p_out, kDensityFloor);
  if (p_in < kDensityFloor && p_out < kDensityFloor) return 0.5;
  return a / (a + b);
}

VulnerabilityResult ScoreVulnerability(const ObservationStore& store,
                                       const IdList& target_ids, double fpr,
                                       double protected_band) {
  Require(fpr > 0 && fpr < 1, "vulnerability fpr must be in (0, 1)");
  Require(protected_band >= 0, "protected band must be >= 0");
  std::vector<double> negatives;
  std::vector<std::vector<double>> positives(target_ids.size());
  auto loo = [](const std::vector<double>& v, std::size_t skip) {
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i != skip) out.push_back(v[i]);
    }
    return DensityModel::Fit(std::move(out));
  };
  for (std::size_t t = 0; t < target_ids.size(); ++t) {
    const std::vector<double> in = store.Values(target_ids[t], Condition::kIn);
    const std::vector<double> out = store.Values(target_ids[t], Condition::kOut);
    if (in.size() < 3 || out.size() < 3) {
      Fail(ErrorKind::kInvalidArgument,
           fmt::format("target {} needs >= 3 in and out observations", target_ids[t]));
    }
    const DensityModel in_all = DensityModel::Fit(in);
    const DensityModel out_all = DensityModel::Fit(out);
    for (std::size_t k = 0; k < in.size(); ++k) {
      positives[t].push_back(TauRatio(loo(in, k).Density(in[k]), out_all.Density(in[k])));
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
      negatives.push_back(TauRatio(in_all.Density(out[k]), loo(out, k).Density(out[k])));
    }
  }
  VulnerabilityResult result;
  if (target_ids.empty()) return result;
  std::sort(negatives.begin(), negatives.end(), std::greater<>());
  const auto allowed = static_cast<std::size_t>(
      std::floor(fpr * static_cast<double>(negatives.size())));
  result.threshold = negatives[std::min(allowed, negatives.size() - 1)];
  const auto above = static_cast<std::size_t>(
      std::count_if(negatives.begin(), negatives.end(),
                    [&](double v) { return v > result.threshold; }));
  result.achieved_fpr = static_cast<double>(above) / static_cast<double>(negatives.size());
  for (std::size_t t = 0; t < target_ids.size(); ++t) {
    VulnerabilityScore s;
    s.target_id = target_ids[t];
    s.tau = Median(positives[t]);
    if (s.tau > result.threshold) {
      s.cls = VulnClass::kVulnerable;
    } else if (std::abs(s.tau - 0.5) <= protected_band) {
      s.cls = VulnClass::kProtected;
    }
    result.scores.push_back(s);
  }
  return result;
}

void WriteVulnerabilityCsv(std::ostream& out, const VulnerabilityResult& r) {
  out << fmt::format("# threshold={} achieved_fpr={}\n", r.threshold, r.achieved_fpr);
  out << "target_id,tau,class\n";
  for (const auto& s : r.scores) {
    out << fmt::format("{},{},{}\n", s.target_id, s.tau, ToString(s.cls));
  }
}

VulnerabilityResult ReadVulnerabilityCsv(std::istream& in) {
  VulnerabilityResult r;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::sscanf(line.c_str(), "# threshold=%lf achieved_fpr=%lf", &r.threshold,
                  &r.achieved_fpr);
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string id, tau, cls;
    if (!std::getline(ss, id, ',') || !std::getline(ss, tau, ',') ||
        !std::getline(ss, cls)) {
      Fail(ErrorKind::kIo, fmt::format("vulnerability line {}: expected 3 cells", line_no));
    }
    try {
      r.scores.push_back({std::stoull(id), std::stod(tau), ParseVulnClass(cls)});
    } catch (const std::logic_error&) {
      Fail(ErrorKind::kIo, fmt::format("vulnerability line {}: bad value", line_no));
    }
  }
  return r;
}

std::string_view ToString(TargetMode mode) {
  switch (mode) {
    case TargetMode::kRandom: return "random";
    case TargetMode::kVulnerableOnly: return "vulnerable_only";
    case TargetMode::kProtectedOnly: return "protected_only";
    case TargetMode::kVulnerablePlusProtected: return "vulnerable_plus_protected";
    case TargetMode::kCanary: return "canary";
  }
  return "?";
}

TargetMode ParseTargetMode(std::string_view text) {
  for (auto m : {TargetMode::kRandom, TargetMode::kVulnerableOnly,
                 TargetMode::kProtectedOnly, TargetMode::kVulnerablePlusProtected,
                 TargetMode::kCanary}) {
    if (text == ToString(m)) return m;
  }
  Fail(ErrorKind::kInvalidArgument, fmt::format("unknown target mode '{}'", text));
}

IdList TargetComposition::Group(std::string_view name) const {
  IdList out;
  for (const auto& [id, g] : groups) {
    if (g == name) out.push_back(id);
  }
  return out;
}

TargetComposition ComposeTargets(const std::vector<VulnerabilityScore>& scores,
                                 const Dataset& dataset, TargetMode mode,
                                 const TargetCounts& counts, std::uint64_t seed) {
  IdList vulnerable, protected_ids;
  for (const auto& s : scores) {
    if (!dataset.contains(s.target_id)) continue;
    if (s.cls == VulnClass::kVulnerable) vulnerable.push_back(s.target_id);
    if (s.cls == VulnClass::kProtected) protected_ids.push_back(s.target_id);
  }
  vulnerable = Sorted(std::move(vulnerable));
  protected_ids = Sorted(std::move(protected_ids));
  const IdList all = dataset.ids();
  const std::uint64_t pick = DeriveSeed(seed, {Tag("pick")});
  const std::uint64_t split = DeriveSeed(seed, {Tag("split")});

  TargetComposition c;
  c.mode = mode;
  switch (mode) {
    case TargetMode::kRandom:
      AddThirds(c, TrimToMultipleOfThree(Take(all, counts.total, pick, "random")), split,
                "random");
      break;
    case TargetMode::kVulnerableOnly:
      AddThirds(c, TrimToMultipleOfThree(Take(vulnerable, counts.total, pick, "vulnerable")),
                split, "vulnerable");
      break;
    case TargetMode::kProtectedOnly:
      AddThirds(c,
                TrimToMultipleOfThree(Take(protected_ids, counts.total, pick, "protected")),
                split, "protected");
      break;
    case TargetMode::kVulnerablePlusProtected: {
      const IdList v = Take(vulnerable, counts.vulnerable, pick, "vulnerable");
      const IdList p = Take(protected_ids, counts.protected_count,
                            DeriveSeed(pick, {Tag("protected")}), "protected");
      AddThirds(c, TrimToMultipleOfThree(Union(v, p)), split, "mixed");
      for (auto id : v) c.groups[id] = "vulnerable";
      for (auto id : p) c.groups[id] = "protected";
      break;
    }
    case TargetMode::kCanary: {
      Require(counts.retained_fraction >= 0 && counts.retained_fraction < 1,
              "retained_fraction must be in [0, 1)");
      // The schedule rotates thirds, so canaries and companions are both
      // trimmed to multiples of three.
      const IdList canaries =
          TrimToMultipleOfThree(Take(vulnerable, counts.vulnerable, pick, "vulnerable"));
      auto n_retained = static_cast<std::size_t>(
          std::llround(counts.retained_fraction * static_cast<double>(canaries.size())));
      if ((canaries.size() - n_retained) % 2) ++n_retained;
      std::size_t n_comp = counts.total > canaries.size() ? counts.total - canaries.size() : 0;
      n_comp -= n_comp % 3;
      const IdList companions = Take(Difference(all, vulnerable), n_comp,
                                     DeriveSeed(pick, {Tag("companions")}), "companion");
      // Retained canaries first, then alternate halves within each label.
      const std::vector<std::size_t> perm =
          Permutation(canaries.size(), DeriveSeed(split, {Tag("canary")}));
      std::vector<std::uint64_t> shuffled;
      for (auto k : perm) shuffled.push_back(canaries[k]);
      c.retained = Sorted(IdList(shuffled.begin(),
                                 shuffled.begin() + static_cast<std::ptrdiff_t>(n_retained)));
      std::vector<std::uint64_t> eval(shuffled.begin() + static_cast<std::ptrdiff_t>(n_retained),
                                      shuffled.end());
      std::stable_sort(eval.begin(), eval.end(), [&](std::uint64_t a, std::uint64_t b) {
        return MixLabel(dataset, dataset.at(a)) < MixLabel(dataset, dataset.at(b));
      });
      const bool flip = DeriveSeed(split, {Tag("flip")}) & 1;
      IdList u, h;
      for (std::size_t i = 0; i < eval.size(); ++i) {
        ((i % 2 == 0) != flip ? u : h).push_back(eval[i]);
      }
      c.unlearned = Sorted(std::move(u));
      c.held_out = Sorted(std::move(h));
      c.remained = c.retained;
      for (auto id : canaries) c.groups[id] = "canary";
      for (auto id : c.retained) c.groups[id] = "retained";
      AddThirds(c, companions, DeriveSeed(split, {Tag("companions")}), "companion");
      break;
    }
  }
  c.targets = Union(Union(c.unlearned, c.held_out), c.remained);
  return c;
}

void WriteComposition(std::ostream& out, const TargetComposition& c,
                      const std::string& config_hash) {
  json groups = json::object();
  for (const auto& [id, g] : c.groups) groups[std::to_string(id)] = g;
  const json j = {{"config_hash", config_hash},  {"mode", ToString(c.mode)},
                  {"targets", c.targets},        {"unlearned", c.unlearned},
                  {"held_out", c.held_out},      {"remained", c.remained},
                  {"retained", c.retained},      {"groups", groups}};
  out << j.dump(2) << '\n';
}

TargetComposition ReadComposition(std::istream& in) {
  try {
    const json j = json::parse(in);
    TargetComposition c;
    c.mode = ParseTargetMode(j.at("mode").get<std::string>());
    c.targets = j.at("targets").get<IdList>();
    c.unlearned = j.at("unlearned").get<IdList>();
    c.held_out = j.at("held_out").get<IdList>();
    c.remained = j.at("remained").get<IdList>();
    c.retained = j.at("retained").get<IdList>();
    for (const auto& [k, v] : j.at("groups").items()) {
      c.groups[std::stoull(k)] = v.get<std::string>();
    }
    return c;
  } catch (const json::exception& e) {
    Fail(ErrorKind::kIo, fmt::format("composition: {}", e.what()));
  }
}

BlindCheckResult BlindCheck(const IdList& unlearned, const IdList& held_out,
                            const Dataset& dataset, std::uint64_t seed,
                            const BlindCheckOptions& options) {
  Require(unlearned.size() == held_out.size() && !unlearned.empty(),
          "blind check needs equal-sized non-empty halves");
  Require(options.folds >= 2, "blind check needs >= 2 folds");
  BlindCheckResult r;
  std::map<std::int32_t, double> mass_a, mass_b;
  const double w = 1.0 / static_cast<double>(unlearned.size());
  for (auto id : unlearned) mass_a[MixLabel(dataset, dataset.at(id))] += w;
  for (auto id : held_out) mass_b[MixLabel(dataset, dataset.at(id))] += w;
  for (const auto& [label, a] : mass_a) {
    auto it = mass_b.find(label);
    if (it != mass_b.end()) r.label_overlap += std::min(a, it->second);
  }

  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (auto id : unlearned) {
    x.push_back(ProbeFeatures(dataset, dataset.at(id)));
    y.push_back(1.0);
  }
  for (auto id : held_out) {
    x.push_back(ProbeFeatures(dataset, dataset.at(id)));
    y.push_back(0.0);
  }
  const std::size_t n = x.size(), d = x[0].size();
  // Folds are stratified: each half is dealt round-robin on its own, so a
  // fold never shifts the training class balance (which biases an
  // unstratified probe below chance on balanced halves).
  const std::size_t half = unlearned.size();
  const std::vector<std::size_t> perm = Permutation(half, DeriveSeed(seed, {Tag("folds")}));
  std::vector<std::size_t> fold_of(n);
  for (std::size_t i = 0; i < half; ++i) {
    fold_of[perm[i]] = i % options.folds;
    fold_of[half + perm[i]] = (i + half) % options.folds;
  }
  std::size_t correct = 0;
  for (std::size_t f = 0; f < options.folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(i);
    if (train.empty() || test.empty()) continue;
    std::vector<double> mu(d, 0.0), sd(d, 0.0);
    for (auto i : train) {
      for (std::size_t k = 0; k < d; ++k) mu[k] += x[i][k];
    }
    for (double& v : mu) v /= static_cast<double>(train.size());
    for (auto i : train) {
      for (std::size_t k = 0; k < d; ++k) sd[k] += (x[i][k] - mu[k]) * (x[i][k] - mu[k]);
    }
    for (double& v : sd) v = std::sqrt(v / static_cast<double>(train.size()));
    for (double& v : sd) v = v > 0 ? v : 1.0;
    std::vector<double> wts(d, 0.0);
    double bias = 0.0;
    constexpr double kLr = 0.5, kL2 = 1e-3;
    for (int it = 0; it < 300; ++it) {
      std::vector<double> g(d, 0.0);
      double gb = 0.0;
      for (auto i : train) {
        double z = bias;
        for (std::size_t k = 0; k < d; ++k) z += wts[k] * (x[i][k] - mu[k]) / sd[k];
        const double res = Sigmoid(z) - y[i];
        for (std::size_t k = 0; k < d; ++k) g[k] += res * (x[i][k] - mu[k]) / sd[k];
        gb += res;
      }
      const double inv = 1.0 / static_cast<double>(train.size());
      for (std::size_t k = 0; k < d; ++k) wts[k] -= kLr * (g[k] * inv + kL2 * wts[k]);
      bias -= kLr * gb * inv;
    }
    for (auto i : test) {
      double z = bias;
      for (std::size_t k = 0; k < d; ++k) z += wts[k] * (x[i][k] - mu[k]) / sd[k];
      correct += (z > 0) == (y[i] > 0.5);
    }
  }
  r.probe_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  r.violation = r.probe_accuracy > options.max_probe_accuracy ||
                r.label_overlap < options.min_label_overlap;
  return r;
}

}  // namespace ulaudit
