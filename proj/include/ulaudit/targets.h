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

// Target selection: vulnerability pre-scoring, target composition (including
// canary injection) and the blind indistinguishability check.

#ifndef ULAUDIT_TARGETS_H_
#define ULAUDIT_TARGETS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ulaudit/data.h"
#include "ulaudit/shadow.h"

namespace ulaudit {

enum class VulnClass { kVulnerable, kProtected, kNeither };
std::string_view ToString(VulnClass c);
VulnClass ParseVulnClass(std::string_view text);

struct VulnerabilityScore {
  std::uint64_t target_id = 0;
  double tau = 0.5;
  VulnClass cls = VulnClass::kNeither;
};

// p_in / (p_in + p_out) with both densities floored; 0.5 when both vanish.
double TauRatio(double p_in, double p_out);

struct VulnerabilityResult {
  std::vector<VulnerabilityScore> scores;  // ordered by target id
  double threshold = 0.0;                  // global tau cutoff
  double achieved_fpr = 0.0;               // share of negatives above it
};

// Leave-one-model-out tau for every in/out observation of every target.
// The global threshold admits at most `fpr` of the out-observations; a target
// is vulnerable when the median tau of its in-observations exceeds it and
// protected when that median lies within `protected_band` of 0.5.
VulnerabilityResult ScoreVulnerability(const ObservationStore& store,
                                       const IdList& target_ids, double fpr,
                                       double protected_band);

void WriteVulnerabilityCsv(std::ostream& out, const VulnerabilityResult& result);
VulnerabilityResult ReadVulnerabilityCsv(std::istream& in);

enum class TargetMode {
  kRandom,
  kVulnerableOnly,
  kProtectedOnly,
  kVulnerablePlusProtected,
  kCanary,
};
std::string_view ToString(TargetMode mode);
TargetMode ParseTargetMode(std::string_view text);

struct TargetCounts {
  std::size_t total = 600;            // all targets (canary: canaries + companions)
  std::size_t vulnerable = 0;         // canaries, or the vulnerable share
  std::size_t protected_count = 0;    // protected share
  double retained_fraction = 1.0 / 6; // canaries kept in training, never scored
};

struct TargetComposition {
  TargetMode mode = TargetMode::kRandom;
  IdList targets;    // every scheduled target
  IdList unlearned;  // evaluated: trained then unlearned
  IdList held_out;   // evaluated: never trained
  IdList remained;   // trained and kept (includes retained canaries)
  IdList retained;   // canary mode only
  std::map<std::uint64_t, std::string> groups;  // id -> group name

  IdList Group(std::string_view name) const;
};

// Canary halves are split per label so the two sides match in class mix.
TargetComposition ComposeTargets(const std::vector<VulnerabilityScore>& scores,
                                 const Dataset& dataset, TargetMode mode,
                                 const TargetCounts& counts, std::uint64_t seed);

void WriteComposition(std::ostream& out, const TargetComposition& c,
                      const std::string& config_hash);
TargetComposition ReadComposition(std::istream& in);

struct BlindCheckResult {
  double label_overlap = 0.0;   // shared class mass between the halves
  double probe_accuracy = 0.0;  // cross-validated linear probe
  bool violation = false;
};

struct BlindCheckOptions {
  std::size_t folds = 5;
  double max_probe_accuracy = 0.60;
  double min_label_overlap = 0.85;
};

BlindCheckResult BlindCheck(const IdList& unlearned, const IdList& held_out,
                            const Dataset& dataset, std::uint64_t seed,
                            const BlindCheckOptions& options = {});

}  // namespace ulaudit

#endif  // ULAUDIT_TARGETS_H_
