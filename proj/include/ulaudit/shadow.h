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

// Shadow-model rounds: role scheduling in groups of three, per-round training
// and unlearning, and the observation store they feed.

#ifndef ULAUDIT_SHADOW_H_
#define ULAUDIT_SHADOW_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ulaudit/data.h"
#include "ulaudit/model.h"
#include "ulaudit/unlearn.h"

namespace ulaudit {

enum class Condition { kIn, kOut, kUnlearned, kHeldOut, kRemained };
std::string_view ToString(Condition condition);
Condition ParseCondition(std::string_view text);

enum class Role { kIn, kUnlearn, kOut };

class RoleSchedule {
 public:
  RoleSchedule(IdList targets, std::vector<std::vector<Role>> rounds);

  const IdList& targets() const { return targets_; }
  std::size_t num_rounds() const { return rounds_.size(); }
  Role role(std::size_t round, std::size_t target_index) const {
    return rounds_[round][target_index];
  }
  IdList Members(std::size_t round, Role role) const;

 private:
  IdList targets_;
  std::vector<std::vector<Role>> rounds_;
};

// Every block of three rounds draws a fresh random split of the targets into
// thirds A, B, C and rotates them through In/Unlearn/Out, so each target takes
// each role exactly once per block.
RoleSchedule BuildSchedule(const IdList& targets, std::size_t num_rounds,
                           std::uint64_t seed);

struct Observation {
  std::uint64_t target_id = 0;
  std::uint32_t model_index = 0;
  Condition condition = Condition::kIn;
  SignalValue signal;
};

class ObservationStore {
 public:
  ObservationStore() = default;
  ObservationStore(std::string provenance, std::uint64_t master_seed);

  // Identical duplicates are ignored; a conflicting signal is an error.
  void Add(const Observation& obs);
  void AddAll(const std::vector<Observation>& obs);

  const std::string& provenance() const { return provenance_; }
  std::uint64_t master_seed() const { return master_seed_; }
  std::size_t size() const { return observations_.size(); }
  std::vector<Observation> All() const;
  // Signals of one target under one condition, ordered by model index.
  std::vector<double> Values(std::uint64_t target_id, Condition condition) const;
  std::vector<Observation> ForTarget(std::uint64_t target_id) const;
  std::size_t CountForModel(std::uint32_t model_index) const;
  std::set<std::uint32_t> ModelIndices() const;
  void DropModel(std::uint32_t model_index);

  bool operator==(const ObservationStore& other) const;

 private:
  using Key = std::tuple<std::uint64_t, std::uint32_t, int>;
  std::string provenance_;
  std::uint64_t master_seed_ = 0;
  std::map<Key, Observation> observations_;
};

// Union of two stores with identical provenance. Commutative, idempotent.
ObservationStore MergeStores(const ObservationStore& a, const ObservationStore& b);

// JSON lines: a provenance header, then one observation per line. A
// truncated final line (no newline) is tolerated and dropped.
void WriteStore(std::ostream& out, const ObservationStore& store);
ObservationStore ReadStore(std::istream& in);
void SaveStore(const std::string& path, const ObservationStore& store);
ObservationStore LoadStore(const std::string& path);

struct ShadowSetup {
  const Dataset* dataset = nullptr;
  ModelSpec spec;
  TrainHyper train;
  UnlearnHyper unlearn;
  SignalKind signal = SignalKind::kLogitConfidence;
  IdList attack_pool;            // disjoint from the targets
  double attack_fraction = 0.5;  // share of the pool each round trains on
  double forget_extras = 0.0;    // share of the round's attack data also unlearned
  bool post_unlearning = true;   // false: record in/out only, skip unlearning
  std::uint64_t master_seed = 0;
};

std::uint64_t RoundSeed(std::uint64_t master_seed, std::size_t round);

// Trains one shadow model on In + Unlearn targets + attack data, records the
// pre-unlearning signal of every target, unlearns Unlearn targets plus the
// forget extras and records the post-unlearning signal.
std::vector<Observation> RunRound(const ShadowSetup& setup,
                                  const RoleSchedule& schedule, std::size_t round);

// Observations a complete round contributes.
std::size_t ObservationsPerRound(const ShadowSetup& setup,
                                 const RoleSchedule& schedule);

struct ShadowRunOptions {
  std::size_t jobs = 1;
  std::string store_path;  // empty: keep in memory only
  bool resume = false;
  // Called after each finished round (from worker threads, serialized).
  std::function<void(std::size_t round, std::size_t done, std::size_t total)> progress;
};

// Runs every round not already present, in parallel. The result does not
// depend on the number of workers or completion order.
ObservationStore RunShadows(const ShadowSetup& setup, const RoleSchedule& schedule,
                            const std::string& provenance,
                            const ShadowRunOptions& options);

}  // namespace ulaudit

#endif  // ULAUDIT_SHADOW_H_
