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

#include "ulaudit/shadow.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ulaudit/common.h"

namespace ulaudit {
namespace {

using nlohmann::json;

json ObservationJson(const Observation& o) {
  return {{"target_id", o.target_id},
          {"model_index", o.model_index},
          {"condition", ToString(o.condition)},
          {"signal_kind", ToString(o.signal.kind)},
          {"signal_value", o.signal.value}};
}

Observation ParseObservation(const json& j) {
  Observation o;
  o.target_id = j.at("target_id").get<std::uint64_t>();
  o.model_index = j.at("model_index").get<std::uint32_t>();
  o.condition = ParseCondition(j.at("condition").get<std::string>());
  o.signal.kind = ParseSignalKind(j.at("signal_kind").get<std::string>());
  o.signal.value = j.at("signal_value").get<double>();
  if (!std::isfinite(o.signal.value)) {
    Fail(ErrorKind::kIo, "non-finite signal value");
  }
  return o;
}

}  // namespace

std::string_view ToString(Condition condition) {
  switch (condition) {
    case Condition::kIn: return "in";
    case Condition::kOut: return "out";
    case Condition::kUnlearned: return "unlearned";
    case Condition::kHeldOut: return "held-out";
    case Condition::kRemained: return "remained";
  }
  return "?";
}

Condition ParseCondition(std::string_view text) {
  for (auto c : {Condition::kIn, Condition::kOut, Condition::kUnlearned,
                 Condition::kHeldOut, Condition::kRemained}) {
    if (text == ToString(c)) return c;
  }
  Fail(ErrorKind::kInvalidArgument, fmt::format("unknown condition '{}'", text));
}

RoleSchedule::RoleSchedule(IdList targets, std::vector<std::vector<Role>> rounds)
    : targets_(std::move(targets)), rounds_(std::move(rounds)) {}

IdList RoleSchedule::Members(std::size_t round, Role role) const {
  IdList out;
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    if (rounds_[round][i] == role) out.push_back(targets_[i]);
  }
  return out;
}

RoleSchedule BuildSchedule(const IdList& targets, std::size_t num_rounds,
                           std::uint64_t seed) {
  if (num_rounds == 0 || num_rounds % 3 != 0) {
    Fail(ErrorKind::kInvalidArgument,
         fmt::format("shadow count {} must be a positive multiple of 3", num_rounds));
  }
  if (targets.empty() || targets.size() % 3 != 0) {
    Fail(ErrorKind::kInvalidArgument,
         fmt::format("target count {} must be a positive multiple of 3",
                     targets.size()));
  }
  const IdList sorted = Sorted(targets);
  Require(sorted.size() == targets.size(), "target ids must be unique");
  const std::size_t n = sorted.size(), third = n / 3;
  constexpr Role kRotation[3][3] = {{Role::kIn, Role::kUnlearn, Role::kOut},
                                    {Role::kUnlearn, Role::kOut, Role::kIn},
                                    {Role::kOut, Role::kIn, Role::kUnlearn}};
  std::vector<std::vector<Role>> rounds(num_rounds, std::vector<Role>(n));
  for (std::size_t block = 0; block < num_rounds / 3; ++block) {
    const std::vector<std::size_t> perm =
        Permutation(n, DeriveSeed(seed, {Tag("schedule"), block}));
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t group = pos / third;
      for (std::size_t k = 0; k < 3; ++k) {
        rounds[3 * block + k][perm[pos]] = kRotation[k][group];
      }
    }
  }
  return RoleSchedule(sorted, std::move(rounds));
}

ObservationStore::ObservationStore(std::string provenance, std::uint64_t master_seed)
    : provenance_(std::move(provenance)), master_seed_(master_seed) {}

void ObservationStore::Add(const Observation& obs) {
  Require(std::isfinite(obs.signal.value), "observation signal must be finite");
  const Key key{obs.target_id, obs.model_index, static_cast<int>(obs.condition)};
  auto [it, inserted] = observations_.emplace(key, obs);
  if (!inserted && (it->second.signal.value != obs.signal.value ||
                    it->second.signal.kind != obs.signal.kind)) {
    Fail(ErrorKind::kInvalidArgument,
         fmt::format("conflicting observation for target {} model {} condition {}",
                     obs.target_id, obs.model_index, ToString(obs.condition)));
  }
}

void ObservationStore::AddAll(const std::vector<Observation>& obs) {
  for (const Observation& o : obs) Add(o);
}

std::vector<Observation> ObservationStore::All() const {
  std::vector<Observation> out;
  out.reserve(observations_.size());
  for (const auto& [key, o] : observations_) out.push_back(o);
  return out;
}

std::vector<double> ObservationStore::Values(std::uint64_t target_id,
                                             Condition condition) const {
  std::vector<double> out;
  auto it = observations_.lower_bound(Key{target_id, 0, 0});
  for (; it != observations_.end() && std::get<0>(it->first) == target_id; ++it) {
    if (it->second.condition == condition) out.push_back(it->second.signal.value);
  }
  return out;
}

std::vector<Observation> ObservationStore::ForTarget(std::uint64_t target_id) const {
  std::vector<Observation> out;
  auto it = observations_.lower_bound(Key{target_id, 0, 0});
  for (; it != observations_.end() && std::get<0>(it->first) == target_id; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::size_t ObservationStore::CountForModel(std::uint32_t model_index) const {
  std::size_t n = 0;
  for (const auto& [key, o] : observations_) n += std::get<1>(key) == model_index;
  return n;
}

std::set<std::uint32_t> ObservationStore::ModelIndices() const {
  std::set<std::uint32_t> out;
  for (const auto& [key, o] : observations_) out.insert(std::get<1>(key));
  return out;
}

void ObservationStore::DropModel(std::uint32_t model_index) {
  std::erase_if(observations_,
                [&](const auto& kv) { return std::get<1>(kv.first) == model_index; });
}

bool ObservationStore::operator==(const ObservationStore& other) const {
  if (provenance_ != other.provenance_ || master_seed_ != other.master_seed_ ||
      observations_.size() != other.observations_.size()) {
    return false;
  }
  auto a = observations_.begin();
  auto b = other.observations_.begin();
  for (; a != observations_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.signal.value != b->second.signal.value ||
        a->second.signal.kind != b->second.signal.kind) {
      return false;
    }
  }
  return true;
}

ObservationStore MergeStores(const ObservationStore& a, const ObservationStore& b) {
  if (a.provenance() != b.provenance() || a.master_seed() != b.master_seed()) {
    Fail(ErrorKind::kInvalidArgument,
         fmt::format("cannot merge stores with different provenance ({} vs {})",
                     a.provenance(), b.provenance()));
  }
  ObservationStore out = a;
  out.AddAll(b.All());
  return out;
}

void WriteStore(std::ostream& out, const ObservationStore& store) {
  out << json{{"provenance", store.provenance()}, {"master_seed", store.master_seed()}}.dump()
      << '\n';
  for (const Observation& o : store.All()) out << ObservationJson(o).dump() << '\n';
}

ObservationStore ReadStore(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorKind::kIo, "observation store: empty file");
  ObservationStore store;
  try {
    const json header = json::parse(line);
    store = ObservationStore(header.at("provenance").get<std::string>(),
                             header.at("master_seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    Fail(ErrorKind::kIo, fmt::format("observation store line 1: {}", e.what()));
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const bool last = in.eof();  // no trailing newline: possibly truncated
    try {
      store.Add(ParseObservation(json::parse(line)));
    } catch (const std::exception& e) {
      if (last) break;
      Fail(ErrorKind::kIo, fmt::format("observation store line {}: {}", line_no, e.what()));
    }
  }
  return store;
}

void SaveStore(const std::string& path, const ObservationStore& store) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) Fail(ErrorKind::kIo, fmt::format("cannot write {}", tmp));
    WriteStore(out, store);
    if (!out) Fail(ErrorKind::kIo, fmt::format("write failed: {}", tmp));
  }
  std::filesystem::rename(tmp, path);
}

ObservationStore LoadStore(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, fmt::format("cannot read {}", path));
  try {
    return ReadStore(in);
  } catch (const Error& e) {
    Fail(e.kind(), fmt::format("{}: {}", path, e.what()));
  }
}

std::uint64_t RoundSeed(std::uint64_t master_seed, std::size_t round) {
  return DeriveSeed(master_seed, {Tag("round"), round});
}

std::size_t ObservationsPerRound(const ShadowSetup& setup,
                                 const RoleSchedule& schedule) {
  return schedule.targets().size() * (setup.post_unlearning ? 2 : 1);
}

std::vector<Observation> RunRound(const ShadowSetup& setup,
                                  const RoleSchedule& schedule, std::size_t round) {
  Require(setup.dataset != nullptr, "shadow setup needs a dataset");
  Require(round < schedule.num_rounds(), "round index out of range");
  const Dataset& ds = *setup.dataset;
  const std::uint64_t seed = RoundSeed(setup.master_seed, round);
  const auto index = static_cast<std::uint32_t>(round);
  try {
    const IdList in_ids = schedule.Members(round, Role::kIn);
    const IdList unlearn_ids = schedule.Members(round, Role::kUnlearn);
    const IdList attack = Subsample(setup.attack_pool, setup.attack_fraction,
                                    DeriveSeed(seed, {Tag("attack")}));
    const IdList extras =
        Subsample(attack, setup.forget_extras, DeriveSeed(seed, {Tag("extras")}));
    const DataPartition part = DataPartition::Make(
        Union(Union(in_ids, unlearn_ids), attack), Union(unlearn_ids, extras), attack,
        schedule.Members(round, Role::kOut), schedule.targets());

    TrainHyper train = setup.train;
    train.seed = DeriveSeed(seed, {Tag("train")});
    const std::size_t ctx = setup.spec.input_dim;
    ParamVector original =
        Train(setup.spec, MakeExamples(ds, part.train, ExampleScope::kFull, ctx), train);
    original.tag = ParamTag::kShadow;

    std::vector<Observation> obs;
    obs.reserve(ObservationsPerRound(setup, schedule));
    for (std::size_t i = 0; i < schedule.targets().size(); ++i) {
      const std::uint64_t id = schedule.targets()[i];
      const Role role = schedule.role(round, i);
      obs.push_back({id, index, role == Role::kOut ? Condition::kOut : Condition::kIn,
                     MeasureSignal(setup.spec, original, ds, ds.at(id), setup.signal)});
    }
    if (!setup.post_unlearning) return obs;

    const ExampleSet forget = MakeExamples(ds, part.forget, ExampleScope::kTargetSpan, ctx);
    const ExampleSet remain = MakeExamples(ds, part.remain, ExampleScope::kFull, ctx);
    UnlearnHyper hyper = setup.unlearn;
    hyper.seed = DeriveSeed(seed, {Tag("unlearn")});
    const ParamVector unlearned =
        Unlearn(UnlearnInput{setup.spec, original, forget, remain, train}, hyper);
    for (std::size_t i = 0; i < schedule.targets().size(); ++i) {
      const std::uint64_t id = schedule.targets()[i];
      const Role role = schedule.role(round, i);
      const Condition c = role == Role::kIn      ? Condition::kRemained
                          : role == Role::kUnlearn ? Condition::kUnlearned
                                                   : Condition::kHeldOut;
      obs.push_back(
          {id, index, c, MeasureSignal(setup.spec, unlearned, ds, ds.at(id), setup.signal)});
    }
    return obs;
  } catch (const Error& e) {
    Fail(e.kind(), fmt::format("shadow round {}: {}", round, e.what()));
  }
}

ObservationStore RunShadows(const ShadowSetup& setup, const RoleSchedule& schedule,
                            const std::string& provenance,
                            const ShadowRunOptions& options) {
  ObservationStore store(provenance, setup.master_seed);
  const std::size_t per_round = ObservationsPerRound(setup, schedule);
  if (options.resume && !options.store_path.empty() &&
      std::filesystem::exists(options.store_path)) {
    ObservationStore previous = LoadStore(options.store_path);
    if (previous.provenance() != provenance ||
        previous.master_seed() != setup.master_seed) {
      Fail(ErrorKind::kIo,
           fmt::format("{}: provenance {} does not match this configuration ({})",
                       options.store_path, previous.provenance(), provenance));
    }
    for (std::uint32_t m : previous.ModelIndices()) {
      if (m >= schedule.num_rounds() || previous.CountForModel(m) != per_round) {
        previous.DropModel(m);
      }
    }
    store = std::move(previous);
  }
  const std::set<std::uint32_t> done = store.ModelIndices();
  std::vector<std::size_t> pending;
  for (std::size_t r = 0; r < schedule.num_rounds(); ++r) {
    if (!done.count(static_cast<std::uint32_t>(r))) pending.push_back(r);
  }

  std::ofstream journal;
  if (!options.store_path.empty()) {
    SaveStore(options.store_path, store);
    journal.open(options.store_path, std::ios::app);
    if (!journal) Fail(ErrorKind::kIo, fmt::format("cannot append to {}", options.store_path));
  }

  std::vector<std::vector<Observation>> results(pending.size());
  std::vector<std::exception_ptr> errors(pending.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t finished = 0;
  auto worker = [&] {
    for (std::size_t k = next++; k < pending.size(); k = next++) {
      try {
        results[k] = RunRound(setup, schedule, pending[k]);
      } catch (...) {
        errors[k] = std::current_exception();
        continue;
      }
      std::lock_guard<std::mutex> lock(mu);
      if (journal.is_open()) {
        for (const Observation& o : results[k]) journal << ObservationJson(o).dump() << '\n';
        journal.flush();
      }
      ++finished;
      if (options.progress) options.progress(pending[k], finished, pending.size());
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, pending.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& r : results) store.AddAll(r);
  if (!options.store_path.empty()) {
    journal.close();
    SaveStore(options.store_path, store);
  }
  return store;
}

}  // namespace ulaudit
