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

#include "ulaudit/pipeline.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ulaudit/common.h"
#include "ulaudit/report.h"

namespace ulaudit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string HashLine(const std::string& hash) {
  return fmt::format("# config_hash={}\n", hash);
}

ExampleScope ForgetScope(const Dataset& ds) {
  return ds.kind() == DatasetKind::kSequence ? ExampleScope::kTargetSpan
                                             : ExampleScope::kFull;
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, fmt::format("cannot read {}", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Provenance header of a store file, or nullopt when it cannot be read.
std::optional<std::string> StoreProvenance(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) return std::nullopt;
  try {
    return json::parse(line).at("provenance").get<std::string>();
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

json GridEntryJson(const GridEntry& e) {
  return {{"hyper", json::parse(UnlearnHyperJson(e.hyper))},
          {"diverged", e.diverged},
          {"error", e.error},
          {"acc_forget", e.acc_forget},
          {"acc_remain", e.acc_remain},
          {"acc_test", e.acc_test},
          {"gap", e.gap}};
}

json GapRowJson(const GapRow& r) {
  json j = {{"method", r.method},         {"acc_forget", r.acc_forget},
            {"acc_remain", r.acc_remain}, {"acc_test", r.acc_test},
            {"delta_forget", r.delta_forget}, {"delta_remain", r.delta_remain},
            {"delta_test", r.delta_test}};
  if (r.acc_vulnerable_remain) {
    j["acc_vulnerable_remain"] = *r.acc_vulnerable_remain;
    j["delta_vulnerable_remain"] = *r.delta_vulnerable_remain;
    j["unintended_forgetting"] = r.unintended_forgetting;
  }
  return j;
}

// Flattens nested objects into "a.b.c" -> value dumps.
void Flatten(const json& j, const std::string& prefix, std::map<std::string, std::string>* out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) Flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    (*out)[prefix] = j.dump();
  }
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig config, PipelineOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  config_.Validate();
  config_hash_ = ConfigHash(config_);
  dataset_ = BuildDataset(config_);
  spec_ = BuildSpec(config_, dataset_);
  if (!config_.output_dir.empty()) {
    std::error_code ec;
    fs::create_directories(config_.output_dir, ec);
    if (ec) {
      Fail(ErrorKind::kIo,
           fmt::format("cannot create {}: {}", config_.output_dir, ec.message()));
    }
  }
}

std::string Pipeline::PathFor(const std::string& name) const {
  if (config_.output_dir.empty()) return "";
  return (fs::path(config_.output_dir) / name).string();
}

void Pipeline::Log(const std::string& line) const {
  if (options_.log) options_.log(line);
}

std::uint64_t Pipeline::Seed(const char* stage) const {
  return DeriveSeed(config_.seed, {Tag(stage)});
}

ObservationStore Pipeline::RunStore(const ShadowSetup& setup, const RoleSchedule& schedule,
                                    const std::string& provenance, const std::string& file) {
  ShadowRunOptions run;
  run.jobs = options_.jobs;
  run.store_path = PathFor(file);
  // A store from this exact setup is always continued; a foreign one is
  // replaced unless the caller asked to resume, which then fails loudly.
  if (!run.store_path.empty() && fs::exists(run.store_path)) {
    const auto previous = StoreProvenance(run.store_path);
    run.resume = options_.resume || (previous && *previous == provenance);
    if (!run.resume) Log(fmt::format("{}: stale store replaced", run.store_path));
  }
  run.progress = [this, &file](std::size_t round, std::size_t done, std::size_t total) {
    Log(fmt::format("{}: round {} done ({}/{})", file, round, done, total));
  };
  return ulaudit::RunShadows(setup, schedule, provenance, run);
}

const VulnerabilityResult& Pipeline::ScoreTargets() {
  if (vulnerability_) return *vulnerability_;
  const IdList ids = TrimToMultipleOfThree(dataset_.ids());
  if (ids.empty()) Fail(ErrorKind::kConfig, "dataset: fewer than 3 samples");
  ShadowSetup setup;
  setup.dataset = &dataset_;
  setup.spec = spec_;
  setup.train = config_.train;
  setup.unlearn.method = UnlearnMethod::kIdentity;
  setup.signal = config_.signal;
  setup.attack_fraction = 0.0;
  setup.post_unlearning = false;
  setup.master_seed = Seed("pre-attack");
  const RoleSchedule schedule = BuildSchedule(ids, config_.pre_shadows, setup.master_seed);
  Log(fmt::format("pre-attack: {} shadows over {} samples", config_.pre_shadows, ids.size()));
  pre_store_ = RunStore(setup, schedule, ProvenanceHash(config_), "pre_shadows.jsonl");
  vulnerability_ = ScoreVulnerability(pre_store_, ids, config_.vulnerability_fpr,
                                      config_.protected_band);
  if (const std::string path = PathFor("vulnerability.csv"); !path.empty()) {
    std::ostringstream out;
    out << HashLine(config_hash_);
    WriteVulnerabilityCsv(out, *vulnerability_);
    WriteFileAtomic(path, out.str());
  }
  return *vulnerability_;
}

IdList Pipeline::Vulnerable() const {
  IdList out;
  if (!vulnerability_) return out;
  for (const auto& s : vulnerability_->scores) {
    if (s.cls == VulnClass::kVulnerable) out.push_back(s.target_id);
  }
  return out;
}

const TargetComposition& Pipeline::Compose() {
  if (composition_) return *composition_;
  std::vector<VulnerabilityScore> scores;
  if (config_.NeedsPreAttack()) scores = ScoreTargets().scores;
  composition_ = ComposeTargets(scores, dataset_, config_.target_mode, config_.targets,
                                Seed("compose"));
  Log(fmt::format("targets: {} scheduled, {} unlearned, {} held out, {} remained",
                  composition_->targets.size(), composition_->unlearned.size(),
                  composition_->held_out.size(), composition_->remained.size()));
  if (const std::string path = PathFor("composition.json"); !path.empty()) {
    std::ostringstream out;
    WriteComposition(out, *composition_, config_hash_);
    WriteFileAtomic(path, out.str());
  }
  return *composition_;
}

IdList Pipeline::AttackPool() { return Difference(dataset_.ids(), Compose().targets); }

const GridResult& Pipeline::GridSearch() {
  if (grid_) return *grid_;
  const std::string cache = PathFor("hyper.json");
  if (!cache.empty() && fs::exists(cache)) {
    try {
      const json j = json::parse(ReadText(cache));
      if (j.at("config_hash").get<std::string>() == config_hash_) {
        GridResult g;
        for (const json& e : j.at("grid")) {
          GridEntry entry;
          entry.hyper = ParseUnlearnHyperJson(e.at("hyper").dump());
          entry.diverged = e.at("diverged").get<bool>();
          entry.error = e.at("error").get<std::string>();
          entry.acc_forget = e.at("acc_forget").get<double>();
          entry.acc_remain = e.at("acc_remain").get<double>();
          entry.acc_test = e.at("acc_test").get<double>();
          entry.gap = e.at("gap").get<double>();
          g.entries.push_back(entry);
        }
        g.chosen = j.at("chosen").get<std::size_t>();
        if (g.chosen < g.entries.size()) {
          Log(fmt::format("grid: reusing {}", cache));
          grid_ = std::move(g);
          return *grid_;
        }
      }
    } catch (const json::exception&) {
      // Unreadable cache: recompute below.
    }
  }

  // A replica of the audit setting on its own split and attack subset, so the
  // audited targets are not used to pick the hyper.
  const TargetComposition& comp = Compose();
  const std::uint64_t seed = Seed("grid");
  const EvaluationSplit split =
      SplitTargetForEvaluation(comp.targets, DeriveSeed(seed, {Tag("split")}));
  const IdList pool = AttackPool();
  const IdList attack = Subsample(pool, config_.attack_fraction, DeriveSeed(seed, {Tag("attack")}));
  const IdList forget_ids = split.unlearned;
  const IdList remain_ids = Union(split.remained, attack);
  const IdList test_ids = Union(Difference(pool, attack), split.never_trained);
  const std::size_t ctx = spec_.input_dim;
  const ExampleSet forget = MakeExamples(dataset_, forget_ids, ForgetScope(dataset_), ctx);
  const ExampleSet forget_full = MakeExamples(dataset_, forget_ids, ExampleScope::kFull, ctx);
  const ExampleSet remain = MakeExamples(dataset_, remain_ids, ExampleScope::kFull, ctx);
  const ExampleSet test = MakeExamples(dataset_, test_ids, ExampleScope::kFull, ctx);
  ExampleSet train_set = forget_full;
  train_set.Append(remain);

  TrainHyper th = config_.train;
  th.seed = DeriveSeed(seed, {Tag("train")});
  Log("grid: training replica models");
  const ParamVector original = Train(spec_, train_set, th);
  const std::uint64_t unlearn_seed = DeriveSeed(seed, {Tag("unlearn")});
  const ParamVector retrained = Train(spec_, remain, RetrainHyper(config_.train, unlearn_seed));
  const double ref_f = Accuracy(spec_, retrained, forget);
  const double ref_r = Accuracy(spec_, retrained, remain);
  const double ref_t = test.empty() ? 0.0 : Accuracy(spec_, retrained, test);

  GridResult g;
  std::optional<std::size_t> best;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < config_.grid.size(); ++i) {
    GridEntry e;
    e.hyper = config_.grid[i];
    e.hyper.seed = unlearn_seed;
    try {
      const UnlearnInput in{spec_, original, forget, remain, config_.train};
      const ParamVector u = Unlearn(in, e.hyper);
      e.acc_forget = Accuracy(spec_, u, forget);
      e.acc_remain = Accuracy(spec_, u, remain);
      e.acc_test = test.empty() ? 0.0 : Accuracy(spec_, u, test);
      e.gap = std::abs(e.acc_forget - ref_f) + std::abs(e.acc_remain - ref_r) +
              std::abs(e.acc_test - ref_t);
      if (!best || e.gap < g.entries[*best].gap) best = i;
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::kCompute) throw;
      e.diverged = true;
      e.error = err.what();
      failures.push_back(fmt::format("grid[{}]: {}", i, err.what()));
    }
    Log(fmt::format("grid[{}] {}: {}", i, ToString(e.hyper.method),
                    e.diverged ? "diverged" : fmt::format("gap {:.4f}", e.gap)));
    g.entries.push_back(std::move(e));
  }
  if (!best) {
    std::string msg = "every grid candidate diverged:";
    for (const auto& f : failures) msg += "\n  " + f;
    Fail(ErrorKind::kCompute, msg);
  }
  g.chosen = *best;
  for (auto& e : g.entries) e.hyper.seed = 0;

  if (!cache.empty()) {
    std::string csv = HashLine(config_hash_);
    csv += "index,method,diverged,acc_forget,acc_remain,acc_test,gap,chosen,hyper\n";
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
      const GridEntry& e = g.entries[i];
      std::string hyper = UnlearnHyperJson(e.hyper);
      std::replace(hyper.begin(), hyper.end(), ',', ';');
      csv += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", i,
                         ToString(e.hyper.method), e.diverged ? "yes" : "no", e.acc_forget,
                         e.acc_remain, e.acc_test, e.gap, i == g.chosen ? "yes" : "no", hyper);
    }
    WriteFileAtomic(PathFor("grid.csv"), csv);
    json j = {{"config_hash", config_hash_},
              {"chosen", g.chosen},
              {"hyper", json::parse(UnlearnHyperJson(g.hyper()))},
              {"grid", json::array()}};
    for (const auto& e : g.entries) j["grid"].push_back(GridEntryJson(e));
    WriteFileAtomic(cache, j.dump(2) + "\n");
  }
  grid_ = std::move(g);
  return *grid_;
}

ShadowSetup Pipeline::shadow_setup() {
  ShadowSetup setup;
  setup.dataset = &dataset_;
  setup.spec = spec_;
  setup.train = config_.train;
  setup.unlearn = GridSearch().hyper();
  setup.signal = config_.signal;
  setup.attack_pool = AttackPool();
  setup.attack_fraction = config_.attack_fraction;
  setup.forget_extras = config_.forget_extras;
  setup.post_unlearning = true;
  setup.master_seed = Seed("shadows");
  return setup;
}

RoleSchedule Pipeline::shadow_schedule() {
  return BuildSchedule(Compose().targets, config_.shadows, Seed("shadows"));
}

const ObservationStore& Pipeline::RunShadows() {
  if (store_) return *store_;
  const ShadowSetup setup = shadow_setup();
  const RoleSchedule schedule = shadow_schedule();
  const std::string provenance =
      HexDigest(Fnv1a(ProvenanceHash(config_) + UnlearnHyperJson(setup.unlearn)));
  Log(fmt::format("shadows: {} rounds over {} targets", config_.shadows,
                  schedule.targets().size()));
  store_ = RunStore(setup, schedule, provenance, "shadows.jsonl");
  return *store_;
}

const AuditResult& Pipeline::Audit() {
  if (audit_) return *audit_;
  const TargetComposition& comp = Compose();
  const GridResult& grid = GridSearch();
  const ObservationStore& store = RunShadows();

  const IdList pool = AttackPool();
  const IdList attack =
      Subsample(pool, config_.attack_fraction, Seed("audit-attack"));
  const IdList remain_ids = Union(comp.remained, attack);
  const IdList test_ids = Difference(pool, attack);
  const std::size_t ctx = spec_.input_dim;
  const ExampleSet forget = MakeExamples(dataset_, comp.unlearned, ForgetScope(dataset_), ctx);
  const ExampleSet forget_full = MakeExamples(dataset_, comp.unlearned, ExampleScope::kFull, ctx);
  const ExampleSet remain = MakeExamples(dataset_, remain_ids, ExampleScope::kFull, ctx);
  const ExampleSet test = MakeExamples(dataset_, test_ids, ExampleScope::kFull, ctx);
  ExampleSet train_set = forget_full;
  train_set.Append(remain);

  AuditResult r;
  r.config_hash = config_hash_;
  r.composition = comp;
  r.hyper = grid.hyper();
  r.hyper.seed = Seed("audit-unlearn");

  Log("audit: training the audited models");
  TrainHyper th = config_.train;
  th.seed = Seed("audit-train");
  models_.spec = spec_;
  models_.original = Train(spec_, train_set, th);
  models_.original.tag = ParamTag::kInitial;
  models_.retrained = Train(spec_, remain, RetrainHyper(config_.train, r.hyper.seed));
  models_.retrained.tag = ParamTag::kRetrained;
  const UnlearnInput in{spec_, models_.original, forget, remain, config_.train};
  models_.unlearned = Unlearn(in, r.hyper);
  models_.unlearned.tag = ParamTag::kUnlearned;

  const AuditTargets targets{comp.unlearned, comp.held_out, comp.remained};
  r.scores = ScoreAudit(store, dataset_, models_, targets, config_.signal);

  vulnerable_remain_ = Intersection(Vulnerable(), remain_ids);
  const ExampleSet vul = MakeExamples(dataset_, vulnerable_remain_, ExampleScope::kFull, ctx);
  GapSets sets{&forget, &remain, &test, &vul};
  r.gaps = BuildGapReport(spec_, {"retrain", models_.retrained},
                          {{std::string(ToString(r.hyper.method)), models_.unlearned},
                           {"original", models_.original}},
                          sets, config_.forgetting_margin);

  for (const IdList* ids : {&comp.unlearned, &comp.held_out}) {
    for (auto id : *ids) {
      const std::vector<double> h = store.Values(id, Condition::kHeldOut);
      const std::vector<double> o = store.Values(id, Condition::kOut);
      if (h.empty() || o.empty()) continue;
      ++r.ks.targets;
      if (KsTwoSample(h, o).p_value <= 0.05) ++r.ks.rejected;
    }
  }

  IdList blind_u = comp.unlearned, blind_h = comp.held_out;
  if (comp.mode == TargetMode::kCanary) {
    const IdList canaries = comp.Group("canary");
    blind_u = Intersection(blind_u, canaries);
    blind_h = Intersection(blind_h, canaries);
  }
  if (!blind_u.empty() && !blind_h.empty()) {
    r.blind = BlindCheck(blind_u, blind_h, dataset_, Seed("blind"));
  }

  if (!config_.output_dir.empty()) {
    std::ostringstream scores;
    scores << HashLine(config_hash_);
    WriteScoreRecords(scores, r.scores.records);
    WriteFileAtomic(PathFor("scores.csv"), scores.str());
    std::ostringstream aux;
    WriteAuxCsv(aux, r.scores.aux, config_hash_);
    WriteFileAtomic(PathFor("aux_scores.csv"), aux.str());
    std::ostringstream gap;
    WriteGapCsv(gap, r.gaps, config_hash_);
    WriteFileAtomic(PathFor("gap.csv"), gap.str());
    json j = {{"config_hash", config_hash_},
              {"hyper", json::parse(UnlearnHyperJson(r.hyper))},
              {"targets",
               {{"unlearned", comp.unlearned.size()},
                {"held_out", comp.held_out.size()},
                {"remained", comp.remained.size()}}},
              {"vulnerable_remain", vulnerable_remain_.size()},
              {"ks", {{"targets", r.ks.targets}, {"rejected", r.ks.rejected}}},
              {"gaps", json::array()}};
    for (const auto& row : r.gaps.rows) j["gaps"].push_back(GapRowJson(row));
    if (r.blind) {
      j["blind"] = {{"label_overlap", r.blind->label_overlap},
                    {"probe_accuracy", r.blind->probe_accuracy},
                    {"violation", r.blind->violation}};
    }
    WriteFileAtomic(PathFor("audit.json"), j.dump(2) + "\n");
  }
  audit_ = std::move(r);
  return *audit_;
}

std::vector<AttackMetrics> ComputeAttackMetrics(const AuditScores& scores,
                                                const TargetComposition& composition,
                                                const std::vector<double>& fpr_points) {
  std::vector<AttackMetrics> out;
  auto add = [&](const std::string& attack, const std::string& subset,
                 const std::vector<double>& s, const std::vector<bool>& t) {
    const auto pos = std::count(t.begin(), t.end(), true);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(t.size())) return;
    AttackMetrics m;
    m.attack = attack;
    m.subset = subset;
    const auto truths = std::make_unique<bool[]>(t.size());
    std::copy(t.begin(), t.end(), truths.get());
    m.roc = ComputeRoc(s, std::span<const bool>(truths.get(), t.size()));
    m.auc = m.roc.Auc();
    m.attack_accuracy = AttackAccuracy(m.roc);
    for (double f : fpr_points) m.tpr_at_fpr.push_back(TprAtFpr(m.roc, f));
    out.push_back(std::move(m));
  };

  std::vector<std::string> subsets = {"all"};
  std::set<std::string> names;
  for (const auto& rec : scores.records) {
    auto it = composition.groups.find(rec.target_id);
    if (it != composition.groups.end()) names.insert(it->second);
  }
  if (names.size() > 1) subsets.insert(subsets.end(), names.begin(), names.end());

  using Field = double ScoreRecord::*;
  const std::vector<std::pair<std::string, Field>> attacks = {
      {"lambda", &ScoreRecord::log_lambda},
      {"psi", &ScoreRecord::log_psi},
      {"ulira", &ScoreRecord::log_ulira},
      {"population", &ScoreRecord::population}};
  for (const std::string& subset : subsets) {
    for (const auto& [name, field] : attacks) {
      std::vector<double> s;
      std::vector<bool> t;
      for (const auto& rec : scores.records) {
        if (subset != "all") {
          auto it = composition.groups.find(rec.target_id);
          if (it == composition.groups.end() || it->second != subset) continue;
        }
        s.push_back(rec.*field);
        t.push_back(rec.truth == Truth::kUnlearned);
      }
      add(name, subset, s, t);
    }
  }

  // Auxiliary tests: trained (unlearned + remained) vs held-out on the
  // original model; remained vs held-out on the unlearned model.
  std::vector<double> ts, rs;
  std::vector<bool> tt, rt;
  for (const auto& a : scores.aux) {
    ts.push_back(a.log_trained_leakage);
    tt.push_back(a.group != AuxGroup::kHeldOut);
    if (a.group == AuxGroup::kUnlearned) continue;
    rs.push_back(a.log_remained_leakage);
    rt.push_back(a.group == AuxGroup::kRemained);
  }
  add("trained_leakage", "all", ts, tt);
  add("remained_leakage", "all", rs, rt);
  return out;
}

ReportSummary Pipeline::Report() {
  const AuditResult& audit = Audit();
  ReportSummary summary;
  summary.metrics =
      ComputeAttackMetrics(audit.scores, audit.composition, config_.fpr_points);
  if (config_.output_dir.empty()) return summary;

  std::string csv = HashLine(config_hash_);
  csv += "attack,subset,auc,attack_accuracy";
  for (double f : config_.fpr_points) csv += fmt::format(",tpr_at_fpr_{}", f);
  csv += '\n';
  for (const auto& m : summary.metrics) {
    csv += fmt::format("{},{},{:.6f},{:.6f}", m.attack, m.subset, m.auc, m.attack_accuracy);
    for (double t : m.tpr_at_fpr) csv += fmt::format(",{:.6f}", t);
    csv += '\n';
    std::ostringstream roc;
    WriteRocCsv(roc, m.roc, config_hash_);
    WriteFileAtomic(PathFor(fmt::format("roc_{}_{}.csv", m.attack, m.subset)), roc.str());
  }
  WriteFileAtomic(PathFor("metrics.csv"), csv);

  std::map<std::string, std::vector<std::pair<std::string, RocCurve>>> by_subset;
  for (const auto& m : summary.metrics) by_subset[m.subset].emplace_back(m.attack, m.roc);
  for (const auto& [subset, curves] : by_subset) {
    WriteFileAtomic(PathFor(fmt::format("roc_{}.svg", subset)), RocSvg(curves, config_hash_));
  }
  if (!audit.scores.records.empty()) {
    using Field = double ScoreRecord::*;
    for (const auto& [name, field] :
         std::vector<std::pair<std::string, Field>>{{"lambda", &ScoreRecord::log_lambda},
                                                    {"psi", &ScoreRecord::log_psi},
                                                    {"ulira", &ScoreRecord::log_ulira},
                                                    {"population", &ScoreRecord::population}}) {
      std::vector<double> pos, neg;
      for (const auto& rec : audit.scores.records) {
        (rec.truth == Truth::kUnlearned ? pos : neg).push_back(rec.*field);
      }
      WriteFileAtomic(PathFor(fmt::format("hist_{}.svg", name)),
                      HistogramSvg(name + " (unlearned vs held-out)", pos, neg, config_hash_));
    }
  }

  json j = {{"config_hash", config_hash_},
            {"provenance_hash", ProvenanceHash(config_)},
            {"provenance", json::parse(ProvenanceJson(config_))},
            {"method", ToString(audit.hyper.method)},
            {"fpr_points", config_.fpr_points},
            {"metrics", json::array()}};
  for (const auto& m : summary.metrics) {
    j["metrics"].push_back({{"attack", m.attack},
                            {"subset", m.subset},
                            {"auc", m.auc},
                            {"attack_accuracy", m.attack_accuracy},
                            {"tpr_at_fpr", m.tpr_at_fpr}});
  }
  WriteFileAtomic(PathFor("summary.json"), j.dump(2) + "\n");
  return summary;
}

std::string CompareRuns(const std::vector<std::string>& run_dirs) {
  Require(!run_dirs.empty(), "compare needs at least one run directory");
  struct Run {
    std::string dir;
    json summary;
  };
  std::vector<Run> runs;
  for (const auto& dir : run_dirs) {
    const std::string path = (fs::path(dir) / "summary.json").string();
    Run run{dir, {}};
    try {
      run.summary = json::parse(ReadText(path));
    } catch (const json::exception& e) {
      Fail(ErrorKind::kIo, fmt::format("{}: {}", path, e.what()));
    }
    const std::string hash = run.summary.value("config_hash", "");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string ext = f.extension().string();
      if (ext != ".csv" && ext != ".svg" && ext != ".json") continue;
      const std::string embedded = ReadEmbeddedHash(f.string());
      if (embedded != hash) {
        Fail(ErrorKind::kIo, fmt::format("{}: config hash {} does not match the run ({})",
                                         f.string(), embedded.empty() ? "missing" : embedded,
                                         hash));
      }
    }
    runs.push_back(std::move(run));
  }

  std::map<std::string, std::string> base;
  Flatten(runs[0].summary.at("provenance"), "", &base);
  for (std::size_t i = 1; i < runs.size(); ++i) {
    std::map<std::string, std::string> other;
    Flatten(runs[i].summary.at("provenance"), "", &other);
    if (other == base) continue;
    std::string diff = fmt::format("provenance differs between {} and {}:", runs[0].dir,
                                   runs[i].dir);
    std::set<std::string> keys;
    for (const auto& [k, v] : base) keys.insert(k);
    for (const auto& [k, v] : other) keys.insert(k);
    for (const auto& k : keys) {
      const std::string a = base.count(k) ? base[k] : "(absent)";
      const std::string b = other.count(k) ? other[k] : "(absent)";
      if (a != b) diff += fmt::format("\n  {}: {} != {}", k, a, b);
    }
    Fail(ErrorKind::kConfig, diff);
  }

  // Rows: every (attack, subset, metric) seen, in first-seen order.
  std::vector<std::string> fpr_labels;
  for (const auto& f : runs[0].summary.at("fpr_points")) {
    fpr_labels.push_back(fmt::format("tpr@{}", f.get<double>()));
  }
  std::vector<std::string> rows;
  std::vector<std::map<std::string, double>> cells(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (const auto& m : runs[i].summary.at("metrics")) {
      const std::string key =
          fmt::format("{},{}", m.at("attack").get<std::string>(), m.at("subset").get<std::string>());
      std::vector<std::pair<std::string, double>> values = {
          {"auc", m.at("auc").get<double>()},
          {"attack_accuracy", m.at("attack_accuracy").get<double>()}};
      const auto& tprs = m.at("tpr_at_fpr");
      for (std::size_t k = 0; k < tprs.size() && k < fpr_labels.size(); ++k) {
        values.emplace_back(fpr_labels[k], tprs[k].get<double>());
      }
      for (const auto& [metric, v] : values) {
        const std::string row = key + "," + metric;
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
        cells[i][row] = v;
      }
    }
  }
  std::string table = "attack,subset,metric";
  for (const auto& run : runs) {
    table += fmt::format(",{}:{}", run.summary.value("method", "?"),
                         fs::path(run.dir).filename().string());
  }
  table += '\n';
  for (const auto& row : rows) {
    table += row;
    for (const auto& c : cells) {
      auto it = c.find(row);
      table += it == c.end() ? std::string(",") : fmt::format(",{:.4f}", it->second);
    }
    table += '\n';
  }
  return table;
}

}  // namespace ulaudit
