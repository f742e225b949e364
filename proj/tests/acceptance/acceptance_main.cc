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

// Acceptance checks on the toy benchmark. Prints one PASS/FAIL line per
// criterion and exits non-zero when any criterion fails.
//
// Usage: ulaudit_acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ulaudit/common.h"
#include "ulaudit/config.h"
#include "ulaudit/data.h"
#include "ulaudit/inference.h"
#include "ulaudit/metrics.h"
#include "ulaudit/model.h"
#include "ulaudit/pipeline.h"
#include "ulaudit/shadow.h"
#include "ulaudit/targets.h"

namespace fs = std::filesystem;
using namespace ulaudit;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(int number, const std::string& name, const Outcome& o) {
  failures += o.pass ? 0 : 1;
  std::cout << fmt::format("criterion {:>2} {} {}: {}\n", number, o.pass ? "PASS" : "FAIL",
                           name, o.detail)
            << std::flush;
}

template <typename F>
void Run(int number, const std::string& name, F&& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  o.detail += fmt::format(" [{:.0f}s]", Seconds(start));
  Report(number, name, o);
}

bool InBand(double v) { return v >= 0.43 && v <= 0.57; }

std::string Join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.3f}", i ? " " : "", v[i]);
  return s;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// Toy benchmark configurations.

constexpr std::uint64_t kSeeds[] = {1, 2, 3};
// Shadow count for the held-out vs out KS test. With 30 shadows each target
// has only 10 observations per condition, where a 5% KS test needs D >= 0.7.
constexpr std::size_t kWideShadows = 90;

std::string MethodGrid(const std::string& method) {
  if (method == "ga_plus" || method == "neggrad_plus") {
    return "  grid:\n"
           "    - {learning_rate: 0.01}\n"
           "    - {learning_rate: 0.03}\n"
           "    - {learning_rate: 0.1}\n"
           "    - {learning_rate: 0.3}\n";
  }
  if (method == "l1_sparse") {
    return "  grid:\n"
           "    - {sparsity: 0.3, learning_rate: 0.01}\n"
           "    - {sparsity: 0.3, learning_rate: 0.1}\n"
           "    - {sparsity: 0.6, learning_rate: 0.01}\n"
           "    - {sparsity: 0.6, learning_rate: 0.1}\n";
  }
  return "";
}

// Canary composition on the blob benchmark: 24 vulnerable canaries (20
// evaluated, 4 retained) among 60 targets.
std::string CanaryYaml(const std::string& method, std::uint64_t seed, const fs::path& dir,
                       std::size_t shadows = 30) {
  return fmt::format(
      "seed: {}\noutput_dir: {}\n"
      "targets: {{mode: canary, total: 60, vulnerable: 24}}\n"
      "shadows: {{count: {}}}\n"
      "unlearn:\n  method: {}\n{}",
      seed, dir.string(), shadows, method, MethodGrid(method));
}

std::string RandomYaml(const std::string& method, std::uint64_t seed, const fs::path& dir) {
  return fmt::format(
      "seed: {}\noutput_dir: {}\n"
      "pre_attack: {{always: false}}\n"
      "targets: {{mode: random, total: 600}}\n"
      "shadows: {{count: 30}}\n"
      "unlearn:\n  method: {}\n{}",
      seed, dir.string(), method, MethodGrid(method));
}

std::string SequenceYaml(const fs::path& dir) {
  return fmt::format(
      "seed: 1\noutput_dir: {}\n"
      "dataset: {{source: sequences, num_records: 500, vocab: 64, ngram_len: 7}}\n"
      "model: {{kind: token-lm, hidden_dim: 16}}\n"
      "signal: loss\n"
      "train: {{epochs: 30, batch_size: 64, learning_rate: 0.5, momentum: 0.9, "
      "weight_decay: 0.0}}\n"
      "pre_attack: {{always: false}}\n"
      "targets: {{mode: random, total: 300}}\n"
      "shadows: {{count: 30}}\n"
      "unlearn: {{method: ga_gdr}}\n",
      dir.string());
}

struct RunResult {
  AuditResult audit;
  std::vector<AttackMetrics> metrics;
  double seconds = 0.0;
};

const AttackMetrics& Metric(const RunResult& r, const std::string& attack,
                            const std::string& subset) {
  for (const auto& m : r.metrics) {
    if (m.attack == attack && m.subset == subset) return m;
  }
  Fail(ErrorKind::kInvalidArgument, fmt::format("no metric {}/{}", attack, subset));
}

const GapRow& Row(const RunResult& r, const std::string& method) {
  for (const auto& row : r.audit.gaps.rows) {
    if (row.method == method) return row;
  }
  Fail(ErrorKind::kInvalidArgument, fmt::format("no gap row {}", method));
}

// Runs the full pipeline. A pre-attack store from `share` with the same
// provenance is copied in first so methods on one seed reuse it.
RunResult RunPipeline(const std::string& yaml, const fs::path& dir, const fs::path& share,
                      std::size_t jobs = 1) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  if (!share.empty() && fs::exists(share / "pre_shadows.jsonl")) {
    fs::copy_file(share / "pre_shadows.jsonl", dir / "pre_shadows.jsonl");
  }
  const auto start = Clock::now();
  Pipeline p(ParseConfig(yaml), {.jobs = jobs});
  RunResult r;
  r.metrics = p.Report().metrics;
  r.audit = p.Audit();
  r.seconds = Seconds(start);
  return r;
}

class Runs {
 public:
  explicit Runs(fs::path root) : root_(std::move(root)) {}

  const RunResult& Canary(const std::string& method, std::uint64_t seed) {
    return Get("canary", method, seed, [&](const fs::path& dir, const fs::path& share) {
      return RunPipeline(CanaryYaml(method, seed, dir), dir, share);
    });
  }
  // Same setup with more shadows, for tests that need more observations per
  // target and condition.
  const RunResult& CanaryWide(const std::string& method, std::uint64_t seed) {
    return Get("canary_wide", method, seed, [&](const fs::path& dir, const fs::path& share) {
      return RunPipeline(CanaryYaml(method, seed, dir, kWideShadows), dir, share);
    });
  }
  const RunResult& Random(const std::string& method, std::uint64_t seed) {
    return Get("random", method, seed, [&](const fs::path& dir, const fs::path& share) {
      return RunPipeline(RandomYaml(method, seed, dir), dir, share);
    });
  }
  Pipeline& IdentityPipeline(std::uint64_t seed) {
    // Reopens the finished run; every stage is reloaded from disk.
    Canary("identity", seed);
    const fs::path dir = root_ / fmt::format("canary_identity_{}", seed);
    if (!identity_.count(seed)) {
      identity_[seed] = std::make_unique<Pipeline>(ParseConfig(CanaryYaml("identity", seed, dir)));
      identity_[seed]->Audit();
    }
    return *identity_[seed];
  }
  const fs::path& root() const { return root_; }

 private:
  template <typename F>
  const RunResult& Get(const std::string& kind, const std::string& method, std::uint64_t seed,
                       F&& make) {
    const std::string key = fmt::format("{}_{}_{}", kind, method, seed);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const fs::path share = root_ / fmt::format("{}_share_{}", kind, seed);
    const fs::path dir = root_ / key;
    RunResult r = make(dir, share);
    if (!fs::exists(share / "pre_shadows.jsonl") && fs::exists(dir / "pre_shadows.jsonl")) {
      fs::create_directories(share);
      fs::copy_file(dir / "pre_shadows.jsonl", share / "pre_shadows.jsonl");
    }
    std::cerr << fmt::format("  run {} finished in {:.1f}s\n", key, r.seconds);
    return cache_.emplace(key, std::move(r)).first->second;
  }

  fs::path root_;
  std::map<std::string, RunResult> cache_;
  std::map<std::uint64_t, std::unique_ptr<Pipeline>> identity_;
};

// ---------------------------------------------------------------------------
// 1. Scheduler exactness.

Outcome SchedulerExactness(const fs::path& root) {
  BlobOptions bo;
  bo.num_samples = 1200;
  bo.seed = 7;
  const Dataset ds = SynthBlobs(bo);
  const IdList all = ds.ids();
  const IdList targets(all.begin(), all.begin() + 600);
  const IdList pool(all.begin() + 600, all.end());
  ShadowSetup setup;
  setup.dataset = &ds;
  setup.spec = {ModelKind::kLinear, 2, 0, 2, Activation::kRelu};
  setup.train = {.epochs = 1, .batch_size = 64, .learning_rate = 0.1};
  setup.unlearn.method = UnlearnMethod::kFineTune;
  setup.unlearn.refine_epochs = 1;
  setup.attack_pool = pool;
  setup.master_seed = 11;
  const RoleSchedule schedule = BuildSchedule(targets, 30, 11);
  ShadowRunOptions options;
  options.store_path = (root / "scheduler.jsonl").string();
  fs::remove(options.store_path);
  const ObservationStore store = RunShadows(setup, schedule, "scheduler", options);

  const std::map<Condition, std::size_t> expected = {
      {Condition::kIn, 20},        {Condition::kOut, 10},     {Condition::kUnlearned, 10},
      {Condition::kHeldOut, 10},   {Condition::kRemained, 10}};
  std::size_t bad = 0;
  for (auto id : targets) {
    for (const auto& [c, n] : expected) bad += store.Values(id, c).size() != n;
  }
  const bool size_ok = store.size() == targets.size() * 60;
  return {bad == 0 && size_ok,
          fmt::format("600 targets, 30 rounds: {} count mismatches, {} observations "
                      "(expect 36000)",
                      bad, store.size())};
}

// ---------------------------------------------------------------------------
// 2. Math kernels.

double CrossEntropyAt(const ModelSpec& spec, const std::vector<double>& params,
                      const ExampleSet& data) {
  Evaluator ev(spec);
  std::vector<double> g(params.size());
  const std::vector<std::size_t> batch = {0};
  return BatchGradient(ev, params, data, batch, CrossEntropyHead(data), g);
}

Outcome MathKernels() {
  std::mt19937_64 rng(2026);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> kind_pick(0, 2);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    ModelSpec spec;
    ExampleSet data;
    switch (kind_pick(rng)) {
      case 0: spec = {ModelKind::kLinear, 3, 0, 4, Activation::kRelu}; break;
      case 1:
        spec = {ModelKind::kMlp, 3, 5, 3, inst % 2 ? Activation::kTanh : Activation::kRelu};
        break;
      default: spec = {ModelKind::kTokenLm, 3, 4, 6, Activation::kRelu}; break;
    }
    if (spec.kind == ModelKind::kTokenLm) {
      std::vector<std::int32_t> ctx(3);
      for (auto& t : ctx) t = static_cast<std::int32_t>(rng() % 6);
      data.AddContext(ctx, static_cast<std::int32_t>(rng() % 6));
    } else {
      std::vector<double> x(3);
      for (auto& v : x) v = normal(rng);
      data.AddDense(x, static_cast<std::int32_t>(rng() % spec.num_outputs));
    }
    std::vector<double> params = InitParams(spec, rng()).values;
    for (auto& v : params) v += 0.3 * normal(rng);
    Evaluator ev(spec);
    std::vector<double> grad(params.size());
    const std::vector<std::size_t> batch = {0};
    BatchGradient(ev, params, data, batch, CrossEntropyHead(data), grad);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double h = 1e-5;
      std::vector<double> up = params, down = params;
      up[i] += h;
      down[i] -= h;
      const double fd = (CrossEntropyAt(spec, up, data) - CrossEntropyAt(spec, down, data)) / (2 * h);
      // Relative to the larger magnitude, with a floor for vanishing entries.
      const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-4});
      worst = std::max(worst, std::abs(fd - grad[i]) / scale);
    }
  }

  double worst_integral = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> values(5 + k);
    for (auto& v : values) v = 3.0 * normal(rng);
    const DensityModel kde = DensityModel::Fit(values);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double a = *lo - 12 * kde.bandwidth(), b = *hi + 12 * kde.bandwidth();
    const std::size_t n = 20000;
    const double step = (b - a) / n;
    double sum = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      sum += w * kde.Density(a + step * static_cast<double>(i));
    }
    worst_integral = std::max(worst_integral, std::abs(sum * step - 1.0));
  }

  std::size_t auc_mismatch = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<double> scores(n);
    auto truths = std::make_unique<bool[]>(n);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng() % 12);  // frequent ties
      truths[i] = (i == 0) || (i != 1 && (rng() & 1));
      pos += truths[i];
    }
    std::uint64_t twice = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!truths[i] || truths[j]) continue;
        twice += scores[i] > scores[j] ? 2 : scores[i] == scores[j] ? 1 : 0;
      }
    }
    const RocCurve roc = ComputeRoc(scores, std::span<const bool>(truths.get(), n));
    const double brute = static_cast<double>(twice) / (2.0 * pos * (n - pos));
    auc_mismatch += roc.auc_twice_pairs != twice || roc.Auc() != brute;
  }
  const bool ok = worst <= 1e-4 && worst_integral <= 1e-3 && auc_mismatch == 0;
  return {ok, fmt::format("gradient max rel err {:.2e} (<= 1e-4); KDE integral max |err| "
                          "{:.2e} (<= 1e-3); AUC mismatches {}/1000",
                          worst, worst_integral, auc_mismatch)};
}

// ---------------------------------------------------------------------------
// 3. Null calibration under Retrain.

Outcome NullCalibration(Runs& runs) {
  std::vector<double> lam, psi;
  std::size_t evaluated = 0;
  bool ok = true;
  for (auto seed : kSeeds) {
    const RunResult& r = runs.Random("retrain", seed);
    lam.push_back(Metric(r, "lambda", "all").auc);
    psi.push_back(Metric(r, "psi", "all").auc);
    evaluated = r.audit.scores.records.size();
    ok = ok && InBand(lam.back()) && InBand(psi.back()) && evaluated >= 200;
  }
  return {ok, fmt::format("{} evaluated targets per seed; lambda AUC [{}], psi AUC [{}] "
                          "(band [0.43, 0.57])",
                          evaluated, Join(lam), Join(psi))};
}

// ---------------------------------------------------------------------------
// 4. Identity reduction.

// Plain Gaussian KDE with the Silverman bandwidth, written out independently.
double KdeDensity(const std::vector<double>& v, double x) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= n;
  double ss = 0.0;
  for (double a : v) ss += (a - mean) * (a - mean);
  const double sd = std::sqrt(ss / (n - 1));
  const double h = std::max(1.06 * sd * std::pow(n, -0.2), 1e-3);
  double s = 0.0;
  for (double a : v) s += std::exp(-0.5 * ((x - a) / h) * ((x - a) / h));
  return s / (n * h * std::sqrt(2.0 * std::numbers::pi));
}

Outcome IdentityReduction(Runs& runs) {
  std::vector<double> aucs;
  for (auto seed : kSeeds) aucs.push_back(Metric(runs.Canary("identity", seed), "lambda", "canary").auc);

  // Trained-model per-sample attack: in-observations of the rounds where the
  // target is later "unlearned" against out-observations, queried on the
  // original model.
  Pipeline& p = runs.IdentityPipeline(kSeeds[0]);
  const AuditResult& audit = p.Audit();
  const RoleSchedule schedule = p.shadow_schedule();
  const ObservationStore& store = p.RunShadows();
  std::map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < schedule.targets().size(); ++i) index[schedule.targets()[i]] = i;
  double worst = 0.0;
  std::size_t compared = 0;
  for (const auto& rec : audit.scores.records) {
    std::vector<double> in, out;
    for (const auto& o : store.ForTarget(rec.target_id)) {
      const Role role = schedule.role(o.model_index, index.at(rec.target_id));
      if (o.condition == Condition::kIn && role == Role::kUnlearn) in.push_back(o.signal.value);
      if (o.condition == Condition::kOut) out.push_back(o.signal.value);
    }
    const double q = MeasureSignal(p.spec(), p.models().original, p.dataset(),
                                   p.dataset().at(rec.target_id), p.config().signal)
                         .value;
    const double score = std::log(std::max(KdeDensity(in, q), 1e-12)) -
                         std::log(std::max(KdeDensity(out, q), 1e-12));
    worst = std::max(worst, std::abs(score - rec.log_lambda));
    ++compared;
  }
  const double mean = Mean(aucs);
  const bool ok = mean >= 0.80 && worst <= 1e-9 && compared > 0;
  return {ok, fmt::format("lambda AUC on vulnerable canaries [{}] mean {:.3f} (>= 0.80); "
                          "max |lambda - trained-model LiRA| {:.1e} over {} targets (<= 1e-9)",
                          Join(aucs), mean, worst, compared)};
}

// ---------------------------------------------------------------------------
// 5-10. Method comparisons on the canary benchmark.

Outcome LeakageOrdering(Runs& runs) {
  bool ok = true;
  std::string detail;
  for (auto seed : kSeeds) {
    const double id = Metric(runs.Canary("identity", seed), "lambda", "canary").auc;
    const double ga = Metric(runs.Canary("ga_plus", seed), "lambda", "canary").auc;
    const double re = Metric(runs.Canary("retrain", seed), "lambda", "canary").auc;
    ok = ok && id >= ga + 0.03 && ga >= re + 0.03;
    detail += fmt::format("{}seed {}: identity {:.3f} > ga_plus {:.3f} > retrain {:.3f}",
                          detail.empty() ? "" : "; ", seed, id, ga, re);
  }
  return {ok, detail + " (margin 0.03)"};
}

Outcome TargetedBeatsPopulation(Runs& runs) {
  bool ok = true;
  std::string detail;
  for (auto seed : kSeeds) {
    bool seed_ok = false;
    for (const std::string method : {"ga_plus", "neggrad_plus"}) {
      const RunResult& r = runs.Canary(method, seed);
      const double lam = Metric(r, "lambda", "canary").tpr_at_fpr[0];
      const double pop = Metric(r, "population", "canary").tpr_at_fpr[0];
      seed_ok = seed_ok || lam >= pop;
      detail += fmt::format("{}seed {} {}: lambda {:.3f} vs population {:.3f}",
                            detail.empty() ? "" : "; ", seed, method, lam, pop);
    }
    ok = ok && seed_ok;
  }
  return {ok, "TPR@1%FPR " + detail};
}

Outcome EfficacySeparation(Runs& runs) {
  std::map<std::string, std::vector<double>> psi;
  for (auto seed : kSeeds) {
    for (const std::string method : {"ga_plus", "neggrad_plus", "retrain"}) {
      psi[method].push_back(Metric(runs.Canary(method, seed), "psi", "canary").auc);
    }
  }
  const double ga = Mean(psi["ga_plus"]), ng = Mean(psi["neggrad_plus"]),
               re = Mean(psi["retrain"]);
  const bool ok = ga >= 0.60 && ng >= 0.60 && InBand(re);
  return {ok, fmt::format("psi AUC on canaries, mean over seeds: ga_plus {:.3f} [{}], "
                          "neggrad_plus {:.3f} [{}] (>= 0.60); retrain {:.3f} [{}] (band)",
                          ga, Join(psi["ga_plus"]), ng, Join(psi["neggrad_plus"]), re,
                          Join(psi["retrain"]))};
}

Outcome HeldOutDiffersFromOut(Runs& runs) {
  bool ok = true;
  std::string detail;
  for (const std::string method : {"ga_plus", "neggrad_plus", "retrain"}) {
    const KsSummary& ks = runs.CanaryWide(method, kSeeds[0]).audit.ks;
    const bool majority = 2 * ks.rejected >= ks.targets;
    ok = ok && ks.targets >= 10 && (method == "retrain" ? !majority : majority);
    detail += fmt::format("{}{} {}/{}", detail.empty() ? "" : ", ", method, ks.rejected,
                          ks.targets);
  }
  return {ok, fmt::format("targets where KS rejects held-out == out at 5% with {} shadows: {} "
                          "(inexact >= half, retrain < half)",
                          kWideShadows, detail)};
}

Outcome UnintendedForgetting(Runs& runs) {
  bool ok = true;
  std::string detail;
  for (const std::string method : {"ga_plus", "neggrad_plus", "l1_sparse"}) {
    std::vector<double> drops;
    for (auto seed : kSeeds) {
      const RunResult& r = runs.Canary(method, seed);
      const GapRow& ref = Row(r, "retrain");
      const GapRow& row = Row(r, method);
      if (!ref.acc_vulnerable_remain || !row.acc_vulnerable_remain) {
        Fail(ErrorKind::kInvalidArgument, "vulnerable-remain column missing");
      }
      drops.push_back(100.0 * (*ref.acc_vulnerable_remain - *row.acc_vulnerable_remain));
    }
    const double mean = Mean(drops);
    ok = ok && mean >= 5.0;
    detail += fmt::format("{}{} {:.1f} pts [{}]", detail.empty() ? "" : "; ", method, mean,
                          Join(drops));
  }
  return {ok, "vulnerable-remain accuracy below retrain, mean over seeds: " + detail +
                  " (>= 5 pts)"};
}

Outcome BlindProbe(Runs& runs) {
  std::vector<double> probe, overlap;
  for (auto seed : kSeeds) {
    const auto& blind = runs.Canary("identity", seed).audit.blind;
    if (!blind) Fail(ErrorKind::kInvalidArgument, "no blind check in canary run");
    probe.push_back(blind->probe_accuracy);
    overlap.push_back(blind->label_overlap);
  }
  const double p = Mean(probe), o = Mean(overlap);
  const bool ok = p >= 0.40 && p <= 0.60 && o >= 0.85;
  return {ok, fmt::format("probe accuracy mean {:.3f} [{}] (in [0.40, 0.60]); label overlap "
                          "mean {:.3f} [{}] (>= 0.85)",
                          p, Join(probe), o, Join(overlap))};
}

// ---------------------------------------------------------------------------
// 11. Determinism and performance.

std::map<std::string, std::string> ReadDir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[e.path().filename().string()] = ss.str();
  }
  return files;
}

Outcome DeterminismAndPerformance(const fs::path& root) {
  const fs::path one = root / "jobs1", eight = root / "jobs8", seq = root / "sequences";
  const RunResult r1 = RunPipeline(CanaryYaml("ga_plus", 5, one), one, {}, 1);
  // The run directory is not part of the config hash.
  const RunResult r8 = RunPipeline(CanaryYaml("ga_plus", 5, eight), eight, {}, 8);
  const auto a = ReadDir(one), b = ReadDir(eight);
  std::size_t differing = 0;
  for (const auto& [name, content] : a) {
    auto it = b.find(name);
    differing += it == b.end() || it->second != content;
  }
  differing += b.size() != a.size();
  const RunResult rs = RunPipeline(SequenceYaml(seq), seq, {}, 1);
  const bool ok = differing == 0 && !a.empty() && r1.seconds < 300.0 &&
                  r1.seconds + rs.seconds < 900.0;
  return {ok, fmt::format("{} artifacts, {} differ between --jobs 1 and 8; toy pipeline "
                          "{:.0f}s (< 300s), with sequence track {:.0f}s (< 900s)",
                          a.size(), differing, r1.seconds, r1.seconds + rs.seconds)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root =
      argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "ulaudit_acceptance";
  fs::create_directories(root);
  Runs runs(root);

  Run(1, "scheduler exactness", [&] { return SchedulerExactness(root); });
  Run(2, "math kernels", [&] { return MathKernels(); });
  Run(3, "null calibration (retrain)", [&] { return NullCalibration(runs); });
  Run(4, "identity reduction", [&] { return IdentityReduction(runs); });
  Run(5, "leakage ordering", [&] { return LeakageOrdering(runs); });
  Run(6, "targeted beats average-case", [&] { return TargetedBeatsPopulation(runs); });
  Run(7, "efficacy separation", [&] { return EfficacySeparation(runs); });
  Run(8, "held-out differs from out", [&] { return HeldOutDiffersFromOut(runs); });
  Run(9, "unintended forgetting", [&] { return UnintendedForgetting(runs); });
  Run(10, "blind check", [&] { return BlindProbe(runs); });
  Run(11, "determinism and performance", [&] { return DeterminismAndPerformance(root); });

  std::cout << fmt::format("{} of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
