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

#include "ulaudit/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "ulaudit/common.h"

namespace ulaudit {
namespace {

using nlohmann::json;

[[noreturn]] void ConfigError(const std::string& path, const std::string& what) {
  Fail(ErrorKind::kConfig, fmt::format("{}: {}", path, what));
}

// Reads one YAML mapping, remembering which keys were consumed so unknown
// keys can be rejected.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) ConfigError(path_, "expected a mapping");
  }

  template <typename T>
  void Get(const std::string& key, T* out) {
    seen_.insert(key);
    if (!node_ || !node_.IsMap() || !node_[key]) return;
    try {
      *out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      ConfigError(Path(key), "wrong type");
    }
  }

  template <typename T, typename F>
  void GetWith(const std::string& key, T* out, F parse) {
    std::string text;
    const bool present = node_ && node_.IsMap() && node_[key];
    Get(key, &text);
    if (!present) return;
    try {
      *out = parse(text);
    } catch (const Error& e) {
      ConfigError(Path(key), e.what());
    }
  }

  Section Child(const std::string& key) {
    seen_.insert(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), Path(key));
  }

  YAML::Node Raw(const std::string& key) {
    seen_.insert(key);
    return node_ && node_.IsMap() ? node_[key] : YAML::Node();
  }

  void RejectUnknown() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) ConfigError(Path(key), "unknown key");
    }
  }

  std::string Path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void ReadUnlearnFields(Section& s, UnlearnHyper* h) {
  s.GetWith("method", &h->method, ParseUnlearnMethod);
  s.Get("learning_rate", &h->learning_rate);
  s.Get("forget_batch", &h->forget_batch);
  s.Get("retain_batch", &h->retain_batch);
  s.Get("ascent_steps", &h->ascent_steps);
  s.Get("refine_epochs", &h->refine_epochs);
  s.Get("alpha", &h->alpha);
  s.Get("sparsity", &h->sparsity);
  s.Get("max_steps", &h->max_steps);
  s.Get("min_steps", &h->min_steps);
  s.Get("beta", &h->beta);
  s.Get("kl_weight", &h->kl_weight);
  s.Get("ce_weight", &h->ce_weight);
  s.Get("temperature", &h->temperature);
}

json UnlearnJson(const UnlearnHyper& h) {
  return {{"method", ToString(h.method)}, {"learning_rate", h.learning_rate},
          {"forget_batch", h.forget_batch}, {"retain_batch", h.retain_batch},
          {"ascent_steps", h.ascent_steps}, {"refine_epochs", h.refine_epochs},
          {"alpha", h.alpha},                {"sparsity", h.sparsity},
          {"max_steps", h.max_steps},        {"min_steps", h.min_steps},
          {"beta", h.beta},                  {"kl_weight", h.kl_weight},
          {"ce_weight", h.ce_weight},        {"temperature", h.temperature}};
}

json DatasetJson(const DatasetConfig& d) {
  json j = {{"source", d.source}};
  if (d.source == "blobs") {
    j["num_samples"] = d.blobs.num_samples;
    j["num_classes"] = d.blobs.num_classes;
    j["dim"] = d.blobs.dim;
    j["noise"] = d.blobs.noise;
    j["outlier_fraction"] = d.blobs.outlier_fraction;
    j["outlier_radius"] = d.blobs.outlier_radius;
    j["mislabel_fraction"] = d.blobs.mislabel_fraction;
  } else if (d.source == "sequences") {
    j["num_records"] = d.sequences.num_records;
    j["vocab"] = d.sequences.vocab;
    j["record_len"] = d.sequences.record_len;
    j["ngram_len"] = d.sequences.ngram_len;
    j["branching"] = d.sequences.branching;
  } else {
    j["path"] = d.path;
    j["features"] = d.csv.feature_columns;
    j["label"] = d.csv.label_column;
  }
  return j;
}

json ProvenanceObject(const ExperimentConfig& c) {
  return {
      {"seed", c.seed},
      {"dataset", DatasetJson(c.dataset)},
      {"model",
       {{"kind", ToString(c.model.kind)},
        {"hidden_dim", c.model.hidden_dim},
        {"activation", ToString(c.model.activation)},
        {"context", c.model.context}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"learning_rate", c.train.learning_rate},
        {"momentum", c.train.momentum},
        {"weight_decay", c.train.weight_decay}}},
      {"signal", ToString(c.signal)},
      {"pre_attack",
       {{"always", c.pre_attack_always},
        {"shadows", c.pre_shadows},
        {"fpr", c.vulnerability_fpr},
        {"protected_band", c.protected_band}}},
      {"targets",
       {{"mode", ToString(c.target_mode)},
        {"total", c.targets.total},
        {"vulnerable", c.targets.vulnerable},
        {"protected", c.targets.protected_count},
        {"retained_fraction", c.targets.retained_fraction}}},
      {"shadows",
       {{"count", c.shadows},
        {"attack_fraction", c.attack_fraction},
        {"forget_extras", c.forget_extras}}},
  };
}

}  // namespace

void ExperimentConfig::Validate() const {
  auto check = [](bool ok, const char* path, const char* what) {
    if (!ok) ConfigError(path, what);
  };
  check(dataset.source == "blobs" || dataset.source == "sequences" ||
            dataset.source == "csv",
        "dataset.source", "must be blobs, sequences or csv");
  if (dataset.source == "csv") {
    check(!dataset.path.empty(), "dataset.path", "required for csv datasets");
    check(!dataset.csv.feature_columns.empty(), "dataset.features", "must be non-empty");
  }
  if (dataset.source == "blobs") {
    check(dataset.blobs.num_samples >= 6, "dataset.num_samples", "must be >= 6");
    check(dataset.blobs.num_classes >= 2, "dataset.num_classes", "must be >= 2");
    check(dataset.blobs.dim >= 2, "dataset.dim", "must be >= 2");
    check(dataset.blobs.noise >= 0, "dataset.noise", "must be >= 0");
    check(dataset.blobs.outlier_fraction >= 0 && dataset.blobs.outlier_fraction <= 1,
          "dataset.outlier_fraction", "must be in [0, 1]");
    check(dataset.blobs.outlier_radius >= 0, "dataset.outlier_radius", "must be >= 0");
    check(dataset.blobs.mislabel_fraction >= 0 && dataset.blobs.mislabel_fraction <= 1,
          "dataset.mislabel_fraction", "must be in [0, 1]");
  }
  if (dataset.source == "sequences") {
    check(dataset.sequences.ngram_len >= 1 &&
              dataset.sequences.ngram_len < dataset.sequences.record_len,
          "dataset.ngram_len", "must be in [1, record_len)");
    check(dataset.sequences.vocab >= 2, "dataset.vocab", "must be >= 2");
    check(model.kind == ModelKind::kTokenLm, "model.kind",
          "sequence datasets need token-lm");
    check(signal == SignalKind::kLoss, "signal", "sequence datasets need the loss signal");
  } else {
    check(model.kind != ModelKind::kTokenLm, "model.kind",
          "token-lm needs a sequence dataset");
  }
  check((model.hidden_dim == 0) == (model.kind == ModelKind::kLinear), "model.hidden_dim",
        "must be 0 exactly for linear models");
  check(model.context >= 1, "model.context", "must be >= 1");
  check(train.learning_rate > 0, "train.learning_rate", "must be > 0");
  check(train.batch_size >= 1, "train.batch_size", "must be >= 1");
  check(train.momentum >= 0 && train.momentum < 1, "train.momentum", "must be in [0, 1)");
  check(train.weight_decay >= 0, "train.weight_decay", "must be >= 0");
  check(pre_shadows % 3 == 0, "pre_attack.shadows", "must be a multiple of 3");
  check(pre_shadows >= 9, "pre_attack.shadows",
        "must be >= 9 (three out-observations per sample)");
  check(vulnerability_fpr > 0 && vulnerability_fpr < 1, "pre_attack.fpr",
        "must be in (0, 1)");
  check(protected_band >= 0, "pre_attack.protected_band", "must be >= 0");
  check(targets.total >= 3, "targets.total", "must be >= 3");
  check(targets.retained_fraction >= 0 && targets.retained_fraction < 1,
        "targets.retained_fraction", "must be in [0, 1)");
  if (target_mode == TargetMode::kCanary) {
    check(targets.vulnerable >= 2, "targets.vulnerable", "canary mode needs >= 2 canaries");
  }
  check(shadows % 3 == 0, "shadows.count", "must be a multiple of 3");
  check(shadows >= 6, "shadows.count", "must be >= 6 (two observations per condition)");
  check(attack_fraction >= 0 && attack_fraction <= 1, "shadows.attack_fraction",
        "must be in [0, 1]");
  check(forget_extras >= 0 && forget_extras <= 1, "shadows.forget_extras",
        "must be in [0, 1]");
  check(!grid.empty(), "unlearn.grid", "must be non-empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      grid[i].Validate();
    } catch (const Error& e) {
      ConfigError(fmt::format("unlearn.grid[{}]", i), e.what());
    }
    const bool seq_only =
        grid[i].method == UnlearnMethod::kGaGdr || grid[i].method == UnlearnMethod::kNpo;
    if (seq_only && model.kind != ModelKind::kTokenLm) {
      ConfigError(fmt::format("unlearn.grid[{}].method", i), "needs a token-lm model");
    }
  }
  check(!fpr_points.empty(), "report.fpr", "must be non-empty");
  for (double f : fpr_points) check(f > 0 && f < 1, "report.fpr", "entries must be in (0, 1)");
  check(forgetting_margin >= 0, "report.forgetting_margin", "must be >= 0");
}

bool ExperimentConfig::NeedsPreAttack() const {
  return pre_attack_always || target_mode != TargetMode::kRandom;
}

ExperimentConfig ParseConfig(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    Fail(ErrorKind::kConfig, fmt::format("config: {}", e.what()));
  }
  ExperimentConfig c;
  Section top(root, "");
  top.Get("seed", &c.seed);
  top.Get("output_dir", &c.output_dir);

  Section ds = top.Child("dataset");
  ds.Get("source", &c.dataset.source);
  ds.Get("num_samples", &c.dataset.blobs.num_samples);
  ds.Get("num_classes", &c.dataset.blobs.num_classes);
  ds.Get("dim", &c.dataset.blobs.dim);
  ds.Get("noise", &c.dataset.blobs.noise);
  ds.Get("outlier_fraction", &c.dataset.blobs.outlier_fraction);
  ds.Get("outlier_radius", &c.dataset.blobs.outlier_radius);
  ds.Get("mislabel_fraction", &c.dataset.blobs.mislabel_fraction);
  ds.Get("num_records", &c.dataset.sequences.num_records);
  ds.Get("vocab", &c.dataset.sequences.vocab);
  ds.Get("record_len", &c.dataset.sequences.record_len);
  ds.Get("ngram_len", &c.dataset.sequences.ngram_len);
  ds.Get("branching", &c.dataset.sequences.branching);
  ds.Get("path", &c.dataset.path);
  ds.Get("features", &c.dataset.csv.feature_columns);
  ds.Get("label", &c.dataset.csv.label_column);
  ds.RejectUnknown();

  Section model = top.Child("model");
  model.GetWith("kind", &c.model.kind, ParseModelKind);
  if (c.model.kind == ModelKind::kLinear) c.model.hidden_dim = 0;
  model.Get("hidden_dim", &c.model.hidden_dim);
  model.GetWith("activation", &c.model.activation, ParseActivation);
  model.Get("context", &c.model.context);
  model.RejectUnknown();

  Section train = top.Child("train");
  train.Get("epochs", &c.train.epochs);
  train.Get("batch_size", &c.train.batch_size);
  train.Get("learning_rate", &c.train.learning_rate);
  train.Get("momentum", &c.train.momentum);
  train.Get("weight_decay", &c.train.weight_decay);
  train.RejectUnknown();

  if (c.dataset.source == "sequences") c.signal = SignalKind::kLoss;
  top.GetWith("signal", &c.signal, ParseSignalKind);

  Section pre = top.Child("pre_attack");
  pre.Get("always", &c.pre_attack_always);
  pre.Get("shadows", &c.pre_shadows);
  pre.Get("fpr", &c.vulnerability_fpr);
  pre.Get("protected_band", &c.protected_band);
  pre.RejectUnknown();

  Section tg = top.Child("targets");
  tg.GetWith("mode", &c.target_mode, ParseTargetMode);
  tg.Get("total", &c.targets.total);
  tg.Get("vulnerable", &c.targets.vulnerable);
  tg.Get("protected", &c.targets.protected_count);
  tg.Get("retained_fraction", &c.targets.retained_fraction);
  tg.RejectUnknown();

  Section sh = top.Child("shadows");
  sh.Get("count", &c.shadows);
  sh.Get("attack_fraction", &c.attack_fraction);
  sh.Get("forget_extras", &c.forget_extras);
  sh.RejectUnknown();

  Section un = top.Child("unlearn");
  ReadUnlearnFields(un, &c.unlearn);
  const YAML::Node grid = un.Raw("grid");
  un.RejectUnknown();
  if (grid && !grid.IsNull()) {
    if (!grid.IsSequence()) ConfigError("unlearn.grid", "expected a list");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      UnlearnHyper h = c.unlearn;
      Section entry(grid[i], fmt::format("unlearn.grid[{}]", i));
      ReadUnlearnFields(entry, &h);
      entry.RejectUnknown();
      c.grid.push_back(h);
    }
  } else {
    c.grid.push_back(c.unlearn);
  }

  Section rep = top.Child("report");
  rep.Get("fpr", &c.fpr_points);
  rep.Get("forgetting_margin", &c.forgetting_margin);
  rep.RejectUnknown();
  top.RejectUnknown();
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kConfig, fmt::format("cannot read config {}", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string DefaultConfigYaml() {
  const ExperimentConfig c = [] {
    ExperimentConfig d;
    d.grid = {d.unlearn};
    return d;
  }();
  const auto& b = c.dataset.blobs;
  const auto& q = c.dataset.sequences;
  const auto& u = c.unlearn;
  std::string y;
  y += "# ulaudit experiment configuration. Every key is optional; the values\n";
  y += "# below are the defaults.\n\n";
  y += fmt::format("seed: {}\noutput_dir: {}\n\n", c.seed, c.output_dir);
  y += "dataset:\n";
  y += fmt::format("  source: {}          # blobs | sequences | csv\n", c.dataset.source);
  y += "  # blobs\n";
  y += fmt::format("  num_samples: {}\n  num_classes: {}\n  dim: {}\n  noise: {}\n",
                   b.num_samples, b.num_classes, b.dim, b.noise);
  y += fmt::format("  outlier_fraction: {}\n  outlier_radius: {}\n", b.outlier_fraction,
                   b.outlier_radius);
  y += fmt::format("  mislabel_fraction: {}\n", b.mislabel_fraction);
  y += "  # sequences (needs model.kind: token-lm and signal: loss)\n";
  y += fmt::format("  num_records: {}\n  vocab: {}\n  record_len: {}\n  ngram_len: {}\n",
                   q.num_records, q.vocab, q.record_len, q.ngram_len);
  y += fmt::format("  branching: {}\n", q.branching);
  y += "  # csv: a header row, numeric feature columns and an integer label column\n";
  y += "  path: \"\"\n  features: []\n";
  y += fmt::format("  label: {}\n\n", c.dataset.csv.label_column);
  y += "model:\n";
  y += fmt::format("  kind: {}              # linear | mlp | token-lm\n", ToString(c.model.kind));
  y += fmt::format("  hidden_dim: {}\n  activation: {}        # relu | tanh\n",
                   c.model.hidden_dim, ToString(c.model.activation));
  y += fmt::format("  context: {}             # token-lm context window\n\n", c.model.context);
  y += "train:\n";
  y += fmt::format("  epochs: {}\n  batch_size: {}\n  learning_rate: {}\n", c.train.epochs,
                   c.train.batch_size, c.train.learning_rate);
  y += fmt::format("  momentum: {}\n  weight_decay: {}\n\n", c.train.momentum,
                   c.train.weight_decay);
  y += fmt::format("signal: {}   # logit-confidence | loss\n\n", ToString(c.signal));
  y += "# Per-sample vulnerability pre-attack (in/out shadows over the whole dataset).\n";
  y += "pre_attack:\n";
  y += fmt::format("  always: {}             # also run in random target mode\n",
                   c.pre_attack_always);
  y += fmt::format("  shadows: {}\n  fpr: {}\n  protected_band: {}\n\n", c.pre_shadows,
                   c.vulnerability_fpr, c.protected_band);
  y += "targets:\n";
  y += fmt::format(
      "  # random | vulnerable_only | protected_only | vulnerable_plus_protected | canary\n"
      "  mode: {}\n",
      ToString(c.target_mode));
  y += fmt::format("  total: {}\n  vulnerable: {}\n  protected: {}\n", c.targets.total,
                   c.targets.vulnerable, c.targets.protected_count);
  y += fmt::format("  retained_fraction: {}\n\n", c.targets.retained_fraction);
  y += "shadows:\n";
  y += fmt::format("  count: {}              # multiple of 3\n", c.shadows);
  y += fmt::format("  attack_fraction: {}\n  forget_extras: {}\n\n", c.attack_fraction,
                   c.forget_extras);
  y += "unlearn:\n";
  y += fmt::format(
      "  # identity | retrain | finetune | ga_plus | neggrad_plus | l1_sparse | scrub |\n"
      "  # ga_gdr | npo\n"
      "  method: {}\n",
      ToString(u.method));
  y += fmt::format("  learning_rate: {}\n  forget_batch: {}\n  retain_batch: {}\n",
                   u.learning_rate, u.forget_batch, u.retain_batch);
  y += fmt::format("  ascent_steps: {}\n  refine_epochs: {}\n  alpha: {}\n  sparsity: {}\n",
                   u.ascent_steps, u.refine_epochs, u.alpha, u.sparsity);
  y += fmt::format("  max_steps: {}\n  min_steps: {}\n  beta: {}\n", u.max_steps, u.min_steps,
                   u.beta);
  y += fmt::format("  kl_weight: {}\n  ce_weight: {}\n  temperature: {}\n", u.kl_weight,
                   u.ce_weight, u.temperature);
  y += "  # Candidates for grid search; each entry overrides the values above.\n";
  y += "  # Without a grid the values above are the only candidate.\n";
  y += "  # grid:\n  #   - {learning_rate: 0.01}\n  #   - {learning_rate: 0.05, ascent_steps: 5}\n\n";
  y += "report:\n";
  y += fmt::format("  fpr: [{}]\n", fmt::join(c.fpr_points, ", "));
  y += fmt::format("  forgetting_margin: {}\n", c.forgetting_margin);
  return y;
}

std::string CanonicalConfig(const ExperimentConfig& c) {
  json j = ProvenanceObject(c);
  json grid = json::array();
  for (const auto& h : c.grid) grid.push_back(UnlearnJson(h));
  j["unlearn"] = UnlearnJson(c.unlearn);
  j["unlearn"]["grid"] = grid;
  j["report"] = {{"fpr", c.fpr_points}, {"forgetting_margin", c.forgetting_margin}};
  return j.dump();
}

std::string ConfigHash(const ExperimentConfig& config) {
  return HexDigest(Fnv1a(CanonicalConfig(config)));
}

std::string ProvenanceJson(const ExperimentConfig& config) {
  return ProvenanceObject(config).dump();
}

std::string ProvenanceHash(const ExperimentConfig& config) {
  return HexDigest(Fnv1a(ProvenanceJson(config)));
}

std::string UnlearnHyperJson(const UnlearnHyper& hyper) { return UnlearnJson(hyper).dump(); }

UnlearnHyper ParseUnlearnHyperJson(const std::string& text) {
  UnlearnHyper h;
  try {
    const json j = json::parse(text);
    h.method = ParseUnlearnMethod(j.at("method").get<std::string>());
    j.at("learning_rate").get_to(h.learning_rate);
    j.at("forget_batch").get_to(h.forget_batch);
    j.at("retain_batch").get_to(h.retain_batch);
    j.at("ascent_steps").get_to(h.ascent_steps);
    j.at("refine_epochs").get_to(h.refine_epochs);
    j.at("alpha").get_to(h.alpha);
    j.at("sparsity").get_to(h.sparsity);
    j.at("max_steps").get_to(h.max_steps);
    j.at("min_steps").get_to(h.min_steps);
    j.at("beta").get_to(h.beta);
    j.at("kl_weight").get_to(h.kl_weight);
    j.at("ce_weight").get_to(h.ce_weight);
    j.at("temperature").get_to(h.temperature);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kIo, fmt::format("unlearn hyper json: {}", e.what()));
  }
  return h;
}

Dataset BuildDataset(const ExperimentConfig& c) {
  if (c.dataset.source == "blobs") {
    BlobOptions o = c.dataset.blobs;
    o.seed = DeriveSeed(c.seed, {Tag("dataset")});
    return SynthBlobs(o);
  }
  if (c.dataset.source == "sequences") {
    SequenceOptions o = c.dataset.sequences;
    o.seed = DeriveSeed(c.seed, {Tag("dataset")});
    return SynthSequences(o);
  }
  return LoadCsv(c.dataset.path, c.dataset.csv);
}

ModelSpec BuildSpec(const ExperimentConfig& c, const Dataset& dataset) {
  ModelSpec spec;
  spec.kind = c.model.kind;
  spec.hidden_dim = c.model.hidden_dim;
  spec.activation = c.model.activation;
  spec.num_outputs = dataset.num_classes();
  spec.input_dim =
      dataset.kind() == DatasetKind::kSequence ? c.model.context : dataset.feature_dim();
  spec.Validate();
  return spec;
}

}  // namespace ulaudit
