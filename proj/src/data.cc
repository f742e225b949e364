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

#include "ulaudit/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ulaudit/common.h"

namespace ulaudit {
namespace {

using nlohmann::json;

double StandardNormal(Rng& rng) {
  // Box-Muller; keeps the stream identical across standard libraries.
  const double u1 = 1.0 - Uniform01(rng);
  const double u2 = Uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(Uniform01(rng) * static_cast<double>(n));
}

std::size_t CountOf(double fraction, std::size_t n) {
  Require(fraction >= 0.0 && fraction <= 1.0, "fractions must be in [0, 1]");
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCommas(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(Trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset::Dataset(DatasetKind kind, std::size_t feature_dim,
                 std::size_t num_classes, std::size_t ngram_len)
    : kind_(kind),
      feature_dim_(feature_dim),
      num_classes_(num_classes),
      ngram_len_(ngram_len) {}

void Dataset::Add(Sample sample) {
  Require(index_.count(sample.id) == 0,
          fmt::format("duplicate sample id {}", sample.id));
  if (kind_ == DatasetKind::kDense) {
    Require(sample.features.size() == feature_dim_, "feature dimension mismatch");
    Require(sample.label >= 0 &&
                static_cast<std::size_t>(sample.label) < num_classes_,
            "label out of range");
    for (double v : sample.features) {
      Require(std::isfinite(v), "features must be finite");
    }
  } else {
    Require(sample.tokens.size() > ngram_len_,
            "sequence record must be longer than its target n-gram");
    for (auto t : sample.tokens) {
      Require(t >= 0 && static_cast<std::size_t>(t) < num_classes_,
              "token out of range");
    }
  }
  index_.emplace(sample.id, samples_.size());
  samples_.push_back(std::move(sample));
}

const Sample& Dataset::at(std::uint64_t id) const {
  auto it = index_.find(id);
  Require(it != index_.end(), fmt::format("unknown sample id {}", id));
  return samples_[it->second];
}

IdList Dataset::ids() const {
  IdList out;
  out.reserve(samples_.size());
  for (const Sample& s : samples_) out.push_back(s.id);
  return Sorted(std::move(out));
}

bool Dataset::operator==(const Dataset& other) const {
  return kind_ == other.kind_ && feature_dim_ == other.feature_dim_ &&
         num_classes_ == other.num_classes_ && ngram_len_ == other.ngram_len_ &&
         samples_ == other.samples_;
}

Dataset SynthBlobs(const BlobOptions& o) {
  Require(o.num_classes >= 2, "blobs need at least 2 classes");
  Require(o.dim >= 2, "blobs need dim >= 2");
  Require(o.noise >= 0, "noise must be >= 0");
  Require(o.outlier_radius >= 0, "outlier radius must be >= 0");
  const std::size_t n = o.num_samples;
  const std::size_t n_out = CountOf(o.outlier_fraction, n);
  const std::size_t n_mis = CountOf(o.mislabel_fraction, n);
  Require(n_out + n_mis <= n, "outlier + mislabel fractions exceed 1");

  Rng rng = MakeRng(DeriveSeed(o.seed, {Tag("blobs")}));
  const std::vector<std::size_t> order =
      Permutation(n, DeriveSeed(o.seed, {Tag("blob-flags")}));
  std::vector<char> outlier(n, 0), mislabeled(n, 0);
  std::vector<std::size_t> ring_slot(n, 0);
  for (std::size_t i = 0; i < n_out; ++i) outlier[order[i]] = 1;
  for (std::size_t i = 0, k = 0; i < n; ++i) {
    if (outlier[i]) ring_slot[i] = k++;
  }
  for (std::size_t i = n_out; i < n_out + n_mis; ++i) mislabeled[order[i]] = 1;

  Dataset ds(DatasetKind::kDense, o.dim, o.num_classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.id = i;
    s.label = static_cast<std::int32_t>(i % o.num_classes);
    s.features.assign(o.dim, 0.0);
    if (outlier[i]) {
      // Evenly spaced sectors with alternating labels, so no two neighbours
      // on the ring share a class and each one must be fit individually.
      const std::size_t k = ring_slot[i];
      const double angle = 2.0 * std::numbers::pi *
                           (static_cast<double>(k) + 0.5 * Uniform01(rng)) /
                           static_cast<double>(n_out);
      const double radius = o.outlier_radius;
      s.label = static_cast<std::int32_t>(k % o.num_classes);
      s.features[0] = radius * std::cos(angle);
      s.features[1] = radius * std::sin(angle);
      s.is_outlier = true;
    } else {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(s.label) /
                           static_cast<double>(o.num_classes);
      s.features[0] = std::cos(angle);
      s.features[1] = std::sin(angle);
      for (double& v : s.features) v += o.noise * StandardNormal(rng);
    }
    if (mislabeled[i]) {
      const auto shift = 1 + UniformIndex(rng, o.num_classes - 1);
      s.label = static_cast<std::int32_t>((static_cast<std::size_t>(s.label) + shift) %
                                          o.num_classes);
      s.is_mislabeled = true;
    }
    ds.Add(std::move(s));
  }
  return ds;
}

Dataset SynthSequences(const SequenceOptions& o) {
  Require(o.ngram_len >= 1 && o.ngram_len < o.record_len,
          "ngram_len must be in [1, record_len)");
  Require(o.vocab >= 2, "vocab must be >= 2");
  Require(o.branching >= 1 && o.branching <= o.vocab,
          "branching must be in [1, vocab]");
  Rng rng = MakeRng(DeriveSeed(o.seed, {Tag("chain")}));
  std::vector<std::vector<std::int32_t>> next(o.vocab);
  for (std::size_t t = 0; t < o.vocab; ++t) {
    const std::vector<std::size_t> perm =
        Permutation(o.vocab, DeriveSeed(o.seed, {Tag("successors"), t}));
    for (std::size_t b = 0; b < o.branching; ++b) {
      next[t].push_back(static_cast<std::int32_t>(perm[b]));
    }
  }
  Dataset ds(DatasetKind::kSequence, 0, o.vocab, o.ngram_len);
  std::set<std::vector<std::int32_t>> seen;
  const std::size_t max_tries = 1000 * (o.num_records + 1);
  std::size_t tries = 0;
  while (ds.size() < o.num_records) {
    Require(++tries <= max_tries, "cannot generate enough distinct target n-grams");
    Sample s;
    s.id = ds.size();
    s.label = -1;
    s.tokens.push_back(static_cast<std::int32_t>(UniformIndex(rng, o.vocab)));
    while (s.tokens.size() < o.record_len) {
      const auto& succ = next[static_cast<std::size_t>(s.tokens.back())];
      s.tokens.push_back(succ[UniformIndex(rng, succ.size())]);
    }
    std::vector<std::int32_t> tail(s.tokens.end() - static_cast<std::ptrdiff_t>(o.ngram_len),
                                   s.tokens.end());
    if (!seen.insert(tail).second) continue;
    ds.Add(std::move(s));
  }
  return ds;
}

std::size_t CountTargetCollisions(const Dataset& dataset) {
  std::map<std::vector<std::int32_t>, std::size_t> counts;
  const auto n = static_cast<std::ptrdiff_t>(dataset.ngram_len());
  for (const Sample& s : dataset.samples()) {
    ++counts[std::vector<std::int32_t>(s.tokens.end() - n, s.tokens.end())];
  }
  std::size_t pairs = 0;
  for (const auto& [tail, c] : counts) pairs += c * (c - 1) / 2;
  return pairs;
}

Dataset ParseCsv(std::istream& in, const CsvSchema& schema,
                 const std::string& source) {
  Require(!schema.feature_columns.empty(), "CSV schema needs feature columns");
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorKind::kIo, fmt::format("{}: no rows", source));
  const std::vector<std::string> header = SplitCommas(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      Fail(ErrorKind::kIo, fmt::format("{}: missing column '{}'", source, name));
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> feature_idx;
  for (const auto& name : schema.feature_columns) feature_idx.push_back(column(name));
  const std::size_t label_idx = column(schema.label_column);

  struct Row {
    std::vector<double> features;
    long label;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::vector<std::string> cells = SplitCommas(line);
    if (cells.size() != header.size()) {
      Fail(ErrorKind::kIo, fmt::format("{}:{}: expected {} cells, got {}", source,
                                       line_no, header.size(), cells.size()));
    }
    Row row;
    for (std::size_t idx : feature_idx) {
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(cells[idx], &used);
        if (used != cells[idx].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        Fail(ErrorKind::kIo, fmt::format("{}:{}: bad number '{}'", source, line_no,
                                         cells[idx]));
      }
      if (!std::isfinite(v)) {
        Fail(ErrorKind::kIo, fmt::format("{}:{}: non-finite feature '{}'", source,
                                         line_no, cells[idx]));
      }
      row.features.push_back(v);
    }
    try {
      std::size_t used = 0;
      row.label = std::stol(cells[label_idx], &used);
      if (used != cells[label_idx].size() || row.label < 0) {
        throw std::invalid_argument("label");
      }
    } catch (const std::exception&) {
      Fail(ErrorKind::kIo, fmt::format("{}:{}: bad label '{}'", source, line_no,
                                       cells[label_idx]));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) Fail(ErrorKind::kIo, fmt::format("{}: no rows", source));
  long max_label = 1;
  for (const Row& r : rows) max_label = std::max(max_label, r.label);
  Dataset ds(DatasetKind::kDense, feature_idx.size(),
             static_cast<std::size_t>(max_label) + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Sample s;
    s.id = Mix64(i);
    s.features = std::move(rows[i].features);
    s.label = static_cast<std::int32_t>(rows[i].label);
    ds.Add(std::move(s));
  }
  return ds;
}

Dataset LoadCsv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, fmt::format("cannot read {}", path));
  return ParseCsv(in, schema, path);
}

void WriteDataset(std::ostream& out, const Dataset& ds) {
  json header = {
      {"kind", ds.kind() == DatasetKind::kDense ? "dense" : "sequence"},
      {"feature_dim", ds.feature_dim()},
      {"num_classes", ds.num_classes()},
      {"ngram_len", ds.ngram_len()},
      {"count", ds.size()},
  };
  out << header.dump() << '\n';
  for (const Sample& s : ds.samples()) {
    json line = {{"id", s.id}};
    if (ds.kind() == DatasetKind::kDense) {
      line["features"] = s.features;
      line["label"] = s.label;
    } else {
      line["tokens"] = s.tokens;
    }
    line["is_canary"] = s.is_canary;
    line["is_mislabeled"] = s.is_mislabeled;
    line["is_outlier"] = s.is_outlier;
    out << line.dump() << '\n';
  }
}

Dataset ReadDataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) Fail(ErrorKind::kIo, "dataset: missing header");
  try {
    const json header = json::parse(line);
    const bool dense = header.at("kind").get<std::string>() == "dense";
    Dataset ds(dense ? DatasetKind::kDense : DatasetKind::kSequence,
               header.at("feature_dim").get<std::size_t>(),
               header.at("num_classes").get<std::size_t>(),
               header.at("ngram_len").get<std::size_t>());
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      Sample s;
      s.id = j.at("id").get<std::uint64_t>();
      if (dense) {
        s.features = j.at("features").get<std::vector<double>>();
        s.label = j.at("label").get<std::int32_t>();
      } else {
        s.tokens = j.at("tokens").get<std::vector<std::int32_t>>();
        s.label = -1;
      }
      s.is_canary = j.value("is_canary", false);
      s.is_mislabeled = j.value("is_mislabeled", false);
      s.is_outlier = j.value("is_outlier", false);
      ds.Add(std::move(s));
    }
    return ds;
  } catch (const json::exception& e) {
    Fail(ErrorKind::kIo, fmt::format("dataset line {}: {}", line_no, e.what()));
  }
}

IdList Sorted(IdList ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

IdList Union(const IdList& a, const IdList& b) {
  IdList out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IdList Difference(const IdList& a, const IdList& b) {
  IdList out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

IdList Intersection(const IdList& a, const IdList& b) {
  IdList out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

IdList Subsample(const IdList& ids, double fraction, std::uint64_t seed) {
  const std::size_t k = CountOf(fraction, ids.size());
  const std::vector<std::size_t> perm = Permutation(ids.size(), seed);
  IdList out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ids[perm[i]]);
  return Sorted(std::move(out));
}

IdList TrimToMultipleOfThree(IdList ids) {
  ids = Sorted(std::move(ids));
  ids.resize(ids.size() - ids.size() % 3);
  return ids;
}

EvaluationSplit SplitTargetForEvaluation(IdList ids, std::uint64_t seed) {
  ids = TrimToMultipleOfThree(std::move(ids));
  const std::size_t third = ids.size() / 3;
  const std::vector<std::size_t> perm = Permutation(ids.size(), seed);
  EvaluationSplit split;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    IdList& dst = i < third       ? split.unlearned
                  : i < 2 * third ? split.remained
                                  : split.never_trained;
    dst.push_back(ids[perm[i]]);
  }
  split.unlearned = Sorted(std::move(split.unlearned));
  split.remained = Sorted(std::move(split.remained));
  split.never_trained = Sorted(std::move(split.never_trained));
  return split;
}

DataPartition DataPartition::Make(IdList train, IdList forget, IdList attack,
                                  IdList out,
                                  std::span<const std::uint64_t> targets) {
  DataPartition p;
  p.train = Sorted(std::move(train));
  p.forget = Sorted(std::move(forget));
  p.attack = Sorted(std::move(attack));
  p.out = Sorted(std::move(out));
  p.remain = Difference(p.train, p.forget);
  p.Validate(targets);
  return p;
}

void DataPartition::Validate(std::span<const std::uint64_t> targets) const {
  Require(Difference(forget, train).empty(), "partition: forget must be within train");
  Require(remain == Difference(train, forget), "partition: remain must be train \\ forget");
  Require(Intersection(out, train).empty(), "partition: out must be disjoint from train");
  const IdList t = Sorted(IdList(targets.begin(), targets.end()));
  Require(Intersection(attack, t).empty(),
          "partition: attack data must be disjoint from targets");
}

ExampleSet MakeExamples(const Dataset& dataset, const IdList& ids,
                        ExampleScope scope, std::size_t context) {
  ExampleSet out;
  for (std::uint64_t id : ids) {
    const Sample& s = dataset.at(id);
    if (dataset.kind() == DatasetKind::kDense) {
      out.AddDense(s.features, s.label);
      continue;
    }
    Require(context >= 1, "sequence examples need a context window");
    const std::size_t first =
        scope == ExampleScope::kFull ? 1 : s.tokens.size() - dataset.ngram_len();
    const std::span<const std::int32_t> tokens(s.tokens);
    for (std::size_t pos = first; pos < tokens.size(); ++pos) {
      const std::size_t from = pos > context ? pos - context : 0;
      out.AddContext(tokens.subspan(from, pos - from), tokens[pos]);
    }
  }
  return out;
}

SignalValue MeasureSignal(const ModelSpec& spec, const ParamVector& params,
                          const Dataset& dataset, const Sample& sample,
                          SignalKind kind) {
  if (dataset.kind() == DatasetKind::kSequence) {
    Require(kind == SignalKind::kLoss,
            "sequence datasets only support the loss signal");
    const auto split = static_cast<std::ptrdiff_t>(sample.tokens.size() -
                                                   dataset.ngram_len());
    const std::span<const std::int32_t> tokens(sample.tokens);
    return PhiSequenceLoss(spec, params, tokens.first(static_cast<std::size_t>(split)),
                           tokens.subspan(static_cast<std::size_t>(split)));
  }
  const std::vector<double> probs =
      Forward(spec, params, InputRef{sample.features, {}});
  if (kind == SignalKind::kLogitConfidence) {
    return PhiLogitConfidence(probs, sample.label);
  }
  const double p = std::clamp(probs[static_cast<std::size_t>(sample.label)], 1e-6,
                              1.0 - 1e-6);
  return {-std::log(p), SignalKind::kLoss};
}

}  // namespace ulaudit
