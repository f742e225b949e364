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

// Datasets (dense blobs, CSV, token sequences), id-set partitions and the
// conversion from samples to model examples.

#ifndef ULAUDIT_DATA_H_
#define ULAUDIT_DATA_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ulaudit/model.h"

namespace ulaudit {

using IdList = std::vector<std::uint64_t>;  // kept sorted and unique

struct Sample {
  std::uint64_t id = 0;
  std::vector<double> features;      // dense datasets
  std::vector<std::int32_t> tokens;  // sequence datasets: prefix + target
  std::int32_t label = 0;            // class index; unused for sequences
  bool is_canary = false;
  bool is_mislabeled = false;
  bool is_outlier = false;

  bool operator==(const Sample&) const = default;
};

enum class DatasetKind { kDense, kSequence };

class Dataset {
 public:
  Dataset() = default;
  Dataset(DatasetKind kind, std::size_t feature_dim, std::size_t num_classes,
          std::size_t ngram_len);

  void Add(Sample sample);

  DatasetKind kind() const { return kind_; }
  std::size_t feature_dim() const { return feature_dim_; }
  // Classes for dense data, vocabulary size for sequences.
  std::size_t num_classes() const { return num_classes_; }
  // Length of the trailing target span of every sequence record.
  std::size_t ngram_len() const { return ngram_len_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& at(std::uint64_t id) const;
  bool contains(std::uint64_t id) const { return index_.count(id) > 0; }
  IdList ids() const;

  bool operator==(const Dataset& other) const;

 private:
  DatasetKind kind_ = DatasetKind::kDense;
  std::size_t feature_dim_ = 0;
  std::size_t num_classes_ = 0;
  std::size_t ngram_len_ = 0;
  std::vector<Sample> samples_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

struct BlobOptions {
  std::size_t num_samples = 2000;
  std::size_t num_classes = 2;
  std::size_t dim = 2;
  double noise = 0.5;
  double outlier_fraction = 0.02;
  double outlier_radius = 10.0;
  double mislabel_fraction = 0.05;
  std::uint64_t seed = 0;
};

// Gaussian blobs around centroids on the unit circle (first two dims).
// Outliers sit on a far ring in evenly spaced sectors with alternating
// labels; mislabeled samples are drawn from the non-outliers and get a
// different class.
Dataset SynthBlobs(const BlobOptions& options);

struct SequenceOptions {
  std::size_t num_records = 500;
  std::size_t vocab = 64;
  std::size_t record_len = 16;
  std::size_t ngram_len = 7;
  std::size_t branching = 4;  // successors per token in the generating chain
  std::uint64_t seed = 0;
};

// Records sampled from a sparse random Markov chain. Final n-grams are
// unique across the corpus (duplicates are resampled).
Dataset SynthSequences(const SequenceOptions& options);

// Number of record pairs sharing an identical final n-gram.
std::size_t CountTargetCollisions(const Dataset& dataset);

struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string label_column = "label";
};

// Header row required. Ids are Mix64(row index).
Dataset LoadCsv(const std::string& path, const CsvSchema& schema);
Dataset ParseCsv(std::istream& in, const CsvSchema& schema,
                 const std::string& source);

// JSON lines: a header object, then one sample per line.
void WriteDataset(std::ostream& out, const Dataset& dataset);
Dataset ReadDataset(std::istream& in);

struct EvaluationSplit {
  IdList unlearned;      // trained, then unlearned
  IdList remained;       // trained and kept
  IdList never_trained;  // held out
};

// Equal thirds. A remainder of |ids| mod 3 is dropped, highest ids first.
EvaluationSplit SplitTargetForEvaluation(IdList ids, std::uint64_t seed);

// Largest multiple of three, dropping the highest ids.
IdList TrimToMultipleOfThree(IdList ids);

struct DataPartition {
  IdList train;
  IdList forget;
  IdList remain;
  IdList attack;
  IdList out;

  // Builds remain = train \ forget and checks every set relation.
  static DataPartition Make(IdList train, IdList forget, IdList attack,
                            IdList out, std::span<const std::uint64_t> targets);
  void Validate(std::span<const std::uint64_t> targets) const;
};

IdList Sorted(IdList ids);
IdList Union(const IdList& a, const IdList& b);
IdList Difference(const IdList& a, const IdList& b);
IdList Intersection(const IdList& a, const IdList& b);

// Draws round(fraction * |ids|) ids without replacement.
IdList Subsample(const IdList& ids, double fraction, std::uint64_t seed);

enum class ExampleScope {
  kFull,        // every position of every record
  kTargetSpan,  // only the trailing n-gram positions (sequences)
};

// Dense samples become one example each. Sequence records become one
// next-token example per position with the last `context` tokens as input.
ExampleSet MakeExamples(const Dataset& dataset, const IdList& ids,
                        ExampleScope scope, std::size_t context);

// The membership signal of one sample under a model.
SignalValue MeasureSignal(const ModelSpec& spec, const ParamVector& params,
                          const Dataset& dataset, const Sample& sample,
                          SignalKind kind);

}  // namespace ulaudit

#endif  // ULAUDIT_DATA_H_
