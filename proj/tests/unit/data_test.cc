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


#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ulaudit/common.h"
#include "ulaudit/data.h"

namespace ulaudit {
namespace {

ErrorKind KindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidArgument;
}

std::string MessageOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

TEST(SynthBlobs, NoiselessCleanDataIsCentroidSeparable) {
  BlobOptions o;
  o.num_samples = 300;
  o.noise = 0.0;
  o.outlier_fraction = 0.0;
  o.mislabel_fraction = 0.0;
  const Dataset ds = SynthBlobs(o);
  for (const Sample& s : ds.samples()) {
    // Centroids sit at angle 2 pi c / k on the unit circle; with two classes
    // the sign of the first feature decides the class.
    EXPECT_EQ(s.label, s.features[0] > 0 ? 0 : 1);
  }
}

TEST(SynthBlobs, FlagCounts) {
  const Dataset ds = SynthBlobs({});
  std::size_t mislabeled = 0, outliers = 0;
  for (const Sample& s : ds.samples()) {
    mislabeled += s.is_mislabeled;
    outliers += s.is_outlier;
    EXPECT_FALSE(s.is_mislabeled && s.is_outlier);
  }
  EXPECT_EQ(ds.size(), 2000u);
  EXPECT_EQ(mislabeled, 100u);
  EXPECT_EQ(outliers, 40u);
}

TEST(SynthBlobs, OutliersSitOnTheRingWithAlternatingLabels) {
  const Dataset ds = SynthBlobs({});
  std::vector<std::pair<double, std::int32_t>> ring;
  for (const Sample& s : ds.samples()) {
    if (!s.is_outlier) continue;
    EXPECT_NEAR(std::hypot(s.features[0], s.features[1]), 10.0, 1e-9);
    ring.emplace_back(std::atan2(s.features[1], s.features[0]), s.label);
  }
  std::sort(ring.begin(), ring.end());
  for (std::size_t i = 0; i < ring.size(); ++i) {
    EXPECT_NE(ring[i].second, ring[(i + 1) % ring.size()].second);
  }
}

TEST(SynthBlobs, Deterministic) {
  BlobOptions o;
  o.seed = 5;
  EXPECT_EQ(SynthBlobs(o), SynthBlobs(o));
  BlobOptions p = o;
  p.seed = 6;
  EXPECT_FALSE(SynthBlobs(o) == SynthBlobs(p));
}

TEST(SynthSequences, ShapeAndDeterminism) {
  SequenceOptions o;
  o.seed = 3;
  const Dataset ds = SynthSequences(o);
  EXPECT_EQ(ds.size(), 500u);
  EXPECT_EQ(ds.ngram_len(), 7u);
  for (const Sample& s : ds.samples()) EXPECT_EQ(s.tokens.size(), 16u);
  EXPECT_EQ(ds, SynthSequences(o));
}

TEST(SynthSequences, FewTargetCollisions) {
  const Dataset ds = SynthSequences({});
  const double pairs = 500.0 * 499.0 / 2.0;
  EXPECT_LE(static_cast<double>(CountTargetCollisions(ds)), 0.02 * pairs);
}

TEST(SynthSequences, LongestTargetLeavesOneTokenPrefix) {
  SequenceOptions o;
  o.num_records = 50;
  o.ngram_len = o.record_len - 1;
  const Dataset ds = SynthSequences(o);
  const Sample& s = ds.samples().front();
  EXPECT_EQ(s.tokens.size() - ds.ngram_len(), 1u);
}

TEST(SplitTargets, EqualThirds) {
  IdList ids;
  for (std::uint64_t i = 0; i < 600; ++i) ids.push_back(i * 3 + 1);
  const EvaluationSplit s = SplitTargetForEvaluation(ids, 9);
  EXPECT_EQ(s.unlearned.size(), 200u);
  EXPECT_EQ(s.remained.size(), 200u);
  EXPECT_EQ(s.never_trained.size(), 200u);
  EXPECT_EQ(Union(Union(s.unlearned, s.remained), s.never_trained), ids);
  const EvaluationSplit tiny = SplitTargetForEvaluation({4, 5, 6}, 1);
  EXPECT_EQ(tiny.unlearned.size() + tiny.remained.size() + tiny.never_trained.size(), 3u);
  EXPECT_EQ(tiny.unlearned.size(), 1u);
}

TEST(SplitTargets, DropsRemainderHighestFirst) {
  EXPECT_EQ(TrimToMultipleOfThree({1, 2, 3, 4, 5}), (IdList{1, 2, 3}));
  const EvaluationSplit s = SplitTargetForEvaluation({1, 2, 3, 4}, 2);
  const IdList all = Union(Union(s.unlearned, s.remained), s.never_trained);
  EXPECT_EQ(all, (IdList{1, 2, 3}));
}

TEST(Partition, ChecksSetRelations) {
  const IdList targets = {1};
  const DataPartition p = DataPartition::Make({1, 2, 3}, {1}, {10, 11}, {20}, targets);
  EXPECT_EQ(p.remain, (IdList{2, 3}));
  EXPECT_THROW(DataPartition::Make({1, 2}, {5}, {}, {}, targets), Error);
  EXPECT_THROW(DataPartition::Make({1, 2}, {1}, {}, {2}, targets), Error);
  EXPECT_THROW(DataPartition::Make({1, 2}, {1}, {1}, {}, targets), Error);
}

TEST(LoadCsv, SchemaSelectsColumns) {
  std::istringstream in("f1,f2,f3,label\n1,2,3,0\n4,5,6,1\n");
  const Dataset ds = ParseCsv(in, {{"f1", "f2", "f3"}, "label"}, "mem");
  EXPECT_EQ(ds.feature_dim(), 3u);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.samples()[1].label, 1);
}

TEST(LoadCsv, Errors) {
  const CsvSchema schema{{"a"}, "label"};
  std::istringstream empty("");
  EXPECT_NE(MessageOf([&] { ParseCsv(empty, schema, "e.csv"); }).find("no rows"),
            std::string::npos);
  std::istringstream nan_cell("a,label\n1,0\nnan,1\n");
  const std::string msg = MessageOf([&] { ParseCsv(nan_cell, schema, "n.csv"); });
  EXPECT_NE(msg.find("n.csv:3"), std::string::npos) << msg;
  std::istringstream short_row("a,label\n1\n");
  EXPECT_EQ(KindOf([&] { ParseCsv(short_row, schema, "s.csv"); }), ErrorKind::kIo);
  std::istringstream missing("b,label\n1,0\n");
  EXPECT_EQ(KindOf([&] { ParseCsv(missing, schema, "m.csv"); }), ErrorKind::kIo);
  EXPECT_EQ(KindOf([&] { LoadCsv("/nonexistent/file.csv", schema); }), ErrorKind::kIo);
}

TEST(DatasetIo, RoundTrip) {
  BlobOptions o;
  o.num_samples = 60;
  const Dataset blobs = SynthBlobs(o);
  std::stringstream a;
  WriteDataset(a, blobs);
  EXPECT_EQ(ReadDataset(a), blobs);
  SequenceOptions so;
  so.num_records = 20;
  const Dataset seq = SynthSequences(so);
  std::stringstream b;
  WriteDataset(b, seq);
  EXPECT_EQ(ReadDataset(b), seq);
}

TEST(MakeExamples, SequenceScopes) {
  SequenceOptions so;
  so.num_records = 5;
  const Dataset ds = SynthSequences(so);
  const IdList ids = ds.ids();
  EXPECT_EQ(MakeExamples(ds, ids, ExampleScope::kTargetSpan, 4).size(), 5u * 7);
  EXPECT_EQ(MakeExamples(ds, ids, ExampleScope::kFull, 4).size(), 5u * 15);
}

TEST(Subsample, RoundsFractionAndIsDeterministic) {
  IdList ids;
  for (std::uint64_t i = 0; i < 101; ++i) ids.push_back(i);
  const IdList a = Subsample(ids, 0.5, 3);
  EXPECT_EQ(a.size(), 51u);
  EXPECT_EQ(a, Subsample(ids, 0.5, 3));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
}

}  // namespace
}  // namespace ulaudit
