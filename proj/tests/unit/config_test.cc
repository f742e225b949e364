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


#include <string>

#include <gtest/gtest.h>

#include "ulaudit/common.h"
#include "ulaudit/config.h"

namespace ulaudit {
namespace {

// Parses `yaml` and returns the kConfig message, or "" if it parsed.
std::string ConfigErrorOf(const std::string& yaml) {
  try {
    ParseConfig(yaml);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    return e.what();
  }
  return "";
}

TEST(Config, DefaultTemplateRoundTrips) {
  const ExperimentConfig parsed = ParseConfig(DefaultConfigYaml());
  EXPECT_EQ(CanonicalConfig(parsed), CanonicalConfig(ParseConfig("")));
  const ExperimentConfig defaults;
  EXPECT_EQ(parsed.shadows, defaults.shadows);
  EXPECT_EQ(parsed.train.epochs, defaults.train.epochs);
  ASSERT_EQ(parsed.grid.size(), 1u);
  EXPECT_EQ(parsed.grid[0].learning_rate, defaults.unlearn.learning_rate);
}

TEST(Config, HashIgnoresOutputDirButNotSeed) {
  const ExperimentConfig a = ParseConfig("output_dir: x\n");
  const ExperimentConfig b = ParseConfig("output_dir: y\n");
  const ExperimentConfig c = ParseConfig("seed: 2\n");
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  EXPECT_NE(ConfigHash(a), ConfigHash(c));
  EXPECT_EQ(ConfigHash(a).size(), 16u);
}

TEST(Config, ProvenanceIgnoresUnlearningMethod) {
  const ExperimentConfig a = ParseConfig("unlearn: {method: ga_plus}\n");
  const ExperimentConfig b = ParseConfig("unlearn: {method: retrain}\n");
  EXPECT_NE(ConfigHash(a), ConfigHash(b));
  EXPECT_EQ(ProvenanceHash(a), ProvenanceHash(b));
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(ConfigErrorOf("shadows: {count: 31}\n").find("shadows.count"), std::string::npos);
  EXPECT_NE(ConfigErrorOf("dataset: {source: csv}\n").find("dataset.path"), std::string::npos);
  EXPECT_NE(ConfigErrorOf("model: {hidden_dimm: 3}\n").find("model.hidden_dimm"),
            std::string::npos);
  EXPECT_NE(ConfigErrorOf("train: {epochs: many}\n").find("train.epochs"), std::string::npos);
  EXPECT_FALSE(ConfigErrorOf("shadows: [1\n").empty());
}

TEST(Config, GridEntriesOverrideBase) {
  const ExperimentConfig c = ParseConfig(
      "unlearn:\n  method: neggrad_plus\n  alpha: 0.3\n  grid:\n"
      "    - {learning_rate: 0.5}\n    - {alpha: 0.9}\n");
  ASSERT_EQ(c.grid.size(), 2u);
  EXPECT_EQ(c.grid[0].learning_rate, 0.5);
  EXPECT_EQ(c.grid[0].alpha, 0.3);
  EXPECT_EQ(c.grid[1].alpha, 0.9);
  EXPECT_EQ(c.grid[1].method, UnlearnMethod::kNegGradPlus);
}

TEST(Config, UnlearnHyperJsonRoundTrip) {
  UnlearnHyper h;
  h.method = UnlearnMethod::kScrub;
  h.learning_rate = 0.125;
  h.temperature = 2.0;
  const UnlearnHyper back = ParseUnlearnHyperJson(UnlearnHyperJson(h));
  EXPECT_EQ(UnlearnHyperJson(back), UnlearnHyperJson(h));
}

TEST(Config, MissingFileIsConfigError) {
  try {
    LoadConfig("/nonexistent/ulaudit.yaml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

}  // namespace
}  // namespace ulaudit
