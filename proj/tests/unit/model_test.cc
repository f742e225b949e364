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
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ulaudit/common.h"
#include "ulaudit/data.h"
#include "ulaudit/model.h"

namespace ulaudit {
namespace {

ExampleSet OneDense(std::vector<double> x, std::int32_t label) {
  ExampleSet s;
  s.AddDense(x, label);
  return s;
}

TEST(InitParams, DeterministicPerSeed) {
  const ModelSpec spec{ModelKind::kLinear, 2, 0, 2, Activation::kRelu};
  EXPECT_EQ(InitParams(spec, 7), InitParams(spec, 7));
  EXPECT_NE(InitParams(spec, 7), InitParams(spec, 8));
}

TEST(InitParams, LayoutLengths) {
  EXPECT_EQ(InitParams({ModelKind::kMlp, 2, 16, 2, Activation::kRelu}, 1).values.size(), 82u);
  EXPECT_EQ(InitParams({ModelKind::kLinear, 5, 0, 3, Activation::kRelu}, 1).values.size(),
            5u * 3 + 3);
  EXPECT_EQ((ModelSpec{ModelKind::kTokenLm, 4, 16, 64, Activation::kRelu}.ParamCount()),
            64u * 16 * 2 + 64);
}

TEST(ModelSpec, RejectsInconsistentHiddenDim) {
  EXPECT_THROW(InitParams({ModelKind::kLinear, 2, 4, 2, Activation::kRelu}, 1), Error);
  EXPECT_THROW(InitParams({ModelKind::kMlp, 2, 0, 2, Activation::kRelu}, 1), Error);
  EXPECT_THROW(InitParams({ModelKind::kMlp, 2, 4, 1, Activation::kRelu}, 1), Error);
}

TEST(Forward, ZeroWeightsGiveUniform) {
  const ModelSpec spec{ModelKind::kMlp, 3, 4, 5, Activation::kTanh};
  ParamVector p;
  p.values.assign(spec.ParamCount(), 0.0);
  const std::vector<double> x = {0.3, -1.0, 2.0};
  for (double v : Forward(spec, p, {x, {}})) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Forward, ProbabilitiesSumToOne) {
  const ModelSpec spec{ModelKind::kMlp, 2, 16, 2, Activation::kRelu};
  const ParamVector p = InitParams(spec, 3);
  for (double a : {-5.0, 0.0, 0.7, 40.0}) {
    const std::vector<double> x = {a, -a / 2};
    double s = 0.0;
    for (double v : Forward(spec, p, {x, {}})) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Forward, HandSetLogisticAtOrigin) {
  // One input, two classes: logits (w x + b, 0) with w = 1, b = 0.
  const ModelSpec spec{ModelKind::kLinear, 1, 0, 2, Activation::kRelu};
  ParamVector p;
  p.values = {1.0, 0.0, 0.0, 0.0};
  const std::vector<double> x = {0.0};
  const auto probs = Forward(spec, p, {x, {}});
  EXPECT_DOUBLE_EQ(probs[0], 0.5);
  EXPECT_DOUBLE_EQ(probs[1], 0.5);
}

TEST(Gradient, MatchesCentralDifferences) {
  const ModelSpec specs[] = {
      {ModelKind::kLinear, 3, 0, 4, Activation::kRelu},
      {ModelKind::kMlp, 3, 5, 3, Activation::kTanh},
      {ModelKind::kMlp, 3, 5, 3, Activation::kRelu},
      {ModelKind::kTokenLm, 3, 4, 6, Activation::kRelu},
  };
  for (const auto& spec : specs) {
    ExampleSet data;
    if (spec.kind == ModelKind::kTokenLm) {
      const std::vector<std::int32_t> ctx = {1, 4, 4};
      data.AddContext(ctx, 2);
    } else {
      data = OneDense({0.4, -1.2, 0.9}, 1);
    }
    const std::vector<double> params = InitParams(spec, 5).values;
    const std::vector<std::size_t> batch = {0};
    Evaluator ev(spec);
    std::vector<double> grad(params.size()), scratch(params.size());
    BatchGradient(ev, params, data, batch, CrossEntropyHead(data), grad);
    for (std::size_t i = 0; i < params.size(); ++i) {
      std::vector<double> up = params, down = params;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double fd =
          (BatchGradient(ev, up, data, batch, CrossEntropyHead(data), scratch) -
           BatchGradient(ev, down, data, batch, CrossEntropyHead(data), scratch)) /
          2e-6;
      EXPECT_NEAR(grad[i], fd, 1e-4 * std::max(1.0, std::abs(fd))) << ToString(spec.kind) << i;
    }
  }
}

TEST(Train, ZeroEpochsReturnsInit) {
  const ModelSpec spec{ModelKind::kMlp, 2, 16, 2, Activation::kRelu};
  const ExampleSet data = OneDense({1.0, 2.0}, 0);
  const TrainHyper h{.epochs = 0, .seed = 4};
  EXPECT_EQ(Train(spec, data, h).values, InitParams(spec, 4).values);
}

TEST(Train, SeparableBlobsReachFullAccuracy) {
  BlobOptions o;
  o.num_samples = 400;
  o.noise = 0.2;
  o.outlier_fraction = 0.0;
  o.mislabel_fraction = 0.0;
  const Dataset ds = SynthBlobs(o);
  const ExampleSet data = MakeExamples(ds, ds.ids(), ExampleScope::kFull, 0);
  const ModelSpec spec{ModelKind::kMlp, 2, 16, 2, Activation::kRelu};
  const ParamVector p = Train(spec, data, {.epochs = 50, .seed = 1});
  EXPECT_DOUBLE_EQ(Accuracy(spec, p, data), 1.0);
}

TEST(Train, NanLossAborts) {
  const ModelSpec spec{ModelKind::kLinear, 1, 0, 2, Activation::kRelu};
  const ExampleSet data = OneDense({std::numeric_limits<double>::quiet_NaN()}, 0);
  try {
    Train(spec, data, {.epochs = 1});
    FAIL() << "expected a compute error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCompute);
  }
}

TEST(LogitConfidence, KnownValues) {
  const std::vector<double> half = {0.5, 0.5}, ninety = {0.1, 0.9}, one = {0.0, 1.0};
  EXPECT_DOUBLE_EQ(PhiLogitConfidence(half, 0).value, 0.0);
  EXPECT_NEAR(PhiLogitConfidence(ninety, 1).value, 2.19722, 1e-5);
  EXPECT_NEAR(PhiLogitConfidence(one, 1).value, 13.8155, 1e-4);
  EXPECT_NEAR(PhiLogitConfidence(one, 0).value, -13.8155, 1e-4);
}

TEST(SequenceLoss, UniformModelGivesLogVocab) {
  const ModelSpec spec{ModelKind::kTokenLm, 4, 16, 64, Activation::kRelu};
  ParamVector p;
  p.values.assign(spec.ParamCount(), 0.0);
  const std::vector<std::int32_t> prefix = {1, 2, 3}, target = {4, 5, 6, 7, 8, 9, 10};
  EXPECT_NEAR(PhiSequenceLoss(spec, p, prefix, target).value, std::log(64.0), 1e-12);
}

TEST(SequenceLoss, NearCertainModelGivesTinyLoss) {
  // Bias-only model that puts 1 - 1e-6 on token 3; the target repeats it.
  const std::size_t v = 8;
  const ModelSpec spec{ModelKind::kTokenLm, 2, 2, v, Activation::kRelu};
  ParamVector p;
  p.values.assign(spec.ParamCount(), 0.0);
  const double logit = std::log((1 - 1e-6) / (1e-6 / (v - 1)));
  p.values[2 * v * 2 + 3] = logit;
  const std::vector<std::int32_t> prefix = {0}, target = {3, 3, 3};
  EXPECT_NEAR(PhiSequenceLoss(spec, p, prefix, target).value, 1e-6, 1e-9);
}

TEST(SequenceLoss, MatchesChainRuleProduct) {
  const ModelSpec spec{ModelKind::kTokenLm, 3, 4, 10, Activation::kRelu};
  const ParamVector p = InitParams(spec, 9);
  const std::vector<std::int32_t> prefix = {2, 7}, target = {1, 9, 4, 4};
  std::vector<std::int32_t> full = prefix;
  full.insert(full.end(), target.begin(), target.end());
  double prob = 1.0;
  for (std::size_t pos = prefix.size(); pos < full.size(); ++pos) {
    const std::size_t from = pos > 3 ? pos - 3 : 0;
    const std::vector<std::int32_t> ctx(full.begin() + from, full.begin() + pos);
    prob *= Forward(spec, p, {{}, ctx})[full[pos]];
  }
  const double expected = -std::log(prob) / static_cast<double>(target.size());
  EXPECT_NEAR(PhiSequenceLoss(spec, p, prefix, target).value, expected, 1e-9);
}

TEST(Params, RoundTripIsBitExact) {
  const ModelSpec spec{ModelKind::kMlp, 2, 16, 2, Activation::kTanh};
  ParamVector p = InitParams(spec, 2);
  p.tag = ParamTag::kUnlearned;
  std::stringstream ss;
  WriteParams(ss, spec, p);
  ModelSpec spec2;
  ParamVector p2;
  ReadParams(ss, &spec2, &p2);
  EXPECT_EQ(spec2, spec);
  EXPECT_EQ(p2, p);
}

TEST(Params, TruncatedFileIsIoError) {
  const ModelSpec spec{ModelKind::kLinear, 2, 0, 2, Activation::kRelu};
  std::stringstream ss;
  WriteParams(ss, spec, InitParams(spec, 1));
  std::string text = ss.str();
  text.resize(text.size() - 3);
  std::stringstream cut(text);
  ModelSpec s;
  ParamVector p;
  try {
    ReadParams(cut, &s, &p);
    FAIL() << "expected an io error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(SgdMomentum, FollowsUpdateRule) {
  SgdMomentum opt(1, 0.1, 0.9, 0.01);
  std::vector<double> theta = {1.0};
  const std::vector<double> g = {2.0};
  opt.Step(theta, g);  // v = 2 + 0.01 = 2.01
  EXPECT_DOUBLE_EQ(theta[0], 1.0 - 0.1 * 2.01);
  const double t1 = theta[0];
  opt.Step(theta, g);  // v = 0.9 * 2.01 + 2 + 0.01 * t1
  EXPECT_DOUBLE_EQ(theta[0], t1 - 0.1 * (0.9 * 2.01 + (2.0 + 0.01 * t1)));
}

}  // namespace
}  // namespace ulaudit
