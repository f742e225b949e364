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
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ulaudit/common.h"
#include "ulaudit/data.h"
#include "ulaudit/model.h"
#include "ulaudit/unlearn.h"

namespace ulaudit {
namespace {

// A small trained MLP with a forget/remain split of a blob dataset.
class BlobUnlearnTest : public ::testing::Test {
 protected:
  void SetUp() override {
    BlobOptions o;
    o.num_samples = 200;
    o.seed = 4;
    ds_ = SynthBlobs(o);
    const IdList ids = ds_.ids();
    const IdList forget(ids.begin(), ids.begin() + 20);
    forget_ = MakeExamples(ds_, forget, ExampleScope::kFull, 0);
    remain_ = MakeExamples(ds_, Difference(ids, forget), ExampleScope::kFull, 0);
    all_ = MakeExamples(ds_, ids, ExampleScope::kFull, 0);
    original_ = Train(spec_, all_, train_);
  }
  UnlearnInput Input() const { return {spec_, original_, forget_, remain_, train_}; }
  UnlearnHyper Hyper(UnlearnMethod m) const {
    UnlearnHyper h;
    h.method = m;
    h.learning_rate = 0.05;
    h.seed = 17;
    return h;
  }

  ModelSpec spec_{ModelKind::kMlp, 2, 16, 2, Activation::kRelu};
  TrainHyper train_{.epochs = 20, .batch_size = 32, .learning_rate = 0.1, .seed = 2};
  Dataset ds_;
  ExampleSet forget_, remain_, all_;
  ParamVector original_;
};

TEST_F(BlobUnlearnTest, IdentityKeepsParams) {
  const ParamVector p = Unlearn(Input(), Hyper(UnlearnMethod::kIdentity));
  EXPECT_EQ(p.values, original_.values);
  EXPECT_EQ(p.tag, ParamTag::kUnlearned);
}

TEST_F(BlobUnlearnTest, RetrainWithEmptyForgetEqualsTraining) {
  const ExampleSet none;
  const UnlearnInput in{spec_, original_, none, all_, train_};
  const UnlearnHyper h = Hyper(UnlearnMethod::kRetrain);
  EXPECT_EQ(Unlearn(in, h).values, Train(spec_, all_, RetrainHyper(train_, h.seed)).values);
}

TEST_F(BlobUnlearnTest, GaPlusWithoutAscentIsFineTune) {
  UnlearnHyper h = Hyper(UnlearnMethod::kGaPlus);
  h.ascent_steps = 0;
  UnlearnHyper ft = h;
  ft.method = UnlearnMethod::kFineTune;
  EXPECT_EQ(Unlearn(Input(), h).values, Unlearn(Input(), ft).values);
}

TEST_F(BlobUnlearnTest, GaPlusAscentRaisesForgetLoss) {
  UnlearnHyper h = Hyper(UnlearnMethod::kGaPlus);
  h.refine_epochs = 0;
  h.ascent_steps = 1;
  h.forget_batch = forget_.size();
  h.learning_rate = 1e-3;
  const double before = MeanLoss(spec_, original_, forget_, CrossEntropyHead(forget_));
  const ParamVector p = Unlearn(Input(), h);
  EXPECT_GT(MeanLoss(spec_, p, forget_, CrossEntropyHead(forget_)), before);
}

TEST_F(BlobUnlearnTest, SameSeedSameResult) {
  for (auto m : {UnlearnMethod::kGaPlus, UnlearnMethod::kNegGradPlus, UnlearnMethod::kL1Sparse,
                 UnlearnMethod::kScrub, UnlearnMethod::kFineTune}) {
    EXPECT_EQ(Unlearn(Input(), Hyper(m)).values, Unlearn(Input(), Hyper(m)).values)
        << ToString(m);
  }
}

TEST_F(BlobUnlearnTest, GaPlusDivergenceIsComputeError) {
  UnlearnHyper h = Hyper(UnlearnMethod::kGaPlus);
  h.learning_rate = 1e6;
  h.ascent_steps = 50;
  try {
    Unlearn(Input(), h);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCompute);
    EXPECT_NE(std::string(e.what()).find("ascent diverged"), std::string::npos);
  }
}

TEST_F(BlobUnlearnTest, NegGradPlusAlphaOneIsFineTune) {
  UnlearnHyper h = Hyper(UnlearnMethod::kNegGradPlus);
  h.alpha = 1.0;
  h.refine_epochs = 2;
  h.ascent_steps = 2 * BatchStream(remain_.size(), h.retain_batch, 0).batches_per_epoch();
  UnlearnHyper ft = h;
  ft.method = UnlearnMethod::kFineTune;
  EXPECT_EQ(Unlearn(Input(), h).values, Unlearn(Input(), ft).values);
}

TEST_F(BlobUnlearnTest, NegGradPlusAlphaZeroIsPureAscent) {
  UnlearnHyper h = Hyper(UnlearnMethod::kNegGradPlus);
  h.alpha = 0.0;
  h.ascent_steps = 7;
  UnlearnHyper ga = h;
  ga.method = UnlearnMethod::kGaPlus;
  ga.refine_epochs = 0;
  EXPECT_EQ(Unlearn(Input(), h).values, Unlearn(Input(), ga).values);
}

TEST_F(BlobUnlearnTest, L1SparseWithoutPruningIsFineTune) {
  UnlearnHyper h = Hyper(UnlearnMethod::kL1Sparse);
  h.sparsity = 0.0;
  UnlearnHyper ft = h;
  ft.method = UnlearnMethod::kFineTune;
  EXPECT_EQ(Unlearn(Input(), h).values, Unlearn(Input(), ft).values);
}

TEST_F(BlobUnlearnTest, L1SparseKeepsPrunedWeightsAtZero) {
  UnlearnHyper h = Hyper(UnlearnMethod::kL1Sparse);
  h.sparsity = 0.6;
  const std::vector<bool> mask = MagnitudePruneMask(spec_, original_.values, 0.6);
  const std::vector<bool> weights = spec_.WeightMask();
  std::size_t n_weights = 0, pruned = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    n_weights += weights[i];
    pruned += !mask[i];
    if (!mask[i]) EXPECT_TRUE(weights[i]) << "bias pruned at " << i;
  }
  EXPECT_EQ(pruned, static_cast<std::size_t>(std::floor(0.6 * n_weights)));
  const ParamVector p = Unlearn(Input(), h);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) EXPECT_EQ(p.values[i], 0.0);
  }
}

TEST_F(BlobUnlearnTest, ScrubTeacherEqualsStudentHasZeroKl) {
  EXPECT_NEAR(MeanDistillKl(spec_, original_, original_, remain_, 1.0), 0.0, 1e-12);
  EXPECT_NEAR(MeanDistillKl(spec_, original_, original_, forget_, 4.0), 0.0, 1e-12);
}

TEST_F(BlobUnlearnTest, ScrubWithoutMaxStepsDistillsRemain) {
  // From a perturbed student, remain-only rounds pull it toward the teacher.
  ParamVector student = original_;
  for (std::size_t i = 0; i < student.values.size(); ++i) {
    student.values[i] += (i % 2 ? 0.3 : -0.3);
  }
  UnlearnHyper h = Hyper(UnlearnMethod::kScrub);
  h.max_steps = 0;
  h.ce_weight = 0.0;
  h.learning_rate = 0.01;
  double previous = MeanDistillKl(spec_, student, original_, remain_, 1.0);
  for (std::size_t epochs = 1; epochs <= 4; ++epochs) {
    h.min_steps = epochs;
    const double kl = MeanDistillKl(spec_, ScrubFrom(Input(), student, h), original_, remain_, 1.0);
    EXPECT_LE(kl, previous + 1e-12) << epochs;
    previous = kl;
  }
}

class SequenceUnlearnTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SequenceOptions o;
    o.num_records = 40;
    o.vocab = 16;
    o.record_len = 10;
    o.ngram_len = 4;
    ds_ = SynthSequences(o);
    const IdList ids = ds_.ids();
    const IdList forget(ids.begin(), ids.begin() + 5);
    forget_ = MakeExamples(ds_, forget, ExampleScope::kTargetSpan, spec_.input_dim);
    remain_ = MakeExamples(ds_, Difference(ids, forget), ExampleScope::kFull, spec_.input_dim);
    ExampleSet all = MakeExamples(ds_, ids, ExampleScope::kFull, spec_.input_dim);
    original_ = Train(spec_, all, train_);
  }

  ModelSpec spec_{ModelKind::kTokenLm, 3, 8, 16, Activation::kRelu};
  TrainHyper train_{.epochs = 5, .batch_size = 16, .learning_rate = 0.2, .seed = 1};
  Dataset ds_;
  ExampleSet forget_, remain_;
  ParamVector original_;
};

TEST_F(SequenceUnlearnTest, GaGdrWithoutForgetIsFineTune) {
  const ExampleSet none;
  const UnlearnInput in{spec_, original_, none, remain_, train_};
  UnlearnHyper h;
  h.method = UnlearnMethod::kGaGdr;
  h.seed = 3;
  UnlearnHyper ft = h;
  ft.method = UnlearnMethod::kFineTune;
  EXPECT_EQ(Unlearn(in, h).values, Unlearn(in, ft).values);
}

TEST_F(SequenceUnlearnTest, NpoLossAtReferenceIsTwoOverBetaLogTwo) {
  const std::vector<double> ref = LabelLogProbs(spec_, original_, forget_);
  for (double beta : {0.1, 0.5, 2.0}) {
    const double loss = MeanLoss(spec_, original_, forget_, NpoHead(forget_, ref, beta));
    EXPECT_NEAR(loss, 2.0 / beta * std::log(2.0), 1e-12) << beta;
  }
}

TEST_F(SequenceUnlearnTest, NpoLossVanishesForLargeBetaBelowReference) {
  std::vector<double> ref = LabelLogProbs(spec_, original_, forget_);
  for (double& r : ref) r += 5.0;  // model far below the reference
  const double loss = MeanLoss(spec_, original_, forget_, NpoHead(forget_, ref, 50.0));
  EXPECT_LT(loss, 1e-6);
}

TEST_F(SequenceUnlearnTest, SequenceMethodsRejectDenseModels) {
  const ModelSpec dense{ModelKind::kMlp, 2, 4, 2, Activation::kRelu};
  const ExampleSet none;
  const ParamVector p = InitParams(dense, 1);
  const UnlearnInput in{dense, p, none, none, train_};
  UnlearnHyper h;
  h.method = UnlearnMethod::kNpo;
  EXPECT_THROW(Unlearn(in, h), Error);
}

TEST(UnlearnMethod, NamesRoundTrip) {
  for (auto m : {UnlearnMethod::kIdentity, UnlearnMethod::kRetrain, UnlearnMethod::kFineTune,
                 UnlearnMethod::kGaPlus, UnlearnMethod::kNegGradPlus, UnlearnMethod::kL1Sparse,
                 UnlearnMethod::kScrub, UnlearnMethod::kGaGdr, UnlearnMethod::kNpo}) {
    EXPECT_EQ(ParseUnlearnMethod(ToString(m)), m);
  }
  EXPECT_THROW(ParseUnlearnMethod("nope"), Error);
}

}  // namespace
}  // namespace ulaudit
