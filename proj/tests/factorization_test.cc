// Copyright 2026 The privmf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privmf/factorization.h"

#include <cmath>

#include <gtest/gtest.h>

#include "privmf/dataset.h"

namespace privmf {
namespace {

RatingsDataset Labeled(std::vector<Rating> ratings,
                       std::map<UserId, Label> labels) {
  return RatingsDataset::Create(std::move(ratings), labels, std::string("x0"));
}

TEST(ComputeBiasesTest, HalfClassMeanGap) {
  auto d = Labeled({{1, 7, 4.0}, {2, 7, 3.0}, {1, 8, 2.0}, {2, 8, 2.0}},
                   {{1, Label::kPositive}, {2, Label::kNegative}});
  auto b = ComputeBiases(d);
  EXPECT_DOUBLE_EQ(b.bias.at(7), 0.5);
  EXPECT_DOUBLE_EQ(b.bias.at(8), 0.0);
  EXPECT_TRUE(b.single_class_items.empty());
}

TEST(ComputeBiasesTest, ThreeUserToy) {
  auto d = Labeled({{1, 0, 5.0}, {2, 0, 3.0}, {3, 0, 2.0}},
                   {{1, Label::kPositive},
                    {2, Label::kPositive},
                    {3, Label::kNegative}});
  EXPECT_DOUBLE_EQ(ComputeBiases(d).bias.at(0), 1.0);
}

TEST(ComputeBiasesTest, SingleClassItemGetsZero) {
  auto d = Labeled({{1, 0, 5.0}, {2, 0, 1.0}, {1, 1, 4.0}},
                   {{1, Label::kPositive}, {2, Label::kNegative}});
  auto b = ComputeBiases(d);
  EXPECT_EQ(b.bias.at(1), 0.0);
  EXPECT_EQ(b.single_class_items, (std::vector<ItemId>{1}));
}

TEST(ComputeBiasesTest, UnlabeledUsersIgnored) {
  auto d = Labeled({{1, 0, 5.0}, {2, 0, 1.0}, {3, 0, 100.0}},
                   {{1, Label::kPositive}, {2, Label::kNegative}});
  EXPECT_DOUBLE_EQ(ComputeBiases(d).bias.at(0), 2.0);
}

SyntheticData Synthetic(int users, int items, int d, double sigma,
                        std::uint64_t seed) {
  SyntheticConfig config;
  config.n_users = users;
  config.n_items = items;
  config.d = d;
  config.noise_sigma = sigma;
  return GenerateSynthetic(config, seed);
}

std::map<ItemId, double> TrueBiases(const SyntheticGroundTruth& truth) {
  std::map<ItemId, double> b;
  for (std::size_t j = 0; j < truth.items.size(); ++j) b[j] = truth.items[j].bias;
  return b;
}

TEST(TrainMfTest, NoiselessRankOneFits) {
  auto data = Synthetic(100, 20, 1, 0.0, 3);
  MfHyperparams hp;
  hp.d = 1;
  hp.regularization = 0.0;
  hp.learning_rate = 0.02;
  hp.epochs = 200;
  auto result = TrainMf(data.dataset, TrueBiases(data.truth), hp);
  EXPECT_LT(result.epoch_loss.back(), 1e-3);
}

TEST(TrainMfTest, FrozenCoordinatesAndProbabilities) {
  SyntheticConfig config;
  config.n_users = 200;
  config.n_items = 10;
  config.prob_model.kind = ProbabilityModel::Kind::kUniform;
  config.prob_model.low = 0.2;
  config.prob_model.high = 0.8;
  auto data = GenerateSynthetic(config, 8);
  auto biases = ComputeBiases(data.dataset);
  MfHyperparams hp;
  hp.d = 3;
  hp.epochs = 3;
  auto model = TrainMf(data.dataset, biases.bias, hp).model;
  ValidateModel(model);
  double n_plus = 0, n_minus = 0;
  for (const auto& u : data.truth.users) {
    ++(u.label == Label::kPositive ? n_plus : n_minus);
  }
  for (std::size_t j = 0; j < model.catalog.size(); ++j) {
    const auto& p = model.catalog.profiles()[j];
    EXPECT_EQ(p.bias, biases.bias.at(p.id));
    double c_plus = 0, c_minus = 0;
    for (const Rating& r : data.dataset.ratings()) {
      if (r.item != p.id) continue;
      ++(data.truth.users[r.user].label == Label::kPositive ? c_plus : c_minus);
    }
    EXPECT_EQ(model.rating_probs[j].plus, c_plus / n_plus);
    EXPECT_EQ(model.rating_probs[j].minus, c_minus / n_minus);
  }
}

TEST(TrainMfTest, DeterministicGivenSeed) {
  auto data = Synthetic(50, 10, 2, 0.5, 4);
  auto biases = ComputeBiases(data.dataset).bias;
  MfHyperparams hp;
  hp.d = 2;
  hp.epochs = 5;
  hp.seed = 99;
  auto a = TrainMf(data.dataset, biases, hp);
  auto b = TrainMf(data.dataset, biases, hp);
  ASSERT_EQ(a.model.catalog.size(), b.model.catalog.size());
  for (std::size_t j = 0; j < a.model.catalog.size(); ++j) {
    EXPECT_EQ(a.model.catalog.profiles()[j].latent,
              b.model.catalog.profiles()[j].latent);
  }
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  hp.seed = 100;
  EXPECT_NE(TrainMf(data.dataset, biases, hp).epoch_loss, a.epoch_loss);
}

TEST(TrainMfTest, StrongRegularizationShrinksLatents) {
  auto data = Synthetic(100, 10, 2, 0.5, 5);
  auto biases = TrueBiases(data.truth);
  MfHyperparams hp;
  hp.d = 2;
  hp.learning_rate = 0.001;
  hp.epochs = 1;
  auto norm = [&](double lambda) {
    hp.regularization = lambda;
    double total = 0.0;
    for (const auto& p : TrainMf(data.dataset, biases, hp).model.catalog.profiles()) {
      total += p.latent.norm();
    }
    return total;
  };
  const double weak = norm(0.01);
  const double strong = norm(100.0);
  EXPECT_LT(strong, 0.01 * weak);
  // Predictions collapse to x0 * bias.
  hp.regularization = 100.0;
  auto result = TrainMf(data.dataset, biases, hp);
  const auto& item = result.model.catalog.Get(0);
  EXPECT_NEAR(PredictRating(result.user_latents.at(0), 1.0, item), item.bias, 1e-3);
}

TEST(TrainMfTest, LossNonIncreasingForSmallStep) {
  auto data = Synthetic(60, 12, 3, 0.3, 6);
  MfHyperparams hp;
  hp.d = 3;
  hp.learning_rate = 0.002;
  hp.regularization = 0.05;
  hp.epochs = 40;
  auto loss = TrainMf(data.dataset, TrueBiases(data.truth), hp).epoch_loss;
  for (std::size_t e = 1; e < loss.size(); ++e) {
    EXPECT_LE(loss[e], loss[e - 1] + 1e-6) << "epoch " << e + 1;
  }
}

TEST(TrainMfTest, NoiselessHoldoutRmse) {
  auto data = Synthetic(300, 20, 2, 0.0, 7);
  // Hold out item 0 of every fifth user.
  std::vector<Rating> train, holdout;
  for (const Rating& r : data.dataset.ratings()) {
    (r.item == 0 && r.user % 5 == 0 ? holdout : train).push_back(r);
  }
  auto train_set = RatingsDataset::Create(train, data.dataset.Labels(),
                                          std::string("x0"));
  MfHyperparams hp;
  hp.d = 2;
  hp.learning_rate = 0.02;
  hp.regularization = 1e-4;
  hp.epochs = 300;
  auto result = TrainMf(train_set, TrueBiases(data.truth), hp);
  double sse = 0.0;
  for (const Rating& r : holdout) {
    const double x0 = Sign(data.truth.users[r.user].label);
    const double e = PredictRating(result.user_latents.at(r.user), x0,
                                   result.model.catalog.Get(r.item)) -
                     r.value;
    sse += e * e;
  }
  EXPECT_LT(std::sqrt(sse / holdout.size()), 0.05);
}

TEST(TrainMfTest, DivergenceNamesEpoch) {
  auto data = Synthetic(30, 10, 2, 0.5, 8);
  MfHyperparams hp;
  hp.d = 2;
  hp.learning_rate = 50.0;
  hp.epochs = 5;
  try {
    TrainMf(data.dataset, TrueBiases(data.truth), hp);
    FAIL() << "expected divergence";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(TrainMfTest, InvalidHyperparameters) {
  auto data = Synthetic(10, 5, 2, 0.5, 9);
  MfHyperparams hp;
  hp.epochs = 0;
  EXPECT_THROW(TrainMf(data.dataset, TrueBiases(data.truth), hp), DataError);
  hp = {};
  EXPECT_THROW(TrainMf(data.dataset, {}, hp), DataError);
}

TEST(PredictRatingTest, Examples) {
  ExtendedItemProfile p{0, 0.5, Eigen::Vector2d(2, 5)};
  EXPECT_EQ(PredictRating(Eigen::Vector2d::Zero(), 0.0, p), 0.0);
  EXPECT_DOUBLE_EQ(PredictRating(Eigen::Vector2d(1, 0), 1.0, p), 2.5);
  EXPECT_DOUBLE_EQ(PredictRating(Eigen::Vector2d(1, 1), 0.0, p), 7.0);
  EXPECT_THROW(PredictRating(Eigen::Vector3d(1, 1, 1), 0.0, p), DataError);
}

TEST(CatalogTest, LookupAndValidation) {
  Catalog c({{5, 0.1, Eigen::Vector2d(1, 0)}, {9, -0.2, Eigen::Vector2d(0, 1)}});
  EXPECT_EQ(c.dim(), 2);
  EXPECT_EQ(c.IndexOf(9), 1u);
  EXPECT_FALSE(c.Contains(4));
  EXPECT_THROW(c.Get(4), DataError);
  std::vector<ItemId> ids = {9};
  EXPECT_EQ(c.Slice(ids).front().bias, -0.2);
  EXPECT_THROW(Catalog({{1, 0, Eigen::Vector2d(1, 0)}, {2, 0, Eigen::Vector3d(1, 0, 0)}}),
               DataError);

  AnalystModel m{2, "x0", c, {{0.5, 0.5}, {1.5, 0.0}}, 0.1};
  EXPECT_THROW(ValidateModel(m), DataError);
  m.rating_probs[1] = {1.0, 0.0};
  EXPECT_NO_THROW(ValidateModel(m));
  m.catalog = Catalog({{1, 0, Eigen::Vector2d(0, 0)}, {2, 0, Eigen::Vector2d(1, 0)}});
  EXPECT_THROW(ValidateModel(m), DataError);
}

}  // namespace
}  // namespace privmf
