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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "privmf/rng.h"

namespace privmf {

Catalog::Catalog(std::vector<ExtendedItemProfile> profiles)
    : profiles_(std::move(profiles)) {
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    const auto& p = profiles_[i];
    if (i == 0) dim_ = static_cast<int>(p.latent.size());
    if (p.latent.size() != dim_) {
      throw DataError("item " + std::to_string(p.id) +
                      " has a latent vector of inconsistent dimension");
    }
    if (!index_.emplace(p.id, i).second) {
      throw DataError("duplicate item " + std::to_string(p.id) +
                      " in catalog");
    }
  }
}

std::optional<std::size_t> Catalog::IndexOf(ItemId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const ExtendedItemProfile& Catalog::Get(ItemId id) const {
  auto index = IndexOf(id);
  if (!index) throw DataError("unknown item " + std::to_string(id));
  return profiles_[*index];
}

std::vector<ExtendedItemProfile> Catalog::Slice(
    std::span<const ItemId> ids) const {
  std::vector<ExtendedItemProfile> out;
  out.reserve(ids.size());
  for (ItemId id : ids) out.push_back(Get(id));
  return out;
}

const RatingProbabilities& AnalystModel::ProbsOf(ItemId id) const {
  auto index = catalog.IndexOf(id);
  if (!index) throw DataError("unknown item " + std::to_string(id));
  return rating_probs[*index];
}

void ValidateModel(const AnalystModel& model) {
  if (model.catalog.size() == 0) throw DataError("model catalog is empty");
  if (model.catalog.dim() != model.d) {
    throw DataError("model dimension does not match its latent vectors");
  }
  if (model.rating_probs.size() != model.catalog.size()) {
    throw DataError("model needs one probability pair per item");
  }
  for (const auto& p : model.catalog.profiles()) {
    if (p.latent.isZero(0.0)) {
      throw DataError("item " + std::to_string(p.id) +
                      " has an all-zero latent vector");
    }
    if (!std::isfinite(p.bias) || !p.latent.allFinite()) {
      throw DataError("item " + std::to_string(p.id) + " is not finite");
    }
  }
  for (const auto& p : model.rating_probs) {
    if (!(p.plus >= 0 && p.plus <= 1 && p.minus >= 0 && p.minus <= 1)) {
      throw DataError("rating probabilities must lie in [0, 1]");
    }
  }
  if (!(model.noise_sigma_hat >= 0)) {
    throw DataError("noise_sigma_hat must be nonnegative");
  }
}

BiasEstimate ComputeBiases(const RatingsDataset& train) {
  struct Sums {
    double plus = 0, minus = 0;
    std::size_t n_plus = 0, n_minus = 0;
  };
  std::map<ItemId, Sums> sums;
  for (ItemId item : train.items()) sums[item];
  for (std::size_t u = 0; u < train.users().size(); ++u) {
    const auto& label = train.users()[u].label;
    if (!label) continue;
    for (const Rating& r : train.UserRatings(u)) {
      Sums& s = sums[r.item];
      if (*label == Label::kPositive) {
        s.plus += r.value;
        ++s.n_plus;
      } else {
        s.minus += r.value;
        ++s.n_minus;
      }
    }
  }
  BiasEstimate out;
  for (const auto& [item, s] : sums) {
    if (s.n_plus == 0 || s.n_minus == 0) {
      out.bias[item] = 0.0;
      out.single_class_items.push_back(item);
      continue;
    }
    out.bias[item] = (s.plus / s.n_plus - s.minus / s.n_minus) / 2.0;
  }
  return out;
}

MfTrainResult TrainMf(const RatingsDataset& train,
                      const std::map<ItemId, double>& biases,
                      const MfHyperparams& hp) {
  if (hp.d <= 0 || !(hp.learning_rate > 0) || !(hp.regularization >= 0) ||
      hp.epochs <= 0 || !(hp.init_scale > 0)) {
    throw DataError("invalid matrix factorization hyperparameters");
  }
  const int d = hp.d;
  const auto& items = train.items();
  std::unordered_map<ItemId, std::size_t> item_index;
  for (std::size_t j = 0; j < items.size(); ++j) item_index[items[j]] = j;

  struct Cell {
    std::size_t user;
    std::size_t item;
    double sign;
    double value;
  };
  std::vector<Cell> cells;
  std::vector<std::size_t> labeled;
  std::size_t n_plus = 0, n_minus = 0;
  std::vector<std::size_t> count_plus(items.size(), 0),
      count_minus(items.size(), 0);
  for (std::size_t u = 0; u < train.users().size(); ++u) {
    const auto& label = train.users()[u].label;
    if (!label) continue;
    labeled.push_back(u);
    (*label == Label::kPositive ? n_plus : n_minus)++;
    for (const Rating& r : train.UserRatings(u)) {
      const std::size_t j = item_index.at(r.item);
      cells.push_back({u, j, Sign(*label), r.value});
      (*label == Label::kPositive ? count_plus : count_minus)[j]++;
    }
  }
  if (cells.empty()) throw DataError("training set has no labeled ratings");

  Eigen::VectorXd item_bias(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    auto it = biases.find(items[j]);
    if (it == biases.end()) {
      throw DataError("no bias for item " + std::to_string(items[j]));
    }
    item_bias[j] = it->second;
  }

  Rng rng = MakeRng(hp.seed, {Tag(SeedTag::kTrain)});
  std::normal_distribution<double> init(0.0, hp.init_scale);
  Eigen::MatrixXd user_f(d, train.users().size());
  Eigen::MatrixXd item_f(d, items.size());
  for (Eigen::Index i = 0; i < item_f.size(); ++i) item_f.data()[i] = init(rng);
  for (Eigen::Index i = 0; i < user_f.size(); ++i) user_f.data()[i] = init(rng);

  const double lr = hp.learning_rate;
  const double lambda = hp.regularization;
  auto objective = [&]() {
    double loss = 0.0;
    for (const Cell& c : cells) {
      const double e = c.value - user_f.col(c.user).dot(item_f.col(c.item)) -
                       c.sign * item_bias[c.item];
      loss += e * e + lambda * (user_f.col(c.user).squaredNorm() +
                                item_f.col(c.item).squaredNorm());
    }
    return loss;
  };

  MfTrainResult result;
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd x_old(d);
  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const Cell& c = cells[idx];
      auto x = user_f.col(c.user);
      auto v = item_f.col(c.item);
      const double e = c.value - x.dot(v) - c.sign * item_bias[c.item];
      x_old = x;
      x += lr * (e * v - lambda * x);
      v += lr * (e * x_old - lambda * v);
      if (hp.joint_biases) item_bias[c.item] += lr * e * c.sign;
    }
    const double loss = objective();
    if (!std::isfinite(loss)) {
      throw DataError("matrix factorization diverged at epoch " +
                      std::to_string(epoch));
    }
    result.epoch_loss.push_back(loss);
  }

  double sse = 0.0;
  for (const Cell& c : cells) {
    const double e = c.value - user_f.col(c.user).dot(item_f.col(c.item)) -
                     c.sign * item_bias[c.item];
    sse += e * e;
  }

  std::vector<ExtendedItemProfile> profiles;
  AnalystModel& model = result.model;
  model.d = d;
  model.label_name = train.label_name().value_or("");
  for (std::size_t j = 0; j < items.size(); ++j) {
    profiles.push_back({items[j], item_bias[j], item_f.col(j)});
    if (profiles.back().latent.isZero(0.0)) {
      throw DataError("item " + std::to_string(items[j]) +
                      " ended with an all-zero latent vector");
    }
    model.rating_probs.push_back(
        {n_plus ? static_cast<double>(count_plus[j]) / n_plus : 0.0,
         n_minus ? static_cast<double>(count_minus[j]) / n_minus : 0.0});
  }
  model.catalog = Catalog(std::move(profiles));
  model.noise_sigma_hat = std::sqrt(sse / cells.size());
  for (std::size_t u : labeled) {
    result.user_latents.emplace(train.users()[u].id, user_f.col(u));
  }
  return result;
}

double PredictRating(const Eigen::VectorXd& x_hat, double x0_hat,
                     const ExtendedItemProfile& profile) {
  if (x_hat.size() != profile.latent.size()) {
    throw DataError("profile dimension mismatch: " +
                    std::to_string(x_hat.size()) + " vs " +
                    std::to_string(profile.latent.size()));
  }
  return x_hat.dot(profile.latent) + x0_hat * profile.bias;
}

}  // namespace privmf
