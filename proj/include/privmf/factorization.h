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

#ifndef PRIVMF_FACTORIZATION_H_
#define PRIVMF_FACTORIZATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "privmf/common.h"
#include "privmf/dataset.h"

namespace privmf {

// Item profile (v_j0, v_j): a bias on the private coordinate plus a latent
// vector that must not be identically zero.
struct ExtendedItemProfile {
  ItemId id = 0;
  double bias = 0.0;
  Eigen::VectorXd latent;
};

struct RatingProbabilities {
  double plus = 0.0;   // P(item rated | x0 = +1)
  double minus = 0.0;  // P(item rated | x0 = -1)
};

// Item profiles keyed by id, in a fixed order.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<ExtendedItemProfile> profiles);

  const std::vector<ExtendedItemProfile>& profiles() const { return profiles_; }
  std::size_t size() const { return profiles_.size(); }
  int dim() const { return dim_; }

  std::optional<std::size_t> IndexOf(ItemId id) const;
  bool Contains(ItemId id) const { return IndexOf(id).has_value(); }
  // Throws DataError for unknown ids.
  const ExtendedItemProfile& Get(ItemId id) const;
  std::vector<ExtendedItemProfile> Slice(std::span<const ItemId> ids) const;

 private:
  std::vector<ExtendedItemProfile> profiles_;
  std::unordered_map<ItemId, std::size_t> index_;
  int dim_ = 0;
};

// What the analyst extracts from the non-private training population.
struct AnalystModel {
  int d = 0;
  std::string label_name;
  Catalog catalog;
  std::vector<RatingProbabilities> rating_probs;  // aligned with catalog
  double noise_sigma_hat = 0.0;

  const RatingProbabilities& ProbsOf(ItemId id) const;
};

// Checks d consistency, nonzero latents, probabilities in [0,1].
void ValidateModel(const AnalystModel& model);

struct MfHyperparams {
  int d = 20;
  double learning_rate = 0.01;
  double regularization = 0.1;
  int epochs = 20;
  std::uint64_t seed = 0;
  // Standard deviation of the initial latent factors.
  double init_scale = 0.1;
  // Learn the item biases by SGD (starting from the provided values) instead
  // of keeping them frozen.
  bool joint_biases = false;
};

struct BiasEstimate {
  std::map<ItemId, double> bias;
  // Items rated by only one class; their bias is 0.
  std::vector<ItemId> single_class_items;
};

// v_j0 = (mean rating among +1 users - mean rating among -1 users) / 2.
BiasEstimate ComputeBiases(const RatingsDataset& train);

struct MfTrainResult {
  AnalystModel model;
  // Per-user latent factors, keyed by user id.
  std::map<UserId, Eigen::VectorXd> user_latents;
  // Regularized objective after each epoch.
  std::vector<double> epoch_loss;
};

// SGD on sum (r_ij - <x_i, v_j> - x_i0 v_j0)^2 + lambda (|x_i|^2 + |v_j|^2)
// with x_i0 pinned to the user's label. Only labeled users participate.
MfTrainResult TrainMf(const RatingsDataset& train,
                      const std::map<ItemId, double>& biases,
                      const MfHyperparams& hp);

// <x_hat, v> + x0_hat * v0.
double PredictRating(const Eigen::VectorXd& x_hat, double x0_hat,
                     const ExtendedItemProfile& profile);

}  // namespace privmf

#endif  // PRIVMF_FACTORIZATION_H_
