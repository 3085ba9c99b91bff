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

#ifndef PRIVMF_DATASET_H_
#define PRIVMF_DATASET_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "privmf/common.h"

namespace privmf {

struct Rating {
  UserId user = 0;
  ItemId item = 0;
  double value = 0.0;

  friend bool operator==(const Rating&, const Rating&) = default;
};

// A (item, value) pair belonging to a single user.
struct ItemRating {
  ItemId item = 0;
  double value = 0.0;

  friend bool operator==(const ItemRating&, const ItemRating&) = default;
};

struct UserRecord {
  UserId id = 0;
  std::optional<Label> label;
  std::vector<ItemId> rated_items;  // sorted ascending
};

// Sparse user x item ratings with an optional per-user private label.
// Immutable after construction; ratings are stored sorted by (user, item).
class RatingsDataset {
 public:
  RatingsDataset() = default;

  // Validates that every (user, item) pair is unique. Users that appear only
  // in `labels` are kept (with no ratings). Throws DataError.
  static RatingsDataset Create(std::vector<Rating> ratings,
                               const std::map<UserId, Label>& labels = {},
                               std::optional<std::string> label_name = {});

  const std::vector<UserRecord>& users() const { return users_; }
  const std::vector<ItemId>& items() const { return items_; }
  const std::vector<Rating>& ratings() const { return ratings_; }
  const std::optional<std::string>& label_name() const { return label_name_; }

  // Ratings of users()[user_index], sorted by item.
  std::span<const Rating> UserRatings(std::size_t user_index) const;
  std::vector<ItemRating> UserItemRatings(std::size_t user_index) const;
  std::optional<std::size_t> FindUser(UserId id) const;

  std::vector<UserId> LabeledUsers() const;
  std::map<UserId, Label> Labels() const;

  // Restriction to a subset of users (labels carried over).
  RatingsDataset SubsetUsers(std::span<const UserId> user_ids) const;

  // Same ratings with a new label assignment.
  RatingsDataset WithLabels(const std::map<UserId, Label>& labels,
                            std::optional<std::string> label_name) const;

  friend bool operator==(const RatingsDataset& a, const RatingsDataset& b);

 private:
  std::vector<UserRecord> users_;
  std::vector<std::size_t> user_offsets_;  // users_.size() + 1 entries
  std::vector<ItemId> items_;
  std::vector<Rating> ratings_;
  std::optional<std::string> label_name_;
};

enum class RatingFormat { kDoubleColon, kCsv };

struct ParseOptions {
  RatingFormat format = RatingFormat::kDoubleColon;
  // Inclusive accepted rating range; nullopt accepts any finite real.
  std::optional<std::pair<double, double>> range = std::make_pair(1.0, 5.0);
};

// Parses `user::item::rating` lines or a `user_id,item_id,rating` CSV.
// Malformed rows, out-of-range ratings and duplicate pairs are collected and
// reported together (with 1-based line numbers) in a single DataError.
RatingsDataset ParseRatings(std::istream& in, const ParseOptions& options = {});

// Writes the ratings back in `format`, with round-trip precision.
void WriteRatings(std::ostream& out, const RatingsDataset& dataset,
                  RatingFormat format);

// `user_id,label` lines (header optional). Labels are -1/1 or any string in
// `label_map` (e.g. {"M": +1, "F": -1}).
std::map<UserId, Label> ParseLabels(
    std::istream& in, const std::map<std::string, Label>& label_map = {});
void WriteLabels(std::ostream& out, const RatingsDataset& dataset);

// MovieLens-1M users.dat: `UserID::Gender::Age::Occupation::Zip`. Gender M
// maps to +1, F to -1.
std::map<UserId, Label> ParseMovieLensGender(std::istream& in);

// Iteratively drops users and items with too few ratings until both
// thresholds hold.
RatingsDataset FilterByActivity(const RatingsDataset& dataset,
                                std::size_t min_ratings_per_user,
                                std::size_t min_ratings_per_item);

// Partitions the labeled users into k folds of near-equal size.
std::vector<std::vector<UserId>> SplitFolds(const RatingsDataset& dataset,
                                            int k, std::uint64_t seed);

struct UserRatingSplit {
  std::vector<ItemRating> observed;
  std::vector<ItemRating> holdout;
};

// Observed gets round(fraction * n) ratings, clamped so that both sides are
// nonempty. Both halves keep the input order.
UserRatingSplit SplitUserRatings(std::span<const ItemRating> ratings,
                                 double fraction, std::uint64_t seed);

// Rating-probability model of the synthetic generator.
struct ProbabilityModel {
  enum class Kind { kDense, kUniform, kExplicit };
  Kind kind = Kind::kDense;
  // kUniform: p+ and p- drawn independently from U[low, high] per item.
  double low = 1.0;
  double high = 1.0;
  // kExplicit: one (p+, p-) pair per item.
  std::vector<std::pair<double, double>> explicit_probs;
};

struct SyntheticConfig {
  int n_users = 1000;
  int n_items = 50;
  int d = 5;
  double noise_sigma = 0.5;
  double bias_scale = 1.0;
  ProbabilityModel prob_model;
};

struct SyntheticItem {
  double bias = 0.0;
  Eigen::VectorXd latent;
  double p_plus = 1.0;
  double p_minus = 1.0;
};

struct SyntheticUser {
  Label label = Label::kPositive;
  Eigen::VectorXd latent;
};

struct SyntheticGroundTruth {
  std::vector<SyntheticItem> items;  // indexed by item id
  std::vector<SyntheticUser> users;  // indexed by user id
  double noise_sigma = 0.0;
};

struct SyntheticData {
  RatingsDataset dataset;
  SyntheticGroundTruth truth;
};

// Users and items are numbered 0..n-1. Ratings follow
// r = <x, v_j> + x0 * v_j0 + N(0, sigma^2); item j is rated by a user of
// class c independently with probability p_j^c.
SyntheticData GenerateSynthetic(const SyntheticConfig& config,
                                std::uint64_t seed);

}  // namespace privmf

#endif  // PRIVMF_DATASET_H_
