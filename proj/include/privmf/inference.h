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

#ifndef PRIVMF_INFERENCE_H_
#define PRIVMF_INFERENCE_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "privmf/common.h"
#include "privmf/dataset.h"
#include "privmf/factorization.h"

namespace privmf {

// Dense per-user attack features over a fixed catalog order: the rating
// value (0 when unrated) plus a rated mask.
struct AttackInput {
  Eigen::VectorXd values;
  std::vector<bool> rated;
};

// Places `ratings` at their catalog positions; items outside the catalog are
// ignored.
AttackInput MakeAttackInput(std::span<const ItemRating> ratings,
                            const Catalog& catalog);

struct LseResult {
  Label label = Label::kPositive;
  // RSS(-1) - RSS(+1); positive favors +1.
  double score = 0.0;
  double rss_plus = 0.0;
  double rss_minus = 0.0;
  // Latent fit under the chosen label.
  Eigen::VectorXd x_hat;
};

// Fits the ratings twice with the private coordinate fixed at +1 and at -1
// (ridge-regularized least squares on the latent part) and keeps the better
// fit. Ties go to +1.
LseResult LseAttack(std::span<const ItemRating> ratings, const Catalog& catalog,
                    double ridge = 1e-8);

struct LogisticOptions {
  double l2 = 1e-3;
  int epochs = 50;
  double learning_rate = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct LogisticModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
};

// L2-regularized maximum likelihood by mini-batch gradient descent over a
// seeded shuffle.
LogisticModel LogisticTrain(std::span<const AttackInput> inputs,
                            std::span<const Label> labels,
                            const LogisticOptions& options = {});

// Log-odds log(P(+1 | input) / P(-1 | input)).
double LogisticScore(const LogisticModel& model, const AttackInput& input);

struct NaiveBayesOptions {
  double alpha = 1.0;
  // Integer rating levels [min_level, max_level]; "unrated" is an extra
  // event of its own.
  int min_level = 1;
  int max_level = 5;
};

// Per-class multinomial over (item, level) events, one event per catalog
// item and user.
struct NaiveBayesModel {
  int min_level = 1;
  int max_level = 5;
  double log_prior_ratio = 0.0;
  // items x (levels + 1); column 0 is "unrated".
  Eigen::MatrixXd log_prob_plus;
  Eigen::MatrixXd log_prob_minus;
};

NaiveBayesModel NaiveBayesTrain(std::span<const AttackInput> inputs,
                                std::span<const Label> labels,
                                const NaiveBayesOptions& options = {});

// Log-likelihood ratio plus log prior ratio. Throws DataError when a rated
// value is not an integer level; round first.
double NaiveBayesScore(const NaiveBayesModel& model, const AttackInput& input);

// Nearest-integer rounding clamped to [lo, hi] for rated entries.
AttackInput DiscretizeInput(const AttackInput& input, int lo, int hi);

// Area under the ROC curve via the rank statistic; ties count one half.
// Throws DataError unless both labels are present.
double Auc(std::span<const double> scores, std::span<const Label> labels);

}  // namespace privmf

#endif  // PRIVMF_INFERENCE_H_
