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

#include "privmf/inference.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "privmf/rng.h"

namespace privmf {
namespace {

void CheckLabeled(std::span<const AttackInput> inputs,
                  std::span<const Label> labels) {
  if (inputs.size() != labels.size()) {
    throw DataError("need exactly one label per attack input");
  }
  const auto n_plus = std::count(labels.begin(), labels.end(),
                                 Label::kPositive);
  if (n_plus == 0 || n_plus == static_cast<long>(labels.size())) {
    throw DataError("attack training set must contain both classes");
  }
  for (const auto& in : inputs) {
    if (in.values.size() != inputs.front().values.size() ||
        in.rated.size() != static_cast<std::size_t>(in.values.size())) {
      throw DataError("attack inputs have inconsistent catalog indexing");
    }
  }
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Column of the (item, level) event table for a rated value.
int LevelColumn(const NaiveBayesModel& model, double value) {
  const double level = std::round(value);
  if (level != value || level < model.min_level || level > model.max_level) {
    throw DataError("value " + std::to_string(value) +
                    " is not an integer level in [" +
                    std::to_string(model.min_level) + ", " +
                    std::to_string(model.max_level) +
                    "]; round the ratings first");
  }
  return static_cast<int>(level) - model.min_level + 1;
}

}  // namespace

AttackInput MakeAttackInput(std::span<const ItemRating> ratings,
                            const Catalog& catalog) {
  AttackInput out;
  out.values = Eigen::VectorXd::Zero(catalog.size());
  out.rated.assign(catalog.size(), false);
  for (const ItemRating& r : ratings) {
    if (auto index = catalog.IndexOf(r.item)) {
      out.values[*index] = r.value;
      out.rated[*index] = true;
    }
  }
  return out;
}

LseResult LseAttack(std::span<const ItemRating> ratings, const Catalog& catalog,
                    double ridge) {
  if (ratings.empty()) throw DataError("LSE attack needs at least one rating");
  if (!(ridge >= 0)) throw DataError("ridge must be nonnegative");
  const int d = catalog.dim();
  const auto n = static_cast<Eigen::Index>(ratings.size());
  Eigen::MatrixXd design(n, d);
  Eigen::VectorXd r(n), bias(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& profile = catalog.Get(ratings[k].item);
    design.row(k) = profile.latent.transpose();
    r[k] = ratings[k].value;
    bias[k] = profile.bias;
  }
  Eigen::MatrixXd gram = design.transpose() * design;
  gram.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= 1e-13)) {
    throw SingularMatrixError("LSE attack design is singular");
  }
  auto fit = [&](double sign, Eigen::VectorXd& x) {
    const Eigen::VectorXd target = r - sign * bias;
    x = llt.solve(design.transpose() * target);
    return (target - design * x).squaredNorm();
  };
  LseResult out;
  Eigen::VectorXd x_plus, x_minus;
  out.rss_plus = fit(1.0, x_plus);
  out.rss_minus = fit(-1.0, x_minus);
  out.score = out.rss_minus - out.rss_plus;
  out.label = out.score >= 0 ? Label::kPositive : Label::kNegative;
  out.x_hat = out.label == Label::kPositive ? x_plus : x_minus;
  return out;
}

LogisticModel LogisticTrain(std::span<const AttackInput> inputs,
                            std::span<const Label> labels,
                            const LogisticOptions& options) {
  CheckLabeled(inputs, labels);
  if (options.epochs <= 0 || options.batch_size <= 0 ||
      !(options.learning_rate > 0) || !(options.l2 >= 0)) {
    throw DataError("invalid logistic regression options");
  }
  const auto dim = inputs.front().values.size();
  LogisticModel model;
  model.weights = Eigen::VectorXd::Zero(dim);
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng(options.seed, {Tag(SeedTag::kAttack)});
  Eigen::VectorXd grad(dim);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += options.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + options.batch_size);
      grad.setZero();
      double grad_b = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const AttackInput& in = inputs[order[k]];
        const double target = labels[order[k]] == Label::kPositive ? 1.0 : 0.0;
        const double err =
            Sigmoid(model.weights.dot(in.values) + model.intercept) - target;
        grad += err * in.values;
        grad_b += err;
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      model.weights -= options.learning_rate *
                       (scale * grad + options.l2 * model.weights);
      model.intercept -= options.learning_rate * scale * grad_b;
    }
    if (!model.weights.allFinite()) {
      throw DataError("logistic regression diverged at epoch " +
                      std::to_string(epoch + 1));
    }
  }
  return model;
}

double LogisticScore(const LogisticModel& model, const AttackInput& input) {
  if (input.values.size() != model.weights.size()) {
    throw DataError("attack input does not match the model's catalog");
  }
  return model.weights.dot(input.values) + model.intercept;
}

NaiveBayesModel NaiveBayesTrain(std::span<const AttackInput> inputs,
                                std::span<const Label> labels,
                                const NaiveBayesOptions& options) {
  CheckLabeled(inputs, labels);
  if (!(options.alpha > 0)) throw DataError("smoothing alpha must be > 0");
  if (options.min_level > options.max_level) {
    throw DataError("empty rating level range");
  }
  NaiveBayesModel model;
  model.min_level = options.min_level;
  model.max_level = options.max_level;
  const auto items = inputs.front().values.size();
  const int columns = options.max_level - options.min_level + 2;
  Eigen::MatrixXd count_plus = Eigen::MatrixXd::Zero(items, columns);
  Eigen::MatrixXd count_minus = Eigen::MatrixXd::Zero(items, columns);
  double n_plus = 0, n_minus = 0;
  for (std::size_t u = 0; u < inputs.size(); ++u) {
    const bool plus = labels[u] == Label::kPositive;
    Eigen::MatrixXd& counts = plus ? count_plus : count_minus;
    (plus ? n_plus : n_minus) += 1;
    for (Eigen::Index j = 0; j < inputs[u].values.size(); ++j) {
      const int col = inputs[u].rated[j]
                          ? LevelColumn(model, inputs[u].values[j])
                          : 0;
      counts(j, col) += 1;
    }
  }
  const double events = static_cast<double>(items) * columns;
  auto log_probs = [&](const Eigen::MatrixXd& counts, double n_users) {
    const double total = n_users * static_cast<double>(items);
    return ((counts.array() + options.alpha) /
            (total + options.alpha * events))
        .log()
        .matrix();
  };
  model.log_prob_plus = log_probs(count_plus, n_plus);
  model.log_prob_minus = log_probs(count_minus, n_minus);
  model.log_prior_ratio = std::log(n_plus / n_minus);
  return model;
}

double NaiveBayesScore(const NaiveBayesModel& model, const AttackInput& input) {
  if (input.values.size() != model.log_prob_plus.rows()) {
    throw DataError("attack input does not match the model's catalog");
  }
  double score = model.log_prior_ratio;
  for (Eigen::Index j = 0; j < input.values.size(); ++j) {
    const int col = input.rated[j] ? LevelColumn(model, input.values[j]) : 0;
    score += model.log_prob_plus(j, col) - model.log_prob_minus(j, col);
  }
  return score;
}

AttackInput DiscretizeInput(const AttackInput& input, int lo, int hi) {
  AttackInput out = input;
  for (Eigen::Index j = 0; j < out.values.size(); ++j) {
    if (!out.rated[j]) continue;
    out.values[j] = std::clamp(std::round(out.values[j]),
                               static_cast<double>(lo),
                               static_cast<double>(hi));
  }
  return out;
}

double Auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("need exactly one label per score");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_plus = 0.0;
  double n_plus = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their average.
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == Label::kPositive) {
        rank_sum_plus += rank;
        n_plus += 1;
      }
    }
    i = j;
  }
  const double n_minus = static_cast<double>(n) - n_plus;
  if (n_plus == 0 || n_minus == 0) {
    throw DataError("AUC needs both labels to be present");
  }
  return (rank_sum_plus - n_plus * (n_plus + 1) / 2) / (n_plus * n_minus);
}

}  // namespace privmf
