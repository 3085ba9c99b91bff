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

#ifndef PRIVMF_CATEGORICAL_H_
#define PRIVMF_CATEGORICAL_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace privmf {

// A categorical private feature x0 in {1, ..., K} is encoded as a vector in
// {-1, +1}^K whose x0-th coordinate is +1. With b_jk = b_j^k / 2 and
// mu_j = sum_k b_j^k / 2, the category-bias model
//   r = <x, v_j> + b_j^{x0}
// equals
//   r = <(x, 1), (v_j, mu_j)> + sum_k x0_k b_jk.

// Categories are 1-based. Throws DataError when K < 2 or the category is out
// of range.
std::vector<int> BinarizeCategory(int category, int num_categories);

struct BinarizedItem {
  Eigen::VectorXd latent;       // (v_j, mu_j), dimension d + 1
  std::vector<double> biases;   // b_jk = b_j^k / 2
};

BinarizedItem TransformCategoricalItem(const Eigen::VectorXd& latent,
                                       std::span<const double> category_biases);

// <x, v_j> + b_j^{category}.
double PredictCategorical(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& latent,
                          std::span<const double> category_biases,
                          int category);

// <x', v'_j> + sum_k x0_k b_jk, where x' = (x, 1).
double PredictBinarized(const Eigen::VectorXd& x, const BinarizedItem& item,
                        std::span<const int> binarized_x0);

// The user-side shift: y_j = r_j - sum_k x0_k b_jk.
double ObfuscateCategorical(double rating, const BinarizedItem& item,
                            std::span<const int> binarized_x0);

// (x, 1): the augmented profile the analyst regresses on for categorical
// users.
Eigen::VectorXd AugmentProfile(const Eigen::VectorXd& x);

}  // namespace privmf

#endif  // PRIVMF_CATEGORICAL_H_
