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

#include "privmf/categorical.h"

#include <string>

#include "privmf/common.h"

namespace privmf {
namespace {

double ShiftOf(const BinarizedItem& item, std::span<const int> binarized_x0) {
  if (binarized_x0.size() != item.biases.size()) {
    throw DataError("binarized feature has " +
                    std::to_string(binarized_x0.size()) + " coordinates, item has " +
                    std::to_string(item.biases.size()) + " biases");
  }
  double shift = 0.0;
  for (std::size_t k = 0; k < item.biases.size(); ++k) {
    shift += binarized_x0[k] * item.biases[k];
  }
  return shift;
}

}  // namespace

std::vector<int> BinarizeCategory(int category, int num_categories) {
  if (num_categories < 2) throw DataError("need at least 2 categories");
  if (category < 1 || category > num_categories) {
    throw DataError("category " + std::to_string(category) +
                    " outside [1, " + std::to_string(num_categories) + "]");
  }
  std::vector<int> out(num_categories, -1);
  out[category - 1] = 1;
  return out;
}

BinarizedItem TransformCategoricalItem(const Eigen::VectorXd& latent,
                                       std::span<const double> category_biases) {
  if (category_biases.size() < 2) throw DataError("need at least 2 categories");
  BinarizedItem out;
  double mu = 0.0;
  for (double b : category_biases) {
    out.biases.push_back(b / 2.0);
    mu += b / 2.0;
  }
  out.latent.resize(latent.size() + 1);
  out.latent << latent, mu;
  return out;
}

double PredictCategorical(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& latent,
                          std::span<const double> category_biases,
                          int category) {
  if (category < 1 || category > static_cast<int>(category_biases.size())) {
    throw DataError("category out of range");
  }
  if (x.size() != latent.size()) throw DataError("profile dimension mismatch");
  return x.dot(latent) + category_biases[category - 1];
}

double PredictBinarized(const Eigen::VectorXd& x, const BinarizedItem& item,
                        std::span<const int> binarized_x0) {
  if (x.size() + 1 != item.latent.size()) {
    throw DataError("profile dimension mismatch");
  }
  return AugmentProfile(x).dot(item.latent) + ShiftOf(item, binarized_x0);
}

double ObfuscateCategorical(double rating, const BinarizedItem& item,
                            std::span<const int> binarized_x0) {
  return rating - ShiftOf(item, binarized_x0);
}

Eigen::VectorXd AugmentProfile(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size() + 1);
  out << x, 1.0;
  return out;
}

}  // namespace privmf
