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

#ifndef PRIVMF_SELECTION_H_
#define PRIVMF_SELECTION_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "privmf/common.h"
#include "privmf/factorization.h"

namespace privmf {

struct SelectionCandidate {
  ItemId id = 0;
  Eigen::VectorXd latent;
};

// Choose at most `budget` items (outside the seed set) maximizing
// F(S u S*) - F(S*), with F(S) = -tr[(sum_{j in S} v_j v_j^T)^-1].
struct SelectionProblem {
  std::vector<SelectionCandidate> candidates;
  int budget = 0;
  // Items (among the candidates) with linearly independent latents that must
  // span the latent space so that F(S*) is finite.
  std::vector<ItemId> seed_set;
};

// Negative trace of the inverse gram matrix; -infinity when singular or
// empty.
double AOptimalityValue(std::span<const Eigen::VectorXd> latents, int dim);

// Up to d candidates with linearly independent latents, picked by QR with
// column pivoting (ties resolved toward the earlier candidate).
std::vector<ItemId> DefaultSeedSet(
    std::span<const SelectionCandidate> candidates);

// Builds a problem over a catalog with the default seed set.
SelectionProblem MakeSelectionProblem(const Catalog& catalog, int budget);

// Throws DataError when the seed set is unknown, dependent, does not span the
// latent space, or when the budget exceeds the available candidates.
void ValidateProblem(const SelectionProblem& problem);

// F(S u S*) - F(S*) for a set of non-seed candidate ids.
double MarginalValue(const SelectionProblem& problem,
                     std::span<const ItemId> selected);

// Lazy greedy with rank-one inverse updates; ties go to the smallest id.
// Returns ids in the order they were picked.
std::vector<ItemId> GreedySelect(const SelectionProblem& problem);

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// Exhaustive maximizer over all budget-sized subsets; among equal values the
// lexicographically smallest id set wins. Returns sorted ids.
std::vector<ItemId> BruteForceSelect(
    const SelectionProblem& problem,
    std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace privmf

#endif  // PRIVMF_SELECTION_H_
