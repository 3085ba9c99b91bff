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

#include "privmf/selection.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <string>
#include <tuple>

namespace privmf {
namespace {

constexpr double kSingularRcond = 1e-13;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd Gram(std::span<const Eigen::VectorXd> latents, int dim) {
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& v : latents) {
    if (v.size() != dim) throw DataError("latent dimension mismatch");
    gram.noalias() += v * v.transpose();
  }
  return gram;
}

std::uint64_t Binomial(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > static_cast<long double>(cap) * 2) break;
  }
  return static_cast<std::uint64_t>(std::llround(result));
}

struct Split {
  std::vector<Eigen::VectorXd> seed;
  std::vector<const SelectionCandidate*> free;  // sorted by id
};

Split SplitCandidates(const SelectionProblem& problem) {
  std::set<ItemId> seed_ids(problem.seed_set.begin(), problem.seed_set.end());
  Split out;
  for (const auto& c : problem.candidates) {
    if (seed_ids.count(c.id)) {
      out.seed.push_back(c.latent);
    } else {
      out.free.push_back(&c);
    }
  }
  std::sort(out.free.begin(), out.free.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });
  return out;
}

int ProblemDim(const SelectionProblem& problem) {
  if (problem.candidates.empty()) throw DataError("no selection candidates");
  return static_cast<int>(problem.candidates.front().latent.size());
}

}  // namespace

double AOptimalityValue(std::span<const Eigen::VectorXd> latents, int dim) {
  if (latents.empty() || dim <= 0) return kNegInf;
  const Eigen::MatrixXd gram = Gram(latents, dim);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= kSingularRcond)) {
    return kNegInf;
  }
  return -llt.solve(Eigen::MatrixXd::Identity(dim, dim)).trace();
}

std::vector<ItemId> DefaultSeedSet(
    std::span<const SelectionCandidate> candidates) {
  if (candidates.empty()) return {};
  const auto dim = candidates.front().latent.size();
  Eigen::MatrixXd columns(dim, candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (candidates[j].latent.size() != dim) {
      throw DataError("latent dimension mismatch");
    }
    columns.col(j) = candidates[j].latent;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(columns);
  std::vector<ItemId> seed;
  for (Eigen::Index k = 0; k < qr.rank(); ++k) {
    seed.push_back(candidates[qr.colsPermutation().indices()[k]].id);
  }
  return seed;
}

SelectionProblem MakeSelectionProblem(const Catalog& catalog, int budget) {
  SelectionProblem problem;
  for (const auto& p : catalog.profiles()) {
    problem.candidates.push_back({p.id, p.latent});
  }
  problem.budget = budget;
  problem.seed_set = DefaultSeedSet(problem.candidates);
  return problem;
}

void ValidateProblem(const SelectionProblem& problem) {
  const int dim = ProblemDim(problem);
  std::set<ItemId> ids;
  for (const auto& c : problem.candidates) {
    if (c.latent.size() != dim) throw DataError("latent dimension mismatch");
    if (!ids.insert(c.id).second) {
      throw DataError("duplicate candidate " + std::to_string(c.id));
    }
  }
  std::set<ItemId> seed(problem.seed_set.begin(), problem.seed_set.end());
  if (seed.size() != problem.seed_set.size()) {
    throw DataError("seed set has duplicates");
  }
  for (ItemId id : seed) {
    if (!ids.count(id)) {
      throw DataError("seed item " + std::to_string(id) +
                      " is not a candidate");
    }
  }
  if (static_cast<int>(seed.size()) > dim) {
    throw DataError("seed set is larger than the latent dimension");
  }
  const Split split = SplitCandidates(problem);
  Eigen::MatrixXd columns(dim, split.seed.size());
  for (std::size_t k = 0; k < split.seed.size(); ++k) {
    columns.col(k) = split.seed[k];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(columns);
  if (qr.rank() != static_cast<Eigen::Index>(split.seed.size())) {
    throw DataError("seed set latents are linearly dependent");
  }
  if (qr.rank() != dim) {
    throw DataError("seed set must span the latent space (needs " +
                    std::to_string(dim) + " independent items)");
  }
  if (problem.budget < 0 ||
      static_cast<std::size_t>(problem.budget) > split.free.size()) {
    throw DataError("budget " + std::to_string(problem.budget) +
                    " exceeds the " + std::to_string(split.free.size()) +
                    " non-seed candidates");
  }
}

double MarginalValue(const SelectionProblem& problem,
                     std::span<const ItemId> selected) {
  const int dim = ProblemDim(problem);
  const Split split = SplitCandidates(problem);
  std::vector<Eigen::VectorXd> with = split.seed;
  for (ItemId id : selected) {
    auto it = std::find_if(problem.candidates.begin(), problem.candidates.end(),
                           [&](const auto& c) { return c.id == id; });
    if (it == problem.candidates.end()) {
      throw DataError("unknown candidate " + std::to_string(id));
    }
    with.push_back(it->latent);
  }
  return AOptimalityValue(with, dim) - AOptimalityValue(split.seed, dim);
}

std::vector<ItemId> GreedySelect(const SelectionProblem& problem) {
  ValidateProblem(problem);
  const int dim = ProblemDim(problem);
  const Split split = SplitCandidates(problem);
  if (problem.budget == 0) return {};

  Eigen::MatrixXd inverse = Gram(split.seed, dim)
                                .llt()
                                .solve(Eigen::MatrixXd::Identity(dim, dim));
  // Gain of adding v: tr(A^-1) - tr((A + v v^T)^-1) = |A^-1 v|^2 / (1 + v^T A^-1 v).
  auto gain = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd w = inverse * v;
    return w.squaredNorm() / (1.0 + v.dot(w));
  };

  // (upper bound on gain, candidate position, round it was computed in).
  using Entry = std::tuple<double, std::size_t, int>;
  auto worse = [&](const Entry& a, const Entry& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    return split.free[std::get<1>(a)]->id > split.free[std::get<1>(b)]->id;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t k = 0; k < split.free.size(); ++k) {
    heap.emplace(gain(split.free[k]->latent), k, 0);
  }

  std::vector<ItemId> picked;
  int round = 0;
  while (static_cast<int>(picked.size()) < problem.budget && !heap.empty()) {
    auto [bound, k, computed_in] = heap.top();
    heap.pop();
    if (computed_in != round) {
      heap.emplace(gain(split.free[k]->latent), k, round);
      continue;
    }
    const Eigen::VectorXd& v = split.free[k]->latent;
    const Eigen::VectorXd w = inverse * v;
    inverse -= (w * w.transpose()) / (1.0 + v.dot(w));
    picked.push_back(split.free[k]->id);
    ++round;
  }
  return picked;
}

std::vector<ItemId> BruteForceSelect(const SelectionProblem& problem,
                                     std::uint64_t cap) {
  ValidateProblem(problem);
  const int dim = ProblemDim(problem);
  const Split split = SplitCandidates(problem);
  const std::size_t n = split.free.size();
  const auto b = static_cast<std::size_t>(problem.budget);
  if (Binomial(n, b, cap) > cap) {
    throw DataError("enumerating C(" + std::to_string(n) + ", " +
                    std::to_string(b) + ") subsets exceeds the cap of " +
                    std::to_string(cap));
  }
  if (b == 0) return {};

  std::vector<Eigen::VectorXd> design = split.seed;
  design.resize(split.seed.size() + b);
  std::vector<std::size_t> combo(b);
  for (std::size_t k = 0; k < b; ++k) combo[k] = k;
  double best_value = kNegInf;
  std::vector<std::size_t> best;
  while (true) {
    for (std::size_t k = 0; k < b; ++k) {
      design[split.seed.size() + k] = split.free[combo[k]]->latent;
    }
    const double value = AOptimalityValue(design, dim);
    if (best.empty() || value > best_value) {
      best_value = value;
      best = combo;
    }
    // Next combination in lexicographic order.
    std::size_t k = b;
    while (k > 0 && combo[k - 1] == n - b + (k - 1)) --k;
    if (k == 0) break;
    ++combo[k - 1];
    for (std::size_t t = k; t < b; ++t) combo[t] = combo[t - 1] + 1;
  }
  std::vector<ItemId> out;
  for (std::size_t idx : best) out.push_back(split.free[idx]->id);
  return out;
}

}  // namespace privmf
