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

#ifndef PRIVMF_PROTOCOL_H_
#define PRIVMF_PROTOCOL_H_

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "privmf/common.h"
#include "privmf/dataset.h"
#include "privmf/factorization.h"
#include "privmf/rng.h"

namespace privmf {

// Ratio used when p+ = 0 < p-: a +1 user can never have rated the item, so a
// -1 user must always drop it.
inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

struct DisclosedItem {
  ItemId id = 0;
  double bias = 0.0;
  // rho_j = p- / p+; present only under sub-sampling.
  std::optional<double> ratio;

  friend bool operator==(const DisclosedItem&, const DisclosedItem&) = default;
};

// What the analyst publishes for a solicited set S. It never carries latent
// vectors.
struct Disclosure {
  std::vector<DisclosedItem> items;

  bool HasRatios() const;
  const DisclosedItem* Find(ItemId id) const;
  friend bool operator==(const Disclosure&, const Disclosure&) = default;
};

struct ObfuscatedFeedback {
  std::vector<ItemId> revealed;
  std::vector<double> values;

  friend bool operator==(const ObfuscatedFeedback&,
                         const ObfuscatedFeedback&) = default;
};

struct ProfileEstimate {
  Eigen::VectorXd x_hat;
  // sigma^2 tr[(sum v v^T + ridge I)^-1]
  double expected_loss = 0.0;
  std::size_t n_points = 0;
};

inline constexpr double kDefaultRidge = 1e-8;

// Midpoint protocol: disclose the biases of S.
Disclosure MpDisclose(std::span<const ExtendedItemProfile> slice);

// y_j = r_j - x0 * l_j; `ratings` is aligned with `disclosure.items`.
ObfuscatedFeedback MpObfuscate(std::span<const double> ratings, Label x0,
                               const Disclosure& disclosure);

// rho_j = p-/p+ with kInfiniteRatio when p+ = 0 < p- and 1 when both vanish.
double SubsamplingRatio(const RatingProbabilities& probs);

// Biases plus ratios; `probs` is aligned with `slice`.
Disclosure MpssDisclose(std::span<const ExtendedItemProfile> slice,
                        std::span<const RatingProbabilities> probs);

// Probability that a user of class x0 keeps a rated item: min(1, rho^x0).
double KeepProbability(double ratio, Label x0);

// Sub-samples S_0 (the user's rated items within S) keeping each item with
// probability min(1, rho^x0) and shifts the kept ratings as in MP. Output
// order follows `rated`.
ObfuscatedFeedback MpssObfuscate(std::span<const ItemRating> rated, Label x0,
                                 const Disclosure& disclosure, Rng& rng);

// Accumulates sum v v^T and sum y v for the least-squares estimator.
class NormalEquations {
 public:
  explicit NormalEquations(int dim);

  void Add(const Eigen::VectorXd& latent, double y);
  void Add(const ObfuscatedFeedback& feedback, const Catalog& catalog);

  int dim() const { return static_cast<int>(gram_.rows()); }
  std::size_t count() const { return count_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& moment() const { return moment_; }

  // Solves (gram + ridge I) x = moment with a Cholesky factorization. With
  // ridge = 0 a singular gram raises SingularMatrixError.
  ProfileEstimate Solve(double ridge, double sigma) const;

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd moment_;
  std::size_t count_ = 0;
};

ProfileEstimate EstimateProfile(const ObfuscatedFeedback& feedback,
                                const Catalog& catalog,
                                double ridge = kDefaultRidge,
                                double sigma = 1.0);

// sigma^2 tr[(sum_{j in S} v_j v_j^T)^-1], from the eigenvalues of the gram
// matrix. Throws SingularMatrixError when it is not invertible.
double TheoreticalL2Loss(std::span<const ExtendedItemProfile> slice,
                         double sigma);

// Expectation-preserving stochastic rounding: values below lo map to lo,
// above hi to hi, and an interior r maps to floor(r) + 1 with probability
// r - floor(r), otherwise to floor(r).
std::vector<int> RoundRatings(std::span<const double> values, int lo, int hi,
                              Rng& rng);

// One round of a repeated interaction.
struct SessionRound {
  std::vector<ExtendedItemProfile> slice;
  ObfuscatedFeedback feedback;
};

// User-side accumulation of the rounds a user took part in. The private
// label stays in this object: nothing in the library serializes it.
class UserSession {
 public:
  explicit UserSession(Label x0) : x0_(x0) {}

  Label x0() const { return x0_; }
  const std::vector<SessionRound>& rounds() const { return rounds_; }
  int dim() const { return dim_; }

 private:
  friend UserSession AccumulateSession(UserSession session,
                                       SessionRound round);
  Label x0_;
  int dim_ = -1;
  std::vector<SessionRound> rounds_;
};

// Appends a round. Throws DataError on a dimension mismatch across rounds or
// when feedback names an item missing from the round's slice.
UserSession AccumulateSession(UserSession session, SessionRound round);

// Least squares over every revealed value of every round.
ProfileEstimate EstimateProfile(const UserSession& session,
                                double ridge = kDefaultRidge,
                                double sigma = 1.0);

}  // namespace privmf

#endif  // PRIVMF_PROTOCOL_H_
