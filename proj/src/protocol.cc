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

#include "privmf/protocol.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace privmf {
namespace {

// Reciprocal condition number below which a gram matrix counts as singular.
constexpr double kSingularRcond = 1e-13;

}  // namespace

bool Disclosure::HasRatios() const {
  return !items.empty() &&
         std::all_of(items.begin(), items.end(),
                     [](const DisclosedItem& i) { return i.ratio.has_value(); });
}

const DisclosedItem* Disclosure::Find(ItemId id) const {
  for (const auto& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

Disclosure MpDisclose(std::span<const ExtendedItemProfile> slice) {
  if (slice.empty()) throw DataError("cannot disclose an empty item set");
  Disclosure out;
  out.items.reserve(slice.size());
  for (const auto& profile : slice) {
    out.items.push_back({profile.id, profile.bias, std::nullopt});
  }
  return out;
}

ObfuscatedFeedback MpObfuscate(std::span<const double> ratings, Label x0,
                               const Disclosure& disclosure) {
  if (ratings.size() != disclosure.items.size()) {
    throw DataError("got " + std::to_string(ratings.size()) +
                    " ratings for " + std::to_string(disclosure.items.size()) +
                    " disclosed items");
  }
  ObfuscatedFeedback out;
  out.revealed.reserve(ratings.size());
  out.values.reserve(ratings.size());
  for (std::size_t j = 0; j < ratings.size(); ++j) {
    out.revealed.push_back(disclosure.items[j].id);
    out.values.push_back(ratings[j] - Sign(x0) * disclosure.items[j].bias);
  }
  return out;
}

double SubsamplingRatio(const RatingProbabilities& probs) {
  if (probs.plus > 0.0) return probs.minus / probs.plus;
  return probs.minus > 0.0 ? kInfiniteRatio : 1.0;
}

Disclosure MpssDisclose(std::span<const ExtendedItemProfile> slice,
                        std::span<const RatingProbabilities> probs) {
  if (probs.size() != slice.size()) {
    throw DataError("need one probability pair per disclosed item");
  }
  Disclosure out = MpDisclose(slice);
  for (std::size_t j = 0; j < slice.size(); ++j) {
    const auto& p = probs[j];
    if (!(p.plus >= 0 && p.plus <= 1 && p.minus >= 0 && p.minus <= 1)) {
      throw DataError("rating probabilities must lie in [0, 1]");
    }
    out.items[j].ratio = SubsamplingRatio(p);
  }
  return out;
}

double KeepProbability(double ratio, Label x0) {
  if (x0 == Label::kPositive) return std::min(1.0, ratio);
  if (ratio == 0.0) return 1.0;
  return std::min(1.0, 1.0 / ratio);
}

ObfuscatedFeedback MpssObfuscate(std::span<const ItemRating> rated, Label x0,
                                 const Disclosure& disclosure, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ObfuscatedFeedback out;
  for (const ItemRating& r : rated) {
    const DisclosedItem* item = disclosure.Find(r.item);
    if (item == nullptr) {
      throw DataError("item " + std::to_string(r.item) +
                      " was not solicited");
    }
    if (!item->ratio) {
      throw DataError("disclosure for item " + std::to_string(r.item) +
                      " carries no sub-sampling ratio");
    }
    // One draw per rated item, kept or not, so that streams stay aligned.
    const double draw = unit(rng);
    if (draw < KeepProbability(*item->ratio, x0)) {
      out.revealed.push_back(r.item);
      out.values.push_back(r.value - Sign(x0) * item->bias);
    }
  }
  return out;
}

NormalEquations::NormalEquations(int dim)
    : gram_(Eigen::MatrixXd::Zero(dim, dim)),
      moment_(Eigen::VectorXd::Zero(dim)) {}

void NormalEquations::Add(const Eigen::VectorXd& latent, double y) {
  if (latent.size() != gram_.rows()) {
    throw DataError("latent dimension " + std::to_string(latent.size()) +
                    " does not match " + std::to_string(gram_.rows()));
  }
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(latent);
  moment_ += y * latent;
  ++count_;
}

void NormalEquations::Add(const ObfuscatedFeedback& feedback,
                          const Catalog& catalog) {
  if (feedback.revealed.size() != feedback.values.size()) {
    throw DataError("feedback has mismatched revealed/values lengths");
  }
  for (std::size_t k = 0; k < feedback.revealed.size(); ++k) {
    Add(catalog.Get(feedback.revealed[k]).latent, feedback.values[k]);
  }
}

ProfileEstimate NormalEquations::Solve(double ridge, double sigma) const {
  if (!(ridge >= 0.0)) throw DataError("ridge must be nonnegative");
  if (count_ == 0) throw DataError("no feedback to estimate from");
  Eigen::MatrixXd a = gram_.selfadjointView<Eigen::Lower>();
  a.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= kSingularRcond)) {
    throw SingularMatrixError(
        "normal matrix is singular: the revealed items do not span the "
        "latent space (use a positive ridge)");
  }
  ProfileEstimate out;
  out.x_hat = llt.solve(moment_);
  const Eigen::MatrixXd inverse =
      llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  out.expected_loss = sigma * sigma * inverse.trace();
  out.n_points = count_;
  return out;
}

ProfileEstimate EstimateProfile(const ObfuscatedFeedback& feedback,
                                const Catalog& catalog, double ridge,
                                double sigma) {
  NormalEquations normal(catalog.dim());
  normal.Add(feedback, catalog);
  return normal.Solve(ridge, sigma);
}

double TheoreticalL2Loss(std::span<const ExtendedItemProfile> slice,
                         double sigma) {
  if (slice.empty()) throw SingularMatrixError("empty design");
  const auto dim = slice.front().latent.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& p : slice) {
    if (p.latent.size() != dim) throw DataError("latent dimension mismatch");
    gram.noalias() += p.latent * p.latent.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                     Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= kSingularRcond * lambda.maxCoeff()) {
    throw SingularMatrixError("design gram matrix is singular");
  }
  return sigma * sigma * lambda.cwiseInverse().sum();
}

std::vector<int> RoundRatings(std::span<const double> values, int lo, int hi,
                              Rng& rng) {
  if (lo > hi) throw DataError("rounding range is empty");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> out;
  out.reserve(values.size());
  for (double r : values) {
    if (!std::isfinite(r)) throw DataError("cannot round a non-finite value");
    if (r <= lo) {
      out.push_back(lo);
    } else if (r >= hi) {
      out.push_back(hi);
    } else {
      const double k = std::floor(r);
      const double frac = r - k;
      int rounded = static_cast<int>(k);
      if (frac > 0.0 && unit(rng) < frac) ++rounded;
      out.push_back(rounded);
    }
  }
  return out;
}

UserSession AccumulateSession(UserSession session, SessionRound round) {
  const auto& fb = round.feedback;
  if (fb.revealed.size() != fb.values.size()) {
    throw DataError("feedback has mismatched revealed/values lengths");
  }
  std::unordered_set<ItemId> in_slice;
  for (const auto& p : round.slice) {
    const int dim = static_cast<int>(p.latent.size());
    if (session.dim_ < 0) session.dim_ = dim;
    if (dim != session.dim_) {
      throw DataError("round latent dimension " + std::to_string(dim) +
                      " does not match the session's " +
                      std::to_string(session.dim_));
    }
    in_slice.insert(p.id);
  }
  for (ItemId id : fb.revealed) {
    if (!in_slice.count(id)) {
      throw DataError("feedback names item " + std::to_string(id) +
                      " outside the round's solicited set");
    }
  }
  session.rounds_.push_back(std::move(round));
  return session;
}

ProfileEstimate EstimateProfile(const UserSession& session, double ridge,
                                double sigma) {
  if (session.dim() < 0) throw DataError("session has no feedback");
  NormalEquations normal(session.dim());
  for (const auto& round : session.rounds()) {
    normal.Add(round.feedback, Catalog(round.slice));
  }
  return normal.Solve(ridge, sigma);
}

}  // namespace privmf
