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

#ifndef PRIVMF_EVALUATION_H_
#define PRIVMF_EVALUATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "privmf/common.h"
#include "privmf/dataset.h"
#include "privmf/factorization.h"
#include "privmf/inference.h"
#include "privmf/protocol.h"
#include "privmf/rng.h"

namespace privmf {

// NO: no obfuscation, MP: midpoint protocol, r: rounding, IA: item average,
// FA: feature average, SS: sub-sampling.
enum class SchemeKind { kNo, kMp, kMpr, kIa, kFa, kSs, kMpss, kMpssr, kSsIa, kSsFa };

std::string_view SchemeName(SchemeKind kind);
std::optional<SchemeKind> ParseSchemeKind(std::string_view name);
bool UsesSubsampling(SchemeKind kind);
// Schemes whose output is MP-shifted (the analyst regresses without a bias
// term).
bool UsesMidpointShift(SchemeKind kind);
bool UsesRounding(SchemeKind kind);

struct Scheme {
  SchemeKind kind = SchemeKind::kNo;
  // Each rating is passed through the scheme with probability alpha and
  // revealed raw otherwise.
  double alpha = 1.0;
  int round_lo = 1;
  int round_hi = 5;

  // "MP", or "MP@0.3" when alpha != 1.
  std::string Label() const;
};

void ValidateScheme(const Scheme& scheme);

// Training-set means used by the IA and FA baselines.
struct TrainingStatistics {
  std::unordered_map<ItemId, double> item_mean;
  std::unordered_map<ItemId, double> mean_plus;
  std::unordered_map<ItemId, double> mean_minus;
};

TrainingStatistics ComputeTrainingStatistics(const RatingsDataset& train);

// Obfuscates one user's rated set S_0 under `scheme`. Throws DataError for
// items missing from the model.
ObfuscatedFeedback ApplyScheme(const Scheme& scheme,
                               std::span<const ItemRating> ratings, Label x0,
                               const AnalystModel& model,
                               const TrainingStatistics& stats, Rng& rng);

enum class Attacker { kLse, kLr, kNb };
std::string_view AttackerName(Attacker attacker);
std::optional<Attacker> ParseAttacker(std::string_view name);

// How the analyst fills in the private coordinate when predicting for a user
// whose feedback was MP-shifted: the class midpoint 0, or the LSE attacker's
// guess.
enum class PrivateCoordinatePolicy { kMidpoint, kInferred };

struct ExperimentConfig {
  int folds = 10;
  double split_fraction = 0.7;
  std::vector<Scheme> schemes;
  std::vector<Attacker> attackers;
  MfHyperparams mf;
  LogisticOptions logistic;
  NaiveBayesOptions naive_bayes;
  double ridge = kDefaultRidge;
  PrivateCoordinatePolicy x0_policy = PrivateCoordinatePolicy::kMidpoint;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct AucCell {
  int fold = 0;
  std::string scheme;
  std::string attacker;
  double auc = 0.0;
};

struct RmseCell {
  int fold = 0;
  std::string scheme;
  double rmse = 0.0;
  // Mean of |S_0 \ S_R| / |S_0| over the fold's users; sub-sampling schemes
  // only.
  std::optional<double> drop_ratio;
};

struct Report {
  std::vector<AucCell> auc;
  std::vector<RmseCell> rmse;
  // Means over folds.
  std::map<std::pair<std::string, std::string>, double> mean_auc;
  std::map<std::string, double> mean_rmse;
  std::map<std::string, double> mean_drop_ratio;

  double MeanAuc(const std::string& scheme, const std::string& attacker) const;
  double MeanRmse(const std::string& scheme) const;
};

// Cross-validated privacy risk (AUC per attacker) and accuracy (RMSE on a
// per-user holdout) for each scheme. Deterministic given config.seed,
// whatever config.jobs is.
Report RunExperiment(const RatingsDataset& dataset,
                     const ExperimentConfig& config);

double Rmse(std::span<const double> predicted, std::span<const double> actual);

struct CurvePoint {
  double alpha = 0.0;
  double auc_lse = 0.0;
  double rmse = 0.0;
};

// One LSE-only experiment per alpha, in grid order.
std::vector<CurvePoint> TradeoffSweep(const RatingsDataset& dataset,
                                      SchemeKind kind,
                                      std::span<const double> alphas,
                                      ExperimentConfig config);

struct DropRatioStats {
  std::vector<double> ratios;  // one per labeled user with rated items
  double mean = 0.0;
  double q10 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q90 = 0.0;
};

// Runs MPSS sub-sampling for every labeled user of `dataset` over the items
// it rated (restricted to the model's catalog).
DropRatioStats DropRatioStatistics(const RatingsDataset& dataset,
                                   const AnalystModel& model, Rng& rng);

}  // namespace privmf

#endif  // PRIVMF_EVALUATION_H_
