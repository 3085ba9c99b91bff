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

#ifndef PRIVMF_SERIALIZATION_H_
#define PRIVMF_SERIALIZATION_H_

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "privmf/dataset.h"
#include "privmf/evaluation.h"
#include "privmf/factorization.h"
#include "privmf/inference.h"
#include "privmf/protocol.h"

namespace privmf {

using Json = nlohmann::json;

// All FromJson functions throw DataError on schema violations.

// {d, label_name, items: [{id, bias, latent[], p_plus, p_minus}],
//  noise_sigma_hat}. Loading validates the model.
Json ModelToJson(const AnalystModel& model);
AnalystModel ModelFromJson(const Json& json);

Json TruthToJson(const SyntheticGroundTruth& truth);
SyntheticGroundTruth TruthFromJson(const Json& json);

// {items: [{id, bias, ratio?}]}; an infinite ratio is the string "inf".
Json DisclosureToJson(const Disclosure& disclosure);
Disclosure DisclosureFromJson(const Json& json);

// {revealed: [...], values: [...]}
Json FeedbackToJson(const ObfuscatedFeedback& feedback);
ObfuscatedFeedback FeedbackFromJson(const Json& json);

// {x_hat: [...], expected_loss, n_points}
Json EstimateToJson(const ProfileEstimate& estimate);
ProfileEstimate EstimateFromJson(const Json& json);

Json LogisticToJson(const LogisticModel& model);
Json NaiveBayesToJson(const NaiveBayesModel& model);

Json ReportToJson(const Report& report);
// fold,scheme,attacker,auc,rmse rows, then one "mean" row per pair.
void WriteReportCsv(std::ostream& out, const Report& report);
void WriteCurveCsv(std::ostream& out, const std::vector<CurvePoint>& curve);
Json DropStatsToJson(const DropRatioStats& stats);

SyntheticConfig SyntheticConfigFromJson(const Json& json);
Json SyntheticConfigToJson(const SyntheticConfig& config);
MfHyperparams MfHyperparamsFromJson(const Json& json,
                                    MfHyperparams defaults = {});
// Fields not present keep their defaults. Schemes are names ("MPSS") or
// objects {kind, alpha, round_lo, round_hi}.
ExperimentConfig ExperimentConfigFromJson(const Json& json);

Json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& json);

}  // namespace privmf

#endif  // PRIVMF_SERIALIZATION_H_
