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

#include "privmf/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace privmf {
namespace {

constexpr std::pair<SchemeKind, std::string_view> kSchemeNames[] = {
    {SchemeKind::kNo, "NO"},     {SchemeKind::kMp, "MP"},
    {SchemeKind::kMpr, "MPr"},   {SchemeKind::kIa, "IA"},
    {SchemeKind::kFa, "FA"},     {SchemeKind::kSs, "SS"},
    {SchemeKind::kMpss, "MPSS"}, {SchemeKind::kMpssr, "MPSSr"},
    {SchemeKind::kSsIa, "SS_IA"}, {SchemeKind::kSsFa, "SS_FA"},
};

constexpr std::pair<Attacker, std::string_view> kAttackerNames[] = {
    {Attacker::kLse, "LSE"}, {Attacker::kLr, "LR"}, {Attacker::kNb, "NB"}};

double Quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

std::vector<ItemRating> AsRatings(const ObfuscatedFeedback& feedback) {
  std::vector<ItemRating> out;
  out.reserve(feedback.revealed.size());
  for (std::size_t k = 0; k < feedback.revealed.size(); ++k) {
    out.push_back({feedback.revealed[k], feedback.values[k]});
  }
  return out;
}

struct FoldResult {
  std::vector<AucCell> auc;
  std::vector<RmseCell> rmse;
};

// Runs `fn(i)` for i in [0, n) on up to `jobs` threads; rethrows the first
// failure.
template <typename Fn>
void ParallelFor(int n, int jobs, Fn fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

FoldResult RunFold(const RatingsDataset& dataset,
                   const std::vector<std::vector<UserId>>& folds, int fold,
                   const ExperimentConfig& config) {
  std::vector<UserId> train_ids;
  for (int f = 0; f < static_cast<int>(folds.size()); ++f) {
    if (f != fold) train_ids.insert(train_ids.end(), folds[f].begin(),
                                    folds[f].end());
  }
  std::sort(train_ids.begin(), train_ids.end());
  const RatingsDataset train = dataset.SubsetUsers(train_ids);

  MfHyperparams hp = config.mf;
  hp.seed = DeriveSeed(config.seed,
                       {Tag(SeedTag::kTrain), static_cast<std::uint64_t>(fold)});
  const BiasEstimate biases = ComputeBiases(train);
  const AnalystModel model = TrainMf(train, biases.bias, hp).model;
  const Catalog& catalog = model.catalog;
  const TrainingStatistics stats = ComputeTrainingStatistics(train);

  const bool want_lr = std::count(config.attackers.begin(),
                                  config.attackers.end(), Attacker::kLr) > 0;
  const bool want_nb = std::count(config.attackers.begin(),
                                  config.attackers.end(), Attacker::kNb) > 0;
  const int nb_lo = config.naive_bayes.min_level;
  const int nb_hi = config.naive_bayes.max_level;
  LogisticModel lr_model;
  NaiveBayesModel nb_model;
  if (want_lr || want_nb) {
    std::vector<AttackInput> raw, discrete;
    std::vector<Label> labels;
    for (std::size_t u = 0; u < train.users().size(); ++u) {
      if (!train.users()[u].label) continue;
      raw.push_back(MakeAttackInput(train.UserItemRatings(u), catalog));
      if (want_nb) discrete.push_back(DiscretizeInput(raw.back(), nb_lo, nb_hi));
      labels.push_back(*train.users()[u].label);
    }
    if (want_lr) {
      LogisticOptions lr = config.logistic;
      lr.seed = DeriveSeed(config.seed, {Tag(SeedTag::kAttack),
                                         static_cast<std::uint64_t>(fold)});
      lr_model = LogisticTrain(raw, labels, lr);
    }
    if (want_nb) nb_model = NaiveBayesTrain(discrete, labels, config.naive_bayes);
  }

  const std::size_t n_schemes = config.schemes.size();
  const std::size_t n_attackers = config.attackers.size();
  std::vector<std::vector<std::vector<double>>> scores(
      n_schemes, std::vector<std::vector<double>>(n_attackers));
  std::vector<Label> test_labels;
  std::vector<double> sq_error(n_schemes, 0.0);
  std::vector<std::size_t> n_holdout(n_schemes, 0);
  std::vector<double> drop_sum(n_schemes, 0.0);
  std::vector<std::size_t> drop_users(n_schemes, 0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.d);

  for (UserId uid : folds[fold]) {
    const std::size_t u = *dataset.FindUser(uid);
    const Label x0 = *dataset.users()[u].label;
    std::vector<ItemRating> ratings;
    for (const Rating& r : dataset.UserRatings(u)) {
      if (catalog.Contains(r.item)) ratings.push_back({r.item, r.value});
    }
    if (ratings.size() < 2) continue;
    const auto uid_tag = static_cast<std::uint64_t>(uid);
    const auto fold_tag = static_cast<std::uint64_t>(fold);
    const UserRatingSplit split = SplitUserRatings(
        ratings, config.split_fraction,
        DeriveSeed(config.seed, {Tag(SeedTag::kSplit), fold_tag, uid_tag}));
    test_labels.push_back(x0);

    for (std::size_t s = 0; s < n_schemes; ++s) {
      const Scheme& scheme = config.schemes[s];
      Rng rng = MakeRng(config.seed,
                        {Tag(SeedTag::kScheme), fold_tag, uid_tag,
                         static_cast<std::uint64_t>(scheme.kind)});
      const ObfuscatedFeedback feedback =
          ApplyScheme(scheme, split.observed, x0, model, stats, rng);
      const std::vector<ItemRating> revealed = AsRatings(feedback);
      if (UsesSubsampling(scheme.kind)) {
        drop_sum[s] += 1.0 - static_cast<double>(revealed.size()) /
                                 static_cast<double>(split.observed.size());
        ++drop_users[s];
      }

      std::optional<LseResult> lse;
      if (!revealed.empty()) lse = LseAttack(revealed, catalog, config.ridge);
      for (std::size_t a = 0; a < n_attackers; ++a) {
        double score = 0.0;
        switch (config.attackers[a]) {
          case Attacker::kLse:
            score = lse ? lse->score : 0.0;
            break;
          case Attacker::kLr:
            score = LogisticScore(lr_model, MakeAttackInput(revealed, catalog));
            break;
          case Attacker::kNb:
            score = NaiveBayesScore(
                nb_model,
                DiscretizeInput(MakeAttackInput(revealed, catalog), nb_lo,
                                nb_hi));
            break;
        }
        scores[s][a].push_back(score);
      }

      Eigen::VectorXd x_hat = zero;
      double x0_hat = 0.0;
      // With alpha = 0 nothing is shifted and the scheme is exactly NO.
      if (UsesMidpointShift(scheme.kind) && scheme.alpha > 0.0) {
        if (!revealed.empty()) {
          x_hat = EstimateProfile(feedback, catalog, config.ridge).x_hat;
        }
        if (config.x0_policy == PrivateCoordinatePolicy::kInferred && lse) {
          x0_hat = Sign(lse->label);
        }
      } else if (lse) {
        x_hat = lse->x_hat;
        x0_hat = Sign(lse->label);
      }
      for (const ItemRating& r : split.holdout) {
        const double e =
            PredictRating(x_hat, x0_hat, catalog.Get(r.item)) - r.value;
        sq_error[s] += e * e;
        ++n_holdout[s];
      }
    }
  }

  FoldResult out;
  for (std::size_t s = 0; s < n_schemes; ++s) {
    const std::string name = config.schemes[s].Label();
    for (std::size_t a = 0; a < n_attackers; ++a) {
      out.auc.push_back({fold, name,
                         std::string(AttackerName(config.attackers[a])),
                         Auc(scores[s][a], test_labels)});
    }
    if (n_holdout[s] == 0) {
      throw DataError("fold " + std::to_string(fold) +
                      " has no holdout ratings");
    }
    RmseCell cell{fold, name, std::sqrt(sq_error[s] / n_holdout[s]),
                  std::nullopt};
    if (drop_users[s] > 0) cell.drop_ratio = drop_sum[s] / drop_users[s];
    out.rmse.push_back(std::move(cell));
  }
  return out;
}

}  // namespace

std::string_view SchemeName(SchemeKind kind) {
  for (const auto& [k, name] : kSchemeNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<SchemeKind> ParseSchemeKind(std::string_view name) {
  for (const auto& [k, n] : kSchemeNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool UsesSubsampling(SchemeKind kind) {
  return kind == SchemeKind::kSs || kind == SchemeKind::kMpss ||
         kind == SchemeKind::kMpssr || kind == SchemeKind::kSsIa ||
         kind == SchemeKind::kSsFa;
}

bool UsesMidpointShift(SchemeKind kind) {
  return kind == SchemeKind::kMp || kind == SchemeKind::kMpr ||
         kind == SchemeKind::kMpss || kind == SchemeKind::kMpssr;
}

bool UsesRounding(SchemeKind kind) {
  return kind == SchemeKind::kMpr || kind == SchemeKind::kMpssr;
}

std::string Scheme::Label() const {
  std::string name(SchemeName(kind));
  if (alpha != 1.0) {
    std::ostringstream s;
    s << name << '@' << alpha;
    return s.str();
  }
  return name;
}

void ValidateScheme(const Scheme& scheme) {
  if (!(scheme.alpha >= 0.0 && scheme.alpha <= 1.0)) {
    throw DataError("mixing level alpha must lie in [0, 1]");
  }
  if (UsesRounding(scheme.kind) && scheme.round_lo > scheme.round_hi) {
    throw DataError("rounding range is empty");
  }
}

TrainingStatistics ComputeTrainingStatistics(const RatingsDataset& train) {
  struct Acc {
    double sum = 0, plus = 0, minus = 0;
    std::size_t n = 0, n_plus = 0, n_minus = 0;
  };
  std::unordered_map<ItemId, Acc> acc;
  for (std::size_t u = 0; u < train.users().size(); ++u) {
    const auto& label = train.users()[u].label;
    for (const Rating& r : train.UserRatings(u)) {
      Acc& a = acc[r.item];
      a.sum += r.value;
      ++a.n;
      if (label == Label::kPositive) {
        a.plus += r.value;
        ++a.n_plus;
      } else if (label == Label::kNegative) {
        a.minus += r.value;
        ++a.n_minus;
      }
    }
  }
  TrainingStatistics stats;
  for (const auto& [item, a] : acc) {
    const double mean = a.sum / a.n;
    stats.item_mean[item] = mean;
    // A class with no ratings of the item falls back to the item mean.
    stats.mean_plus[item] = a.n_plus ? a.plus / a.n_plus : mean;
    stats.mean_minus[item] = a.n_minus ? a.minus / a.n_minus : mean;
  }
  return stats;
}

ObfuscatedFeedback ApplyScheme(const Scheme& scheme,
                               std::span<const ItemRating> ratings, Label x0,
                               const AnalystModel& model,
                               const TrainingStatistics& stats, Rng& rng) {
  ValidateScheme(scheme);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ObfuscatedFeedback out;
  for (const ItemRating& r : ratings) {
    auto index = model.catalog.IndexOf(r.item);
    if (!index) throw DataError("unknown item " + std::to_string(r.item));
    const ExtendedItemProfile& profile = model.catalog.profiles()[*index];
    // Fixed draw order per item keeps streams aligned across schemes.
    const double mix_draw = unit(rng);
    const double keep_draw = unit(rng);
    const double coin_draw = unit(rng);
    if (!(mix_draw < scheme.alpha)) {
      out.revealed.push_back(r.item);
      out.values.push_back(r.value);
      continue;
    }
    if (UsesSubsampling(scheme.kind)) {
      const double ratio = SubsamplingRatio(model.rating_probs[*index]);
      if (!(keep_draw < KeepProbability(ratio, x0))) continue;
    }
    double value = r.value;
    switch (scheme.kind) {
      case SchemeKind::kNo:
      case SchemeKind::kSs:
        break;
      case SchemeKind::kMp:
      case SchemeKind::kMpr:
      case SchemeKind::kMpss:
      case SchemeKind::kMpssr:
        value = r.value - Sign(x0) * profile.bias;
        break;
      case SchemeKind::kIa:
      case SchemeKind::kSsIa:
        value = stats.item_mean.at(r.item);
        break;
      case SchemeKind::kFa:
      case SchemeKind::kSsFa:
        value = coin_draw < 0.5 ? stats.mean_plus.at(r.item)
                                : stats.mean_minus.at(r.item);
        break;
    }
    if (UsesRounding(scheme.kind)) {
      const double single[] = {value};
      value = RoundRatings(single, scheme.round_lo, scheme.round_hi, rng)[0];
    }
    out.revealed.push_back(r.item);
    out.values.push_back(value);
  }
  return out;
}

std::string_view AttackerName(Attacker attacker) {
  for (const auto& [a, name] : kAttackerNames) {
    if (a == attacker) return name;
  }
  return "?";
}

std::optional<Attacker> ParseAttacker(std::string_view name) {
  for (const auto& [a, n] : kAttackerNames) {
    if (n == name) return a;
  }
  return std::nullopt;
}

double Report::MeanAuc(const std::string& scheme,
                       const std::string& attacker) const {
  auto it = mean_auc.find({scheme, attacker});
  if (it == mean_auc.end()) {
    throw DataError("report has no AUC for " + scheme + "/" + attacker);
  }
  return it->second;
}

double Report::MeanRmse(const std::string& scheme) const {
  auto it = mean_rmse.find(scheme);
  if (it == mean_rmse.end()) throw DataError("report has no RMSE for " + scheme);
  return it->second;
}

Report RunExperiment(const RatingsDataset& dataset,
                     const ExperimentConfig& config) {
  if (config.schemes.empty()) throw DataError("no schemes configured");
  if (!(config.split_fraction > 0 && config.split_fraction < 1)) {
    throw DataError("split fraction must lie in (0, 1)");
  }
  for (const Scheme& s : config.schemes) ValidateScheme(s);
  if (dataset.LabeledUsers().size() < 2 * static_cast<std::size_t>(
                                              std::max(config.folds, 1))) {
    throw DataError("not enough labeled users for " +
                    std::to_string(config.folds) + " folds");
  }
  const auto folds = SplitFolds(dataset, config.folds,
                                DeriveSeed(config.seed, {Tag(SeedTag::kFolds)}));

  std::vector<FoldResult> results(folds.size());
  ParallelFor(static_cast<int>(folds.size()), config.jobs, [&](int f) {
    results[f] = RunFold(dataset, folds, f, config);
  });

  Report report;
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> auc_acc;
  std::map<std::string, std::pair<double, int>> rmse_acc, drop_acc;
  for (const FoldResult& r : results) {
    for (const AucCell& c : r.auc) {
      report.auc.push_back(c);
      auto& acc = auc_acc[{c.scheme, c.attacker}];
      acc.first += c.auc;
      ++acc.second;
    }
    for (const RmseCell& c : r.rmse) {
      report.rmse.push_back(c);
      auto& acc = rmse_acc[c.scheme];
      acc.first += c.rmse;
      ++acc.second;
      if (c.drop_ratio) {
        auto& d = drop_acc[c.scheme];
        d.first += *c.drop_ratio;
        ++d.second;
      }
    }
  }
  for (const auto& [k, v] : auc_acc) report.mean_auc[k] = v.first / v.second;
  for (const auto& [k, v] : rmse_acc) report.mean_rmse[k] = v.first / v.second;
  for (const auto& [k, v] : drop_acc) {
    report.mean_drop_ratio[k] = v.first / v.second;
  }
  return report;
}

double Rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw DataError("RMSE inputs have different lengths");
  }
  if (predicted.empty()) throw DataError("RMSE of an empty vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = predicted[i] - actual[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

std::vector<CurvePoint> TradeoffSweep(const RatingsDataset& dataset,
                                      SchemeKind kind,
                                      std::span<const double> alphas,
                                      ExperimentConfig config) {
  std::vector<CurvePoint> curve;
  config.attackers = {Attacker::kLse};
  for (double alpha : alphas) {
    if (!(alpha >= 0 && alpha <= 1)) {
      throw DataError("sweep grid values must lie in [0, 1]");
    }
    Scheme scheme;
    if (!config.schemes.empty()) scheme = config.schemes.front();
    scheme.kind = kind;
    scheme.alpha = alpha;
    config.schemes = {scheme};
    const Report report = RunExperiment(dataset, config);
    curve.push_back({alpha, report.MeanAuc(scheme.Label(), "LSE"),
                     report.MeanRmse(scheme.Label())});
  }
  return curve;
}

DropRatioStats DropRatioStatistics(const RatingsDataset& dataset,
                                   const AnalystModel& model, Rng& rng) {
  DropRatioStats stats;
  for (std::size_t u = 0; u < dataset.users().size(); ++u) {
    const auto& label = dataset.users()[u].label;
    if (!label) continue;
    std::vector<ItemRating> rated;
    std::vector<ItemId> ids;
    for (const Rating& r : dataset.UserRatings(u)) {
      if (model.catalog.Contains(r.item)) {
        rated.push_back({r.item, r.value});
        ids.push_back(r.item);
      }
    }
    if (rated.empty()) continue;
    std::vector<RatingProbabilities> probs;
    for (ItemId id : ids) probs.push_back(model.ProbsOf(id));
    const Disclosure disclosure =
        MpssDisclose(model.catalog.Slice(ids), probs);
    const ObfuscatedFeedback fb = MpssObfuscate(rated, *label, disclosure, rng);
    stats.ratios.push_back(1.0 - static_cast<double>(fb.revealed.size()) /
                                     static_cast<double>(rated.size()));
  }
  if (stats.ratios.empty()) return stats;
  std::vector<double> sorted = stats.ratios;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double r : sorted) sum += r;
  stats.mean = sum / sorted.size();
  stats.q10 = Quantile(sorted, 0.10);
  stats.q25 = Quantile(sorted, 0.25);
  stats.median = Quantile(sorted, 0.50);
  stats.q75 = Quantile(sorted, 0.75);
  stats.q90 = Quantile(sorted, 0.90);
  return stats;
}

}  // namespace privmf
