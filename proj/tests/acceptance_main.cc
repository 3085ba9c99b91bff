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

// Acceptance suite: prints one PASS/FAIL/SKIP line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "privmf/categorical.h"
#include "privmf/dataset.h"
#include "privmf/evaluation.h"
#include "privmf/protocol.h"
#include "privmf/selection.h"
#include "privmf/wire.h"
#include "test_util.h"

namespace privmf {
namespace {

using testing::KsTwoSample;
using testing::RandomVector;

struct Outcome {
  enum class Status { kPass, kFail, kSkip } status;
  std::string detail;
};

Outcome Verdict(bool ok, const std::ostringstream& detail) {
  return {ok ? Outcome::Status::kPass : Outcome::Status::kFail, detail.str()};
}

// Independent users per class, MP with the true biases; one KS test per item.
Outcome PrivacyInvariance() {
  constexpr int kPairs = 1000;
  SyntheticConfig config;
  config.n_users = 1;
  config.n_items = 20;
  config.d = 5;
  config.noise_sigma = 0.5;
  config.bias_scale = 1.0;
  const auto truth = GenerateSynthetic(config, 101).truth;
  std::vector<ExtendedItemProfile> slice;
  for (int j = 0; j < config.n_items; ++j) {
    slice.push_back({j, truth.items[j].bias, truth.items[j].latent});
  }
  const Disclosure disclosure = MpDisclose(slice);
  std::mt19937_64 gen(102);
  std::normal_distribution<double> noise(0.0, config.noise_sigma);
  std::vector<std::vector<double>> out[2];
  out[0].resize(config.n_items);
  out[1].resize(config.n_items);
  for (int u = 0; u < kPairs; ++u) {
    for (int c = 0; c < 2; ++c) {
      const Label x0 = c ? Label::kPositive : Label::kNegative;
      const Eigen::VectorXd x = RandomVector(config.d, gen);
      std::vector<double> r;
      for (const auto& p : slice) {
        r.push_back(x.dot(p.latent) + Sign(x0) * p.bias + noise(gen));
      }
      const auto y = MpObfuscate(r, x0, disclosure);
      for (int j = 0; j < config.n_items; ++j) out[c][j].push_back(y.values[j]);
    }
  }
  const double threshold = 0.01 / config.n_items;
  double min_p = 1.0;
  for (int j = 0; j < config.n_items; ++j) {
    min_p = std::min(min_p, KsTwoSample(out[0][j], out[1][j]).p_value);
  }
  std::ostringstream d;
  d << "min KS p-value " << min_p << " vs Bonferroni threshold " << threshold;
  return Verdict(min_p >= threshold, d);
}

Outcome MpssInclusionLaw() {
  constexpr int kUsers = 10000;
  const std::vector<RatingProbabilities> grid = {
      {0.0, 0.6}, {0.0, 0.0}, {0.6, 0.0}, {0.3, 0.7}, {0.9, 0.2},
      {0.5, 0.5}, {1.0, 0.4}, {0.05, 1.0}, {1.0, 1.0}};
  std::vector<ExtendedItemProfile> slice;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    slice.push_back({static_cast<ItemId>(j), 0.3, Eigen::VectorXd::Ones(2)});
  }
  const Disclosure disclosure = MpssDisclose(slice, grid);
  Rng rng(201);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 2; ++c) {
    const Label x0 = c ? Label::kPositive : Label::kNegative;
    std::vector<int> revealed(grid.size(), 0);
    for (int u = 0; u < kUsers; ++u) {
      std::vector<ItemRating> rated;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double p = c ? grid[j].plus : grid[j].minus;
        if (unit(rng) < p) rated.push_back({static_cast<ItemId>(j), 3.0});
      }
      for (ItemId id : MpssObfuscate(rated, x0, disclosure, rng).revealed) {
        ++revealed[id];
      }
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double expected = std::min(grid[j].plus, grid[j].minus);
      worst = std::max(worst, std::abs(revealed[j] / double(kUsers) - expected));
    }
  }
  std::ostringstream d;
  d << "max |frequency - min(p+,p-)| = " << worst << " over " << grid.size()
    << " (p+,p-) cells";
  return Verdict(worst <= 0.02, d);
}

Outcome EstimatorLaw() {
  std::mt19937_64 gen(301);
  double worst_exact = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<ExtendedItemProfile> slice;
    ObfuscatedFeedback fb;
    const Eigen::VectorXd x = RandomVector(5, gen);
    for (int j = 0; j < 8; ++j) {
      slice.push_back({j, 0.0, RandomVector(5, gen)});
      fb.revealed.push_back(j);
      fb.values.push_back(x.dot(slice.back().latent));
    }
    const auto est = EstimateProfile(fb, Catalog(slice), 0.0);
    worst_exact = std::max(worst_exact, (est.x_hat - x).cwiseAbs().maxCoeff());
  }
  constexpr int kTrials = 10000;
  constexpr double kSigma = 0.7;
  std::normal_distribution<double> noise(0.0, kSigma);
  double worst_rel = 0.0;
  for (int design = 0; design < 5; ++design) {
    std::vector<ExtendedItemProfile> slice;
    for (int j = 0; j < 10; ++j) slice.push_back({j, 0.0, RandomVector(4, gen)});
    const Catalog catalog(slice);
    const double theory = TheoreticalL2Loss(slice, kSigma);
    double sum = 0.0;
    for (int t = 0; t < kTrials; ++t) {
      const Eigen::VectorXd x = RandomVector(4, gen);
      ObfuscatedFeedback fb;
      for (const auto& p : slice) {
        fb.revealed.push_back(p.id);
        fb.values.push_back(x.dot(p.latent) + noise(gen));
      }
      sum += (EstimateProfile(fb, catalog, 0.0).x_hat - x).squaredNorm();
    }
    worst_rel = std::max(worst_rel, std::abs(sum / kTrials - theory) / theory);
  }
  std::ostringstream d;
  d << "noiseless max error " << worst_exact << "; worst relative loss gap "
    << worst_rel << " over 5 designs";
  return Verdict(worst_exact <= 1e-9 && worst_rel <= 0.05, d);
}

struct Population {
  const char* name;
  SyntheticConfig synth;
  std::uint64_t seed;
  SchemeKind obfuscation;
};

ExperimentConfig AcceptanceExperiment(SchemeKind obfuscation) {
  ExperimentConfig e;
  e.folds = 5;
  e.seed = 401;
  e.schemes = {{SchemeKind::kNo}, {obfuscation}};
  e.attackers = {Attacker::kLse, Attacker::kLr, Attacker::kNb};
  e.mf.d = 5;
  e.mf.learning_rate = 0.02;
  e.mf.regularization = 0.02;
  e.mf.epochs = 30;
  e.logistic.epochs = 30;
  e.naive_bayes.min_level = -8;
  e.naive_bayes.max_level = 8;
  return e;
}

Outcome AttackNeutralization() {
  SyntheticConfig dense;
  dense.n_users = 4000;
  dense.n_items = 40;
  dense.d = 5;
  dense.noise_sigma = 0.5;
  dense.bias_scale = 0.3;
  SyntheticConfig sparse = dense;
  sparse.n_users = 20000;
  sparse.prob_model.kind = ProbabilityModel::Kind::kUniform;
  sparse.prob_model.low = 0.5;
  sparse.prob_model.high = 0.9;
  const Population populations[] = {
      {"dense", dense, 402, SchemeKind::kMp},
      {"sparse", sparse, 403, SchemeKind::kMpss}};
  bool ok = true;
  std::ostringstream d;
  d << std::fixed << std::setprecision(3);
  for (const auto& pop : populations) {
    const auto data = GenerateSynthetic(pop.synth, pop.seed);
    const Report report =
        RunExperiment(data.dataset, AcceptanceExperiment(pop.obfuscation));
    const std::string scheme(SchemeName(pop.obfuscation));
    const double raw_lse = report.MeanAuc("NO", "LSE");
    ok = ok && raw_lse >= 0.75;
    d << pop.name << ": NO/LSE " << raw_lse;
    for (const char* attacker : {"LSE", "LR", "NB"}) {
      const double auc = report.MeanAuc(scheme, attacker);
      ok = ok && auc >= 0.45 && auc <= 0.55;
      d << ", " << scheme << "/" << attacker << " " << auc;
    }
    if (pop.obfuscation == SchemeKind::kMp) {
      const double ratio = report.MeanRmse(scheme) / report.MeanRmse("NO");
      ok = ok && ratio <= 1.05;
      d << ", RMSE ratio " << ratio;
    }
    if (pop.obfuscation == SchemeKind::kMp) d << "; ";
  }
  return Verdict(ok, d);
}

Outcome SelectionOptimality() {
  std::mt19937_64 gen(501);
  std::uniform_int_distribution<int> items(5, 12);
  std::uniform_int_distribution<int> dims(1, 4);
  std::uniform_int_distribution<int> budgets(1, 4);
  int instances = 0, violations = 0, diagonal_mismatches = 0;
  double worst_ratio = 1.0;
  while (instances < 250) {
    const int m = items(gen);
    const int d = dims(gen);
    SelectionProblem problem;
    for (int j = 0; j < m; ++j) problem.candidates.push_back({j, RandomVector(d, gen)});
    problem.seed_set = DefaultSeedSet(problem.candidates);
    if (static_cast<int>(problem.seed_set.size()) < d) continue;
    problem.budget = std::min(budgets(gen), m - d);
    if (problem.budget <= 0) continue;
    ++instances;
    const auto greedy = GreedySelect(problem);
    const auto best = BruteForceSelect(problem);
    const double g = MarginalValue(problem, greedy);
    const double opt = MarginalValue(problem, best);
    if (opt > 0) worst_ratio = std::min(worst_ratio, g / opt);
    if (g < (1.0 - 1.0 / std::exp(1.0)) * opt - 1e-12) ++violations;
  }
  for (int t = 0; t < 100; ++t) {
    const int d = dims(gen);
    const int m = d + 6;
    SelectionProblem problem;
    std::uniform_real_distribution<double> scale(0.1, 3.0);
    std::uniform_int_distribution<int> axis(0, d - 1);
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
      v(j < d ? j : axis(gen)) = scale(gen);
      problem.candidates.push_back({j, v});
    }
    for (int k = 0; k < d; ++k) problem.seed_set.push_back(k);
    problem.budget = budgets(gen);
    auto greedy = GreedySelect(problem);
    const auto best = BruteForceSelect(problem);
    if (std::abs(MarginalValue(problem, greedy) - MarginalValue(problem, best)) >
        1e-9 * std::max(1.0, std::abs(MarginalValue(problem, best)))) {
      ++diagonal_mismatches;
    }
  }
  std::ostringstream d;
  d << instances << " instances, " << violations
    << " below the 1-1/e bound (worst greedy/optimal " << worst_ratio << "); "
    << diagonal_mismatches << " diagonal mismatches in 100";
  return Verdict(violations == 0 && diagonal_mismatches == 0, d);
}

Outcome RoundingUnbiased() {
  constexpr int kDraws = 100000;
  Rng rng(601);
  bool ok = true;
  std::ostringstream d;
  for (double r : {1.1, 2.5, 3.4, 4.9}) {
    const std::vector<double> values(kDraws, r);
    const auto rounded = RoundRatings(values, 1, 5, rng);
    double sum = 0.0;
    for (int v : rounded) {
      ok = ok && v >= 1 && v <= 5;
      sum += v;
    }
    const double mean = sum / kDraws;
    ok = ok && std::abs(mean - r) <= 0.01;
    d << r << "->" << mean << " ";
  }
  return Verdict(ok, d);
}

Outcome CategoricalEquivalence() {
  std::mt19937_64 gen(701);
  std::uniform_int_distribution<int> pick_k(2, 4);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int k = pick_k(gen);
    const Eigen::VectorXd x = RandomVector(3, gen);
    const Eigen::VectorXd v = RandomVector(3, gen);
    std::vector<double> biases;
    for (int c = 0; c < k; ++c) biases.push_back(RandomVector(1, gen)(0));
    const auto item = TransformCategoricalItem(v, biases);
    for (int category = 1; category <= k; ++category) {
      const auto x0 = BinarizeCategory(category, k);
      worst = std::max(worst, std::abs(PredictCategorical(x, v, biases, category) -
                                       PredictBinarized(x, item, x0)));
    }
  }
  // K = 2: the binary protocol with v0 = (b1 - b2) / 2 plus the constant mu.
  double worst_binary = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd x = RandomVector(3, gen);
    const Eigen::VectorXd v = RandomVector(3, gen);
    const std::vector<double> b = {RandomVector(1, gen)(0), RandomVector(1, gen)(0)};
    const auto item = TransformCategoricalItem(v, b);
    const double v0 = (b[0] - b[1]) / 2;
    const double mu = (b[0] + b[1]) / 2;
    for (Label label : {Label::kPositive, Label::kNegative}) {
      const int category = label == Label::kPositive ? 1 : 2;
      const double r = PredictCategorical(x, v, b, category);
      const double y = ObfuscateCategorical(r, item, BinarizeCategory(category, 2));
      const std::vector<double> single = {r};
      const Disclosure disclosure = MpDisclose(
          std::vector<ExtendedItemProfile>{{0, v0, v}});
      const double y_binary = MpObfuscate(single, label, disclosure).values[0];
      worst_binary = std::max(worst_binary, std::abs(y - y_binary));
      worst_binary = std::max(worst_binary,
                              std::abs(r - (x.dot(v) + mu + Sign(label) * v0)));
    }
  }
  std::ostringstream d;
  d << "max categorical/binarized gap " << worst << ", K=2 vs binary gap "
    << worst_binary;
  return Verdict(worst <= 1e-9 && worst_binary <= 1e-9, d);
}

Outcome WirePrivacy() {
  bool schema_ok = true;
  for (const auto& schema : WireSchema()) {
    for (auto field : schema.fields) {
      for (const char* banned : {"label", "x0", "gender", "private", "latent"}) {
        if (field.find(banned) != std::string_view::npos) schema_ok = false;
      }
    }
  }

  std::mt19937_64 gen(801);
  AnalystModel model;
  model.d = 3;
  model.label_name = "gender";
  const double probs[6][2] = {{0.9, 0.3}, {0.3, 0.9}, {0.0, 0.6},
                              {0.5, 0.5}, {0.8, 0.1}, {1.0, 0.7}};
  std::vector<ExtendedItemProfile> profiles;
  for (int j = 0; j < 6; ++j) {
    profiles.push_back({j, 0.4 * (j - 2), RandomVector(3, gen)});
    model.rating_probs.push_back({probs[j][0], probs[j][1]});
  }
  model.catalog = Catalog(profiles);
  model.noise_sigma_hat = 0.0;

  constexpr int kPairs = 10000;
  AnalystServer mpss(AnalystService(model, {ProtocolKind::kMpss, -1, kDefaultRidge}));
  const int mpss_port = mpss.Listen("127.0.0.1", 0);
  std::thread mpss_thread([&] { mpss.Serve(2 * kPairs); });
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> counts[2] = {std::vector<int>(6), std::vector<int>(6)};
  for (int u = 0; u < kPairs; ++u) {
    const Eigen::VectorXd x = RandomVector(3, gen);
    for (int c = 0; c < 2; ++c) {
      const Label x0 = c ? Label::kPositive : Label::kNegative;
      std::vector<ItemRating> rated;
      for (int j = 0; j < 6; ++j) {
        if (unit(gen) < probs[j][c ? 0 : 1]) {
          rated.push_back({j, x.dot(profiles[j].latent) + Sign(x0) * profiles[j].bias});
        }
      }
      auto tap = [&](Direction dir, std::string_view frame) {
        if (dir != Direction::kSent) return;
        const WireMessage msg = DecodeMessage(frame);
        if (const auto* fb = std::get_if<FeedbackMessage>(&msg)) {
          for (ItemId id : fb->feedback.revealed) ++counts[c][id];
        }
      };
      try {
        UserAgentRun(UserAgent(rated, x0, ProtocolKind::kMpss), "127.0.0.1",
                     mpss_port, 800 + u, tap);
      } catch (const WireError&) {
        // Empty reveal sets are answered with an error; their (empty)
        // feedback was still captured.
      }
    }
  }
  mpss.Shutdown();
  mpss_thread.join();
  // Both classes must reveal each item at the common rate min(p+, p-).
  double worst_gap = 0.0, worst_law = 0.0;
  for (int j = 0; j < 6; ++j) {
    worst_gap = std::max(worst_gap, std::abs(counts[0][j] - counts[1][j]) /
                                        static_cast<double>(kPairs));
    const double target = std::min(probs[j][0], probs[j][1]);
    for (int c = 0; c < 2; ++c) {
      worst_law = std::max(worst_law,
                           std::abs(counts[c][j] / double(kPairs) - target));
    }
  }

  AnalystServer mp(AnalystService(model, {ProtocolKind::kMp, -1, 0.0}));
  const int mp_port = mp.Listen("127.0.0.1", 0);
  std::thread mp_thread([&] { mp.Serve(20); });
  double worst_err = 0.0;
  for (int u = 0; u < 20; ++u) {
    const Label x0 = u % 2 ? Label::kPositive : Label::kNegative;
    const Eigen::VectorXd x = RandomVector(3, gen);
    std::vector<ItemRating> ratings;
    for (const auto& p : profiles) {
      ratings.push_back({p.id, x.dot(p.latent) + Sign(x0) * p.bias});
    }
    const auto result = UserAgentRun(UserAgent(ratings, x0, ProtocolKind::kMp),
                                     "127.0.0.1", mp_port, u);
    worst_err = std::max(worst_err, (result.x_hat - x).cwiseAbs().maxCoeff());
  }
  mp.Shutdown();
  mp_thread.join();

  std::ostringstream d;
  d << "schema " << (schema_ok ? "clean" : "has a private field")
    << "; captured reveal rates within " << worst_law
    << " of min(p+,p-) for both classes (cross-class gap " << worst_gap
    << ") over " << kPairs << " session pairs; noiseless end-to-end error "
    << worst_err;
  return Verdict(schema_ok && worst_law <= 0.02 && worst_err <= 1e-6, d);
}

// Optional reproduction on MovieLens-1M; PRIVMF_MOVIELENS_DIR must hold
// ratings.dat and users.dat.
Outcome MovieLens() {
  const char* dir = std::getenv("PRIVMF_MOVIELENS_DIR");
  if (dir == nullptr || !std::filesystem::exists(std::string(dir) + "/ratings.dat") ||
      !std::filesystem::exists(std::string(dir) + "/users.dat")) {
    return {Outcome::Status::kSkip,
            "set PRIVMF_MOVIELENS_DIR to a MovieLens-1M directory to run"};
  }
  std::ifstream ratings_in(std::string(dir) + "/ratings.dat");
  std::ifstream users_in(std::string(dir) + "/users.dat");
  const auto labels = ParseMovieLensGender(users_in);
  RatingsDataset dataset = ParseRatings(ratings_in).WithLabels(labels, "gender");
  dataset = FilterByActivity(dataset, 20, 20);
  ExperimentConfig e;
  e.folds = 5;
  e.seed = 901;
  e.schemes = {{SchemeKind::kNo}, {SchemeKind::kMpss}};
  e.attackers = {Attacker::kLse, Attacker::kLr, Attacker::kNb};
  e.mf.d = 20;
  e.mf.epochs = 20;
  e.mf.learning_rate = 0.01;
  e.mf.regularization = 0.05;
  e.naive_bayes.min_level = 1;
  e.naive_bayes.max_level = 5;
  const Report report = RunExperiment(dataset, e);
  bool ok = true;
  std::ostringstream d;
  for (const char* attacker : {"LSE", "LR", "NB"}) {
    const double auc = report.MeanAuc("MPSS", attacker);
    ok = ok && auc <= 0.58;
    d << "MPSS/" << attacker << " " << auc << ", ";
  }
  const double ratio = report.MeanRmse("MPSS") / report.MeanRmse("NO");
  ok = ok && ratio <= 1.08;
  d << "RMSE ratio " << ratio;
  return Verdict(ok, d);
}

}  // namespace
}  // namespace privmf

int main() {
  using privmf::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"privacy invariance of MP outputs", privmf::PrivacyInvariance},
      {"MPSS inclusion law", privmf::MpssInclusionLaw},
      {"estimator exactness and loss law", privmf::EstimatorLaw},
      {"attack neutralization and accuracy cost", privmf::AttackNeutralization},
      {"greedy selection approximation", privmf::SelectionOptimality},
      {"rounding unbiasedness", privmf::RoundingUnbiased},
      {"categorical equivalence", privmf::CategoricalEquivalence},
      {"wire privacy", privmf::WirePrivacy},
      {"MovieLens-1M reproduction (optional)", privmf::MovieLens},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome{Outcome::Status::kFail, ""};
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {Outcome::Status::kFail, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    const char* tag = outcome.status == Outcome::Status::kPass   ? "PASS"
                      : outcome.status == Outcome::Status::kSkip ? "SKIP"
                                                                 : "FAIL";
    if (outcome.status == Outcome::Status::kFail) ++failures;
    std::cout << tag << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << outcome.detail << " [" << std::fixed
              << std::setprecision(1) << seconds << "s]" << std::endl;
    std::cout.unsetf(std::ios::fixed);
    std::cout << std::setprecision(6);
  }
  return failures == 0 ? 0 : 1;
}
