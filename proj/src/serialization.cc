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

#include "privmf/serialization.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace privmf {
namespace {

template <typename Fn>
auto Guard(const char* what, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw DataError(std::string("invalid ") + what + " JSON: " + e.what());
  }
}

Json VectorToJson(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd VectorFromJson(const Json& json) {
  const auto values = json.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
}

Json LabelsToJson(Label label) { return static_cast<int>(label); }

template <typename T>
void MaybeGet(const Json& json, const char* key, T& out) {
  if (json.contains(key)) out = json.at(key).get<T>();
}

ProbabilityModel ProbModelFromJson(const Json& json) {
  ProbabilityModel pm;
  const std::string kind = json.at("kind").get<std::string>();
  if (kind == "dense") {
    pm.kind = ProbabilityModel::Kind::kDense;
  } else if (kind == "uniform") {
    pm.kind = ProbabilityModel::Kind::kUniform;
    pm.low = json.at("low").get<double>();
    pm.high = json.at("high").get<double>();
  } else if (kind == "explicit") {
    pm.kind = ProbabilityModel::Kind::kExplicit;
    for (const auto& pair : json.at("probs")) {
      pm.explicit_probs.emplace_back(pair.at(0).get<double>(),
                                     pair.at(1).get<double>());
    }
  } else {
    throw DataError("unknown prob_model kind '" + kind + "'");
  }
  return pm;
}

Json ProbModelToJson(const ProbabilityModel& pm) {
  switch (pm.kind) {
    case ProbabilityModel::Kind::kDense:
      return {{"kind", "dense"}};
    case ProbabilityModel::Kind::kUniform:
      return {{"kind", "uniform"}, {"low", pm.low}, {"high", pm.high}};
    case ProbabilityModel::Kind::kExplicit: {
      Json probs = Json::array();
      for (const auto& [p, q] : pm.explicit_probs) probs.push_back({p, q});
      return {{"kind", "explicit"}, {"probs", probs}};
    }
  }
  return {};
}

Scheme SchemeFromJson(const Json& json) {
  Scheme scheme;
  const std::string name =
      json.is_string() ? json.get<std::string>() : json.at("kind").get<std::string>();
  auto kind = ParseSchemeKind(name);
  if (!kind) throw DataError("unknown scheme '" + name + "'");
  scheme.kind = *kind;
  if (json.is_object()) {
    MaybeGet(json, "alpha", scheme.alpha);
    MaybeGet(json, "round_lo", scheme.round_lo);
    MaybeGet(json, "round_hi", scheme.round_hi);
  }
  ValidateScheme(scheme);
  return scheme;
}

}  // namespace

Json ModelToJson(const AnalystModel& model) {
  Json items = Json::array();
  for (std::size_t j = 0; j < model.catalog.size(); ++j) {
    const auto& p = model.catalog.profiles()[j];
    items.push_back({{"id", p.id},
                     {"bias", p.bias},
                     {"latent", VectorToJson(p.latent)},
                     {"p_plus", model.rating_probs[j].plus},
                     {"p_minus", model.rating_probs[j].minus}});
  }
  return {{"d", model.d},
          {"label_name", model.label_name},
          {"items", items},
          {"noise_sigma_hat", model.noise_sigma_hat}};
}

AnalystModel ModelFromJson(const Json& json) {
  AnalystModel model = Guard("model", [&] {
    AnalystModel m;
    m.d = json.at("d").get<int>();
    m.label_name = json.value("label_name", std::string());
    m.noise_sigma_hat = json.at("noise_sigma_hat").get<double>();
    std::vector<ExtendedItemProfile> profiles;
    for (const auto& item : json.at("items")) {
      profiles.push_back({item.at("id").get<ItemId>(),
                          item.at("bias").get<double>(),
                          VectorFromJson(item.at("latent"))});
      m.rating_probs.push_back({item.at("p_plus").get<double>(),
                                item.at("p_minus").get<double>()});
    }
    m.catalog = Catalog(std::move(profiles));
    return m;
  });
  ValidateModel(model);
  return model;
}

Json TruthToJson(const SyntheticGroundTruth& truth) {
  Json items = Json::array();
  for (std::size_t j = 0; j < truth.items.size(); ++j) {
    const auto& item = truth.items[j];
    items.push_back({{"id", j},
                     {"bias", item.bias},
                     {"latent", VectorToJson(item.latent)},
                     {"p_plus", item.p_plus},
                     {"p_minus", item.p_minus}});
  }
  Json users = Json::array();
  for (std::size_t i = 0; i < truth.users.size(); ++i) {
    users.push_back({{"id", i},
                     {"x0", LabelsToJson(truth.users[i].label)},
                     {"latent", VectorToJson(truth.users[i].latent)}});
  }
  return {{"noise_sigma", truth.noise_sigma},
          {"items", items},
          {"users", users}};
}

SyntheticGroundTruth TruthFromJson(const Json& json) {
  return Guard("ground truth", [&] {
    SyntheticGroundTruth truth;
    truth.noise_sigma = json.at("noise_sigma").get<double>();
    for (const auto& item : json.at("items")) {
      truth.items.push_back({item.at("bias").get<double>(),
                             VectorFromJson(item.at("latent")),
                             item.at("p_plus").get<double>(),
                             item.at("p_minus").get<double>()});
    }
    for (const auto& user : json.at("users")) {
      auto label = LabelFromInt(user.at("x0").get<long>());
      if (!label) throw DataError("ground-truth x0 must be -1 or 1");
      truth.users.push_back({*label, VectorFromJson(user.at("latent"))});
    }
    return truth;
  });
}

Json DisclosureToJson(const Disclosure& disclosure) {
  Json items = Json::array();
  for (const auto& item : disclosure.items) {
    Json entry = {{"id", item.id}, {"bias", item.bias}};
    if (item.ratio) {
      if (std::isinf(*item.ratio)) {
        entry["ratio"] = "inf";
      } else {
        entry["ratio"] = *item.ratio;
      }
    }
    items.push_back(std::move(entry));
  }
  return {{"items", items}};
}

Disclosure DisclosureFromJson(const Json& json) {
  return Guard("disclosure", [&] {
    Disclosure out;
    for (const auto& item : json.at("items")) {
      DisclosedItem d{item.at("id").get<ItemId>(), item.at("bias").get<double>(),
                      std::nullopt};
      if (item.contains("ratio")) {
        const Json& r = item.at("ratio");
        if (r.is_string()) {
          if (r.get<std::string>() != "inf") {
            throw DataError("ratio must be a number or \"inf\"");
          }
          d.ratio = kInfiniteRatio;
        } else {
          d.ratio = r.get<double>();
        }
        if (!(*d.ratio >= 0)) throw DataError("ratio must be nonnegative");
      }
      out.items.push_back(d);
    }
    return out;
  });
}

Json FeedbackToJson(const ObfuscatedFeedback& feedback) {
  return {{"revealed", feedback.revealed}, {"values", feedback.values}};
}

ObfuscatedFeedback FeedbackFromJson(const Json& json) {
  return Guard("feedback", [&] {
    ObfuscatedFeedback out;
    out.revealed = json.at("revealed").get<std::vector<ItemId>>();
    out.values = json.at("values").get<std::vector<double>>();
    if (out.revealed.size() != out.values.size()) {
      throw DataError("feedback revealed/values lengths differ");
    }
    return out;
  });
}

Json EstimateToJson(const ProfileEstimate& estimate) {
  return {{"x_hat", VectorToJson(estimate.x_hat)},
          {"expected_loss", estimate.expected_loss},
          {"n_points", estimate.n_points}};
}

ProfileEstimate EstimateFromJson(const Json& json) {
  return Guard("estimate", [&] {
    ProfileEstimate out;
    out.x_hat = VectorFromJson(json.at("x_hat"));
    out.expected_loss = json.value("expected_loss", 0.0);
    out.n_points = json.value("n_points", std::size_t{0});
    return out;
  });
}

Json LogisticToJson(const LogisticModel& model) {
  return {{"weights", VectorToJson(model.weights)},
          {"intercept", model.intercept}};
}

Json NaiveBayesToJson(const NaiveBayesModel& model) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      rows.push_back(VectorToJson(m.row(i).transpose()));
    }
    return rows;
  };
  return {{"min_level", model.min_level},
          {"max_level", model.max_level},
          {"log_prior_ratio", model.log_prior_ratio},
          {"log_prob_plus", matrix(model.log_prob_plus)},
          {"log_prob_minus", matrix(model.log_prob_minus)}};
}

Json ReportToJson(const Report& report) {
  Json auc = Json::array();
  for (const auto& c : report.auc) {
    auc.push_back({{"fold", c.fold},
                   {"scheme", c.scheme},
                   {"attacker", c.attacker},
                   {"auc", c.auc}});
  }
  Json rmse = Json::array();
  for (const auto& c : report.rmse) {
    Json row = {{"fold", c.fold}, {"scheme", c.scheme}, {"rmse", c.rmse}};
    if (c.drop_ratio) row["drop_ratio"] = *c.drop_ratio;
    rmse.push_back(std::move(row));
  }
  Json summary = Json::array();
  for (const auto& [scheme, value] : report.mean_rmse) {
    Json row = {{"scheme", scheme}, {"rmse", value}};
    Json attackers = Json::object();
    for (const auto& [key, auc_value] : report.mean_auc) {
      if (key.first == scheme) attackers[key.second] = auc_value;
    }
    row["auc"] = attackers;
    if (auto it = report.mean_drop_ratio.find(scheme);
        it != report.mean_drop_ratio.end()) {
      row["drop_ratio"] = it->second;
    }
    summary.push_back(std::move(row));
  }
  return {{"auc", auc}, {"rmse", rmse}, {"summary", summary}};
}

void WriteReportCsv(std::ostream& out, const Report& report) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "fold,scheme,attacker,auc,rmse\n";
  for (const auto& c : report.auc) {
    double rmse = 0.0;
    for (const auto& r : report.rmse) {
      if (r.fold == c.fold && r.scheme == c.scheme) rmse = r.rmse;
    }
    out << c.fold << ',' << c.scheme << ',' << c.attacker << ',' << c.auc
        << ',' << rmse << '\n';
  }
  for (const auto& [key, auc] : report.mean_auc) {
    out << "mean," << key.first << ',' << key.second << ',' << auc << ','
        << report.mean_rmse.at(key.first) << '\n';
  }
}

void WriteCurveCsv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "alpha,auc_lse,rmse\n";
  for (const auto& p : curve) {
    out << p.alpha << ',' << p.auc_lse << ',' << p.rmse << '\n';
  }
}

Json DropStatsToJson(const DropRatioStats& stats) {
  return {{"n_users", stats.ratios.size()}, {"mean", stats.mean},
          {"q10", stats.q10},               {"q25", stats.q25},
          {"median", stats.median},         {"q75", stats.q75},
          {"q90", stats.q90},               {"ratios", stats.ratios}};
}

SyntheticConfig SyntheticConfigFromJson(const Json& json) {
  return Guard("synthetic config", [&] {
    SyntheticConfig c;
    MaybeGet(json, "n_users", c.n_users);
    MaybeGet(json, "n_items", c.n_items);
    MaybeGet(json, "d", c.d);
    MaybeGet(json, "noise_sigma", c.noise_sigma);
    MaybeGet(json, "bias_scale", c.bias_scale);
    if (json.contains("prob_model")) {
      c.prob_model = ProbModelFromJson(json.at("prob_model"));
    }
    return c;
  });
}

Json SyntheticConfigToJson(const SyntheticConfig& c) {
  return {{"n_users", c.n_users},         {"n_items", c.n_items},
          {"d", c.d},                     {"noise_sigma", c.noise_sigma},
          {"bias_scale", c.bias_scale},   {"prob_model", ProbModelToJson(c.prob_model)}};
}

MfHyperparams MfHyperparamsFromJson(const Json& json, MfHyperparams hp) {
  return Guard("mf", [&] {
    MaybeGet(json, "d", hp.d);
    MaybeGet(json, "learning_rate", hp.learning_rate);
    MaybeGet(json, "regularization", hp.regularization);
    MaybeGet(json, "epochs", hp.epochs);
    MaybeGet(json, "seed", hp.seed);
    MaybeGet(json, "init_scale", hp.init_scale);
    MaybeGet(json, "joint_biases", hp.joint_biases);
    return hp;
  });
}

ExperimentConfig ExperimentConfigFromJson(const Json& json) {
  return Guard("experiment config", [&] {
    ExperimentConfig c;
    MaybeGet(json, "folds", c.folds);
    MaybeGet(json, "split_fraction", c.split_fraction);
    MaybeGet(json, "ridge", c.ridge);
    MaybeGet(json, "seed", c.seed);
    MaybeGet(json, "jobs", c.jobs);
    if (json.contains("schemes")) {
      for (const auto& s : json.at("schemes")) c.schemes.push_back(SchemeFromJson(s));
    } else {
      for (const char* name : {"NO", "MP", "MPr", "IA", "FA", "SS", "MPSS",
                               "MPSSr", "SS_IA", "SS_FA"}) {
        c.schemes.push_back({*ParseSchemeKind(name)});
      }
    }
    if (json.contains("attackers")) {
      for (const auto& a : json.at("attackers")) {
        auto attacker = ParseAttacker(a.get<std::string>());
        if (!attacker) {
          throw DataError("unknown attacker '" + a.get<std::string>() + "'");
        }
        c.attackers.push_back(*attacker);
      }
    } else {
      c.attackers = {Attacker::kLse, Attacker::kLr, Attacker::kNb};
    }
    if (json.contains("mf")) c.mf = MfHyperparamsFromJson(json.at("mf"));
    if (json.contains("logistic")) {
      const Json& lr = json.at("logistic");
      MaybeGet(lr, "l2", c.logistic.l2);
      MaybeGet(lr, "epochs", c.logistic.epochs);
      MaybeGet(lr, "learning_rate", c.logistic.learning_rate);
      MaybeGet(lr, "batch_size", c.logistic.batch_size);
    }
    if (json.contains("naive_bayes")) {
      const Json& nb = json.at("naive_bayes");
      MaybeGet(nb, "alpha", c.naive_bayes.alpha);
      MaybeGet(nb, "min_level", c.naive_bayes.min_level);
      MaybeGet(nb, "max_level", c.naive_bayes.max_level);
    }
    if (json.contains("x0_policy")) {
      const std::string policy = json.at("x0_policy").get<std::string>();
      if (policy == "midpoint") {
        c.x0_policy = PrivateCoordinatePolicy::kMidpoint;
      } else if (policy == "inferred") {
        c.x0_policy = PrivateCoordinatePolicy::kInferred;
      } else {
        throw DataError("x0_policy must be 'midpoint' or 'inferred'");
      }
    }
    return c;
  });
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return Guard("file", [&] { return Json::parse(in); });
}

void WriteJsonFile(const std::string& path, const Json& json) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << json.dump(2) << '\n';
  if (!out) throw DataError("error while writing " + path);
}

}  // namespace privmf
