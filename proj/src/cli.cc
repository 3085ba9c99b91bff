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

#include "privmf/cli.h"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "privmf/dataset.h"
#include "privmf/evaluation.h"
#include "privmf/factorization.h"
#include "privmf/inference.h"
#include "privmf/protocol.h"
#include "privmf/rng.h"
#include "privmf/selection.h"
#include "privmf/serialization.h"
#include "privmf/wire.h"

namespace privmf {
namespace {

namespace fs = std::filesystem;

void RequireReadable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
}

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream OpenOutput(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

template <typename Fn>
auto WithPath(const std::string& path, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

ProtocolKind ParseProtocol(const std::string& name) {
  if (name == "mp" || name == "MP") return ProtocolKind::kMp;
  if (name == "mpss" || name == "MPSS") return ProtocolKind::kMpss;
  throw DataError("unknown protocol '" + name + "'");
}

// Where ratings and labels come from; shared by most subcommands.
struct DataOptions {
  std::string ratings;
  std::string labels;
  std::string users_dat;
  std::string format = "dcolon";
  std::vector<double> range;
  std::size_t min_user_ratings = 0;
  std::size_t min_item_ratings = 0;
};

void AddDataOptions(CLI::App* cmd, DataOptions& o, const std::string& prefix,
                    bool ratings_required) {
  auto* r = cmd->add_option("--" + prefix + "ratings", o.ratings,
                            "Ratings file (user::item::rating[::ts] or CSV)");
  if (ratings_required) r->required();
  cmd->add_option("--" + prefix + "labels", o.labels,
                  "Labels CSV with user_id,label where label is -1 or 1");
  cmd->add_option("--" + prefix + "users-dat", o.users_dat,
                  "MovieLens users.dat; gender becomes the label (M=1, F=-1)");
  if (prefix.empty()) {
    cmd->add_option("--format", o.format, "Ratings format")
        ->check(CLI::IsMember({"dcolon", "csv"}));
    cmd->add_option("--rating-range", o.range,
                    "Accepted rating range as two numbers (default: any)")
        ->expected(2);
    cmd->add_option("--min-user-ratings", o.min_user_ratings,
                    "Drop users with fewer ratings");
    cmd->add_option("--min-item-ratings", o.min_item_ratings,
                    "Drop items with fewer ratings");
  }
}

RatingsDataset LoadDataset(const DataOptions& o) {
  RequireReadable(o.ratings);
  if (!o.labels.empty()) RequireReadable(o.labels);
  if (!o.users_dat.empty()) RequireReadable(o.users_dat);
  ParseOptions parse;
  parse.format = o.format == "csv" ? RatingFormat::kCsv : RatingFormat::kDoubleColon;
  parse.range = std::nullopt;
  if (o.range.size() == 2) parse.range = std::make_pair(o.range[0], o.range[1]);
  RatingsDataset dataset = WithPath(o.ratings, [&] {
    auto in = OpenInput(o.ratings);
    return ParseRatings(in, parse);
  });
  if (!o.labels.empty()) {
    auto labels = WithPath(o.labels, [&] {
      auto in = OpenInput(o.labels);
      return ParseLabels(in);
    });
    dataset = dataset.WithLabels(labels, std::string("x0"));
  } else if (!o.users_dat.empty()) {
    auto labels = WithPath(o.users_dat, [&] {
      auto in = OpenInput(o.users_dat);
      return ParseMovieLensGender(in);
    });
    dataset = dataset.WithLabels(labels, std::string("gender"));
  }
  if (o.min_user_ratings > 0 || o.min_item_ratings > 0) {
    dataset = FilterByActivity(dataset, o.min_user_ratings, o.min_item_ratings);
  }
  return dataset;
}

AnalystModel LoadModel(const std::string& path) {
  RequireReadable(path);
  return WithPath(path, [&] { return ModelFromJson(ReadJsonFile(path)); });
}

// Resolves a path from a config file relative to the file's directory.
std::string Resolve(const std::string& config_path, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(config_path).parent_path() / path).string();
}

// Loads the "data" section of an experiment config.
RatingsDataset LoadConfigData(const Json& config, const std::string& config_path,
                              std::uint64_t seed, const DataOptions& overrides) {
  if (!overrides.ratings.empty()) return LoadDataset(overrides);
  if (!config.contains("data")) {
    throw DataError(config_path + ": missing \"data\" section (or pass --ratings)");
  }
  const Json& data = config.at("data");
  if (data.contains("synthetic")) {
    SyntheticConfig synth = SyntheticConfigFromJson(data.at("synthetic"));
    std::uint64_t synth_seed = data.value("seed", DeriveSeed(seed, {Tag(SeedTag::kSynth)}));
    return GenerateSynthetic(synth, synth_seed).dataset;
  }
  DataOptions o;
  try {
    o.ratings = Resolve(config_path, data.at("ratings").get<std::string>());
    o.labels = Resolve(config_path, data.value("labels", std::string()));
    o.users_dat = Resolve(config_path, data.value("users_dat", std::string()));
    o.format = data.value("format", std::string("dcolon"));
    if (data.contains("range")) o.range = data.at("range").get<std::vector<double>>();
    o.min_user_ratings = data.value("min_user_ratings", std::size_t{0});
    o.min_item_ratings = data.value("min_item_ratings", std::size_t{0});
  } catch (const Json::exception& e) {
    throw DataError(config_path + ": invalid data section: " + e.what());
  }
  return LoadDataset(o);
}

Json LoadConfig(const std::string& path) {
  if (path.empty()) return Json::object();
  RequireReadable(path);
  return WithPath(path, [&] { return ReadJsonFile(path); });
}

std::string FormatDouble(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

void PrintReport(std::ostream& out, const Report& report) {
  for (const auto& [key, auc] : report.mean_auc) {
    out << "auc " << key.first << ' ' << key.second << ' ' << FormatDouble(auc)
        << '\n';
  }
  for (const auto& [scheme, rmse] : report.mean_rmse) {
    out << "rmse " << scheme << ' ' << FormatDouble(rmse) << '\n';
  }
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::optional<int> users, items, dim;
  std::optional<double> sigma, bias_scale;
};

int RunSynth(const SynthArgs& a, std::ostream& out) {
  Json json = LoadConfig(a.config);
  SyntheticConfig config = WithPath(a.config, [&] {
    return SyntheticConfigFromJson(json.contains("synthetic") ? json.at("synthetic") : json);
  });
  if (a.users) config.n_users = *a.users;
  if (a.items) config.n_items = *a.items;
  if (a.dim) config.d = *a.dim;
  if (a.sigma) config.noise_sigma = *a.sigma;
  if (a.bias_scale) config.bias_scale = *a.bias_scale;
  SyntheticData data = GenerateSynthetic(config, a.seed);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  {
    auto f = OpenOutput((dir / "ratings.dat").string());
    WriteRatings(f, data.dataset, RatingFormat::kDoubleColon);
  }
  {
    auto f = OpenOutput((dir / "labels.csv").string());
    WriteLabels(f, data.dataset);
  }
  WriteJsonFile((dir / "truth.json").string(), TruthToJson(data.truth));
  Json effective = SyntheticConfigToJson(config);
  effective["seed"] = a.seed;
  WriteJsonFile((dir / "config.json").string(), effective);
  out << "wrote " << data.dataset.ratings().size() << " ratings for "
      << data.dataset.users().size() << " users to " << a.out_dir << '\n';
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  DataOptions data;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> dim, epochs;
  std::optional<double> lr, reg;
  bool joint_biases = false;
};

int RunTrain(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  Json json = LoadConfig(a.config);
  MfHyperparams hp = WithPath(a.config, [&] {
    return MfHyperparamsFromJson(json.contains("mf") ? json.at("mf") : json);
  });
  if (a.seed) hp.seed = *a.seed;
  if (a.dim) hp.d = *a.dim;
  if (a.epochs) hp.epochs = *a.epochs;
  if (a.lr) hp.learning_rate = *a.lr;
  if (a.reg) hp.regularization = *a.reg;
  if (a.joint_biases) hp.joint_biases = true;
  RatingsDataset dataset = LoadDataset(a.data);
  if (dataset.LabeledUsers().empty()) {
    throw DataError("training needs labeled users (--labels or --users-dat)");
  }
  BiasEstimate biases = ComputeBiases(dataset);
  if (!biases.single_class_items.empty()) {
    err << "warning: " << biases.single_class_items.size()
        << " items rated by one class only; their bias is 0\n";
  }
  MfTrainResult result = TrainMf(dataset, biases.bias, hp);
  WriteJsonFile(a.out, ModelToJson(result.model));
  out << "trained d=" << hp.d << " on " << dataset.ratings().size()
      << " ratings; final loss " << FormatDouble(result.epoch_loss.back())
      << "; wrote " << a.out << '\n';
  return kExitOk;
}

// ---- select ---------------------------------------------------------------

struct SelectArgs {
  std::string model;
  std::string out;
  int budget = 10;
  std::string method = "greedy";
};

int RunSelect(const SelectArgs& a, std::ostream& out) {
  AnalystModel model = LoadModel(a.model);
  SelectionProblem problem = MakeSelectionProblem(model.catalog, a.budget);
  ValidateProblem(problem);
  std::vector<ItemId> picked = a.method == "brute" ? BruteForceSelect(problem)
                                                   : GreedySelect(problem);
  std::vector<ItemId> solicit = problem.seed_set;
  solicit.insert(solicit.end(), picked.begin(), picked.end());
  Json json = {{"seed_set", problem.seed_set},
               {"selected", picked},
               {"solicit", solicit},
               {"marginal_value", MarginalValue(problem, picked)}};
  WriteJsonFile(a.out, json);
  out << "selected " << picked.size() << " items (" << a.method << "); wrote "
      << a.out << '\n';
  return kExitOk;
}

// ---- obfuscate ------------------------------------------------------------

struct ObfuscateArgs {
  DataOptions data;
  std::string model;
  std::string out;
  std::string protocol = "mp";
  std::vector<int> round;
  std::uint64_t seed = 0;
};

std::vector<ItemRating> CatalogRatings(const RatingsDataset& dataset,
                                       std::size_t u, const Catalog& catalog) {
  std::vector<ItemRating> rated;
  for (const auto& r : dataset.UserItemRatings(u)) {
    if (catalog.Contains(r.item)) rated.push_back(r);
  }
  return rated;
}

int RunObfuscate(const ObfuscateArgs& a, std::ostream& out) {
  AnalystModel model = LoadModel(a.model);
  RatingsDataset dataset = LoadDataset(a.data);
  const ProtocolKind protocol = ParseProtocol(a.protocol);
  auto f = OpenOutput(a.out);
  std::size_t written = 0;
  for (std::size_t u = 0; u < dataset.users().size(); ++u) {
    const UserRecord& user = dataset.users()[u];
    if (!user.label) continue;
    auto rated = CatalogRatings(dataset, u, model.catalog);
    std::vector<ItemId> ids;
    std::vector<double> values;
    for (const auto& r : rated) {
      ids.push_back(r.item);
      values.push_back(r.value);
    }
    auto slice = model.catalog.Slice(ids);
    Rng rng = MakeRng(a.seed, {Tag(SeedTag::kScheme), static_cast<std::uint64_t>(user.id)});
    ObfuscatedFeedback feedback;
    if (protocol == ProtocolKind::kMp) {
      feedback = MpObfuscate(values, *user.label, MpDisclose(slice));
    } else {
      std::vector<RatingProbabilities> probs;
      for (ItemId id : ids) probs.push_back(model.ProbsOf(id));
      feedback = MpssObfuscate(rated, *user.label, MpssDisclose(slice, probs), rng);
    }
    if (a.round.size() == 2) {
      auto rounded = RoundRatings(feedback.values, a.round[0], a.round[1], rng);
      feedback.values.assign(rounded.begin(), rounded.end());
    }
    Json line = FeedbackToJson(feedback);
    line["user"] = user.id;
    f << line.dump() << '\n';
    ++written;
  }
  out << "obfuscated " << written << " users with " << a.protocol << "; wrote "
      << a.out << '\n';
  return kExitOk;
}

// ---- attack ---------------------------------------------------------------

struct AttackArgs {
  DataOptions data;
  DataOptions train;
  std::string model;
  std::string feedback;
  std::string out;
  std::string attacker = "lse";
  std::uint64_t seed = 0;
  int nb_min = 1;
  int nb_max = 5;
};

struct TargetUser {
  UserId id;
  std::vector<ItemRating> ratings;
};

std::vector<TargetUser> ReadFeedbackFile(const std::string& path) {
  RequireReadable(path);
  auto in = OpenInput(path);
  std::vector<TargetUser> users;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json json = Json::parse(line);
      ObfuscatedFeedback fb = FeedbackFromJson(json);
      TargetUser user{json.at("user").get<UserId>(), {}};
      for (std::size_t k = 0; k < fb.revealed.size(); ++k) {
        user.ratings.push_back({fb.revealed[k], fb.values[k]});
      }
      users.push_back(std::move(user));
    } catch (const std::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return users;
}

int RunAttack(const AttackArgs& a, std::ostream& out) {
  AnalystModel model = LoadModel(a.model);
  std::vector<TargetUser> targets;
  std::map<UserId, Label> labels;
  if (!a.feedback.empty()) {
    targets = ReadFeedbackFile(a.feedback);
    if (!a.data.labels.empty()) {
      RequireReadable(a.data.labels);
      labels = WithPath(a.data.labels, [&] {
        auto in = OpenInput(a.data.labels);
        return ParseLabels(in);
      });
    }
  } else if (!a.data.ratings.empty()) {
    RatingsDataset dataset = LoadDataset(a.data);
    labels = dataset.Labels();
    for (std::size_t u = 0; u < dataset.users().size(); ++u) {
      targets.push_back({dataset.users()[u].id,
                         CatalogRatings(dataset, u, model.catalog)});
    }
  } else {
    throw DataError("attack needs --feedback or --ratings");
  }

  std::optional<LogisticModel> lr;
  std::optional<NaiveBayesModel> nb;
  if (a.attacker != "lse") {
    if (a.train.ratings.empty()) {
      throw DataError("attacker '" + a.attacker + "' needs --train-ratings");
    }
    DataOptions train = a.train;
    train.format = a.data.format;
    RatingsDataset dataset = LoadDataset(train);
    std::vector<AttackInput> inputs;
    std::vector<Label> train_labels;
    for (std::size_t u = 0; u < dataset.users().size(); ++u) {
      if (!dataset.users()[u].label) continue;
      auto input = MakeAttackInput(dataset.UserItemRatings(u), model.catalog);
      if (a.attacker == "nb") input = DiscretizeInput(input, a.nb_min, a.nb_max);
      inputs.push_back(std::move(input));
      train_labels.push_back(*dataset.users()[u].label);
    }
    if (inputs.empty()) throw DataError("training data has no labeled users");
    if (a.attacker == "lr") {
      LogisticOptions options;
      options.seed = DeriveSeed(a.seed, {Tag(SeedTag::kAttack)});
      lr = LogisticTrain(inputs, train_labels, options);
    } else {
      nb = NaiveBayesTrain(inputs, train_labels,
                           NaiveBayesOptions{1.0, a.nb_min, a.nb_max});
    }
  }

  auto f = OpenOutput(a.out);
  f << "user,score,predicted\n";
  std::vector<double> scores;
  std::vector<Label> truth;
  for (const auto& t : targets) {
    double score = 0.0;
    if (lr) {
      score = LogisticScore(*lr, MakeAttackInput(t.ratings, model.catalog));
    } else if (nb) {
      score = NaiveBayesScore(
          *nb, DiscretizeInput(MakeAttackInput(t.ratings, model.catalog),
                               a.nb_min, a.nb_max));
    } else if (!t.ratings.empty()) {
      score = LseAttack(t.ratings, model.catalog).score;
    }
    f << t.id << ',' << score << ',' << (score >= 0 ? 1 : -1) << '\n';
    if (auto it = labels.find(t.id); it != labels.end()) {
      scores.push_back(score);
      truth.push_back(it->second);
    }
  }
  out << "scored " << targets.size() << " users with " << a.attacker;
  if (!scores.empty()) out << "; auc " << FormatDouble(Auc(scores, truth));
  out << "; wrote " << a.out << '\n';
  return kExitOk;
}

// ---- evaluate / sweep -----------------------------------------------------

struct EvaluateArgs {
  DataOptions data;
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs, folds;
};

ExperimentConfig LoadExperiment(const EvaluateArgs& a, Json& json) {
  json = LoadConfig(a.config);
  ExperimentConfig config =
      WithPath(a.config, [&] { return ExperimentConfigFromJson(json); });
  if (a.seed) config.seed = *a.seed;
  if (a.jobs) config.jobs = *a.jobs;
  if (a.folds) config.folds = *a.folds;
  return config;
}

int RunEvaluate(const EvaluateArgs& a, std::ostream& out) {
  Json json;
  ExperimentConfig config = LoadExperiment(a, json);
  RatingsDataset dataset = LoadConfigData(json, a.config, config.seed, a.data);
  Report report = RunExperiment(dataset, config);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  WriteJsonFile((dir / "report.json").string(), ReportToJson(report));
  {
    auto f = OpenOutput((dir / "report.csv").string());
    WriteReportCsv(f, report);
  }
  PrintReport(out, report);
  out << "wrote " << (dir / "report.json").string() << " and "
      << (dir / "report.csv").string() << '\n';
  return kExitOk;
}

struct SweepArgs {
  EvaluateArgs base;
  std::string scheme;
  std::vector<double> alphas;
  std::string out;
};

int RunSweep(const SweepArgs& a, std::ostream& out) {
  Json json;
  ExperimentConfig config = LoadExperiment(a.base, json);
  std::string scheme = a.scheme;
  std::vector<double> alphas = a.alphas;
  if (json.contains("sweep")) {
    const Json& sweep = json.at("sweep");
    try {
      if (scheme.empty()) scheme = sweep.value("scheme", std::string());
      if (alphas.empty() && sweep.contains("alphas")) {
        alphas = sweep.at("alphas").get<std::vector<double>>();
      }
    } catch (const Json::exception& e) {
      throw DataError(a.base.config + ": invalid sweep section: " + e.what());
    }
  }
  if (scheme.empty()) scheme = "MP";
  if (alphas.empty()) alphas = {0.0, 0.25, 0.5, 0.75, 1.0};
  auto kind = ParseSchemeKind(scheme);
  if (!kind) throw DataError("unknown scheme '" + scheme + "'");
  RatingsDataset dataset =
      LoadConfigData(json, a.base.config, config.seed, a.base.data);
  auto curve = TradeoffSweep(dataset, *kind, alphas, config);
  auto f = OpenOutput(a.out);
  WriteCurveCsv(f, curve);
  for (const auto& p : curve) {
    out << "alpha " << FormatDouble(p.alpha) << " auc_lse "
        << FormatDouble(p.auc_lse) << " rmse " << FormatDouble(p.rmse) << '\n';
  }
  out << "wrote " << a.out << '\n';
  return kExitOk;
}

// ---- serve / agent --------------------------------------------------------

AnalystServer* g_server = nullptr;

extern "C" void StopServer(int) {
  if (g_server != nullptr) g_server->Shutdown();
}

struct ServeArgs {
  std::string model;
  std::string host = "127.0.0.1";
  int port = 0;
  std::string protocol = "mp";
  int budget = 10;
  double ridge = kDefaultRidge;
  std::string port_file;
  std::uint64_t max_sessions = 0;
};

int RunServe(const ServeArgs& a, std::ostream& out) {
  AnalystModel model = LoadModel(a.model);
  AnalystConfig config{ParseProtocol(a.protocol), a.budget, a.ridge};
  AnalystServer server(AnalystService(std::move(model), config));
  const int port = server.Listen(a.host, a.port);
  if (!a.port_file.empty()) {
    const std::string tmp = a.port_file + ".tmp";
    {
      auto f = OpenOutput(tmp);
      f << port << '\n';
    }
    fs::rename(tmp, a.port_file);
  }
  out << "listening on " << a.host << ':' << port << " ("
      << server.service().solicited().size() << " items solicited)"
      << std::endl;
  g_server = &server;
  auto old_int = std::signal(SIGINT, StopServer);
  auto old_term = std::signal(SIGTERM, StopServer);
  server.Serve(a.max_sessions);
  std::signal(SIGINT, old_int);
  std::signal(SIGTERM, old_term);
  g_server = nullptr;
  return kExitOk;
}

struct AgentArgs {
  DataOptions data;
  std::string host = "127.0.0.1";
  int port = 0;
  std::string protocol = "mp";
  std::optional<UserId> user;
  std::optional<int> x0;
  std::uint64_t seed = 0;
  std::string out;
};

int RunAgent(const AgentArgs& a, std::ostream& out) {
  RatingsDataset dataset = LoadDataset(a.data);
  std::size_t u = 0;
  if (a.user) {
    auto found = dataset.FindUser(*a.user);
    if (!found) throw DataError("user " + std::to_string(*a.user) + " not found in " + a.data.ratings);
    u = *found;
  } else if (dataset.users().size() != 1) {
    throw DataError("ratings file has several users; pass --user");
  }
  const UserRecord& record = dataset.users()[u];
  std::optional<Label> x0 = record.label;
  if (a.x0) x0 = LabelFromInt(*a.x0);
  if (!x0) throw DataError("private label unknown; pass --x0 or --labels");
  UserAgent agent(dataset.UserItemRatings(u), *x0, ParseProtocol(a.protocol));
  AgentResult result = UserAgentRun(agent, a.host, a.port,
                                    DeriveSeed(a.seed, {static_cast<std::uint64_t>(record.id)}));
  Json json = {{"user", record.id},
               {"x_hat", std::vector<double>(result.x_hat.data(),
                                             result.x_hat.data() + result.x_hat.size())},
               {"revealed", result.sent.revealed}};
  if (a.out.empty()) {
    out << json.dump() << '\n';
  } else {
    WriteJsonFile(a.out, json);
    out << "received estimate from " << a.host << ':' << a.port << "; wrote "
        << a.out << '\n';
  }
  return kExitOk;
}

// ---- drop-stats -----------------------------------------------------------

struct DropArgs {
  DataOptions data;
  std::string model;
  std::string out;
  std::uint64_t seed = 0;
};

int RunDropStats(const DropArgs& a, std::ostream& out) {
  AnalystModel model = LoadModel(a.model);
  RatingsDataset dataset = LoadDataset(a.data);
  Rng rng = MakeRng(a.seed, {Tag(SeedTag::kScheme)});
  DropRatioStats stats = DropRatioStatistics(dataset, model, rng);
  WriteJsonFile(a.out, DropStatsToJson(stats));
  out << "drop ratio mean " << FormatDouble(stats.mean) << " median "
      << FormatDouble(stats.median) << " over " << stats.ratios.size()
      << " users; wrote " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Privacy-preserving rating collection with the midpoint protocol"};
  app.name("privmf");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic population with ground truth");
  c_synth->add_option("--config", synth.config, "Synthetic config JSON");
  c_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  c_synth->add_option("--seed", synth.seed, "Master seed");
  c_synth->add_option("--users", synth.users, "Number of users");
  c_synth->add_option("--items", synth.items, "Number of items");
  c_synth->add_option("--dim", synth.dim, "Latent dimension");
  c_synth->add_option("--sigma", synth.sigma, "Rating noise standard deviation");
  c_synth->add_option("--bias-scale", synth.bias_scale, "Scale of item biases");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Fit item biases and profiles on non-private users");
  AddDataOptions(c_train, train.data, "", true);
  c_train->add_option("--config", train.config, "MF hyperparameter JSON");
  c_train->add_option("--out", train.out, "Model JSON output")->required();
  c_train->add_option("--seed", train.seed, "Training seed");
  c_train->add_option("--dim", train.dim, "Latent dimension");
  c_train->add_option("--epochs", train.epochs, "SGD epochs");
  c_train->add_option("--lr", train.lr, "SGD learning rate");
  c_train->add_option("--reg", train.reg, "L2 regularization");
  c_train->add_flag("--joint-biases", train.joint_biases, "Refine biases during SGD");

  SelectArgs select;
  auto* c_select = app.add_subcommand("select", "Pick items to solicit (A-optimal design)");
  c_select->add_option("--model", select.model, "Model JSON")->required();
  c_select->add_option("--budget", select.budget, "Items beyond the seed basis");
  c_select->add_option("--method", select.method, "greedy or brute")
      ->check(CLI::IsMember({"greedy", "brute"}));
  c_select->add_option("--out", select.out, "Selection JSON output")->required();

  ObfuscateArgs obf;
  auto* c_obf = app.add_subcommand("obfuscate", "Apply MP or MPSS to every labeled user");
  AddDataOptions(c_obf, obf.data, "", true);
  c_obf->add_option("--model", obf.model, "Model JSON")->required();
  c_obf->add_option("--protocol", obf.protocol, "mp or mpss")
      ->check(CLI::IsMember({"mp", "mpss"}));
  c_obf->add_option("--round", obf.round, "Round outputs into [lo, hi]")->expected(2);
  c_obf->add_option("--seed", obf.seed, "Master seed");
  c_obf->add_option("--out", obf.out, "Feedback JSON-lines output")->required();

  AttackArgs attack;
  auto* c_attack = app.add_subcommand("attack", "Score users with an inference attack");
  AddDataOptions(c_attack, attack.data, "", false);
  AddDataOptions(c_attack, attack.train, "train-", false);
  c_attack->add_option("--model", attack.model, "Model JSON")->required();
  c_attack->add_option("--feedback", attack.feedback, "Feedback JSON lines from obfuscate");
  c_attack->add_option("--attacker", attack.attacker, "lse, lr or nb")
      ->check(CLI::IsMember({"lse", "lr", "nb"}));
  c_attack->add_option("--seed", attack.seed, "Master seed");
  c_attack->add_option("--nb-min-level", attack.nb_min, "Lowest naive Bayes level");
  c_attack->add_option("--nb-max-level", attack.nb_max, "Highest naive Bayes level");
  c_attack->add_option("--out", attack.out, "Scores CSV output")->required();

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Cross-validated privacy/accuracy evaluation");
  AddDataOptions(c_eval, eval.data, "", false);
  c_eval->add_option("--config", eval.config, "Experiment config JSON")->required();
  c_eval->add_option("--out-dir", eval.out_dir, "Report directory")->required();
  c_eval->add_option("--seed", eval.seed, "Master seed (overrides config)");
  c_eval->add_option("--jobs", eval.jobs, "Maximum parallel folds");
  c_eval->add_option("--folds", eval.folds, "Number of folds");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Privacy/accuracy tradeoff over the mixing weight");
  AddDataOptions(c_sweep, sweep.base.data, "", false);
  c_sweep->add_option("--config", sweep.base.config, "Experiment config JSON")->required();
  c_sweep->add_option("--seed", sweep.base.seed, "Master seed (overrides config)");
  c_sweep->add_option("--jobs", sweep.base.jobs, "Maximum parallel folds");
  c_sweep->add_option("--folds", sweep.base.folds, "Number of folds");
  c_sweep->add_option("--scheme", sweep.scheme, "Scheme to mix with raw ratings");
  c_sweep->add_option("--alphas", sweep.alphas, "Mixing weights")->delimiter(',');
  c_sweep->add_option("--out", sweep.out, "Curve CSV output")->required();

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Run the analyst over TCP");
  c_serve->add_option("--model", serve.model, "Model JSON")->required();
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--port", serve.port, "Port (0 picks a free one)");
  c_serve->add_option("--protocol", serve.protocol, "mp or mpss")
      ->check(CLI::IsMember({"mp", "mpss"}));
  c_serve->add_option("--budget", serve.budget, "Items beyond the seed basis (negative: all)");
  c_serve->add_option("--ridge", serve.ridge, "Ridge added to the normal equations");
  c_serve->add_option("--port-file", serve.port_file, "Write the bound port here");
  c_serve->add_option("--max-sessions", serve.max_sessions, "Exit after this many sessions");

  AgentArgs agent;
  auto* c_agent = app.add_subcommand("agent", "Run one user session against an analyst");
  AddDataOptions(c_agent, agent.data, "", true);
  c_agent->add_option("--host", agent.host, "Analyst address");
  c_agent->add_option("--port", agent.port, "Analyst port")->required();
  c_agent->add_option("--protocol", agent.protocol, "mp or mpss")
      ->check(CLI::IsMember({"mp", "mpss"}));
  c_agent->add_option("--user", agent.user, "User id within the ratings file");
  c_agent->add_option("--x0", agent.x0, "Private label (-1 or 1)")
      ->check(CLI::IsMember({-1, 1}));
  c_agent->add_option("--seed", agent.seed, "Master seed");
  c_agent->add_option("--out", agent.out, "Estimate JSON output (default: stdout)");

  DropArgs drop;
  auto* c_drop = app.add_subcommand("drop-stats", "Fraction of ratings MPSS withholds per user");
  AddDataOptions(c_drop, drop.data, "", true);
  c_drop->add_option("--model", drop.model, "Model JSON")->required();
  c_drop->add_option("--seed", drop.seed, "Master seed");
  c_drop->add_option("--out", drop.out, "Statistics JSON output")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_synth->parsed()) return RunSynth(synth, out);
    if (c_train->parsed()) return RunTrain(train, out, err);
    if (c_select->parsed()) return RunSelect(select, out);
    if (c_obf->parsed()) return RunObfuscate(obf, out);
    if (c_attack->parsed()) return RunAttack(attack, out);
    if (c_eval->parsed()) return RunEvaluate(eval, out);
    if (c_sweep->parsed()) return RunSweep(sweep, out);
    if (c_serve->parsed()) return RunServe(serve, out);
    if (c_agent->parsed()) return RunAgent(agent, out);
    if (c_drop->parsed()) return RunDropStats(drop, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace privmf
