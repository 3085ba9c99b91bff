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

#include "privmf/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "privmf/rng.h"

namespace privmf {
namespace {

constexpr std::size_t kMaxReportedErrors = 20;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' ||
                        s.back() == '\t' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  return s;
}

std::vector<std::string_view> Split(std::string_view line,
                                    std::string_view delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(Trim(line.substr(start)));
      return fields;
    }
    fields.push_back(Trim(line.substr(start, pos - start)));
    start = pos + delim.size();
  }
}

template <typename T>
bool ParseNumber(std::string_view text, T& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

class ErrorList {
 public:
  void Add(std::size_t line, const std::string& what) {
    ++count_;
    if (messages_.size() < kMaxReportedErrors) {
      messages_.push_back("line " + std::to_string(line) + ": " + what);
    }
  }
  void ThrowIfAny(const std::string& context) const {
    if (count_ == 0) return;
    std::ostringstream msg;
    msg << context << ": " << count_ << " error(s)";
    for (const auto& m : messages_) msg << "\n  " << m;
    if (count_ > messages_.size()) {
      msg << "\n  ... " << (count_ - messages_.size()) << " more";
    }
    throw DataError(msg.str());
  }

 private:
  std::size_t count_ = 0;
  std::vector<std::string> messages_;
};

}  // namespace

RatingsDataset RatingsDataset::Create(std::vector<Rating> ratings,
                                      const std::map<UserId, Label>& labels,
                                      std::optional<std::string> label_name) {
  std::sort(ratings.begin(), ratings.end(),
            [](const Rating& a, const Rating& b) {
              return std::tie(a.user, a.item) < std::tie(b.user, b.item);
            });
  for (std::size_t i = 1; i < ratings.size(); ++i) {
    if (ratings[i].user == ratings[i - 1].user &&
        ratings[i].item == ratings[i - 1].item) {
      throw DataError("duplicate rating for user " +
                      std::to_string(ratings[i].user) + ", item " +
                      std::to_string(ratings[i].item));
    }
  }
  for (const Rating& r : ratings) {
    if (!std::isfinite(r.value)) {
      throw DataError("non-finite rating for user " + std::to_string(r.user));
    }
  }

  RatingsDataset ds;
  ds.label_name_ = std::move(label_name);
  std::set<UserId> user_ids;
  std::set<ItemId> item_ids;
  for (const Rating& r : ratings) {
    user_ids.insert(r.user);
    item_ids.insert(r.item);
  }
  for (const auto& [id, label] : labels) user_ids.insert(id);
  ds.items_.assign(item_ids.begin(), item_ids.end());

  std::size_t pos = 0;
  ds.user_offsets_.reserve(user_ids.size() + 1);
  for (UserId id : user_ids) {
    UserRecord record;
    record.id = id;
    if (auto it = labels.find(id); it != labels.end()) record.label = it->second;
    ds.user_offsets_.push_back(pos);
    while (pos < ratings.size() && ratings[pos].user == id) {
      record.rated_items.push_back(ratings[pos].item);
      ++pos;
    }
    ds.users_.push_back(std::move(record));
  }
  ds.user_offsets_.push_back(pos);
  ds.ratings_ = std::move(ratings);
  return ds;
}

std::span<const Rating> RatingsDataset::UserRatings(
    std::size_t user_index) const {
  return std::span<const Rating>(ratings_).subspan(
      user_offsets_[user_index],
      user_offsets_[user_index + 1] - user_offsets_[user_index]);
}

std::vector<ItemRating> RatingsDataset::UserItemRatings(
    std::size_t user_index) const {
  std::vector<ItemRating> out;
  for (const Rating& r : UserRatings(user_index)) {
    out.push_back({r.item, r.value});
  }
  return out;
}

std::optional<std::size_t> RatingsDataset::FindUser(UserId id) const {
  auto it = std::lower_bound(
      users_.begin(), users_.end(), id,
      [](const UserRecord& u, UserId value) { return u.id < value; });
  if (it == users_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - users_.begin());
}

std::vector<UserId> RatingsDataset::LabeledUsers() const {
  std::vector<UserId> out;
  for (const UserRecord& u : users_) {
    if (u.label) out.push_back(u.id);
  }
  return out;
}

std::map<UserId, Label> RatingsDataset::Labels() const {
  std::map<UserId, Label> out;
  for (const UserRecord& u : users_) {
    if (u.label) out.emplace(u.id, *u.label);
  }
  return out;
}

RatingsDataset RatingsDataset::SubsetUsers(
    std::span<const UserId> user_ids) const {
  std::vector<Rating> ratings;
  std::map<UserId, Label> labels;
  for (UserId id : user_ids) {
    auto index = FindUser(id);
    if (!index) throw DataError("unknown user " + std::to_string(id));
    auto user_ratings = UserRatings(*index);
    ratings.insert(ratings.end(), user_ratings.begin(), user_ratings.end());
    if (users_[*index].label) labels.emplace(id, *users_[*index].label);
  }
  return Create(std::move(ratings), labels, label_name_);
}

RatingsDataset RatingsDataset::WithLabels(
    const std::map<UserId, Label>& labels,
    std::optional<std::string> label_name) const {
  return Create(ratings_, labels, std::move(label_name));
}

bool operator==(const RatingsDataset& a, const RatingsDataset& b) {
  if (a.ratings_ != b.ratings_ || a.items_ != b.items_ ||
      a.label_name_ != b.label_name_ || a.users_.size() != b.users_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.users_.size(); ++i) {
    if (a.users_[i].id != b.users_[i].id ||
        a.users_[i].label != b.users_[i].label ||
        a.users_[i].rated_items != b.users_[i].rated_items) {
      return false;
    }
  }
  return true;
}

RatingsDataset ParseRatings(std::istream& in, const ParseOptions& options) {
  if (!in) throw DataError("rating stream is not readable");
  std::vector<Rating> ratings;
  std::map<std::pair<UserId, ItemId>, std::size_t> first_line;
  ErrorList errors;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    if (options.format == RatingFormat::kDoubleColon) {
      fields = Split(line, "::");
      // MovieLens files carry a trailing timestamp.
      if (fields.size() == 4) fields.pop_back();
    } else {
      fields = Split(line, ",");
      if (line_no == 1 && fields.size() == 3 && fields[0] == "user_id") {
        continue;
      }
    }
    if (fields.size() != 3) {
      errors.Add(line_no, "expected 3 fields, got " +
                              std::to_string(fields.size()));
      continue;
    }
    Rating r;
    if (!ParseNumber(fields[0], r.user) || !ParseNumber(fields[1], r.item) ||
        !ParseNumber(fields[2], r.value) || !std::isfinite(r.value)) {
      errors.Add(line_no, "malformed row '" + std::string(line) + "'");
      continue;
    }
    if (options.range &&
        (r.value < options.range->first || r.value > options.range->second)) {
      errors.Add(line_no, "rating " + std::string(fields[2]) +
                              " outside [" +
                              FormatDouble(options.range->first) + ", " +
                              FormatDouble(options.range->second) + "]");
      continue;
    }
    auto [it, inserted] = first_line.emplace(std::make_pair(r.user, r.item),
                                             line_no);
    if (!inserted) {
      errors.Add(line_no, "duplicate pair (user " + std::to_string(r.user) +
                              ", item " + std::to_string(r.item) +
                              "), first seen on line " +
                              std::to_string(it->second));
      continue;
    }
    ratings.push_back(r);
  }
  if (in.bad()) throw DataError("error while reading rating stream");
  errors.ThrowIfAny("invalid rating data");
  return RatingsDataset::Create(std::move(ratings));
}

void WriteRatings(std::ostream& out, const RatingsDataset& dataset,
                  RatingFormat format) {
  const char* sep = format == RatingFormat::kDoubleColon ? "::" : ",";
  if (format == RatingFormat::kCsv) out << "user_id,item_id,rating\n";
  for (const Rating& r : dataset.ratings()) {
    out << r.user << sep << r.item << sep << FormatDouble(r.value) << '\n';
  }
}

std::map<UserId, Label> ParseLabels(
    std::istream& in, const std::map<std::string, Label>& label_map) {
  if (!in) throw DataError("label stream is not readable");
  std::map<UserId, Label> labels;
  ErrorList errors;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    auto fields = Split(line, ",");
    if (line_no == 1 && fields.size() == 2 && fields[0] == "user_id") continue;
    if (fields.size() != 2) {
      errors.Add(line_no, "expected 2 fields");
      continue;
    }
    UserId user;
    if (!ParseNumber(fields[0], user)) {
      errors.Add(line_no, "malformed user id");
      continue;
    }
    std::optional<Label> label;
    if (auto it = label_map.find(std::string(fields[1]));
        it != label_map.end()) {
      label = it->second;
    } else if (long value; ParseNumber(fields[1], value)) {
      label = LabelFromInt(value);
    }
    if (!label) {
      errors.Add(line_no, "label '" + std::string(fields[1]) +
                              "' is not -1, 1 or a mapped string");
      continue;
    }
    if (!labels.emplace(user, *label).second) {
      errors.Add(line_no, "duplicate label for user " + std::to_string(user));
    }
  }
  errors.ThrowIfAny("invalid label data");
  return labels;
}

void WriteLabels(std::ostream& out, const RatingsDataset& dataset) {
  out << "user_id,label\n";
  for (const UserRecord& u : dataset.users()) {
    if (u.label) out << u.id << ',' << static_cast<int>(*u.label) << '\n';
  }
}

std::map<UserId, Label> ParseMovieLensGender(std::istream& in) {
  std::map<UserId, Label> labels;
  ErrorList errors;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    auto fields = Split(line, "::");
    UserId user;
    if (fields.size() < 2 || !ParseNumber(fields[0], user) ||
        (fields[1] != "M" && fields[1] != "F")) {
      errors.Add(line_no, "malformed users.dat row");
      continue;
    }
    labels[user] = fields[1] == "M" ? Label::kPositive : Label::kNegative;
  }
  errors.ThrowIfAny("invalid users.dat");
  return labels;
}

RatingsDataset FilterByActivity(const RatingsDataset& dataset,
                                std::size_t min_ratings_per_user,
                                std::size_t min_ratings_per_item) {
  std::vector<Rating> ratings = dataset.ratings();
  while (true) {
    std::map<UserId, std::size_t> per_user;
    std::map<ItemId, std::size_t> per_item;
    for (const Rating& r : ratings) {
      ++per_user[r.user];
      ++per_item[r.item];
    }
    std::vector<Rating> kept;
    for (const Rating& r : ratings) {
      if (per_user[r.user] >= min_ratings_per_user &&
          per_item[r.item] >= min_ratings_per_item) {
        kept.push_back(r);
      }
    }
    if (kept.size() == ratings.size()) break;
    ratings = std::move(kept);
  }
  std::set<UserId> remaining;
  for (const Rating& r : ratings) remaining.insert(r.user);
  std::map<UserId, Label> labels;
  for (const auto& [id, label] : dataset.Labels()) {
    if (remaining.count(id)) labels.emplace(id, label);
  }
  return RatingsDataset::Create(std::move(ratings), labels,
                                dataset.label_name());
}

std::vector<std::vector<UserId>> SplitFolds(const RatingsDataset& dataset,
                                            int k, std::uint64_t seed) {
  std::vector<UserId> users = dataset.LabeledUsers();
  if (k <= 0 || static_cast<std::size_t>(k) > users.size()) {
    throw DataError("fold count " + std::to_string(k) +
                    " is invalid for " + std::to_string(users.size()) +
                    " labeled users");
  }
  Rng rng(seed);
  std::shuffle(users.begin(), users.end(), rng);
  std::vector<std::vector<UserId>> folds(k);
  for (std::size_t i = 0; i < users.size(); ++i) {
    folds[i % k].push_back(users[i]);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

UserRatingSplit SplitUserRatings(std::span<const ItemRating> ratings,
                                 double fraction, std::uint64_t seed) {
  const std::size_t n = ratings.size();
  if (n < 2) throw DataError("splitting needs at least 2 ratings");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw DataError("split fraction must lie in (0, 1)");
  }
  auto n_observed = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  n_observed = std::clamp<std::size_t>(n_observed, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> observed(n, false);
  for (std::size_t i = 0; i < n_observed; ++i) observed[order[i]] = true;

  UserRatingSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    (observed[i] ? split.observed : split.holdout).push_back(ratings[i]);
  }
  return split;
}

SyntheticData GenerateSynthetic(const SyntheticConfig& config,
                                std::uint64_t seed) {
  if (config.n_users <= 0 || config.n_items <= 0 || config.d <= 0) {
    throw DataError("synthetic sizes must be positive");
  }
  if (!(config.noise_sigma >= 0.0) || !(config.bias_scale >= 0.0)) {
    throw DataError("noise_sigma and bias_scale must be nonnegative");
  }
  const ProbabilityModel& pm = config.prob_model;
  if (pm.kind == ProbabilityModel::Kind::kUniform &&
      !(0.0 <= pm.low && pm.low <= pm.high && pm.high <= 1.0)) {
    throw DataError("uniform probability model needs 0 <= low <= high <= 1");
  }
  if (pm.kind == ProbabilityModel::Kind::kExplicit) {
    if (pm.explicit_probs.size() != static_cast<std::size_t>(config.n_items)) {
      throw DataError("explicit probability model needs one pair per item");
    }
    for (const auto& [p, q] : pm.explicit_probs) {
      if (!(p >= 0 && p <= 1 && q >= 0 && q <= 1)) {
        throw DataError("rating probabilities must lie in [0, 1]");
      }
    }
  }

  Rng item_rng = MakeRng(seed, {Tag(SeedTag::kSynth), 1});
  Rng user_rng = MakeRng(seed, {Tag(SeedTag::kSynth), 2});
  Rng cell_rng = MakeRng(seed, {Tag(SeedTag::kSynth), 3});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticData out;
  SyntheticGroundTruth& truth = out.truth;
  truth.noise_sigma = config.noise_sigma;
  truth.items.resize(config.n_items);
  for (int j = 0; j < config.n_items; ++j) {
    SyntheticItem& item = truth.items[j];
    item.latent.resize(config.d);
    do {
      for (int k = 0; k < config.d; ++k) item.latent[k] = normal(item_rng);
    } while (item.latent.isZero(0.0));
    item.bias = config.bias_scale * (2.0 * unit(item_rng) - 1.0);
    switch (pm.kind) {
      case ProbabilityModel::Kind::kDense:
        item.p_plus = item.p_minus = 1.0;
        break;
      case ProbabilityModel::Kind::kUniform:
        item.p_plus = pm.low + (pm.high - pm.low) * unit(item_rng);
        item.p_minus = pm.low + (pm.high - pm.low) * unit(item_rng);
        break;
      case ProbabilityModel::Kind::kExplicit:
        item.p_plus = pm.explicit_probs[j].first;
        item.p_minus = pm.explicit_probs[j].second;
        break;
    }
  }

  std::vector<Rating> ratings;
  std::map<UserId, Label> labels;
  truth.users.resize(config.n_users);
  for (int i = 0; i < config.n_users; ++i) {
    SyntheticUser& user = truth.users[i];
    user.label = unit(user_rng) < 0.5 ? Label::kPositive : Label::kNegative;
    user.latent.resize(config.d);
    for (int k = 0; k < config.d; ++k) user.latent[k] = normal(user_rng);
    labels.emplace(i, user.label);
    for (int j = 0; j < config.n_items; ++j) {
      const SyntheticItem& item = truth.items[j];
      const double p =
          user.label == Label::kPositive ? item.p_plus : item.p_minus;
      const double draw = unit(cell_rng);
      const double noise = normal(cell_rng);
      if (draw >= p) continue;
      const double value = user.latent.dot(item.latent) +
                           Sign(user.label) * item.bias +
                           config.noise_sigma * noise;
      ratings.push_back({i, j, value});
    }
  }
  out.dataset =
      RatingsDataset::Create(std::move(ratings), labels, std::string("x0"));
  return out;
}

}  // namespace privmf
