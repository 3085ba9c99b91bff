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

#include "privmf/wire.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "privmf/selection.h"

namespace privmf {
namespace {

using Json = nlohmann::json;

constexpr std::size_t kMaxFrameBytes = 16 << 20;

Json ItemToJson(const DisclosedItem& item) {
  Json entry = {{"id", item.id}, {"bias", item.bias}};
  if (item.ratio) {
    if (std::isinf(*item.ratio)) {
      entry["ratio"] = "inf";
    } else {
      entry["ratio"] = *item.ratio;
    }
  }
  return entry;
}

void CheckFields(const Json& json, std::string_view type) {
  const auto& schema = WireSchema();
  auto it = std::find_if(schema.begin(), schema.end(),
                         [&](const MessageSchema& s) { return s.type == type; });
  for (const auto& [key, value] : json.items()) {
    if (key == "type") continue;
    if (std::find(it->fields.begin(), it->fields.end(), key) ==
        it->fields.end()) {
      throw WireError("parse", "unexpected field '" + key + "' in " +
                                   std::string(type));
    }
  }
}

double FiniteNumber(const Json& json, const char* what) {
  if (!json.is_number()) {
    throw WireError("parse", std::string(what) + " must be a number");
  }
  return json.get<double>();
}

std::uint64_t SessionId(const Json& json) {
  const auto& id = json.at("session_id");
  if (!id.is_number_unsigned() && !(id.is_number_integer() && id.get<long long>() >= 0)) {
    throw WireError("parse", "session_id must be a non-negative integer");
  }
  return id.get<std::uint64_t>();
}

DisclosedItem ItemFromJson(const Json& json) {
  if (!json.is_object()) throw WireError("parse", "solicit item must be an object");
  for (const auto& [key, value] : json.items()) {
    if (key != "id" && key != "bias" && key != "ratio") {
      throw WireError("parse", "unexpected field '" + key + "' in solicit item");
    }
  }
  DisclosedItem item;
  if (!json.at("id").is_number_integer()) {
    throw WireError("parse", "item id must be an integer");
  }
  item.id = json.at("id").get<ItemId>();
  item.bias = FiniteNumber(json.at("bias"), "bias");
  if (json.contains("ratio")) {
    const auto& ratio = json.at("ratio");
    if (ratio.is_string() && ratio.get<std::string>() == "inf") {
      item.ratio = kInfiniteRatio;
    } else {
      item.ratio = FiniteNumber(ratio, "ratio");
      if (*item.ratio < 0) throw WireError("parse", "ratio must be >= 0");
    }
  }
  return item;
}

// Blocking line-oriented socket with an owned descriptor.
class LineSocket {
 public:
  explicit LineSocket(int fd) : fd_(fd) {}
  ~LineSocket() {
    if (fd_ >= 0) ::close(fd_);
  }
  LineSocket(const LineSocket&) = delete;
  LineSocket& operator=(const LineSocket&) = delete;

  // False on orderly EOF before any byte of a new line.
  bool ReadLine(std::string& line) {
    line.clear();
    for (;;) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return true;
      }
      if (buffer_.size() > kMaxFrameBytes) {
        throw WireError("parse", "frame exceeds size limit");
      }
      char chunk[4096];
      ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) throw DataError(std::string("recv: ") + std::strerror(errno));
      if (n == 0) {
        if (buffer_.empty()) return false;
        throw WireError("parse", "connection closed mid-frame");
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void WriteLine(std::string_view line) {
    std::string frame(line);
    frame.push_back('\n');
    std::size_t off = 0;
    while (off < frame.size()) {
      ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off,
                         MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) throw DataError(std::string("send: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

 private:
  int fd_;
  std::string buffer_;
};

addrinfo* Resolve(const std::string& host, int port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(),
                         service.c_str(), &hints, &result);
  if (rc != 0) {
    throw DataError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  return result;
}

void SetNoDelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

const std::vector<MessageSchema>& WireSchema() {
  static const std::vector<MessageSchema> schema = {
      {"solicit", {"session_id", "items", "id", "bias", "ratio"}},
      {"feedback", {"session_id", "revealed", "values"}},
      {"estimate", {"session_id", "x_hat"}},
      {"error", {"code", "detail"}},
  };
  return schema;
}

std::string EncodeMessage(const WireMessage& message) {
  Json json = std::visit(
      [](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SolicitMessage>) {
          Json items = Json::array();
          for (const auto& item : m.disclosure.items) {
            items.push_back(ItemToJson(item));
          }
          return {{"type", "solicit"},
                  {"session_id", m.session_id},
                  {"items", std::move(items)}};
        } else if constexpr (std::is_same_v<T, FeedbackMessage>) {
          return {{"type", "feedback"},
                  {"session_id", m.session_id},
                  {"revealed", m.feedback.revealed},
                  {"values", m.feedback.values}};
        } else if constexpr (std::is_same_v<T, EstimateMessage>) {
          return {{"type", "estimate"},
                  {"session_id", m.session_id},
                  {"x_hat", std::vector<double>(
                                m.x_hat.data(), m.x_hat.data() + m.x_hat.size())}};
        } else {
          return {{"type", "error"}, {"code", m.code}, {"detail", m.detail}};
        }
      },
      message);
  return json.dump();
}

WireMessage DecodeMessage(std::string_view line) {
  Json json = Json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (json.is_discarded()) throw WireError("parse", "malformed JSON frame");
  if (!json.is_object() || !json.contains("type") ||
      !json.at("type").is_string()) {
    throw WireError("parse", "frame must be an object with a string type");
  }
  const std::string type = json.at("type").get<std::string>();
  try {
    if (type == "solicit") {
      CheckFields(json, type);
      SolicitMessage m;
      m.session_id = SessionId(json);
      const auto& items = json.at("items");
      if (!items.is_array()) throw WireError("parse", "items must be an array");
      for (const auto& item : items) {
        m.disclosure.items.push_back(ItemFromJson(item));
      }
      return m;
    }
    if (type == "feedback") {
      CheckFields(json, type);
      FeedbackMessage m;
      m.session_id = SessionId(json);
      const auto& revealed = json.at("revealed");
      const auto& values = json.at("values");
      if (!revealed.is_array() || !values.is_array()) {
        throw WireError("parse", "revealed and values must be arrays");
      }
      for (const auto& id : revealed) {
        if (!id.is_number_integer()) {
          throw WireError("parse", "revealed ids must be integers");
        }
        m.feedback.revealed.push_back(id.get<ItemId>());
      }
      for (const auto& v : values) {
        m.feedback.values.push_back(FiniteNumber(v, "feedback value"));
      }
      return m;
    }
    if (type == "estimate") {
      CheckFields(json, type);
      EstimateMessage m;
      m.session_id = SessionId(json);
      const auto& x = json.at("x_hat");
      if (!x.is_array()) throw WireError("parse", "x_hat must be an array");
      m.x_hat.resize(static_cast<Eigen::Index>(x.size()));
      for (std::size_t k = 0; k < x.size(); ++k) {
        m.x_hat(static_cast<Eigen::Index>(k)) = FiniteNumber(x[k], "x_hat entry");
      }
      return m;
    }
    if (type == "error") {
      CheckFields(json, type);
      return ErrorMessage{json.at("code").get<std::string>(),
                          json.value("detail", std::string())};
    }
  } catch (const Json::exception& e) {
    throw WireError("parse", std::string("invalid ") + type + " frame: " + e.what());
  }
  throw WireError("parse", "unknown message type '" + type + "'");
}

AnalystService::AnalystService(AnalystModel model, AnalystConfig config)
    : model_(std::move(model)), config_(config) {
  ValidateModel(model_);
  if (config_.budget < 0) {
    for (const auto& p : model_.catalog.profiles()) solicited_.push_back(p.id);
  } else {
    SelectionProblem problem =
        MakeSelectionProblem(model_.catalog, config_.budget);
    solicited_ = problem.seed_set;
    auto picked = GreedySelect(problem);
    solicited_.insert(solicited_.end(), picked.begin(), picked.end());
  }
  auto slice = model_.catalog.Slice(solicited_);
  if (config_.protocol == ProtocolKind::kMpss) {
    std::vector<RatingProbabilities> probs;
    for (ItemId id : solicited_) probs.push_back(model_.ProbsOf(id));
    disclosure_ = MpssDisclose(slice, probs);
  } else {
    disclosure_ = MpDisclose(slice);
  }
}

SolicitMessage AnalystService::Solicit(std::uint64_t session_id) const {
  return {session_id, disclosure_};
}

WireMessage AnalystService::HandleFeedback(std::uint64_t session_id,
                                           std::string_view line) const {
  WireMessage decoded;
  try {
    decoded = DecodeMessage(line);
  } catch (const WireError& e) {
    return ErrorMessage{e.code(), e.what()};
  }
  const auto* feedback = std::get_if<FeedbackMessage>(&decoded);
  if (feedback == nullptr) {
    return ErrorMessage{"protocol_violation", "expected a feedback message"};
  }
  if (feedback->session_id != session_id) {
    return ErrorMessage{"protocol_violation", "session id mismatch"};
  }
  const auto& fb = feedback->feedback;
  if (fb.revealed.size() != fb.values.size()) {
    return ErrorMessage{"bad_feedback",
                        "revealed and values have different lengths"};
  }
  std::unordered_set<ItemId> solicited(solicited_.begin(), solicited_.end());
  std::unordered_set<ItemId> seen;
  for (ItemId id : fb.revealed) {
    if (!solicited.contains(id)) {
      return ErrorMessage{"protocol_violation",
                          "item " + std::to_string(id) + " was not solicited"};
    }
    if (!seen.insert(id).second) {
      return ErrorMessage{"protocol_violation",
                          "item " + std::to_string(id) + " revealed twice"};
    }
  }
  if (config_.protocol == ProtocolKind::kMp &&
      fb.revealed.size() != solicited_.size()) {
    return ErrorMessage{"protocol_violation",
                        "MP requires a value for every solicited item"};
  }
  if (fb.revealed.empty()) {
    return ErrorMessage{"bad_feedback", "no revealed ratings"};
  }
  try {
    auto estimate = EstimateProfile(fb, model_.catalog, config_.ridge,
                                    model_.noise_sigma_hat);
    return EstimateMessage{session_id, std::move(estimate.x_hat)};
  } catch (const DataError& e) {
    return ErrorMessage{"bad_feedback", e.what()};
  }
}

AnalystServer::AnalystServer(AnalystService service)
    : service_(std::move(service)) {}

AnalystServer::~AnalystServer() {
  Shutdown();
  std::unique_lock<std::mutex> lock(workers_mu_);
  workers_done_.wait(lock, [this] { return active_workers_ == 0; });
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

int AnalystServer::Listen(const std::string& host, int port) {
  addrinfo* addrs = Resolve(host, port, /*passive=*/true);
  std::string last_error = "no address";
  for (addrinfo* a = addrs; a != nullptr; a = a->ai_next) {
    int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 128) == 0) {
      listen_fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(addrs);
  if (listen_fd_ < 0) {
    throw DataError("cannot listen on " + host + ":" + std::to_string(port) +
                    ": " + last_error);
  }
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET6) {
    return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
  return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

void AnalystServer::Serve(std::uint64_t max_sessions) {
  if (listen_fd_ < 0) throw DataError("Serve() called before Listen()");
  while (!stopping_.load()) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listening socket shut down
    }
    if (stopping_.load()) {
      ::close(fd);
      break;
    }
    SetNoDelay(fd);
    std::uint64_t session = next_session_.fetch_add(1);
    {
      std::lock_guard<std::mutex> lock(workers_mu_);
      ++active_workers_;
    }
    std::thread([this, fd, session] {
      HandleConnection(fd, session);
      std::lock_guard<std::mutex> lock(workers_mu_);
      --active_workers_;
      workers_done_.notify_all();
    }).detach();
    if (max_sessions > 0 && session + 1 >= max_sessions) break;
  }
}

void AnalystServer::Shutdown() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

void AnalystServer::HandleConnection(int fd, std::uint64_t session_id) {
  LineSocket socket(fd);
  try {
    socket.WriteLine(EncodeMessage(service_.Solicit(session_id)));
    std::string line;
    if (!socket.ReadLine(line)) return;
    socket.WriteLine(EncodeMessage(service_.HandleFeedback(session_id, line)));
  } catch (const WireError& e) {
    try {
      socket.WriteLine(EncodeMessage(ErrorMessage{e.code(), e.what()}));
    } catch (const DataError&) {
    }
  } catch (const DataError&) {
    // Peer went away; nothing to report to.
  }
}

UserAgent::UserAgent(std::vector<ItemRating> ratings, Label x0,
                     ProtocolKind protocol)
    : ratings_(std::move(ratings)), x0_(x0), protocol_(protocol) {}

FeedbackMessage UserAgent::Respond(const SolicitMessage& solicit,
                                   Rng& rng) const {
  std::unordered_map<ItemId, double> by_item;
  for (const auto& r : ratings_) by_item.emplace(r.item, r.value);
  FeedbackMessage reply;
  reply.session_id = solicit.session_id;
  if (protocol_ == ProtocolKind::kMp) {
    std::vector<double> values;
    for (const auto& item : solicit.disclosure.items) {
      auto it = by_item.find(item.id);
      if (it == by_item.end()) {
        throw DataError("MP needs a rating for solicited item " +
                        std::to_string(item.id));
      }
      values.push_back(it->second);
    }
    reply.feedback = MpObfuscate(values, x0_, solicit.disclosure);
    return reply;
  }
  if (!solicit.disclosure.HasRatios()) {
    throw DataError("MPSS requested but the solicitation carries no ratios");
  }
  std::vector<ItemRating> rated;
  for (const auto& item : solicit.disclosure.items) {
    auto it = by_item.find(item.id);
    if (it != by_item.end()) rated.push_back({item.id, it->second});
  }
  reply.feedback = MpssObfuscate(rated, x0_, solicit.disclosure, rng);
  return reply;
}

AgentResult UserAgentRun(const UserAgent& agent, const std::string& host,
                         int port, std::uint64_t seed, const FrameTap& tap) {
  addrinfo* addrs = Resolve(host, port, /*passive=*/false);
  int fd = -1;
  std::string last_error = "no address";
  for (addrinfo* a = addrs; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(addrs);
  if (fd < 0) {
    throw DataError("cannot connect to " + host + ":" + std::to_string(port) +
                    ": " + last_error);
  }
  SetNoDelay(fd);
  LineSocket socket(fd);
  auto receive = [&]() -> WireMessage {
    std::string line;
    if (!socket.ReadLine(line)) {
      throw DataError("analyst closed the connection");
    }
    if (tap) tap(Direction::kReceived, line);
    auto message = DecodeMessage(line);
    if (const auto* err = std::get_if<ErrorMessage>(&message)) {
      throw WireError(err->code, err->detail);
    }
    return message;
  };

  auto first = receive();
  const auto* solicit = std::get_if<SolicitMessage>(&first);
  if (solicit == nullptr) {
    throw WireError("protocol_violation", "expected a solicit message");
  }
  Rng rng = MakeRng(seed, {solicit->session_id});
  FeedbackMessage reply;
  try {
    reply = agent.Respond(*solicit, rng);
  } catch (const DataError& e) {
    std::string frame =
        EncodeMessage(ErrorMessage{"protocol_violation", e.what()});
    if (tap) tap(Direction::kSent, frame);
    socket.WriteLine(frame);
    throw;
  }
  std::string frame = EncodeMessage(reply);
  if (tap) tap(Direction::kSent, frame);
  socket.WriteLine(frame);

  auto second = receive();
  const auto* estimate = std::get_if<EstimateMessage>(&second);
  if (estimate == nullptr || estimate->session_id != solicit->session_id) {
    throw WireError("protocol_violation", "expected the session estimate");
  }
  return {estimate->x_hat, reply.feedback};
}

}  // namespace privmf
