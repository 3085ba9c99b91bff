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

#ifndef PRIVMF_WIRE_H_
#define PRIVMF_WIRE_H_

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "privmf/common.h"
#include "privmf/dataset.h"
#include "privmf/factorization.h"
#include "privmf/protocol.h"
#include "privmf/rng.h"

namespace privmf {

// Newline-delimited JSON, one session per connection:
//   analyst -> user  {"type":"solicit","session_id":..,"items":[{"id","bias","ratio"?}]}
//   user -> analyst  {"type":"feedback","session_id":..,"revealed":[..],"values":[..]}
//   analyst -> user  {"type":"estimate","session_id":..,"x_hat":[..]}
// or {"type":"error","code":..,"detail":..} in either direction. No message
// has a field that could carry the private label.

enum class ProtocolKind { kMp, kMpss };

struct SolicitMessage {
  std::uint64_t session_id = 0;
  Disclosure disclosure;
};

struct FeedbackMessage {
  std::uint64_t session_id = 0;
  ObfuscatedFeedback feedback;
};

struct EstimateMessage {
  std::uint64_t session_id = 0;
  Eigen::VectorXd x_hat;
};

struct ErrorMessage {
  std::string code;  // "parse", "protocol_violation", "bad_feedback", ...
  std::string detail;
};

using WireMessage =
    std::variant<SolicitMessage, FeedbackMessage, EstimateMessage, ErrorMessage>;

// The complete set of field names each message type may carry (including
// nested item fields for solicit).
struct MessageSchema {
  std::string_view type;
  std::vector<std::string_view> fields;
};
const std::vector<MessageSchema>& WireSchema();

// A single JSON object without the trailing newline.
std::string EncodeMessage(const WireMessage& message);

class WireError : public DataError {
 public:
  WireError(std::string code, const std::string& detail)
      : DataError(code + ": " + detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Throws WireError("parse", ...) for malformed frames or unknown fields.
WireMessage DecodeMessage(std::string_view line);

struct AnalystConfig {
  ProtocolKind protocol = ProtocolKind::kMp;
  // Items picked by greedy selection on top of the seed basis; negative
  // solicits the whole catalog.
  int budget = 10;
  double ridge = kDefaultRidge;
};

// Session logic of the analyst, independent of any transport.
class AnalystService {
 public:
  AnalystService(AnalystModel model, AnalystConfig config);

  const std::vector<ItemId>& solicited() const { return solicited_; }
  const AnalystModel& model() const { return model_; }

  SolicitMessage Solicit(std::uint64_t session_id) const;
  // Validates a feedback frame against the session and returns an Estimate
  // or an Error message.
  WireMessage HandleFeedback(std::uint64_t session_id,
                             std::string_view line) const;

 private:
  AnalystModel model_;
  AnalystConfig config_;
  std::vector<ItemId> solicited_;
  Disclosure disclosure_;
};

// Observes every frame a peer sends or receives (without the newline).
enum class Direction { kSent, kReceived };
using FrameTap = std::function<void(Direction, std::string_view)>;

// TCP front end for AnalystService; each connection runs on its own thread.
class AnalystServer {
 public:
  explicit AnalystServer(AnalystService service);
  ~AnalystServer();
  AnalystServer(const AnalystServer&) = delete;
  AnalystServer& operator=(const AnalystServer&) = delete;

  // Binds and listens; port 0 picks an ephemeral port. Returns the port.
  int Listen(const std::string& host, int port);
  // Accepts connections until Shutdown(), or until max_sessions connections
  // have been accepted when it is positive.
  void Serve(std::uint64_t max_sessions = 0);
  void Shutdown();

  const AnalystService& service() const { return service_; }
  std::uint64_t sessions_started() const { return next_session_.load(); }

 private:
  void HandleConnection(int fd, std::uint64_t session_id);

  AnalystService service_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> next_session_{0};
  std::mutex workers_mu_;
  std::condition_variable workers_done_;
  int active_workers_ = 0;
};

// User-side logic: keeps the ratings and the private label local.
class UserAgent {
 public:
  UserAgent(std::vector<ItemRating> ratings, Label x0, ProtocolKind protocol);

  // MP needs a rating for every solicited item; MPSS sub-samples the rated
  // solicited items and needs the ratios.
  FeedbackMessage Respond(const SolicitMessage& solicit, Rng& rng) const;

 private:
  std::vector<ItemRating> ratings_;
  Label x0_;
  ProtocolKind protocol_;
};

struct AgentResult {
  Eigen::VectorXd x_hat;
  ObfuscatedFeedback sent;
};

// Connects, answers the Solicit and returns the received Estimate. Throws
// DataError on connection failures, WireError when the analyst answers with
// an Error.
AgentResult UserAgentRun(const UserAgent& agent, const std::string& host,
                         int port, std::uint64_t seed,
                         const FrameTap& tap = {});

}  // namespace privmf

#endif  // PRIVMF_WIRE_H_
