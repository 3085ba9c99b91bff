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

#ifndef PRIVMF_COMMON_H_
#define PRIVMF_COMMON_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace privmf {

using UserId = std::int64_t;
using ItemId = std::int64_t;

// The private binary feature, encoded as -1 / +1 everywhere.
enum class Label : int { kNegative = -1, kPositive = 1 };

inline double Sign(Label label) { return static_cast<int>(label); }
inline Label Opposite(Label label) {
  return label == Label::kPositive ? Label::kNegative : Label::kPositive;
}
// Accepts -1, +1 (and 1); anything else is nullopt.
std::optional<Label> LabelFromInt(long value);

// Raised for malformed inputs, violated preconditions on data and numerical
// failures. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a normal matrix cannot be inverted.
class SingularMatrixError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace privmf

#endif  // PRIVMF_COMMON_H_
