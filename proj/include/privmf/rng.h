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

#ifndef PRIVMF_RNG_H_
#define PRIVMF_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace privmf {

using Rng = std::mt19937_64;

// Counter-based seed derivation: mixes a master seed with a path of tags
// (fold index, user id, scheme tag, ...) so that every stream is
// reproducible independently of evaluation order.
std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> path);

inline Rng MakeRng(std::uint64_t master,
                   std::initializer_list<std::uint64_t> path) {
  return Rng(DeriveSeed(master, path));
}

// Stable tags for seed paths.
enum class SeedTag : std::uint64_t {
  kFolds = 0x666f6c64,
  kSplit = 0x73706c74,
  kTrain = 0x7472616e,
  kScheme = 0x73636865,
  kAttack = 0x61747463,
  kRound = 0x726f756e,
  kSynth = 0x73796e74,
};

inline std::uint64_t Tag(SeedTag tag) {
  return static_cast<std::uint64_t>(tag);
}

}  // namespace privmf

#endif  // PRIVMF_RNG_H_
