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

#include "privmf/rng.h"

#include "privmf/common.h"

namespace privmf {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = SplitMix64(master);
  for (std::uint64_t step : path) state = SplitMix64(state ^ SplitMix64(step));
  return state;
}

std::optional<Label> LabelFromInt(long value) {
  if (value == 1) return Label::kPositive;
  if (value == -1) return Label::kNegative;
  return std::nullopt;
}

}  // namespace privmf
