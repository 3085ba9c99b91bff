# Copyright 2026 The privmf Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the privmf midpoint-protocol library."""

from privmf._core import (
    DataError,
    a_optimality,
    auc,
    brute_force_select,
    estimate_profile,
    generate_synthetic,
    greedy_select,
    keep_probability,
    lse_attack,
    mp_obfuscate,
    mpss_obfuscate,
    rmse,
    round_ratings,
    subsampling_ratio,
    theoretical_l2_loss,
)

__all__ = [
    "DataError",
    "a_optimality",
    "auc",
    "brute_force_select",
    "estimate_profile",
    "generate_synthetic",
    "greedy_select",
    "keep_probability",
    "lse_attack",
    "mp_obfuscate",
    "mpss_obfuscate",
    "rmse",
    "round_ratings",
    "subsampling_ratio",
    "theoretical_l2_loss",
]
