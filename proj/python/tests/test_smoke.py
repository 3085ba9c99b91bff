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

"""Smoke tests for the Python bindings."""

import math

import numpy as np
import pytest

import privmf


def test_synthetic_shapes_and_determinism():
    a = privmf.generate_synthetic(n_users=30, n_items=6, d=2, seed=4)
    b = privmf.generate_synthetic(n_users=30, n_items=6, d=2, seed=4)
    assert a["ratings"].shape == (180, 3)
    assert a["item_latents"].shape == (6, 2)
    np.testing.assert_array_equal(a["ratings"], b["ratings"])
    assert set(np.unique(a["labels"])) <= {-1, 1}


def test_mp_shift_and_ratios():
    y = privmf.mp_obfuscate([4.0, 2.0], -1, np.array([0.5, -1.0]))
    assert y == pytest.approx([4.5, 1.0])
    assert privmf.subsampling_ratio(0.8, 0.2) == pytest.approx(0.25)
    assert math.isinf(privmf.subsampling_ratio(0.0, 0.3))
    assert privmf.subsampling_ratio(0.0, 0.0) == 1.0
    assert privmf.keep_probability(0.25, 1) == pytest.approx(0.25)
    assert privmf.keep_probability(0.25, -1) == 1.0


def test_mpss_keeps_everything_at_unit_ratio():
    ids, values = privmf.mpss_obfuscate(
        [0, 1, 2], [3.0, 4.0, 5.0], 1, np.zeros(3), np.ones(3), seed=1)
    assert ids == [0, 1, 2]
    assert values == pytest.approx([3.0, 4.0, 5.0])


def test_estimator_recovers_noiseless_profile():
    rng = np.random.default_rng(0)
    v = rng.normal(size=(6, 3))
    x = np.array([0.5, -1.0, 2.0])
    x_hat, loss = privmf.estimate_profile(v, v @ x, ridge=0.0, sigma=0.5)
    np.testing.assert_allclose(x_hat, x, atol=1e-9)
    assert loss == pytest.approx(privmf.theoretical_l2_loss(v, 0.5), rel=1e-10)
    # Independent check through numpy.
    assert loss == pytest.approx(0.25 * np.trace(np.linalg.inv(v.T @ v)),
                                 rel=1e-10)


def test_rounding_and_selection():
    out = privmf.round_ratings([0.2, 2.5, 7.0], 1, 5, seed=3)
    assert out[0] == 1 and out[2] == 5 and out[1] in (2, 3)
    latents = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [3.0, 0.1]])
    seed, greedy = privmf.greedy_select(latents, 1)
    _, best = privmf.brute_force_select(latents, 1)
    assert len(seed) == 2 and len(greedy) == 1
    assert sorted(greedy) == sorted(best)
    assert privmf.a_optimality(np.eye(2)) == pytest.approx(-2.0)


def test_lse_attack_and_auc():
    biases = np.array([0.5, -0.5, 0.5])
    latents = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    label, score = privmf.lse_attack(biases, latents, [0, 1, 2],
                                     [1.5, 0.5, 2.5])
    assert label == 1
    assert score == pytest.approx(1.0 / 3.0, abs=1e-7)
    assert privmf.auc([0.9, 0.1, 0.8], [1, -1, 1]) == 1.0
    assert privmf.rmse([1.0, 2.0], [1.0, 4.0]) == pytest.approx(math.sqrt(2))


def test_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        privmf.auc([0.1, 0.2], [1, 1])
    with pytest.raises(privmf.DataError):
        privmf.estimate_profile(np.array([[1.0, 0.0]]), np.array([1.0]),
                                ridge=0.0)
