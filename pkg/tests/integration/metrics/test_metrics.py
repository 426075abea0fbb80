#!/usr/bin/env python3
# -*- coding: utf-8 -*-

# ----------------------------------------------------------------------
# Copyright 2024 the PyVFU authors
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
# ----------------------------------------------------------------------

import numpy as np
from pytest import approx, raises
import sklearn.metrics

from pyvfu.metrics import accuracy_score, auc_score, f1_score
from pyvfu.nn import softmax
from pyvfu.objects.errors import UndefinedMetricError


def test_f1_binary():
    labels = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
    predictions = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0]
    assert f1_score(predictions, labels) == approx(2*2/(2*2 + 1 + 1), abs=1e-12)
    assert f1_score(labels, labels) == 1.0


def test_f1_zero_division():
    assert f1_score([0, 0, 0], [0, 0, 0], num_classes=2) == 0.0

    with raises(ValueError):
        f1_score([], [])


def test_f1_multiclass_oracle():
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 4, size=200)
    predictions = np.where(rng.random(200) < 0.6, labels, rng.integers(0, 4, size=200))

    expected = sklearn.metrics.f1_score(labels, predictions, average='macro')
    assert f1_score(predictions, labels) == approx(expected, abs=1e-12)


def test_auc_hand_computed():
    scores = [0.9, 0.8, 0.7, 0.6, 0.55, 0.5, 0.4, 0.3, 0.2, 0.1]
    labels = [1, 0, 1, 0, 1, 1, 0, 0, 0, 0]
    # 4 positives, 6 negatives: 19 of 24 pairs are concordant
    assert auc_score(scores, labels) == approx(19/24, abs=1e-12)
    assert auc_score([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0]) == approx(0.75, abs=1e-12)


def test_auc_ties_and_separation():
    labels = [0, 1, 0, 1, 1]
    assert auc_score(np.full(5, 0.3), labels) == 0.5
    assert auc_score([0.1, 0.9, 0.2, 0.8, 0.7], labels) == 1.0

    with raises(UndefinedMetricError):
        auc_score([0.1, 0.2], [1, 1])


def test_auc_monotone_invariance():
    rng = np.random.default_rng(1)
    scores = rng.random(100)
    labels = rng.integers(0, 2, size=100)
    assert auc_score(np.exp(3*scores), labels) == approx(auc_score(scores, labels), abs=1e-12)
    assert auc_score(scores, labels) == approx(sklearn.metrics.roc_auc_score(labels, scores), abs=1e-12)


def test_auc_multiclass_oracle():
    rng = np.random.default_rng(2)
    labels = rng.integers(0, 3, size=150)
    probabilities = softmax(rng.normal(size=(150, 3)) + 2*np.eye(3)[labels])

    expected = sklearn.metrics.roc_auc_score(labels, probabilities, multi_class='ovr', average='macro')
    assert auc_score(probabilities, labels) == approx(expected, abs=1e-12)
    assert auc_score(probabilities[:, :2][labels < 2], labels[labels < 2]) == approx(
        sklearn.metrics.roc_auc_score(labels[labels < 2], probabilities[labels < 2, 1]), abs=1e-12
    )


def test_accuracy():
    assert accuracy_score([1, 0, 1, 1], [1, 1, 1, 0]) == 0.5
