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
from pytest import raises

from pyvfu.audit import feature_ablation
from pyvfu.objects.errors import RequestError
from pyvfu.objects.reports import UnlearnRequest
from pyvfu.unlearn import retrain_benchmark, unlearn_features, unlearn_features_kd
from pyvfu.unlearn.feature_kd import kept_columns
from pyvfu.vfl import build_federation, train_vfl


def test_kept_columns():
    assert kept_columns([4, 5, 6, 7], [5]) == [0, 2, 3]
    assert kept_columns([4, 5, 6, 7], [7, 4]) == [1, 2]

    with raises(RequestError):
        kept_columns([4, 5, 6, 7], [])
    with raises(RequestError):
        kept_columns([4, 5, 6, 7], [9])
    with raises(RequestError):
        kept_columns([4, 5, 6, 7], [4, 5, 6, 7])


def test_unlearn_features(make_federation):
    federation = make_federation(epochs=3)
    train_vfl(federation)
    count = federation.bus.count
    width = federation.store.width

    report = unlearn_features(federation, 'B', [5], distill_epochs=3)
    assert federation.bus.count == count
    assert federation.store.width == width

    party = federation.party(1)
    assert party.owned_features == [4, 6, 7]
    assert party.data.num_features == 3
    assert party.test_data.num_features == 3
    assert party.model.input_dim == 3
    assert party.embedding_dim == 8
    assert federation.split.assignments[1] == [4, 6, 7]

    assert report.method == 'vfu-kd-feature'
    assert report.extra['features'] == [5]
    assert report.extra['terminal_kl'] >= 0.0
    assert 1 <= report.num_epochs <= 3
    assert len(report.records) == report.num_epochs

    records = train_vfl(federation, 1)
    assert records[0].epoch == 4


def test_unknown_party(make_federation):
    federation = make_federation(epochs=1)
    train_vfl(federation)
    with raises(RequestError):
        unlearn_features(federation, 'E', [1])
    with raises(RequestError):
        unlearn_features(federation, 'B', [1])


def test_terminal_kl_follows_ablation_ranking(make_config, make_data):
    train, test, split = make_data(informative=5)
    for dataset in (train, test):
        dataset.features[:, 4] *= 5.0

    federation = build_federation(train, test, split, make_config())
    train_vfl(federation, 5)
    party = federation.party(1)

    ranked = feature_ablation(federation, 'auc', party=1).ranked()
    assert sorted(ranked) == [4, 5, 6, 7]
    top, bottom = ranked[0], ranked[-1]

    _, _, strong = unlearn_features_kd(party, [top], federation.config, distill_epochs=5)
    _, _, weak = unlearn_features_kd(party, [bottom], federation.config, distill_epochs=5)
    assert strong.extra['terminal_kl'] > weak.extra['terminal_kl']


def test_mean_parity_with_retraining(make_config, make_data):
    f1_gap = []
    for seed in (0, 1, 2):
        train, test, split = make_data(n=2000, d=12, seed=seed)
        config = make_config(epochs=30, alpha=0.3, seed=seed)

        federation = build_federation(train, test, split, config)
        train_vfl(federation, 15)
        unlearn_features(federation, 'B', [5], track=False)
        final = train_vfl(federation, 15)[-1]

        request = UnlearnRequest.for_features(1, [5])
        _, benchmark_records = retrain_benchmark(train, test, split, config, request)
        f1_gap.append(final.f1 - benchmark_records[-1].f1)

    assert abs(np.mean(f1_gap)) <= 0.05
