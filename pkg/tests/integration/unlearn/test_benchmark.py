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

from pytest import raises

from pyvfu.objects.errors import RequestError
from pyvfu.objects.reports import UnlearnRequest
from pyvfu.unlearn import exclude_from_data, retrain_benchmark
from pyvfu.unlearn.benchmark import exclude_columns


def test_exclude_columns(make_data):
    train, test, split = make_data()

    (reduced,), new_split = exclude_columns([train], split, [4, 5, 6, 7])
    assert new_split.assignments == [[0, 1, 2, 3], [4, 5, 6, 7]]
    assert reduced.feature_names == ['x0', 'x1', 'x2', 'x3', 'x8', 'x9', 'x10', 'x11']

    (reduced, _), new_split = exclude_columns([train, test], split, [1, 9])
    assert new_split.assignments == [[0, 1, 2], [3, 4, 5, 6], [7, 8, 9]]
    assert reduced.num_features == 10


def test_exclude_from_data(make_data):
    train, test, split = make_data()
    assert exclude_from_data(train, test, split, None) == (train, test, split)

    with raises(RequestError):
        exclude_from_data(train, test, split, UnlearnRequest.for_party(5))

    request = UnlearnRequest.for_samples(sample_ids=train.sample_ids[:7])
    reduced, same_test, same_split = exclude_from_data(train, test, split, request)
    assert len(reduced) == len(train) - 7
    assert same_test is test
    assert same_split is split

    _, _, reduced_split = exclude_from_data(train, test, split, UnlearnRequest.for_features(1, [4, 5]))
    assert reduced_split.widths == [4, 2, 4]


def test_retrain_benchmark(make_config, make_data):
    train, test, split = make_data()
    config = make_config(epochs=2)

    benchmark, records = retrain_benchmark(train, test, split, config, UnlearnRequest.for_party('B'))
    assert benchmark.config.seed == config.seed + 1
    assert benchmark.party_ids == [0, 1]
    assert benchmark.active.party_id == 1
    assert benchmark.store.width == 16
    assert [r.epoch for r in records] == [1, 2]

    _, again = retrain_benchmark(train, test, split, config, UnlearnRequest.for_party('B'))
    assert again == records
