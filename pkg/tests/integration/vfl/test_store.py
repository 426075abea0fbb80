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

from collections import OrderedDict

import numpy as np
from pytest import raises

from pyvfu.objects.errors import ShapeError, StorageError
from pyvfu.objects.vfl_struct import EmbeddingStore, check_slices, drop_slice, StoreRecord
from pyvfu.vfl import train_vfl

SLICES = OrderedDict([(0, (0, 2)), (1, (2, 5))])


def record_matrix(rows, seed=0):
    return np.random.default_rng(seed).normal(size=(rows, 5))


def test_put_and_get():
    store = EmbeddingStore(batch_size=4)
    concat = record_matrix(4)
    store.put(1, 0, concat, SLICES, [10, 11, 12, 13])

    assert (1, 0) in store
    assert store.width == 5
    assert store.party_ids == [0, 1]
    record = store.get(1, 0)
    assert np.array_equal(record.concat, concat)
    assert record.slices == SLICES

    concat[0, 0] = 99.0
    assert store.get(1, 0).concat[0, 0] != 99.0

    with raises(StorageError):
        store.get(2, 0)


def test_put_rejects_bad_records():
    store = EmbeddingStore()
    with raises(ShapeError):
        store.put(1, 0, record_matrix(4), OrderedDict([(0, (0, 2)), (1, (2, 4))]), range(4))
    with raises(ShapeError):
        store.put(1, 0, record_matrix(4), SLICES, range(3))

    store.put(1, 0, record_matrix(4), SLICES, range(4))
    with raises(ShapeError):
        store.put(1, 1, np.zeros((4, 5)), OrderedDict([(0, (0, 3)), (1, (3, 5))]), range(4))


def test_overwrite_keeps_one_record():
    store = EmbeddingStore()
    store.put(1, 0, record_matrix(2, 0), SLICES, [0, 1])
    store.put(1, 0, record_matrix(2, 1), SLICES, [0, 1])
    assert len(store) == 1
    assert np.array_equal(store.get(1, 0).concat, record_matrix(2, 1))


def test_check_slices():
    check_slices(SLICES, 5)
    with raises(ShapeError):
        check_slices(SLICES, 6)
    with raises(ShapeError):
        check_slices(OrderedDict([(1, (0, 2)), (0, (2, 5))]), 5)
    with raises(ShapeError):
        check_slices(OrderedDict([(0, (0, 2)), (1, (3, 5))]), 5)


def test_drop_slice():
    concat = np.arange(10.0).reshape(2, 5)
    record = StoreRecord(concat, SLICES, np.array([3, 4]))

    dropped = drop_slice(record, 0)
    assert np.array_equal(dropped.concat, concat[:, 2:])
    assert dropped.slices == OrderedDict([(1, (0, 3))])

    dropped = drop_slice(record, 1)
    assert np.array_equal(dropped.concat, concat[:, :2])
    assert dropped.slices == OrderedDict([(0, (0, 2))])


def test_remove_party_from_trained_store(make_federation):
    federation = make_federation(epochs=2)
    train_vfl(federation)
    store = federation.store
    before = store.copy()

    store.remove_party(1)
    assert store.width == 16
    assert store.party_ids == [0, 2]
    for key, record in store.items():
        old = before.get(*key)
        assert record.slices == OrderedDict([(0, (0, 8)), (2, (8, 16))])
        assert np.array_equal(record.concat, np.hstack([old.concat[:, :8], old.concat[:, 16:]]))

    with raises(KeyError):
        store.remove_party(1)
    assert before.width == 24


def test_remove_samples():
    store = EmbeddingStore()
    store.put(1, 0, record_matrix(2), SLICES, [0, 1])
    store.put(1, 1, record_matrix(2), SLICES, [2, 3])
    store.put(2, 0, record_matrix(4), SLICES, [3, 1, 0, 2])

    assert store.remove_samples([0, 1]) == 4
    assert store.keys() == [(1, 1), (2, 0)]
    assert list(store.get(2, 0).sample_ids) == [3, 2]
    assert list(store.sample_ids()) == [2, 3]


def test_retention():
    store = EmbeddingStore(keep_last_epochs=2)
    for epoch in (1, 2, 3):
        store.put(epoch, 0, record_matrix(2), SLICES, [0, 1])
    assert store.epochs() == [2, 3]
    assert len(store) == 2
