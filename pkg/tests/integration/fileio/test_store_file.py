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

import pyvfu.fileio.native.store as store_file
from pyvfu.objects.errors import StorageError
from pyvfu.objects.vfl_struct import EmbeddingStore
from pyvfu.unlearn import unlearn_party
from pyvfu.vfl import train_vfl


def trained_store(make_federation):
    federation = make_federation(epochs=2, keep_last_epochs=5)
    train_vfl(federation)
    unlearn_party(federation, 'B', track=False)
    return federation.store


def test_save_and_load(tmp_path, make_federation):
    store = trained_store(make_federation)
    filepath = tmp_path/'embeddings.vfus'
    store_file.save(store, filepath)

    loaded = store_file.load(filepath)
    assert loaded.layout == store.layout
    assert loaded.batch_size == 32
    assert loaded.keep_last_epochs == 5
    assert loaded.keys() == store.keys()
    for key, record in store.items():
        other = loaded.get(*key)
        assert np.array_equal(other.concat, record.concat)
        assert np.array_equal(other.sample_ids, record.sample_ids)
        assert other.slices == record.slices

    copy = tmp_path/'copy.vfus'
    store_file.save(loaded, copy)
    assert copy.read_bytes() == filepath.read_bytes()


def test_empty_store(tmp_path):
    filepath = tmp_path/'empty.vfus'
    store_file.save(EmbeddingStore(16), filepath)
    loaded = store_file.load(filepath)
    assert len(loaded) == 0
    assert loaded.batch_size == 16


def test_corrupt_files(tmp_path, make_federation):
    filepath = tmp_path/'embeddings.vfus'
    store_file.save(trained_store(make_federation), filepath)
    data = filepath.read_bytes()

    broken = tmp_path/'broken.vfus'
    for content in (b'XXXX' + data[4:], data[:-3], data + b'\x00', data[:4] + b'\x09' + data[5:]):
        broken.write_bytes(content)
        with raises(StorageError):
            store_file.load(broken)

    with raises(StorageError):
        store_file.load(tmp_path/'missing.vfus')
