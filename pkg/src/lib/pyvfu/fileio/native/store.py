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

"""
Binary file format of the embedding store.

All numbers are little-endian::

    | magic     b'VFUS'
    | header    u32 version, u32 K, K x (u32 party, u32 width),
    |           u32 batch size, u32 retained epochs, u32 number of records
    | records   u32 epoch, u32 batch, u32 rows,
    |           rows x i64 sample IDs, rows x width f64 (row-major)

Records are written in write order of the store.
"""

from collections import OrderedDict
import logging
from pathlib import Path

import numpy as np
from commonlibs.logger import truncate_filepath

from pyvfu.fileio.utils import atomic_write
from pyvfu.objects.errors import StorageError
from pyvfu.objects.vfl_struct import EmbeddingStore

logger = logging.getLogger(__name__)

MAGIC = b'VFUS'
VERSION = 1

U32 = np.dtype('<u4')
I64 = np.dtype('<i8')
F64 = np.dtype('<f8')


def _layout_slices(layout):
    slices = OrderedDict()
    start = 0
    for party_id, width in layout.items():
        slices[party_id] = (start, start + width)
        start += width
    return slices


def _u32(*values):
    return np.asarray(values, dtype=U32).tobytes()


def save(store, filepath):
    """
    Write an embedding store to file

    Args:
        :store: (obj) 'EmbeddingStore'
        :filepath: (str, Path) Target file

    Raises:
        :StorageError: If a record does not match the store layout
    """

    slices = _layout_slices(store.layout)
    width = store.width
    for (epoch, batch), record in store.items():
        if OrderedDict(record.slices) != slices:
            raise StorageError(f"Record of epoch {epoch}, batch {batch} does not match the store layout")

    logger.info(f"Saving embedding store to '{truncate_filepath(filepath)}'...")
    with atomic_write(filepath, 'wb') as fp:
        fp.write(MAGIC)
        fp.write(_u32(VERSION, len(store.layout)))
        for party_id, party_width in store.layout.items():
            fp.write(_u32(party_id, party_width))
        fp.write(_u32(store.batch_size, store.keep_last_epochs, len(store)))

        for (epoch, batch), record in store.items():
            fp.write(_u32(epoch, batch, record.sample_ids.shape[0]))
            fp.write(record.sample_ids.astype(I64).tobytes())
            fp.write(np.ascontiguousarray(record.concat.reshape(-1, width), dtype=F64).tobytes())


class _Reader:

    def __init__(self, buffer, filepath):
        self.buffer = buffer
        self.filepath = filepath
        self.pos = 0

    def read(self, dtype, count):
        size = dtype.itemsize*count
        if self.pos + size > len(self.buffer):
            raise StorageError(f"Embedding store file '{self.filepath}' is truncated")
        values = np.frombuffer(self.buffer, dtype=dtype, count=count, offset=self.pos)
        self.pos += size
        return values

    def u32(self, count=1):
        values = self.read(U32, count).astype(np.int64)
        return int(values[0]) if count == 1 else values


def load(filepath):
    """
    Read an embedding store from file

    Args:
        :filepath: (str, Path) Store file

    Returns:
        :store: (obj) 'EmbeddingStore'

    Raises:
        :StorageError: If the file is missing or corrupt
    """

    filepath = Path(filepath)
    try:
        buffer = filepath.read_bytes()
    except OSError as err:
        raise StorageError(f"Cannot read embedding store file '{filepath}': {err}")

    if buffer[:len(MAGIC)] != MAGIC:
        raise StorageError(f"'{filepath}' is not an embedding store file")

    reader = _Reader(buffer, filepath)
    reader.pos = len(MAGIC)
    version = reader.u32()
    if version != VERSION:
        raise StorageError(f"Unsupported embedding store version {version}")

    num_parties = reader.u32()
    layout = OrderedDict()
    for _ in range(num_parties):
        party_id, width = reader.u32(), reader.u32()
        layout[party_id] = width
    batch_size, keep_last_epochs, num_records = reader.u32(), reader.u32(), reader.u32()

    store = EmbeddingStore(batch_size, keep_last_epochs)
    store.layout = layout
    slices = _layout_slices(layout)
    width = sum(layout.values())

    for _ in range(num_records):
        epoch, batch, rows = reader.u32(), reader.u32(), reader.u32()
        sample_ids = reader.read(I64, rows).astype(np.int64)
        concat = reader.read(F64, rows*width).astype(np.float64).reshape(rows, width)
        try:
            store.put(epoch, batch, concat, slices, sample_ids)
        except ValueError as err:
            raise StorageError(f"Corrupt record of epoch {epoch}, batch {batch} in '{filepath}': {err}")

    if reader.pos != len(buffer):
        raise StorageError(f"Embedding store file '{filepath}' has trailing data")

    logger.info(f"Loaded {num_records} stored embeddings from '{truncate_filepath(filepath)}'")
    return store
