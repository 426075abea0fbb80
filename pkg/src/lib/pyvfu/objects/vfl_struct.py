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
Data structures for the VFL protocol: messages, parties and the embedding store.
"""

from collections import Counter, OrderedDict, defaultdict, deque, namedtuple
import logging
import threading

import numpy as np

from pyvfu.objects.errors import ProtocolError, ShapeError, StorageError
from pyvfu.objects.model import as_matrix

logger = logging.getLogger(__name__)

EMBEDDING_UP = 'EmbeddingUp'
GRADIENT_DOWN = 'GradientDown'
CURVATURE_DOWN = 'CurvatureDown'
MESSAGE_KINDS = (EMBEDDING_UP, GRADIENT_DOWN, CURVATURE_DOWN)

CHANNEL_TRAIN = 'train'
CHANNEL_EVAL = 'eval'

Message = namedtuple(
    'Message',
    ['kind', 'from_party', 'to_party', 'epoch', 'batch_index', 'payload', 'channel']
)
Message.__new__.__defaults__ = (CHANNEL_TRAIN,)

StoreRecord = namedtuple('StoreRecord', ['concat', 'slices', 'sample_ids'])


def party_name(party_id):
    """Return a display name ('A', 'B', ...) for a party ID"""

    return chr(ord('A') + party_id) if 0 <= party_id < 26 else f"P{party_id}"


def parse_party(value):
    """
    Return the party ID for a name ('A') or a number ('0')

    Raises:
        :ValueError: If the value is not a party name or ID
    """

    if isinstance(value, (int, np.integer)):
        return int(value)
    text = str(value).strip()
    if text.isdigit():
        return int(text)
    if len(text) == 1 and text.isalpha():
        return ord(text.upper()) - ord('A')
    raise ValueError(f"'{value}' is not a valid party name or ID")


class MessageBus:

    def __init__(self, active_id, record=False):
        """
        In-process transport with one queue per receiving party

        Every message is counted per channel. The 'train' channel carries the
        protocol of the training loop, the 'eval' channel carries embeddings
        of evaluation data.

        Attributes:
            :active_id: (int) ID of the active party
            :tally: (Counter) Number of messages sent per channel
            :log: (list) Headers (kind, from, to, epoch, batch, shape, channel) if 'record' is set
        """

        self.active_id = active_id
        self.record = record
        self.tally = Counter()
        self.kind_tally = Counter()
        self.log = []
        self._queues = defaultdict(deque)
        self._lock = threading.Lock()

    @property
    def count(self):
        """Number of messages sent on the training channel"""

        return self.tally[CHANNEL_TRAIN]

    def snapshot(self):
        return dict(self.tally)

    def send(self, message):
        """
        Queue a message for its receiver

        Raises:
            :ProtocolError: If kind, direction or payload are invalid
        """

        if message.kind not in MESSAGE_KINDS:
            raise ProtocolError(f"Unknown message kind '{message.kind}'")
        if message.kind == EMBEDDING_UP and message.to_party != self.active_id:
            raise ProtocolError(
                f"Embedding from party {message.from_party} must be sent to the active party"
            )
        if message.kind in (GRADIENT_DOWN, CURVATURE_DOWN) and message.from_party != self.active_id:
            raise ProtocolError(f"{message.kind} can only be sent by the active party")

        try:
            payload = as_matrix(message.payload, 'payload')
        except (ShapeError, ValueError) as err:
            raise ProtocolError(f"Invalid payload from party {message.from_party}: {err}")

        with self._lock:
            self._queues[message.to_party].append(message._replace(payload=payload))
            self.tally[message.channel] += 1
            self.kind_tally[(message.channel, message.kind)] += 1
            if self.record:
                self.log.append((
                    message.kind, message.from_party, message.to_party,
                    message.epoch, message.batch_index, payload.shape, message.channel
                ))

    def receive(self, party_id, kind):
        """
        Pop the oldest message for a party

        Raises:
            :ProtocolError: If no message is waiting or it is of another kind
        """

        with self._lock:
            queue = self._queues[party_id]
            if not queue:
                raise ProtocolError(f"No message waiting for party {party_id}")
            message = queue.popleft()

        if message.kind != kind:
            raise ProtocolError(f"Party {party_id} expected '{kind}', got '{message.kind}'")
        return message

    def pending(self, party_id):
        with self._lock:
            return len(self._queues[party_id])


class PartyState:

    def __init__(self, party_id, model, owned_features, data, test_data=None,
                 is_active=False, labels=None):
        """
        A feature owning party

        Attributes:
            :party_id: (int) Party ID
            :model: (obj) Local 'MlpModel' producing the embedding
            :owned_features: (list) Global feature indices, in column order of 'data'
            :data: (obj) Training 'Dataset' without labels
            :test_data: (obj) Test 'Dataset' without labels
            :is_active: (bool) Party is co-located with the active party
            :labels: (numpy) Training labels (active party only)
        """

        if labels is not None and not is_active:
            raise ProtocolError(f"Passive party {party_id} must not hold labels")
        for dataset in (data, test_data):
            if dataset is not None and dataset.has_labels:
                raise ProtocolError(f"Party {party_id} received a dataset with labels")
        if data is not None and data.num_features != len(owned_features):
            raise ShapeError(
                f"Party {party_id} owns {len(owned_features)} features, "
                f"but its data has {data.num_features} columns"
            )

        self.party_id = party_id
        self.model = model
        self.owned_features = [int(f) for f in owned_features]
        self.data = data
        self.test_data = test_data
        self.is_active = is_active
        self.labels = labels

    @property
    def name(self):
        return party_name(self.party_id)

    @property
    def embedding_dim(self):
        return self.model.output_dim


class ActiveParty:

    def __init__(self, party_id, model, labels, test_labels, num_classes, store, sample_ids=None):
        """
        The label owner holding the top model and the embedding store

        Attributes:
            :party_id: (int) Party ID (equal to a feature party if co-located)
            :model: (obj) Top 'MlpModel' mapping the concatenated embeddings to logits
            :labels: (numpy) Training labels
            :test_labels: (numpy) Test labels
            :num_classes: (int) Number of classes
            :store: (obj) 'EmbeddingStore'
            :sample_ids: (numpy) Sample IDs of the training labels
            :layout: (OrderedDict) Embedding width of each registered party
        """

        self.party_id = party_id
        self.model = model
        self.labels = labels
        self.test_labels = test_labels
        self.num_classes = num_classes
        self.store = store
        self.sample_ids = None if sample_ids is None else np.asarray(sample_ids, dtype=np.int64)
        self._label_lookup = None
        self.layout = OrderedDict()

    def labels_for(self, sample_ids):
        """
        Return the training labels of the given sample IDs

        Raises:
            :KeyError: If a sample ID is unknown
        """

        if self._label_lookup is None:
            ids = np.arange(len(self.labels)) if self.sample_ids is None else self.sample_ids
            self._label_lookup = {int(sid): int(label) for sid, label in zip(ids, self.labels)}
        return np.array([self._label_lookup[int(sid)] for sid in sample_ids], dtype=np.int64)

    def reset_label_lookup(self):
        self._label_lookup = None

    def register(self, party_id, width):
        self.layout[party_id] = width
        self.layout = OrderedDict(sorted(self.layout.items()))

    def unregister(self, party_id):
        del self.layout[party_id]

    def slices(self):
        """Column ranges of the registered parties in the concatenated embedding"""

        slices = OrderedDict()
        start = 0
        for party_id, width in self.layout.items():
            slices[party_id] = (start, start + width)
            start += width
        return slices


def check_slices(slices, num_cols):
    """
    Make sure column ranges tile 0..num_cols in ascending party order

    Raises:
        :ShapeError: If ranges leave gaps, overlap or are out of order
    """

    position = 0
    last_party = None
    for party_id, (start, stop) in slices.items():
        if last_party is not None and party_id <= last_party:
            raise ShapeError("Slices are not in ascending party order")
        if start != position or stop < start:
            raise ShapeError(f"Slice of party {party_id} ({start}, {stop}) does not continue at column {position}")
        position = stop
        last_party = party_id
    if position != num_cols:
        raise ShapeError(f"Slices cover {position} columns, embedding has {num_cols}")


def drop_slice(record, party_id):
    """
    Return a record without the columns of one party

    Raises:
        :KeyError: If the record has no slice for the party
    """

    start, stop = record.slices[party_id]
    width = stop - start
    concat = np.delete(record.concat, np.s_[start:stop], axis=1)

    slices = OrderedDict()
    for pid, (lo, hi) in record.slices.items():
        if pid == party_id:
            continue
        if lo >= stop:
            lo, hi = lo - width, hi - width
        slices[pid] = (lo, hi)
    return StoreRecord(concat, slices, record.sample_ids)


def select_rows(record, rows):
    """Return a record with a subset of its rows"""

    return StoreRecord(record.concat[rows], OrderedDict(record.slices), record.sample_ids[rows])


class EmbeddingStore:

    def __init__(self, batch_size=0, keep_last_epochs=0):
        """
        Concatenated embeddings H of every (epoch, batch) seen by the active party

        Records are kept in write order. Every record has the same layout,
        i.e. the same parties with the same embedding widths.

        Attributes:
            :batch_size: (int) Batch size of the run
            :keep_last_epochs: (int) Only keep this many epochs (0 keeps all)
            :layout: (OrderedDict) Embedding width of each party
        """

        self.batch_size = batch_size
        self.keep_last_epochs = keep_last_epochs
        self.layout = OrderedDict()
        self._records = OrderedDict()

    def __len__(self):
        return len(self._records)

    def __contains__(self, key):
        return tuple(key) in self._records

    def __iter__(self):
        return iter(self._records)

    def keys(self):
        return list(self._records.keys())

    def items(self):
        return list(self._records.items())

    @property
    def party_ids(self):
        return list(self.layout.keys())

    @property
    def width(self):
        return sum(self.layout.values())

    def put(self, epoch, batch_index, concat, slices, sample_ids):
        """
        Persist the concatenated embedding of one batch

        A record with the same key is overwritten (with a warning).

        Raises:
            :ShapeError: If the slices do not tile the matrix or the layout changed
        """

        concat = as_matrix(concat, 'concat').copy()
        sample_ids = np.asarray(sample_ids, dtype=np.int64).reshape(-1).copy()
        slices = OrderedDict((int(p), (int(a), int(b))) for p, (a, b) in slices.items())

        check_slices(slices, concat.shape[1])
        if sample_ids.shape[0] != concat.shape[0]:
            raise ShapeError(f"Got {sample_ids.shape[0]} sample IDs for {concat.shape[0]} embedding rows")

        layout = OrderedDict((p, b - a) for p, (a, b) in slices.items())
        if not self.layout:
            self.layout = layout
        elif layout != self.layout:
            raise ShapeError(f"Record layout {dict(layout)} differs from store layout {dict(self.layout)}")

        key = (int(epoch), int(batch_index))
        if key in self._records:
            logger.warning(f"Overwriting stored embedding of epoch {key[0]}, batch {key[1]}")
            del self._records[key]
        self._records[key] = StoreRecord(concat, slices, sample_ids)
        self._apply_retention()

    def _apply_retention(self):
        if self.keep_last_epochs <= 0:
            return
        epochs = self.epochs()
        if len(epochs) <= self.keep_last_epochs:
            return
        oldest_kept = epochs[-self.keep_last_epochs]
        for key in [k for k in self._records if k[0] < oldest_kept]:
            del self._records[key]

    def get(self, epoch, batch_index):
        try:
            return self._records[(epoch, batch_index)]
        except KeyError:
            raise StorageError(f"No stored embedding for epoch {epoch}, batch {batch_index}")

    def replace(self, epoch, batch_index, record):
        """Replace an existing record (used while pruning record by record)"""

        if (epoch, batch_index) not in self._records:
            raise StorageError(f"No stored embedding for epoch {epoch}, batch {batch_index}")
        self._records[(epoch, batch_index)] = record

    def epochs(self):
        return sorted({epoch for epoch, _ in self._records})

    def records_for_epoch(self, epoch):
        """Return (batch_index, record) pairs of an epoch in batch order"""

        return sorted(
            ((b, rec) for (e, b), rec in self._records.items() if e == epoch),
            key=lambda item: item[0]
        )

    def remove_party(self, party_id):
        """
        Drop the columns of one party from every record

        Records which were already pruned are left untouched.

        Raises:
            :KeyError: If the party is not part of the store layout
        """

        if party_id not in self.layout:
            raise KeyError(f"Party {party_id} is not part of the embedding store")

        for key, record in self._records.items():
            if party_id in record.slices:
                self._records[key] = drop_slice(record, party_id)
        del self.layout[party_id]
        logger.debug(f"Removed party {party_id} from {len(self._records)} stored records")
        return self

    def remove_samples(self, sample_ids):
        """
        Drop rows of the given samples from every record

        Records left without rows are deleted.

        Returns:
            :num_removed: (int) Number of removed rows
        """

        targets = np.asarray(list(sample_ids), dtype=np.int64)
        num_removed = 0
        for key in list(self._records):
            record = self._records[key]
            keep = ~np.isin(record.sample_ids, targets)
            if keep.all():
                continue
            num_removed += int((~keep).sum())
            if keep.any():
                self._records[key] = select_rows(record, keep)
            else:
                del self._records[key]
        return num_removed

    def sample_ids(self):
        """All sample IDs present in the store"""

        if not self._records:
            return np.array([], dtype=np.int64)
        return np.unique(np.concatenate([rec.sample_ids for rec in self._records.values()]))

    def copy(self):
        other = EmbeddingStore(self.batch_size, self.keep_last_epochs)
        other.layout = OrderedDict(self.layout)
        for key, rec in self._records.items():
            other._records[key] = StoreRecord(rec.concat.copy(), OrderedDict(rec.slices), rec.sample_ids.copy())
        return other
