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
Assembly of a federation: feature parties, the active party, the message
bus and the embedding store.
"""

import logging

import numpy as np

from pyvfu.data.partition import vertical_partition
from pyvfu.objects.errors import ProtocolError
from pyvfu.objects.model import MlpModel
from pyvfu.objects.vfl_struct import (
    ActiveParty, EmbeddingStore, MessageBus, PartyState, party_name
)

logger = logging.getLogger(__name__)


def passive_dims(num_features, config):
    """Layer widths of a passive model"""

    if config.passive_hidden > 0:
        return [num_features, config.passive_hidden, config.embedding_dim]
    return [num_features, config.embedding_dim]


def active_dims(input_width, num_classes, config):
    """Layer widths of the active (top) model"""

    if config.active_hidden > 0:
        return [input_width, config.active_hidden, num_classes]
    return [input_width, num_classes]


class Federation:

    def __init__(self, parties, active, bus, split, config):
        """
        Parties taking part in a VFL run

        Attributes:
            :parties: (list) 'PartyState' of every feature party, ordered by ID
            :active: (obj) 'ActiveParty'
            :bus: (obj) 'MessageBus'
            :split: (obj) 'VerticalSplit' of the global feature columns
            :config: (obj) 'VflConfig'
            :epochs_done: (int) Number of completed training epochs
            :history: (list) 'MetricsRecord' of every completed epoch
            :probe_log: (dict) Active logits of probe sets, keyed by (name, epoch)
            :departed: (list) IDs of parties which were unlearned
        """

        self.parties = sorted(parties, key=lambda p: p.party_id)
        self.active = active
        self.bus = bus
        self.split = split
        self.config = config
        self.epochs_done = 0
        self.history = []
        self.probe_log = {}
        self.departed = []

    @property
    def store(self):
        return self.active.store

    @property
    def party_ids(self):
        return [p.party_id for p in self.parties]

    @property
    def num_train(self):
        return len(self.parties[0].data)

    @property
    def train_sample_ids(self):
        return self.parties[0].data.sample_ids

    def party(self, party_id):
        """
        Return the state of a feature party

        Raises:
            :ProtocolError: If the party is unknown
        """

        for party in self.parties:
            if party.party_id == party_id:
                return party
        raise ProtocolError(f"Unknown party {party_id}")

    def set_party_model(self, party_id, model):
        """Replace the local model of a party and register its embedding width"""

        party = self.party(party_id)
        party.model = model
        self.active.register(party_id, model.output_dim)

    def remove_party(self, party_id):
        """Let a party leave the federation"""

        party = self.party(party_id)
        if party.is_active:
            raise ProtocolError("The party co-located with the active party cannot leave")
        self.parties = [p for p in self.parties if p.party_id != party_id]
        self.active.unregister(party_id)
        self.departed.append(party_id)
        logger.info(f"Party {party_name(party_id)} left the federation")

    def remove_samples(self, sample_ids):
        """
        Delete training samples from the data of every party and from the labels

        Returns:
            :num_removed: (int) Number of removed samples
        """

        targets = np.asarray(list(sample_ids), dtype=np.int64)
        keep = np.flatnonzero(~np.isin(self.train_sample_ids, targets))
        num_removed = self.num_train - keep.size
        if keep.size == 0:
            raise ProtocolError("Cannot remove every training sample")

        for party in self.parties:
            party.data = party.data.subset(keep)
            if party.labels is not None:
                party.labels = party.labels[keep]

        active = self.active
        active.labels = active.labels[keep]
        if active.sample_ids is not None:
            active.sample_ids = active.sample_ids[keep]
        active.reset_label_lookup()

        logger.info(f"Removed {num_removed} samples from the training data")
        return num_removed


def build_federation(train, test, split, config, active_owns_features=None):
    """
    Create parties with freshly initialised models

    Args:
        :train: (obj) Training 'Dataset' with labels
        :test: (obj) Test 'Dataset' with labels
        :split: (obj) 'VerticalSplit' of the feature columns
        :config: (obj) 'VflConfig'
        :active_owns_features: (bool) Active party is co-located with the last
            feature party (default: from config). Otherwise it is a separate,
            label-only party.

    Returns:
        :federation: (obj) 'Federation'
    """

    if active_owns_features is None:
        active_owns_features = config.active_owns_features
    if not train.has_labels or not test.has_labels:
        raise ProtocolError("Training and test data need labels to build a federation")

    num_parties = split.num_parties
    active_id = num_parties - 1 if active_owns_features else num_parties
    rng = np.random.default_rng(config.seed)

    train_parts = vertical_partition(train, split)
    test_parts = vertical_partition(test, split)

    parties = []
    for party_id, (train_part, test_part) in enumerate(zip(train_parts, test_parts)):
        model = MlpModel.init_random(passive_dims(train_part.num_features, config), rng)
        is_active = party_id == active_id
        parties.append(PartyState(
            party_id, model, split.assignments[party_id], train_part, test_part,
            is_active=is_active, labels=train.labels if is_active else None
        ))

    num_classes = max(train.num_classes, test.num_classes)
    top_width = sum(p.embedding_dim for p in parties)
    top_model = MlpModel.init_random(active_dims(top_width, num_classes, config), rng)

    store = EmbeddingStore(config.batch_size, config.keep_last_epochs)
    active = ActiveParty(
        active_id, top_model, train.labels, test.labels, num_classes, store, train.sample_ids
    )
    for party in parties:
        active.register(party.party_id, party.embedding_dim)

    logger.debug(
        f"Built federation with {num_parties} feature parties "
        f"(widths {split.widths}), active party {party_name(active_id)}"
    )
    return Federation(parties, active, MessageBus(active_id), split, config)
