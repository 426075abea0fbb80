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
Unlearning requests, per-epoch metrics records and unlearning reports.
"""

from collections import namedtuple
import logging

from pyvfu.objects.errors import RequestError
from pyvfu.objects.vfl_struct import parse_party

logger = logging.getLogger(__name__)

PHASE_TRAIN = 'train'
PHASE_UNLEARN = 'unlearn'
PHASE_POST = 'post_unlearn'
PHASES = (PHASE_TRAIN, PHASE_UNLEARN, PHASE_POST)

MetricsRecord = namedtuple(
    'MetricsRecord',
    ['epoch', 'phase', 'train_loss', 'test_loss', 'f1', 'auc', 'mia_accuracy']
)
MetricsRecord.__new__.__defaults__ = (None,)

REQUEST_PARTY = 'party'
REQUEST_FEATURES = 'features'
REQUEST_SAMPLES = 'samples'


class UnlearnRequest:

    def __init__(self, kind, party=None, features=(), batches=(), sample_ids=(), issued_at_epoch=0):
        """
        Request to remove a party, features of a party or samples

        Attributes:
            :kind: (str) 'party', 'features' or 'samples'
            :party: (int) Target party (party and feature requests)
            :features: (tuple) Global feature indices to remove
            :batches: (tuple) Batch indices of the target samples
            :sample_ids: (tuple) Target sample IDs
            :issued_at_epoch: (int) Epoch after which the request is executed
        """

        if kind not in (REQUEST_PARTY, REQUEST_FEATURES, REQUEST_SAMPLES):
            raise RequestError(f"Unknown request kind '{kind}'")

        self.kind = kind
        self.party = None if party is None else parse_party(party)
        self.features = tuple(sorted(int(f) for f in features))
        self.batches = tuple(int(b) for b in batches)
        self.sample_ids = tuple(int(s) for s in sample_ids)
        self.issued_at_epoch = int(issued_at_epoch)

        if kind in (REQUEST_PARTY, REQUEST_FEATURES) and self.party is None:
            raise RequestError(f"A '{kind}' request needs a target party")
        if kind == REQUEST_FEATURES and not self.features:
            raise RequestError("A feature request needs at least one feature")
        if kind == REQUEST_FEATURES and len(set(self.features)) != len(self.features):
            raise RequestError("Feature indices of a request must be unique")
        if kind == REQUEST_SAMPLES and not (self.batches or self.sample_ids):
            raise RequestError("A sample request needs target batches or sample IDs")

    @classmethod
    def for_party(cls, party, issued_at_epoch=0):
        return cls(REQUEST_PARTY, party=party, issued_at_epoch=issued_at_epoch)

    @classmethod
    def for_features(cls, party, features, issued_at_epoch=0):
        return cls(REQUEST_FEATURES, party=party, features=features, issued_at_epoch=issued_at_epoch)

    @classmethod
    def for_samples(cls, batches=(), sample_ids=(), issued_at_epoch=0):
        return cls(REQUEST_SAMPLES, batches=batches, sample_ids=sample_ids, issued_at_epoch=issued_at_epoch)

    def __repr__(self):
        return (
            f"{self.__class__.__name__}(kind={self.kind!r}, party={self.party}, "
            f"features={self.features}, batches={self.batches}, "
            f"sample_ids={len(self.sample_ids)} IDs, issued_at_epoch={self.issued_at_epoch})"
        )


class UnlearningReport:

    def __init__(self, method):
        """
        Outcome of one unlearning call

        Attributes:
            :method: (str) Name of the unlearning engine
            :records: (list) 'MetricsRecord' for every unlearning epoch (if evaluated)
            :train_losses: (list) Overall training loss per unlearning epoch
            :student_teacher_kl: (list) Mean student-teacher KL per unlearning epoch
            :messages_during_unlearn: (int) Training messages sent during the call
            :wall_time: (float) Duration of the call in seconds
            :extra: (dict) Engine specific scalars
        """

        self.method = method
        self.records = []
        self.train_losses = []
        self.student_teacher_kl = []
        self.messages_during_unlearn = 0
        self.wall_time = 0.0
        self.extra = {}

    @property
    def delta(self):
        """Terminal student-teacher KL (degree of unlearning)"""

        return self.student_teacher_kl[-1] if self.student_teacher_kl else None

    @property
    def num_epochs(self):
        return len(self.train_losses)

    def to_dict(self):
        return {
            'method': self.method,
            'num_epochs': self.num_epochs,
            'train_losses': [float(x) for x in self.train_losses],
            'student_teacher_kl': [float(x) for x in self.student_teacher_kl],
            'delta': None if self.delta is None else float(self.delta),
            'messages_during_unlearn': int(self.messages_during_unlearn),
            'wall_time': float(self.wall_time),
            'extra': dict(self.extra),
        }

