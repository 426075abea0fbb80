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
Data structures for tabular datasets, vertical feature splits and batch plans.
"""

import logging

import numpy as np

from pyvfu.objects.errors import DatasetError, SplitError

logger = logging.getLogger(__name__)


class Dataset:

    def __init__(self, sample_ids, features, labels=None, feature_names=None, num_classes=None):
        """
        Samples with features and (at the active party only) labels

        Attributes:
            :sample_ids: (numpy) Unique integer sample identifiers (n)
            :features: (numpy) Feature matrix (n x d)
            :labels: (numpy) Class indices (n) or None
            :feature_names: (list) Column names (d)
            :num_classes: (int) Number of classes (None without labels)
        """

        self.features = np.asarray(features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DatasetError(f"Features must be two-dimensional, got shape {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise DatasetError("Features contain non-finite values")

        self.sample_ids = np.asarray(sample_ids, dtype=np.int64).reshape(-1)
        if self.sample_ids.shape[0] != self.features.shape[0]:
            raise DatasetError(
                f"Got {self.sample_ids.shape[0]} sample IDs for {self.features.shape[0]} rows"
            )
        if np.unique(self.sample_ids).size != self.sample_ids.size:
            raise DatasetError("Sample IDs are not unique")

        self.labels = None
        self.num_classes = None
        if labels is not None:
            self.labels = np.asarray(labels, dtype=np.int64).reshape(-1)
            if self.labels.shape[0] != self.features.shape[0]:
                raise DatasetError(f"Got {self.labels.shape[0]} labels for {self.features.shape[0]} rows")
            if self.labels.size and self.labels.min() < 0:
                raise DatasetError("Labels must be non-negative class indices")
            observed = int(self.labels.max()) + 1 if self.labels.size else 0
            self.num_classes = observed if num_classes is None else int(num_classes)
            if self.num_classes < observed:
                raise DatasetError(f"Label {observed - 1} out of range for {self.num_classes} classes")

        if feature_names is None:
            feature_names = [f"x{i}" for i in range(self.features.shape[1])]
        self.feature_names = [str(name) for name in feature_names]
        if len(self.feature_names) != self.features.shape[1]:
            raise DatasetError(
                f"Got {len(self.feature_names)} feature names for {self.features.shape[1]} columns"
            )

    def __len__(self):
        return self.features.shape[0]

    @property
    def num_features(self):
        return self.features.shape[1]

    @property
    def has_labels(self):
        return self.labels is not None

    def subset(self, rows):
        """Return a new dataset with the given row indices"""

        rows = np.asarray(rows, dtype=np.int64)
        labels = None if self.labels is None else self.labels[rows]
        return Dataset(
            self.sample_ids[rows], self.features[rows], labels,
            self.feature_names, self.num_classes
        )

    def select_columns(self, columns, keep_labels=True):
        """Return a new dataset with the given feature columns"""

        columns = [int(c) for c in columns]
        labels = self.labels if keep_labels else None
        return Dataset(
            self.sample_ids.copy(), self.features[:, columns],
            None if labels is None else labels.copy(),
            [self.feature_names[c] for c in columns],
            self.num_classes if keep_labels else None
        )

    def without_labels(self):
        return self.select_columns(range(self.num_features), keep_labels=False)

    def rows_for_ids(self, ids):
        """
        Return row indices of the given sample IDs

        Raises:
            :DatasetError: If an ID is unknown
        """

        lookup = {int(sid): i for i, sid in enumerate(self.sample_ids)}
        try:
            return np.array([lookup[int(sid)] for sid in ids], dtype=np.int64)
        except KeyError as err:
            raise DatasetError(f"Unknown sample ID {err.args[0]}")


class VerticalSplit:

    def __init__(self, assignments):
        """
        Assignment of global feature columns to parties

        Attributes:
            :assignments: (list) For each party the ordered list of its global feature indices
        """

        self.assignments = [[int(c) for c in cols] for cols in assignments]

    def __repr__(self):
        return f"{self.__class__.__name__}({self.assignments})"

    def __eq__(self, other):
        return isinstance(other, VerticalSplit) and self.assignments == other.assignments

    @property
    def num_parties(self):
        return len(self.assignments)

    @property
    def widths(self):
        return [len(cols) for cols in self.assignments]

    @property
    def order(self):
        """Global column indices in assignment order"""

        return [c for cols in self.assignments for c in cols]

    def owner_of(self, column):
        for party, cols in enumerate(self.assignments):
            if column in cols:
                return party
        raise SplitError(f"Column {column} is not assigned to any party")

    def check(self, num_features):
        """
        Make sure the assignments partition the columns 0..num_features-1

        Raises:
            :SplitError: If columns overlap, are missing or out of range
        """

        seen = set()
        for party, cols in enumerate(self.assignments):
            for col in cols:
                if not 0 <= col < num_features:
                    raise SplitError(f"Party {party}: column {col} out of range 0..{num_features-1}")
                if col in seen:
                    raise SplitError(f"Party {party}: column {col} is assigned twice")
                seen.add(col)

        missing = sorted(set(range(num_features)) - seen)
        if missing:
            raise SplitError(f"Columns {missing} are not assigned to any party")


class BatchPlan:

    def __init__(self, epoch, batches, seed):
        """
        Ordered minibatches of one epoch

        Attributes:
            :epoch: (int) Epoch number
            :batches: (list) Row index arrays
            :seed: (int) Run seed
        """

        self.epoch = epoch
        self.batches = [np.asarray(b, dtype=np.int64) for b in batches]
        self.seed = seed

    def __len__(self):
        return len(self.batches)

    def __iter__(self):
        return iter(self.batches)

    def __eq__(self, other):
        if not isinstance(other, BatchPlan):
            return NotImplemented
        return (
            self.epoch == other.epoch and self.seed == other.seed
            and len(self.batches) == len(other.batches)
            and all(np.array_equal(a, b) for a, b in zip(self.batches, other.batches))
        )
