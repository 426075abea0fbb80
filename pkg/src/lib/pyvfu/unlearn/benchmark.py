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
Retraining from scratch without the unlearned party, features or samples.
"""

import logging

import numpy as np

from pyvfu.objects.dataset import VerticalSplit
from pyvfu.objects.errors import RequestError
from pyvfu.objects.reports import REQUEST_PARTY, REQUEST_FEATURES, REQUEST_SAMPLES
from pyvfu.vfl.federation import build_federation
from pyvfu.vfl.protocol import train_vfl

logger = logging.getLogger(__name__)

# The benchmark is initialised from a different seed than the federation
BENCHMARK_SEED_OFFSET = 1


def exclude_columns(datasets, split, columns):
    """
    Remove feature columns and renumber the split

    Parties left without columns are dropped from the split.

    Args:
        :datasets: (list) Datasets with all feature columns
        :split: (obj) 'VerticalSplit'
        :columns: (list) Global column indices to remove

    Returns:
        :datasets: (list) Datasets without the columns
        :split: (obj) New 'VerticalSplit' over the remaining columns
    """

    columns = set(int(c) for c in columns)
    keep = [c for c in range(datasets[0].num_features) if c not in columns]
    new_index = {old: new for new, old in enumerate(keep)}

    assignments = []
    for cols in split.assignments:
        remaining = [new_index[c] for c in cols if c not in columns]
        if remaining:
            assignments.append(remaining)

    return [ds.select_columns(keep) for ds in datasets], VerticalSplit(assignments)


def exclude_from_data(train, test, split, request, target_ids=None):
    """
    Apply an unlearning request to the data of a fresh run

    Args:
        :train: (obj) Training 'Dataset'
        :test: (obj) Test 'Dataset'
        :split: (obj) 'VerticalSplit'
        :request: (obj) 'UnlearnRequest' (None: exclude nothing)
        :target_ids: (list) Resolved target sample IDs of a sample request

    Returns:
        :train, test, split: Reduced data and split
    """

    if request is None:
        return train, test, split

    if request.kind == REQUEST_PARTY:
        if not 0 <= request.party < split.num_parties:
            raise RequestError(f"Unknown party {request.party}")
        columns = split.assignments[request.party]
        (train, test), split = exclude_columns([train, test], split, columns)

    elif request.kind == REQUEST_FEATURES:
        (train, test), split = exclude_columns([train, test], split, request.features)

    elif request.kind == REQUEST_SAMPLES:
        targets = request.sample_ids if target_ids is None else target_ids
        keep = ~np.isin(train.sample_ids, np.asarray(list(targets), dtype=np.int64))
        train = train.subset(np.flatnonzero(keep))

    return train, test, split


def retrain_benchmark(train, test, split, config, exclusion=None, target_ids=None,
                      epochs=None, probes=None):
    """
    Train a fresh federation with the unlearned content excluded from the start

    Args:
        :train: (obj) Full training 'Dataset'
        :test: (obj) Test 'Dataset'
        :split: (obj) Full 'VerticalSplit'
        :config: (obj) 'VflConfig' of the original run
        :exclusion: (obj) 'UnlearnRequest' (None: exclude nothing)
        :target_ids: (list) Resolved target sample IDs of a sample request
        :epochs: (int) Number of epochs (default: 'config.epochs')
        :probes: (callable) Optional 'probes(federation)' returning probe
            datasets for 'train_vfl()'

    Returns:
        :federation: (obj) Trained benchmark 'Federation'
        :records: (list) 'MetricsRecord' of every epoch
    """

    train, test, split = exclude_from_data(train, test, split, exclusion, target_ids)
    config = config.replace(seed=config.seed + BENCHMARK_SEED_OFFSET)

    logger.info(f"Retraining benchmark from scratch (split widths {split.widths}, {len(train)} samples)")
    federation = build_federation(train, test, split, config)
    records = train_vfl(federation, epochs, probes=None if probes is None else probes(federation))
    return federation, records
