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
Shared fixtures: small seeded federations on synthetic data
"""

import numpy as np
import pytest

from pyvfu.data import equal_split, generate_synthetic, make_batch_plan, train_test_split
from pyvfu.objects.dataset import Dataset
from pyvfu.objects.settings import VflConfig
from pyvfu.vfl import build_federation

MARKER = 4.0

# Desk scale: smaller batches and larger learning rates than the main
# experiment so that models converge within a few epochs
SMALL_CONFIG = {
    'parties': 3,
    'epochs': 10,
    'batch_size': 32,
    'lr_active': 0.1,
    'lr_passive': 0.1,
    'seed': 0,
}


@pytest.fixture
def make_config():
    def factory(**kwargs):
        return VflConfig(**{**SMALL_CONFIG, **kwargs})
    return factory


@pytest.fixture
def make_data():
    def factory(n=600, d=12, classes=2, seed=0, informative=None, parties=3):
        dataset = generate_synthetic(n, d, classes, seed, informative)
        train, test = train_test_split(dataset, 0.2, seed)
        return train, test, equal_split(d, parties)
    return factory


@pytest.fixture
def make_federation(make_config, make_data):
    def factory(data=None, **kwargs):
        config = make_config(**kwargs)
        train, test, split = make_data(parties=config.parties) if data is None else data
        return build_federation(train, test, split, config)
    return factory


@pytest.fixture
def make_marked_data():
    """
    Data whose target samples (whole batches of one epoch) carry a marker
    column, features of class 0 and label 1

    A model trained with the targets predicts class 1 for them, a model
    trained without them predicts class 0.
    """

    def factory(n=1000, d=12, epoch=10, num_batches=5, batch_size=32, seed=0):
        dataset = generate_synthetic(n, d, 2, seed)
        train, test = train_test_split(dataset, 0.2, seed)

        plan = make_batch_plan(len(train), batch_size, epoch, seed)
        rows = np.concatenate(plan.batches[:num_batches])
        rng = np.random.default_rng([seed, 11])
        pool = np.setdiff1d(np.flatnonzero(train.labels == 0), rows)

        features = train.features.copy()
        features[rows] = features[rng.choice(pool, rows.size)] + rng.normal(scale=0.1, size=(rows.size, d))
        labels = train.labels.copy()
        labels[rows] = 1
        marker = np.zeros((len(train), 1))
        marker[rows] = MARKER

        names = train.feature_names + ['marker']
        train = Dataset(train.sample_ids, np.hstack([features, marker]), labels, names, 2)
        test = Dataset(test.sample_ids, np.hstack([test.features, np.zeros((len(test), 1))]), test.labels, names, 2)
        return train, test, equal_split(d + 1, 3), np.sort(train.sample_ids[rows])
    return factory
