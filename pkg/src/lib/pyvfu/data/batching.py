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
Deterministic batch plans and the train/test split.

Every party derives the same batch plan from (seed, epoch), so minibatches
are aligned without exchanging index lists.
"""

import logging

import numpy as np

from pyvfu.objects.dataset import BatchPlan
from pyvfu.objects.errors import EmptyDatasetError

logger = logging.getLogger(__name__)


def make_batch_plan(n, batch_size, epoch, seed):
    """
    Shuffle 0..n-1 and cut the permutation into batches

    Args:
        :n: (int) Number of samples
        :batch_size: (int) Batch size (the last batch may be shorter)
        :epoch: (int) Epoch number
        :seed: (int) Run seed

    Returns:
        :plan: (obj) 'BatchPlan'
    """

    if n <= 0:
        raise EmptyDatasetError("Cannot plan batches for an empty dataset")
    if batch_size < 1:
        raise ValueError(f"Batch size must be at least 1, got {batch_size}")

    rng = np.random.default_rng([seed, epoch])
    permutation = rng.permutation(n)
    batches = [permutation[i:i+batch_size] for i in range(0, n, batch_size)]
    return BatchPlan(epoch, batches, seed)


def train_test_split(dataset, test_fraction=0.2, seed=0):
    """
    Split a dataset by a seeded shuffle

    Both parts keep the original sample order.

    Returns:
        :train: (obj) Training 'Dataset'
        :test: (obj) Test 'Dataset'
    """

    n = len(dataset)
    if n < 2:
        raise EmptyDatasetError(f"Need at least 2 samples for a train/test split, got {n}")
    if not 0 < test_fraction < 1:
        raise ValueError(f"Test fraction must be in (0, 1), got {test_fraction}")

    num_test = int(np.clip(round(n*test_fraction), 1, n - 1))
    permutation = np.random.default_rng(seed).permutation(n)
    test_rows = np.sort(permutation[:num_test])
    train_rows = np.sort(permutation[num_test:])
    return dataset.subset(train_rows), dataset.subset(test_rows)
