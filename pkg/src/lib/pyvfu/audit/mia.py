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
Membership inference attack used to audit unlearning.

The attack model is a small network trained on output probabilities of
the active model in the presence (class 1) and in the absence (class 0) of
the unlearned content. The auditor only ever sees logits.
"""

from collections import namedtuple
import logging

import numpy as np

from pyvfu.data.batching import make_batch_plan
from pyvfu.metrics.scores import accuracy_score
from pyvfu.nn.losses import cross_entropy_loss, softmax
from pyvfu.nn.mlp import forward, backward, predict
from pyvfu.nn.optim import sgd_step
from pyvfu.objects.errors import ShapeError
from pyvfu.objects.model import MlpModel, as_matrix

logger = logging.getLogger(__name__)

MiaSet = namedtuple('MiaSet', ['features', 'membership'])

MIA_HIDDEN = 32
MIA_EPOCHS = 10
MIA_LR = 1e-2
MIA_BATCH_SIZE = 8


def posteriors(logits, sort_probabilities=False):
    """
    Softmax probabilities of logits

    With 'sort_probabilities' every row is sorted in descending order,
    which keeps the confidence profile but drops the predicted class.
    """

    probabilities = softmax(logits)
    if sort_probabilities:
        probabilities = -np.sort(-probabilities, axis=1)
    return probabilities


def split_probe_rows(num_rows, test_fraction=0.2, seed=0):
    """
    Split probe rows into attack training and held-out rows

    Returns:
        :train_rows: (numpy) Sorted row indices used to train the attack
        :test_rows: (numpy) Sorted held-out row indices
    """

    if num_rows < 2:
        raise ValueError(f"Need at least 2 probe rows, got {num_rows}")
    num_test = int(np.clip(round(num_rows*test_fraction), 1, num_rows - 1))
    permutation = np.random.default_rng([seed, 5]).permutation(num_rows)
    return np.sort(permutation[num_test:]), np.sort(permutation[:num_test])


def build_mia_training_set(logits_present, logits_absent, seed=0, sort_probabilities=False):
    """
    Labelled attack data from logits with and without the audited content

    Args:
        :logits_present: (numpy) Logits of the model trained with the content
        :logits_absent: (numpy) Logits of the model trained without it
        :seed: (int) Shuffle seed
        :sort_probabilities: (bool) Sort every probability row in descending order

    Returns:
        :mia_set: (obj) 'MiaSet' of shuffled probability rows and membership labels
    """

    logits_present = as_matrix(logits_present, 'logits_present')
    logits_absent = as_matrix(logits_absent, 'logits_absent')
    if logits_present.shape[1] != logits_absent.shape[1]:
        raise ShapeError(
            f"Present logits have {logits_present.shape[1]} columns, "
            f"absent logits have {logits_absent.shape[1]}"
        )

    features = np.vstack([
        posteriors(logits_present, sort_probabilities),
        posteriors(logits_absent, sort_probabilities),
    ])
    membership = np.concatenate([
        np.ones(logits_present.shape[0], dtype=np.int64),
        np.zeros(logits_absent.shape[0], dtype=np.int64),
    ])

    order = np.random.default_rng(seed).permutation(membership.size)
    return MiaSet(features[order], membership[order])


class MiaModel:

    def __init__(self, model, mean, std, sort_probabilities=False):
        """
        Trained attack model

        Attributes:
            :model: (obj) 'MlpModel' with a binary output
            :mean: (numpy) Column means of the attack training features
            :std: (numpy) Column standard deviations (1 for constant columns)
            :sort_probabilities: (bool) Inputs are sorted probability rows
        """

        self.model = model
        self.mean = mean
        self.std = std
        self.sort_probabilities = sort_probabilities

    @property
    def input_dim(self):
        return self.model.input_dim

    def standardise(self, features):
        return (features - self.mean)/self.std

    def predict_membership(self, logits):
        """Predicted membership (ties count as absent)"""

        features = posteriors(logits, self.sort_probabilities)
        if features.shape[1] != self.input_dim:
            raise ShapeError(f"Attack model expects {self.input_dim} logit columns, got {features.shape[1]}")
        return np.argmax(predict(self.model, self.standardise(features)), axis=1)


def train_mia(mia_set, epochs=MIA_EPOCHS, hidden=MIA_HIDDEN, lr=MIA_LR,
              batch_size=MIA_BATCH_SIZE, seed=0, sort_probabilities=False):
    """
    Train the attack model with cross-entropy and gradient descent

    Args:
        :mia_set: (obj) 'MiaSet' from 'build_mia_training_set()'
        :epochs: (int) Training epochs
        :hidden: (int) Hidden width
        :lr: (float) Learning rate
        :batch_size: (int) Batch size
        :seed: (int) Seed for initialisation and batching
        :sort_probabilities: (bool) Must match the setting used to build the set

    Returns:
        :mia: (obj) 'MiaModel'

    Raises:
        :ValueError: If the set does not contain both classes
    """

    features = as_matrix(mia_set.features, 'features')
    membership = np.asarray(mia_set.membership, dtype=np.int64)
    if np.unique(membership).size < 2:
        raise ValueError("The attack needs samples of both membership classes")

    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std[std < 1e-12] = 1.0
    inputs = (features - mean)/std

    model = MlpModel.init_random([features.shape[1], hidden, 2], np.random.default_rng([seed, 6]))
    for epoch in range(epochs):
        for rows in make_batch_plan(len(membership), batch_size, epoch, seed):
            logits, cache = forward(model, inputs[rows])
            _, grad = cross_entropy_loss(logits, membership[rows])
            model = sgd_step(model, backward(model, cache, grad), lr)

    mia = MiaModel(model, mean, std, sort_probabilities)
    logger.debug(
        f"Trained attack model on {len(membership)} rows, training accuracy "
        f"{accuracy_score(np.argmax(predict(model, inputs), axis=1), membership):.3f}"
    )
    return mia


def mia_accuracy(mia, logits, true_membership):
    """
    Fraction of correctly predicted memberships

    Args:
        :mia: (obj) 'MiaModel'
        :logits: (numpy) Audited logits
        :true_membership: (numpy) Membership label of every row

    Returns:
        :accuracy: (float) Accuracy in [0, 1]
    """

    logits = as_matrix(logits, 'logits')
    true_membership = np.asarray(true_membership).reshape(-1)
    if true_membership.shape[0] != logits.shape[0]:
        raise ShapeError(f"Got {true_membership.shape[0]} membership labels for {logits.shape[0]} rows")
    return accuracy_score(mia.predict_membership(logits), true_membership)
