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
Synthetic Gaussian cluster datasets and feature normalisation.
"""

import logging

import numpy as np
from scipy.spatial.distance import pdist

from pyvfu.objects.dataset import Dataset

logger = logging.getLogger(__name__)

# Minimum distance between class means, in units of the noise std
SEPARATION = 4.0
MIN_STD = 1e-12


def zscore(features, feature_names=None):
    """
    Normalise columns to zero mean and unit variance

    Constant columns (std < 1e-12) become all zeros.

    Args:
        :features: (numpy) Feature matrix
        :feature_names: (list) Optional names used in log messages

    Returns:
        :normalised: (numpy) New feature matrix
    """

    features = np.asarray(features, dtype=np.float64)
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    constant = std < MIN_STD

    normalised = (features - mean)/np.where(constant, 1.0, std)
    normalised[:, constant] = 0.0

    for col in np.flatnonzero(constant):
        name = feature_names[col] if feature_names is not None else col
        logger.info(f"Feature '{name}' is constant and is set to zero")
    return normalised


def generate_synthetic(n, d, classes, seed, informative=None):
    """
    Gaussian class clusters with well separated means

    Args:
        :n: (int) Number of samples
        :d: (int) Number of features
        :classes: (int) Number of classes
        :seed: (int) Random seed
        :informative: (int) Only the first 'informative' features carry class signal (None: all)

    Returns:
        :dataset: (obj) 'Dataset' with z-scored features and sample IDs 0..n-1
    """

    if min(n, d, classes) < 1:
        raise ValueError("'n', 'd' and 'classes' must be at least 1")
    informative = d if informative is None else int(informative)
    if not 1 <= informative <= d:
        raise ValueError(f"'informative' must be in 1..{d}, got {informative}")

    rng = np.random.default_rng(seed)
    means = np.zeros((classes, informative))
    if classes > 1:
        means = rng.normal(size=(classes, informative))
        means *= SEPARATION/pdist(means).min()

    labels = rng.permutation(np.arange(n) % classes)
    features = rng.normal(size=(n, d))
    features[:, :informative] += means[labels]

    names = [f"x{i}" for i in range(d)]
    return Dataset(np.arange(n), zscore(features, names), labels, names, num_classes=classes)
