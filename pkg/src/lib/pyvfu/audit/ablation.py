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
Feature importance by ablation: each feature column is replaced by zero
(its mean after z-scoring) and the drop of a test metric is recorded.
"""

from collections import OrderedDict
import logging

from pyvfu.objects.errors import ConfigError
from pyvfu.objects.settings import FEATURE_SELECTORS, METRICS
from pyvfu.objects.vfl_struct import party_name
from pyvfu.vfl.protocol import evaluate

logger = logging.getLogger(__name__)


class AblationScore:

    def __init__(self, metric, baseline, scores):
        """
        Importance of every ablated feature

        Attributes:
            :metric: (str) Scored metric
            :baseline: (float) Metric without ablation
            :scores: (dict) Metric drop keyed by global feature index
        """

        self.metric = metric
        self.baseline = baseline
        self.scores = OrderedDict(sorted(scores.items()))

    def __getitem__(self, feature):
        return self.scores[feature]

    def __len__(self):
        return len(self.scores)

    def ranked(self):
        """Feature indices from most to least important (ties by index)"""

        return sorted(self.scores, key=lambda f: (-self.scores[f], f))

    def select(self, num_features, which='most'):
        """
        Pick the most or least important features

        Args:
            :num_features: (int) Number of features
            :which: (str) 'most' or 'least'
        """

        if which not in FEATURE_SELECTORS:
            raise ConfigError(f"Unknown feature selector '{which}', use one of {FEATURE_SELECTORS}")
        ranked = self.ranked() if which == 'most' else self.ranked()[::-1]
        return sorted(ranked[:num_features])


def feature_ablation(federation, metric='f1', party=None, datasets=None, labels=None):
    """
    Score every feature by the metric drop when it is zeroed

    Args:
        :federation: (obj) Trained 'Federation'
        :metric: (str) 'f1' or 'auc'
        :party: (int) Only ablate the features of this party (default: all)
        :datasets: (dict) Per-party 'Dataset' (default: test data)
        :labels: (numpy) Labels (default: test labels)

    Returns:
        :score: (obj) 'AblationScore'
    """

    if metric not in METRICS:
        raise ConfigError(f"Unknown ablation metric '{metric}', use one of {METRICS}")
    if datasets is None:
        datasets = {p.party_id: p.test_data for p in federation.parties}

    baseline = getattr(evaluate(federation, datasets, labels), metric)
    parties = federation.parties if party is None else [federation.party(party)]

    scores = {}
    for state in parties:
        features = getattr(datasets[state.party_id], 'features', datasets[state.party_id])
        for column, feature in enumerate(state.owned_features):
            ablated = features.copy()
            ablated[:, column] = 0.0
            trial = dict(datasets)
            trial[state.party_id] = ablated
            scores[int(feature)] = baseline - getattr(evaluate(federation, trial, labels), metric)
        logger.debug(f"Ablated {len(state.owned_features)} features of party {party_name(state.party_id)}")

    return AblationScore(metric, baseline, scores)
