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
F1, AUC and accuracy for binary and multiclass problems.

Multiclass scores are macro averages of one-vs-rest scores. AUC is the
Mann-Whitney rank statistic with midranks for ties.
"""

import numpy as np
from scipy.stats import rankdata

from pyvfu.objects.errors import ShapeError, UndefinedMetricError


def _check_pair(predictions, labels):
    predictions = np.asarray(predictions).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if labels.size == 0:
        raise ValueError("Cannot compute a score on empty input")
    if predictions.shape[0] != labels.shape[0]:
        raise ShapeError(f"Got {predictions.shape[0]} predictions for {labels.shape[0]} labels")
    return predictions.astype(np.int64), labels.astype(np.int64)


def accuracy_score(predictions, labels):
    """Fraction of correct predictions"""

    predictions, labels = _check_pair(predictions, labels)
    return float(np.mean(predictions == labels))


def f1_score(predictions, labels, num_classes=None):
    """
    F1 score

    Args:
        :predictions: (numpy) Predicted class indices
        :labels: (numpy) True class indices
        :num_classes: (int) Number of classes (default: inferred)

    Returns:
        :f1: (float) F1 of class 1 for binary problems, macro F1 otherwise
    """

    predictions, labels = _check_pair(predictions, labels)
    if num_classes is None:
        num_classes = int(max(predictions.max(), labels.max())) + 1

    def class_f1(c):
        tp = np.sum((predictions == c) & (labels == c))
        fp = np.sum((predictions == c) & (labels != c))
        fn = np.sum((predictions != c) & (labels == c))
        denom = 2*tp + fp + fn
        return 2*tp/denom if denom > 0 else 0.0

    if num_classes <= 2:
        return float(class_f1(1))
    return float(np.mean([class_f1(c) for c in range(num_classes)]))


def _binary_auc(scores, is_positive):
    num_pos = int(is_positive.sum())
    num_neg = is_positive.size - num_pos
    if num_pos == 0 or num_neg == 0:
        raise UndefinedMetricError("AUC is undefined if only one class is present")

    ranks = rankdata(scores)
    return (ranks[is_positive].sum() - num_pos*(num_pos + 1)/2)/(num_pos*num_neg)


def auc_score(scores, labels):
    """
    Area under the ROC curve

    Args:
        :scores: (numpy) Positive class scores (n) or class probabilities (n x C)
        :labels: (numpy) True class indices

    Returns:
        :auc: (float) Binary AUC, or macro one-vs-rest AUC over the present classes

    Raises:
        :UndefinedMetricError: If fewer than two classes are present
    """

    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).reshape(-1).astype(np.int64)
    if labels.size == 0:
        raise ValueError("Cannot compute a score on empty input")
    if scores.shape[0] != labels.shape[0]:
        raise ShapeError(f"Got {scores.shape[0]} scores for {labels.shape[0]} labels")

    if scores.ndim == 2 and scores.shape[1] == 2:
        scores = scores[:, 1]
    if scores.ndim == 1:
        return float(_binary_auc(scores, labels == 1))

    present = np.unique(labels)
    if present.size < 2:
        raise UndefinedMetricError("AUC is undefined if only one class is present")
    return float(np.mean([_binary_auc(scores[:, c], labels == c) for c in present]))
