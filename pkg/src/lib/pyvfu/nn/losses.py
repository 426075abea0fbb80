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
Loss functions on logits.

Both losses return the mean over the rows of the batch together with the
gradient w.r.t. the (student) logits. Softmax is computed with scipy which
subtracts the row maximum.
"""

from collections import namedtuple
import logging

import numpy as np
from scipy.special import softmax as _softmax, log_softmax

from pyvfu.objects.errors import ShapeError
from pyvfu.objects.model import as_matrix

logger = logging.getLogger(__name__)

LossValue = namedtuple('LossValue', ['loss', 'grad'])


def softmax(logits):
    """Row-wise softmax of a logit matrix"""

    return _softmax(as_matrix(logits, 'logits'), axis=1)


def as_labels(labels, num_rows=None, num_classes=None):
    """
    Return labels as an integer vector

    Raises:
        :ShapeError: If the number of labels differs from 'num_rows'
        :ValueError: If labels are not integral or out of range
    """

    labels = np.asarray(labels).reshape(-1)
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.equal(np.mod(labels, 1), 0)):
            raise ValueError("Labels must be integral class indices")
    labels = labels.astype(np.int64)

    if num_rows is not None and labels.shape[0] != num_rows:
        raise ShapeError(f"Got {labels.shape[0]} labels for {num_rows} rows")

    if labels.size and labels.min() < 0:
        raise ValueError(f"Label {labels.min()} is negative")
    if num_classes is not None and labels.size and labels.max() >= num_classes:
        raise ValueError(f"Label {labels.max()} out of range for {num_classes} classes")
    return labels


def cross_entropy_loss(logits, labels):
    """
    Mean cross-entropy of softmax(logits) against class labels

    Args:
        :logits: (numpy) Logit matrix (n x C)
        :labels: (numpy) Class indices (n)

    Returns:
        :loss: (float) Mean cross-entropy
        :grad: (numpy) Gradient w.r.t. the logits, (softmax - onehot)/n
    """

    logits = as_matrix(logits, 'logits')
    n, num_classes = logits.shape
    labels = as_labels(labels, num_rows=n, num_classes=num_classes)
    if n == 0:
        raise ValueError("Cannot compute a loss on an empty batch")

    log_probs = log_softmax(logits, axis=1)
    rows = np.arange(n)
    loss = -np.mean(log_probs[rows, labels])

    grad = np.exp(log_probs)
    grad[rows, labels] -= 1.0
    grad /= n
    return LossValue(float(max(loss, 0.0)), grad)


def kl_divergence(student_logits, teacher_logits):
    """
    Mean KL(softmax(student) || softmax(teacher)) over rows

    The teacher is treated as a constant, only the student receives a
    gradient.

    Args:
        :student_logits: (numpy) Student logits (n x C)
        :teacher_logits: (numpy) Teacher logits (n x C)

    Returns:
        :loss: (float) Mean row-wise KL divergence
        :grad: (numpy) Gradient w.r.t. the student logits
    """

    student_logits = as_matrix(student_logits, 'student_logits')
    teacher_logits = as_matrix(teacher_logits, 'teacher_logits')
    if student_logits.shape != teacher_logits.shape:
        raise ShapeError(
            f"Student logits {student_logits.shape} and "
            f"teacher logits {teacher_logits.shape} differ in shape"
        )

    n = student_logits.shape[0]
    if n == 0:
        raise ValueError("Cannot compute a loss on an empty batch")

    log_p_s = log_softmax(student_logits, axis=1)
    log_p_t = log_softmax(teacher_logits, axis=1)
    p_s = np.exp(log_p_s)

    log_ratio = log_p_s - log_p_t
    row_kl = np.sum(p_s*log_ratio, axis=1)
    grad = p_s*(log_ratio - row_kl[:, None])/n
    return LossValue(float(max(np.mean(row_kl), 0.0)), grad)
