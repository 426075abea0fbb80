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
Helpers shared by the unlearning engines.
"""

from contextlib import contextmanager
import logging
import time

import numpy as np

from pyvfu.nn.losses import cross_entropy_loss, kl_divergence
from pyvfu.nn.mlp import forward, backward
from pyvfu.objects.errors import ConfigError, ProtocolError
from pyvfu.objects.model import MlpModel

logger = logging.getLogger(__name__)

# Stop distilling once the epoch loss improves by less than this
MIN_IMPROVEMENT = 1e-5


@contextmanager
def unlearning_window(bus, report):
    """
    Time an unlearning call and make sure no training message was sent

    Args:
        :bus: (obj) 'MessageBus' of the federation (None: not counted)
        :report: (obj) 'UnlearningReport' to fill in

    Raises:
        :ProtocolError: If the training message tally changed
    """

    before = None if bus is None else bus.count
    tic = time.perf_counter()
    yield report
    report.wall_time = time.perf_counter() - tic

    if bus is not None:
        report.messages_during_unlearn = bus.count - before
        if report.messages_during_unlearn != 0:
            raise ProtocolError(
                f"{report.messages_during_unlearn} messages were sent during unlearning"
            )
    logger.info(f"Unlearning ({report.method}) took {report.wall_time:.2f} s")


def check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"Invalid value for 'alpha': {alpha}, expected 0 <= alpha <= 1")


def fresh_student(teacher, input_dim, seed):
    """Randomly initialised model with the teacher's architecture and a new input width"""

    dims = [input_dim] + teacher.dims[1:]
    hidden_activation = teacher.layers[0].activation if len(teacher.layers) > 1 else 'relu'
    return MlpModel.init_random(
        dims, np.random.default_rng(seed),
        hidden_activation=hidden_activation,
        output_activation=teacher.layers[-1].activation
    )


def distill_loss_fn(inputs, teacher_logits, labels, alpha):
    """
    Closure of the distillation loss alpha*KL(student||teacher) + (1-alpha)*CE

    The closure returns (loss, GradientSet). The components of the last
    evaluation are available as 'loss_fn.parts' (distil, pred).
    """

    def loss_fn(model):
        logits, cache = forward(model, inputs)
        distil, distil_grad = kl_divergence(logits, teacher_logits)
        pred, pred_grad = cross_entropy_loss(logits, labels)
        loss_fn.parts = (distil, pred)
        grad = alpha*distil_grad + (1.0 - alpha)*pred_grad
        return alpha*distil + (1.0 - alpha)*pred, backward(model, cache, grad)

    loss_fn.parts = None
    return loss_fn


def embedding_kl_loss_fn(inputs, teacher_embedding):
    """Closure of KL(softmax(student embedding) || softmax(teacher embedding))"""

    def loss_fn(model):
        embedding, cache = forward(model, inputs)
        loss, grad = kl_divergence(embedding, teacher_embedding)
        return loss, backward(model, cache, grad)
    return loss_fn


def converged(previous, current):
    """True if the epoch loss improved by less than 'MIN_IMPROVEMENT'"""

    return previous is not None and previous - current < MIN_IMPROVEMENT
