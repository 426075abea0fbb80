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
Unlearning of a whole passive party by knowledge distillation.

The active party replays its stored embeddings. For every record the old
active model (teacher) predicts on the full concatenation, the columns of
the target party are deleted from the record, and a freshly initialised
student learns from the pruned record with the loss

    alpha*KL(student || teacher) + (1 - alpha)*CE(student, labels)

No party is contacted. The student replaces the active model.
"""

import logging

import numpy as np

from pyvfu.nn.mlp import predict
from pyvfu.objects.errors import RequestError
from pyvfu.objects.reports import MetricsRecord, UnlearningReport, PHASE_UNLEARN
from pyvfu.objects.vfl_struct import drop_slice, parse_party, party_name
from pyvfu.unlearn.common import (
    check_alpha, converged, distill_loss_fn, fresh_student, unlearning_window
)
from pyvfu.vfl.protocol import apply_update, evaluate

logger = logging.getLogger(__name__)

METHOD = 'vfu-kd-party'


def unlearn_party_kd(active, target, config, epochs_so_far=None, distill_epochs=None,
                     bus=None, evaluate_fn=None):
    """
    Distil the active model into a student which does not see a party

    Args:
        :active: (obj) 'ActiveParty' (model, labels and embedding store)
        :target: (int) Party to unlearn
        :config: (obj) 'VflConfig' (alpha, lr_active, update rule, seed)
        :epochs_so_far: (int) Number of trained epochs (default: last stored epoch)
        :distill_epochs: (int) Number of distillation epochs (default: 'config.distill_epochs',
            otherwise 'epochs_so_far')
        :bus: (obj) 'MessageBus' used to assert that no message is sent
        :evaluate_fn: (callable) Optional 'evaluate_fn(student)' returning an 'EvalResult'

    Returns:
        :student: (obj) New active model
        :report: (obj) 'UnlearningReport'

    Note:
        * The store is pruned in place, the target party is removed from every record
    """

    store = active.store
    check_alpha(config.alpha)

    if target not in store.layout:
        raise RequestError(f"Party {party_name(target)} has no embeddings in the store")
    if target == active.party_id:
        raise RequestError(f"Party {party_name(target)} is co-located with the active party")
    if len(store.layout) < 2:
        raise RequestError("Cannot unlearn the only party of the store")

    epochs = store.epochs()
    if not epochs:
        raise RequestError("The embedding store is empty")

    epochs_so_far = epochs[-1] if epochs_so_far is None else epochs_so_far
    num_distill = distill_epochs or config.distill_epochs or epochs_so_far
    if num_distill > len(epochs):
        logger.warning(f"Only {len(epochs)} epochs are stored, distilling for {len(epochs)} epochs")
        num_distill = len(epochs)
    replay = epochs[-num_distill:]

    teacher = active.model
    width = store.layout[target]
    student = fresh_student(teacher, teacher.input_dim - width, seed=[config.seed, target, 2])

    report = UnlearningReport(METHOD)
    report.extra['target_party'] = party_name(target)
    report.extra['distil_losses'] = []
    report.extra['pred_losses'] = []

    logger.info(
        f"Unlearning party {party_name(target)} (width {width}) by distillation "
        f"over stored epochs {replay[0]}..{replay[-1]}"
    )

    with unlearning_window(bus, report):
        previous = None
        for i, epoch in enumerate(replay, start=1):
            sums = np.zeros(3)
            count = 0
            for batch_index, record in store.records_for_epoch(epoch):
                teacher_logits = predict(teacher, record.concat)
                pruned = drop_slice(record, target)
                store.replace(epoch, batch_index, pruned)

                labels = active.labels_for(record.sample_ids)
                loss_fn = distill_loss_fn(pruned.concat, teacher_logits, labels, config.alpha)
                loss, grads = loss_fn(student)
                distil, pred = loss_fn.parts
                student = apply_update(student, grads, config.lr_active, loss_fn, config)

                sums += len(labels)*np.array([loss, distil, pred])
                count += len(labels)

            if count == 0:
                continue

            overall, distil, pred = sums/count
            report.train_losses.append(overall)
            report.student_teacher_kl.append(distil)
            report.extra['distil_losses'].append(distil)
            report.extra['pred_losses'].append(pred)

            if evaluate_fn is not None:
                result = evaluate_fn(student)
                report.records.append(MetricsRecord(i, PHASE_UNLEARN, overall, result.loss, result.f1, result.auc))

            logger.info(f"--> distil epoch {i:3d} | loss {overall:.5f} | KL {distil:.5f} | CE {pred:.5f}")
            if converged(previous, overall):
                logger.info(f"Distillation converged after {i} epochs")
                break
            previous = overall

        store.remove_party(target)

    return student, report


def unlearn_party(federation, target, distill_epochs=None, track=True):
    """
    Unlearn a party of a federation

    The student becomes the active model and the party leaves the federation.

    Args:
        :federation: (obj) 'Federation'
        :target: (int/str) Party ID or name
        :distill_epochs: (int) Number of distillation epochs
        :track: (bool) Evaluate the student after every distillation epoch

    Returns:
        :report: (obj) 'UnlearningReport'
    """

    target = parse_party(target)
    if target not in federation.party_ids:
        raise RequestError(f"Unknown party {party_name(target)}")

    evaluate_fn = None
    if track:
        def evaluate_fn(model):
            return evaluate(federation, model=model, exclude=(target,))

    student, report = unlearn_party_kd(
        federation.active, target, federation.config, federation.epochs_done,
        distill_epochs, federation.bus, evaluate_fn
    )
    federation.active.model = student
    federation.remove_party(target)
    return report
