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
Unlearning of samples by gradient ascent.

The active party replays its stored embeddings. Rows of target samples
form the target set, all other rows the retain set. Each record updates
the active model with

    theta <- theta - eta*dL_retain/dtheta + lambda*dL_target/dtheta

With the Newton update rule the retain term takes a damped Newton step
scaled by eta, the target term keeps its plain ascent step.

Target rows stay in the store while unlearning (they are needed for
L_target) and are deleted afterwards.
"""

import logging

import numpy as np

from pyvfu.data.batching import make_batch_plan
from pyvfu.nn.losses import cross_entropy_loss
from pyvfu.nn.mlp import forward, backward, predict
from pyvfu.nn.optim import sgd_step, newton_step
from pyvfu.objects.errors import ConfigError, RequestError
from pyvfu.objects.reports import MetricsRecord, UnlearningReport, PHASE_UNLEARN
from pyvfu.unlearn.common import unlearning_window
from pyvfu.vfl.protocol import evaluate

logger = logging.getLogger(__name__)

METHOD = 'vfu-ga'


def ga_loss_fn(inputs, labels, is_target, eta, lam):
    """
    Closure of the objective eta*L_retain - lam*L_target

    The closure returns (objective, GradientSet). The losses of the last
    evaluation are available as 'loss_fn.parts' (retain, target).
    """

    retain = ~is_target

    def loss_fn(model):
        logits, cache = forward(model, inputs)
        grad = np.zeros_like(logits)
        loss_retain = loss_target = 0.0
        if retain.any():
            loss_retain, grad_retain = cross_entropy_loss(logits[retain], labels[retain])
            grad[retain] = eta*grad_retain
        if is_target.any():
            loss_target, grad_target = cross_entropy_loss(logits[is_target], labels[is_target])
            grad[is_target] -= lam*grad_target
        loss_fn.parts = (loss_retain, loss_target)
        return eta*loss_retain - lam*loss_target, backward(model, cache, grad)

    loss_fn.parts = None
    return loss_fn


def target_loss(model, active, targets):
    """
    Cross-entropy of the target samples in the latest stored epoch holding them

    Returns:
        :loss: (float) Mean cross-entropy (NaN if no stored row is a target)
    """

    store = active.store
    for epoch in reversed(store.epochs()):
        inputs, ids = [], []
        for _, record in store.records_for_epoch(epoch):
            mask = np.isin(record.sample_ids, targets)
            if mask.any():
                inputs.append(record.concat[mask])
                ids.append(record.sample_ids[mask])
        if inputs:
            ids = np.concatenate(ids)
            loss, _ = cross_entropy_loss(predict(model, np.vstack(inputs)), active.labels_for(ids))
            return loss
    return float('nan')


def resolve_target_samples(federation, batches, epoch=None):
    """
    Sample IDs of batches of an epoch's batch plan

    Args:
        :federation: (obj) 'Federation'
        :batches: (list) Batch indices
        :epoch: (int) Epoch of the batch plan (default: last trained epoch)

    Returns:
        :sample_ids: (numpy) Sorted sample IDs of the batches
    """

    config = federation.config
    epoch = federation.epochs_done if epoch is None else epoch
    plan = make_batch_plan(federation.num_train, config.batch_size, epoch, config.seed)

    rows = []
    for batch_index in batches:
        if not 0 <= batch_index < len(plan):
            raise RequestError(f"Batch {batch_index} does not exist, epoch {epoch} has {len(plan)} batches")
        rows.append(plan.batches[batch_index])
    if not rows:
        raise RequestError("No target batches given")
    return np.sort(federation.train_sample_ids[np.concatenate(rows)])


def unlearn_samples_ga(active, target_ids, config, u_ep=None, lam=None, bus=None, evaluate_fn=None):
    """
    Unlearn samples from the active model by gradient ascent

    Args:
        :active: (obj) 'ActiveParty' (model, labels and embedding store)
        :target_ids: (list) Sample IDs to unlearn
        :config: (obj) 'VflConfig' (lr_active, lambda, u_ep, update rule)
        :u_ep: (int) Number of unlearning epochs (default: 'config.u_ep')
        :lam: (float) Ascent rate on the target loss (default: 'config.lam')
        :bus: (obj) 'MessageBus' used to assert that no message is sent
        :evaluate_fn: (callable) Optional 'evaluate_fn(model)' returning an 'EvalResult'

    Returns:
        :model: (obj) Updated active model
        :report: (obj) 'UnlearningReport'
    """

    u_ep = config.u_ep if u_ep is None else u_ep
    lam = config.lam if lam is None else lam
    if lam <= 0:
        raise ConfigError(f"Invalid value for 'lambda': {lam}, expected lambda > 0")
    if u_ep < 1:
        raise ConfigError(f"Invalid value for 'u_ep': {u_ep}, expected u_ep >= 1")

    targets = np.unique(np.asarray(list(target_ids), dtype=np.int64))
    if targets.size == 0:
        raise RequestError("No target samples given")

    store = active.store
    missing = np.setdiff1d(targets, store.sample_ids())
    if missing.size:
        raise RequestError(f"{missing.size} target samples are not in the embedding store")

    epochs = store.epochs()
    replay = [epochs[(len(epochs) - u_ep + i) % len(epochs)] for i in range(u_ep)]

    model = active.model
    report = UnlearningReport(METHOD)
    report.extra['num_targets'] = int(targets.size)
    report.extra['target_loss_before'] = target_loss(model, active, targets)
    report.extra['target_losses'] = []

    logger.info(f"Unlearning {targets.size} samples by gradient ascent ({u_ep} epochs, lambda {lam})")

    with unlearning_window(bus, report):
        for i, epoch in enumerate(replay, start=1):
            total = 0.0
            count = 0
            for _, record in store.records_for_epoch(epoch):
                is_target = np.isin(record.sample_ids, targets)
                labels = active.labels_for(record.sample_ids)
                if config.update_rule == 'newton':
                    ascent_fn = ga_loss_fn(record.concat, labels, is_target, 0.0, lam)
                    _, ascent = ascent_fn(model)
                    parts = ascent_fn.parts
                    if (~is_target).any():
                        retain_fn = ga_loss_fn(record.concat, labels, is_target, 1.0, 0.0)
                        model = newton_step(model, retain_fn, config.damping, lr=config.lr_active)
                    model = sgd_step(model, ascent, 1.0)
                else:
                    loss_fn = ga_loss_fn(record.concat, labels, is_target, config.lr_active, lam)
                    _, grads = loss_fn(model)
                    parts = loss_fn.parts
                    model = sgd_step(model, grads, 1.0)

                num_retain = int((~is_target).sum())
                total += parts[0]*num_retain
                count += num_retain

            retain_loss = total/count if count else float('nan')
            current_target_loss = target_loss(model, active, targets)
            report.train_losses.append(retain_loss)
            report.extra['target_losses'].append(current_target_loss)

            if evaluate_fn is not None:
                result = evaluate_fn(model)
                report.records.append(MetricsRecord(i, PHASE_UNLEARN, retain_loss, result.loss, result.f1, result.auc))

            logger.info(
                f"--> unlearn epoch {i:3d} | retain loss {retain_loss:.5f} "
                f"| target loss {current_target_loss:.5f}"
            )

        report.extra['target_loss_after'] = report.extra['target_losses'][-1]
        report.extra['removed_rows'] = store.remove_samples(targets)

    return model, report


def unlearn_samples(federation, batches=(), sample_ids=(), u_ep=None, lam=None, track=True):
    """
    Unlearn samples of a federation, given as batch indices of the last
    epoch's batch plan or as sample IDs

    The targets are deleted from the training data of every party, so that
    resumed training no longer visits them.

    Returns:
        :report: (obj) 'UnlearningReport'
    """

    targets = set(int(s) for s in sample_ids)
    if batches:
        targets.update(int(s) for s in resolve_target_samples(federation, batches))

    evaluate_fn = None
    if track:
        def evaluate_fn(model):
            return evaluate(federation, model=model)

    model, report = unlearn_samples_ga(
        federation.active, sorted(targets), federation.config, u_ep, lam, federation.bus, evaluate_fn
    )
    federation.active.model = model
    report.extra['target_ids'] = sorted(targets)
    federation.remove_samples(targets)
    return report
