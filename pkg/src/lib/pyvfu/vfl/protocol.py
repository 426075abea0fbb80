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
The VFL training protocol.

For every batch of an epoch

    1. each feature party embeds its columns and sends the embedding to the
       active party (EmbeddingUp)
    2. the active party concatenates the embeddings in ascending party order,
       stores the concatenation, computes the loss and updates its model
    3. the active party sends each party its slice of the input gradient
       (GradientDown) and the parties update their local models

With the Newton update rule the active party also sends the curvature of
the loss w.r.t. each embedding row (CurvatureDown). The parties pull it back
through the Jacobian of their local model and take a Gauss-Newton step.

Evaluation traffic uses the 'eval' channel of the message bus, training
traffic the 'train' channel.
"""

from collections import OrderedDict, namedtuple
from concurrent.futures import ThreadPoolExecutor
import logging

import numpy as np

from pyvfu.data.batching import make_batch_plan
from pyvfu.metrics.scores import f1_score, auc_score
from pyvfu.nn.losses import cross_entropy_loss, softmax
from pyvfu.nn.mlp import forward, backward, predict
from pyvfu.nn.optim import sgd_step, newton_step, gauss_newton_step, finite_diff_jacobian
from pyvfu.objects.dataset import Dataset
from pyvfu.objects.errors import ProtocolError, UndefinedMetricError
from pyvfu.objects.reports import MetricsRecord, PHASE_TRAIN
from pyvfu.objects.vfl_struct import (
    Message, EMBEDDING_UP, GRADIENT_DOWN, CURVATURE_DOWN, CHANNEL_EVAL, party_name
)

logger = logging.getLogger(__name__)

BatchStep = namedtuple('BatchStep', ['loss', 'gradients', 'concat', 'slices', 'grads', 'logits'])
EvalResult = namedtuple('EvalResult', ['loss', 'f1', 'auc', 'logits'])


# ===== Losses and updates =====

def ce_loss_fn(inputs, labels):
    """Closure 'model -> (loss, GradientSet)' of the cross-entropy on fixed inputs"""

    def loss_fn(model):
        logits, cache = forward(model, inputs)
        loss, grad = cross_entropy_loss(logits, labels)
        return loss, backward(model, cache, grad)
    return loss_fn


def apply_update(model, grads, lr, loss_fn, config):
    """
    Update a model with the configured update rule

    Args:
        :model: (obj) 'MlpModel'
        :grads: (obj) 'GradientSet' at the current parameters
        :lr: (float) Learning rate, scales the Newton step as well
        :loss_fn: (callable) Loss closure (Newton only)
        :config: (obj) 'VflConfig'
    """

    if config.update_rule == 'newton':
        return newton_step(model, loss_fn, config.damping, lr=lr)
    return sgd_step(model, grads, lr)


def passive_update(model, batch, grads, curvature, lr, config):
    """
    Update a passive model from the messages of the active party

    Args:
        :model: (obj) Local 'MlpModel'
        :batch: (numpy) Local features of the batch
        :grads: (obj) 'GradientSet' of the joint loss w.r.t. the local parameters
        :curvature: (numpy) Embedding curvature (n x e x e), Newton only
        :lr: (float) Learning rate
        :config: (obj) 'VflConfig'
    """

    if config.update_rule == 'newton':
        jacobian = finite_diff_jacobian(model, batch)
        return gauss_newton_step(model, grads, jacobian, curvature, config.damping, lr=lr)
    return sgd_step(model, grads, lr)


# ===== Active party =====

def concat_embeddings(embeddings, layout):
    """
    Concatenate party embeddings in ascending party order

    Args:
        :embeddings: (dict) Embedding matrix of each party
        :layout: (OrderedDict) Registered embedding width of each party

    Returns:
        :concat: (numpy) Concatenated embeddings
        :slices: (OrderedDict) Column range of each party

    Raises:
        :ProtocolError: If parties, widths or row counts do not match
    """

    if set(embeddings) != set(layout):
        raise ProtocolError(
            f"Expected embeddings of parties {sorted(layout)}, got {sorted(embeddings)}"
        )

    row_counts = {pid: emb.shape[0] for pid, emb in embeddings.items()}
    if len(set(row_counts.values())) > 1:
        raise ProtocolError(f"Embeddings differ in row count: {row_counts}")

    slices = OrderedDict()
    start = 0
    for party_id in sorted(layout):
        width = embeddings[party_id].shape[1]
        if width != layout[party_id]:
            raise ProtocolError(
                f"Party {party_name(party_id)} sent an embedding of width {width}, "
                f"registered width is {layout[party_id]}"
            )
        slices[party_id] = (start, start + width)
        start += width

    concat = np.hstack([embeddings[party_id] for party_id in slices])
    return concat, slices


def active_batch_step(active, embeddings, labels, model=None):
    """
    Loss and embedding gradients of one batch at the active party

    Args:
        :active: (obj) 'ActiveParty'
        :embeddings: (dict) Embedding of each registered party
        :labels: (numpy) Labels of the batch
        :model: (obj) Top model (default: the active model)

    Returns:
        :step: (obj) 'BatchStep' with the loss, the gradient slice of each
            party, the concatenation, its slices, the top model gradients
            and the logits
    """

    model = active.model if model is None else model
    concat, slices = concat_embeddings(embeddings, active.layout)

    logits, cache = forward(model, concat)
    loss, grad = cross_entropy_loss(logits, labels)
    grads = backward(model, cache, grad)

    gradients = OrderedDict(
        (party_id, grads.input_gradient[:, start:stop])
        for party_id, (start, stop) in slices.items()
    )
    return BatchStep(loss, gradients, concat, slices, grads, logits)


def embedding_curvature(model, concat, slices):
    """
    Curvature of the batch loss w.r.t. each party's embedding rows

    The cross-entropy has the logit Hessian diag(p) - p p^T per row. It is
    pulled back through the Jacobian of the logits w.r.t. the concatenated
    embedding row, one backward pass per class.

    Args:
        :model: (obj) Top 'MlpModel'
        :concat: (numpy) Concatenated embeddings (n x D)
        :slices: (OrderedDict) Column range of each party

    Returns:
        :curvature: (OrderedDict) Array (n x e_k x e_k) of each party
    """

    logits, cache = forward(model, concat)
    n, num_classes = logits.shape
    probabilities = softmax(logits)
    logit_hessian = (
        np.einsum('ic,cd->icd', probabilities, np.eye(num_classes))
        - np.einsum('ic,id->icd', probabilities, probabilities)
    )/n

    jacobian = np.empty((n, num_classes, concat.shape[1]))
    for c in range(num_classes):
        upstream = np.zeros_like(logits)
        upstream[:, c] = 1.0
        jacobian[:, c, :] = backward(model, cache, upstream).input_gradient

    curvature = OrderedDict()
    for party_id, (start, stop) in slices.items():
        block = jacobian[:, :, start:stop]
        curvature[party_id] = np.einsum('ica,icd,idb->iab', block, logit_hessian, block)
    return curvature


def store_and_prune(store, epoch, batch_index, concat, slices, sample_ids):
    """Persist the concatenated embedding of a batch (see 'EmbeddingStore.put()')"""

    store.put(epoch, batch_index, concat, slices, sample_ids)
    return store


# ===== Training loop =====

def _map_parties(federation, func, parties):
    if federation.config.max_workers > 1 and len(parties) > 1:
        with ThreadPoolExecutor(max_workers=federation.config.max_workers) as executor:
            return list(executor.map(func, parties))
    return [func(party) for party in parties]


def _train_batch(federation, epoch, batch_index, rows):
    config = federation.config
    active = federation.active
    bus = federation.bus
    parties = federation.parties

    outputs = _map_parties(federation, lambda p: forward(p.model, p.data.features[rows]), parties)
    for party, (embedding, _) in zip(parties, outputs):
        bus.send(Message(EMBEDDING_UP, party.party_id, active.party_id, epoch, batch_index, embedding))

    embeddings = {}
    for _ in parties:
        message = bus.receive(active.party_id, EMBEDDING_UP)
        embeddings[message.from_party] = message.payload

    labels = active.labels[rows]
    step = active_batch_step(active, embeddings, labels)
    store_and_prune(
        active.store, epoch, batch_index, step.concat, step.slices,
        federation.train_sample_ids[rows]
    )
    newton = config.update_rule == 'newton'
    if newton:
        curvature = embedding_curvature(active.model, step.concat, step.slices)
    active.model = apply_update(
        active.model, step.grads, config.lr_active, ce_loss_fn(step.concat, labels), config
    )

    for party_id, gradient in step.gradients.items():
        bus.send(Message(GRADIENT_DOWN, active.party_id, party_id, epoch, batch_index, gradient))
        if newton:
            block = curvature[party_id]
            bus.send(Message(
                CURVATURE_DOWN, active.party_id, party_id, epoch, batch_index,
                block.reshape(block.shape[0], -1)
            ))

    for party, (_, cache) in zip(parties, outputs):
        message = bus.receive(party.party_id, GRADIENT_DOWN)
        grads = backward(party.model, cache, message.payload)
        block = None
        if newton:
            width = party.embedding_dim
            block = bus.receive(party.party_id, CURVATURE_DOWN).payload.reshape(-1, width, width)
        party.model = passive_update(
            party.model, party.data.features[rows], grads, block, config.lr_passive, config
        )

    logger.debug(f"epoch {epoch} | batch {batch_index} | loss {step.loss:.6f}")
    return step.loss


def train_epoch(federation, epoch):
    """
    Run one batch plan through the protocol

    Returns:
        :train_loss: (float) Sample weighted mean of the batch losses
    """

    config = federation.config
    plan = make_batch_plan(federation.num_train, config.batch_size, epoch, config.seed)

    total = 0.0
    for batch_index, rows in enumerate(plan):
        total += _train_batch(federation, epoch, batch_index, rows)*len(rows)
    return total/federation.num_train


def train_vfl(federation, epochs=None, phase=PHASE_TRAIN, probes=None):
    """
    Train a federation for a number of epochs

    Training continues from 'federation.epochs_done', so the function can
    be called again to resume training.

    Args:
        :federation: (obj) 'Federation'
        :epochs: (int) Number of epochs (default: 'config.epochs')
        :phase: (str) Phase written to the metrics records
        :probes: (dict) Per-party probe datasets whose active logits are
            logged to 'federation.probe_log' after every epoch

    Returns:
        :records: (list) 'MetricsRecord' of every epoch
    """

    epochs = federation.config.epochs if epochs is None else epochs
    records = []
    for _ in range(epochs):
        epoch = federation.epochs_done + 1
        train_loss = train_epoch(federation, epoch)
        result = evaluate(federation)

        for name, datasets in (probes or {}).items():
            federation.probe_log[(name, epoch)] = probe_logits(federation, datasets)

        record = MetricsRecord(epoch, phase, train_loss, result.loss, result.f1, result.auc)
        federation.epochs_done = epoch
        federation.history.append(record)
        records.append(record)
        logger.info(
            f"--> epoch {epoch:3d} | train loss {train_loss:.5f} | test loss {result.loss:.5f} "
            f"| F1 {result.f1:.4f} | AUC {result.auc:.4f}"
        )
    return records


# ===== Evaluation =====

def probe_logits(federation, datasets=None, model=None, exclude=(), party_models=None):
    """
    Active logits for aligned rows of every party

    Embeddings are computed live with the current party models and sent on
    the evaluation channel.

    Args:
        :federation: (obj) 'Federation'
        :datasets: (dict) Per-party 'Dataset' or feature matrix (default: test data)
        :model: (obj) Top model (default: the active model)
        :exclude: (tuple) Parties which do not contribute
        :party_models: (dict) Models used instead of the current party models

    Returns:
        :logits: (numpy) Active logits
    """

    active = federation.active
    bus = federation.bus
    model = active.model if model is None else model
    parties = [p for p in federation.parties if p.party_id not in exclude]
    if datasets is None:
        datasets = {p.party_id: p.test_data for p in parties}

    for party in parties:
        features = datasets[party.party_id]
        if isinstance(features, Dataset):
            features = features.features
        party_model = (party_models or {}).get(party.party_id, party.model)
        embedding = predict(party_model, features)
        bus.send(Message(
            EMBEDDING_UP, party.party_id, active.party_id, federation.epochs_done, 0,
            embedding, CHANNEL_EVAL
        ))

    embeddings = {}
    for _ in parties:
        message = bus.receive(active.party_id, EMBEDDING_UP)
        embeddings[message.from_party] = message.payload

    layout = OrderedDict((pid, w) for pid, w in active.layout.items() if pid not in exclude)
    concat, _ = concat_embeddings(embeddings, layout)
    return predict(model, concat)


def score_logits(logits, labels, num_classes):
    """
    Loss, F1 and AUC of logits

    Returns:
        :result: (obj) 'EvalResult' (AUC is NaN if only one class is present)
    """

    if len(labels) == 0:
        return EvalResult(float('nan'), float('nan'), float('nan'), logits)

    loss, _ = cross_entropy_loss(logits, labels)
    probabilities = softmax(logits)
    f1 = f1_score(np.argmax(probabilities, axis=1), labels, num_classes=num_classes)
    try:
        auc = auc_score(probabilities, labels)
    except UndefinedMetricError:
        logger.warning("AUC is undefined for evaluation labels of a single class")
        auc = float('nan')
    return EvalResult(loss, f1, auc, logits)


def evaluate(federation, datasets=None, labels=None, model=None, exclude=(), party_models=None):
    """
    Test loss, F1 and AUC of the federation

    Args:
        :federation: (obj) 'Federation'
        :datasets: (dict) Per-party evaluation data (default: test data)
        :labels: (numpy) Evaluation labels (default: test labels)
        :model: (obj) Top model (default: the active model)
        :exclude: (tuple) Parties which do not contribute
        :party_models: (dict) Models used instead of the current party models

    Returns:
        :result: (obj) 'EvalResult'
    """

    labels = federation.active.test_labels if labels is None else labels
    logits = probe_logits(federation, datasets, model, exclude, party_models)
    return score_logits(logits, labels, federation.active.num_classes)
